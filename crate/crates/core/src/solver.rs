//! Damped Newton iteration for square nonlinear systems with a central
//! finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub struct RootProblem<F> {
    pub residual: F,
    pub start: Vec<f64>,
    /// Infinity-norm tolerance on the residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Step shrink factor for the backtracking line search.
    pub step_damping: f64,
}

impl<F> RootProblem<F>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    pub fn new(residual: F, start: Vec<f64>) -> Self {
        Self {
            residual,
            start,
            tol: 1e-8,
            max_iter: 100,
            step_damping: 0.5,
        }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
}

const MAX_HALVINGS: usize = 20;
const MAX_CONDITION: f64 = 1e12;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn eval<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64], m: usize) -> Result<Vec<f64>> {
    let r = f(x);
    if r.len() != m {
        return Err(Error::Domain(format!("residual has {} entries, expected {m}", r.len())));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::DomainEscape { at: x.to_vec() });
    }
    Ok(r)
}

fn jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64]) -> Result<DMatrix<f64>> {
    let m = x.len();
    let mut jac = DMatrix::zeros(m, m);
    let mut probe = x.to_vec();
    for j in 0..m {
        let h = (1e-6 * x[j].abs()).max(1e-8);
        probe[j] = x[j] + h;
        let up = eval(f, &probe, m)?;
        probe[j] = x[j] - h;
        let down = eval(f, &probe, m)?;
        probe[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Solve `residual(x) = 0` from `problem.start`.
pub fn multiroot<F>(problem: &RootProblem<F>) -> Result<RootSolution>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = problem.start.len();
    if m == 0 {
        return Err(Error::Domain("empty parameter vector".into()));
    }
    let f = &problem.residual;
    let mut x = problem.start.clone();
    let mut r = eval(f, &x, m)?;
    let mut norm = inf_norm(&r);

    for iter in 0..problem.max_iter {
        if norm <= problem.tol {
            return Ok(RootSolution {
                x,
                iterations: iter,
                residual_norm: norm,
                converged: true,
            });
        }
        let jac = jacobian(f, &x)?;
        let sv = jac.clone().singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if condition > MAX_CONDITION {
            return Err(Error::Singular { condition });
        }
        let step = jac
            .lu()
            .solve(&(-DVector::from_column_slice(&r)))
            .ok_or(Error::Singular { condition })?;

        let mut lambda = 1.0;
        let mut accepted = None;
        let mut fallback = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + lambda * s).collect();
            match eval(f, &trial, m) {
                Ok(tr) => {
                    let tn = inf_norm(&tr);
                    if tn < norm {
                        accepted = Some((trial, tr, tn));
                        break;
                    }
                    fallback = Some((trial, tr, tn));
                }
                Err(Error::DomainEscape { .. }) => {}
                Err(e) => return Err(e),
            }
            lambda *= problem.step_damping;
        }
        let Some((nx, nr, nn)) = accepted.or(fallback) else {
            return Err(Error::DomainEscape { at: x });
        };
        x = nx;
        r = nr;
        norm = nn;
    }

    if norm <= problem.tol {
        return Ok(RootSolution {
            x,
            iterations: problem.max_iter,
            residual_norm: norm,
            converged: true,
        });
    }
    Err(Error::NonConvergence {
        iterations: problem.max_iter,
        residual_norm: norm,
        best: x,
    })
}
