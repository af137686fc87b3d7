//! Normal probability kernel: univariate CDF and quantile, bivariate-normal
//! rectangle probabilities for the sequential correlation structure, and a
//! Monte Carlo estimator for any number of looks.

#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{mean_z, EfficacyModel, Hypothesis, LookSchedule};

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal upper tail `1 - Φ(x)`, accurate far into the tail.
pub fn norm_sf(x: f64) -> f64 {
    norm_cdf(-x)
}

/// Standard normal quantile (Wichura's AS241 followed by one Halley step).
/// Returns `±∞` at 0 and 1.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = as241(p);
    let err = if x > 0.0 { norm_sf(x) - (1.0 - p) } else { p - norm_cdf(x) };
    let dens = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    if dens == 0.0 || !err.is_finite() {
        return x;
    }
    let u = -err / dens;
    x - u / (1.0 + 0.5 * x * u)
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn as241(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.3871328727963666080e0,
        1.3314166789178437745e2,
        1.9715909503065514427e3,
        1.3731693765509461125e4,
        4.5921953931549871457e4,
        6.7265770927008700853e4,
        3.3430575583588128105e4,
        2.5090809287301226727e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.2313330701600911252e1,
        6.8718700749205790830e2,
        5.3941960214247511077e3,
        2.1213794301586595867e4,
        3.9307895800092710610e4,
        2.8729085735721942674e4,
        5.2264952788528545610e3,
    ];
    const C: [f64; 8] = [
        1.42343711074968357734e0,
        4.63033784615654529590e0,
        5.76949722146069140550e0,
        3.64784832476320460504e0,
        1.27045825245236838258e0,
        2.41780725177450611770e-1,
        2.27238449892691845833e-2,
        7.74545014278341407640e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.05319162663775882187e0,
        1.67638483018380384940e0,
        6.89767334985100004550e-1,
        1.48103976427480074590e-1,
        1.51986665636164571966e-2,
        5.47593808499534494600e-4,
        1.05075007164441684324e-9,
    ];
    const E: [f64; 8] = [
        6.65790464350110377720e0,
        5.46378491116411436990e0,
        1.78482653991729133580e0,
        2.96560571828504891230e-1,
        2.65321895265761230930e-2,
        1.24266094738807843860e-3,
        2.71155556874348757815e-5,
        2.01033439929228813265e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.99832206555887937690e-1,
        1.36929880922735805310e-1,
        1.48753612908506148525e-2,
        7.86869131145613259100e-4,
        1.84631831751005468180e-5,
        1.42151175831644588870e-7,
        2.04426310338993978564e-15,
    ];
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

// Gauss-Legendre half-rules (weight, abscissa) used by BVND.
const GL_6: [(f64, f64); 3] = [
    (0.1713244923791705e+00, -0.9324695142031522e+00),
    (0.3607615730481384e+00, -0.6612093864662647e+00),
    (0.4679139345726904e+00, -0.2386191860831970e+00),
];

const GL_12: [(f64, f64); 6] = [
    (0.4717533638651177e-01, -0.9815606342467191e+00),
    (0.1069393259953183e+00, -0.9041172563704750e+00),
    (0.1600783285433464e+00, -0.7699026741943050e+00),
    (0.2031674267230659e+00, -0.5873179542866171e+00),
    (0.2334925365383547e+00, -0.3678314989981802e+00),
    (0.2491470458134029e+00, -0.1252334085114692e+00),
];

const GL_20: [(f64, f64); 10] = [
    (0.1761400713915212e-01, -0.9931285991850949e+00),
    (0.4060142980038694e-01, -0.9639719272779138e+00),
    (0.6267204833410906e-01, -0.9122344282513259e+00),
    (0.8327674157670475e-01, -0.8391169718222188e+00),
    (0.1019301198172404e+00, -0.7463319064601508e+00),
    (0.1181945319615184e+00, -0.6360536807265150e+00),
    (0.1316886384491766e+00, -0.5108670019508271e+00),
    (0.1420961093183821e+00, -0.3737060887154196e+00),
    (0.1491729864726037e+00, -0.2277858511416451e+00),
    (0.1527533871307259e+00, -0.7652652113349733e-01),
];

/// `P(X > h, Y > k)` for a standard bivariate normal with correlation `r`,
/// finite `h` and `k`. Drezner–Wesolowsky with Genz's double precision
/// modifications (the BVND routine of TVPACK).
fn bvnd(h: f64, k: f64, r: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let quad: &[(f64, f64)] = match r.abs() {
        a if a < 0.3 => &GL_6,
        a if a < 0.75 => &GL_12,
        _ => &GL_20,
    };
    let mut k = k;
    let mut hk = h * k;
    let mut bvn = 0.0;

    if r.abs() < 0.925 {
        if r != 0.0 {
            let hs = (h * h + k * k) / 2.0;
            let asr = r.asin();
            for &(w, x) in quad {
                for sign in [-1.0, 1.0] {
                    let sn = (asr * (sign * x + 1.0) / 2.0).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / (2.0 * two_pi);
        }
        return bvn + norm_cdf(-h) * norm_cdf(-k);
    }

    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let as_ = (1.0 - r) * (1.0 + r);
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -(bs / as_ + hk) / 2.0;
        if asr > -100.0 {
            bvn = a * asr.exp() * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
        }
        if -hk < 100.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp()
                * two_pi.sqrt()
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for &(w, x) in quad {
            for sign in [-1.0, 1.0] {
                let xs = (a * (sign * x + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -(bs / xs + hk) / 2.0;
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / two_pi;
    }
    if r > 0.0 {
        bvn += norm_cdf(-h.max(k));
    } else {
        bvn = -bvn;
        if k > h {
            if h < 0.0 {
                bvn += norm_cdf(k) - norm_cdf(h);
            } else {
                bvn += norm_cdf(-h) - norm_cdf(-k);
            }
        }
    }
    bvn
}

/// Upper orthant `P(X > a, Y > b)` with extended-real limits.
fn upper_orthant(a: f64, b: f64, r: f64) -> f64 {
    if a == f64::INFINITY || b == f64::INFINITY {
        return 0.0;
    }
    match (a == f64::NEG_INFINITY, b == f64::NEG_INFINITY) {
        (true, true) => 1.0,
        (true, false) => norm_sf(b),
        (false, true) => norm_sf(a),
        (false, false) => bvnd(a, b, r),
    }
}

/// Joint law of the standardised statistics at every look.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLaw {
    mean: Vec<f64>,
    corr: DMatrix<f64>,
}

impl JointLaw {
    pub fn new(mean: Vec<f64>, corr: DMatrix<f64>) -> Result<Self> {
        let k = mean.len();
        if k == 0 || corr.nrows() != k || corr.ncols() != k {
            return Err(Error::Domain(format!(
                "mean has {k} entries but correlation is {}x{}",
                corr.nrows(),
                corr.ncols()
            )));
        }
        for i in 0..k {
            if (corr[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!("correlation diagonal entry {i} is {}", corr[(i, i)])));
            }
            for j in 0..i {
                if (corr[(i, j)] - corr[(j, i)]).abs() > 1e-12 {
                    return Err(Error::Domain("correlation matrix is not symmetric".into()));
                }
                if !(corr[(i, j)].abs() <= 1.0) {
                    return Err(Error::Domain(format!("correlation entry ({i},{j}) out of [-1, 1]")));
                }
            }
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Domain("means must be finite".into()));
        }
        Ok(Self { mean, corr })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn corr(&self) -> &DMatrix<f64> {
        &self.corr
    }
}

/// Law of `(Z_1, …, Z_K)`: means `θ√I_k` (zero under H0) and correlation
/// `√(I_{k1}/I_{k2})` for `k1 <= k2`.
pub fn joint_law(model: &EfficacyModel, schedule: &LookSchedule, hypothesis: Hypothesis) -> Result<JointLaw> {
    let k = schedule.looks();
    let mean = schedule
        .sizes()
        .iter()
        .map(|&n| mean_z(model, n, hypothesis))
        .collect::<Result<Vec<_>>>()?;
    let info: Vec<f64> = schedule
        .sizes()
        .iter()
        .map(|&n| crate::model::information(model, n))
        .collect::<Result<_>>()?;
    let corr = DMatrix::from_fn(k, k, |i, j| {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        if lo == hi {
            1.0
        } else {
            (info[lo] / info[hi]).sqrt()
        }
    });
    JointLaw::new(mean, corr)
}

/// Axis-aligned integration region; infinite limits are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Rectangle {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Rectangle {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Domain("rectangle limits must have equal, non-zero length".into()));
        }
        for (k, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l >= u {
                return Err(Error::Domain(format!("empty rectangle on axis {k}: [{l}, {u}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The whole of `R^k`.
    pub fn full(k: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; k],
            upper: vec![f64::INFINITY; k],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn contains(&self, z: &[f64]) -> bool {
        z.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&l, &u))| v > l && v < u)
    }
}

/// Deterministic `P(lower < Z < upper)` for one or two looks.
pub fn rect_prob(law: &JointLaw, region: &Rectangle) -> Result<f64> {
    if law.dim() != region.dim() {
        return Err(Error::Domain(format!(
            "law has dimension {} but region has {}",
            law.dim(),
            region.dim()
        )));
    }
    let std = |x: f64, m: f64| if x.is_infinite() { x } else { x - m };
    let p = match law.dim() {
        1 => {
            let m = law.mean[0];
            let (l, u) = (std(region.lower[0], m), std(region.upper[0], m));
            // difference of upper tails keeps precision when both limits sit in the right tail
            if l > 0.0 {
                norm_sf(l) - norm_sf(u)
            } else {
                norm_cdf(u) - norm_cdf(l)
            }
        }
        2 => {
            let r = law.corr[(0, 1)];
            let l1 = std(region.lower[0], law.mean[0]);
            let u1 = std(region.upper[0], law.mean[0]);
            let l2 = std(region.lower[1], law.mean[1]);
            let u2 = std(region.upper[1], law.mean[1]);
            upper_orthant(l1, l2, r) - upper_orthant(u1, l2, r) - upper_orthant(l1, u2, r) + upper_orthant(u1, u2, r)
        }
        k => return Err(Error::UnsupportedDimension(k)),
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct McEstimate {
    pub p: f64,
    pub se: f64,
    pub hits: u64,
    pub draws: u64,
}

impl McEstimate {
    pub fn from_counts(hits: u64, draws: u64) -> Self {
        let p = hits as f64 / draws as f64;
        Self {
            p,
            se: (p * (1.0 - p) / draws as f64).sqrt(),
            hits,
            draws,
        }
    }

    /// Number of standard errors separating the estimate from `value`. A
    /// zero standard error is replaced by the one implied by a single
    /// disagreeing draw so exact agreement at the boundaries stays finite.
    pub fn z_score(&self, value: f64) -> f64 {
        let floor = (1.0 / self.draws as f64).sqrt() / self.draws as f64;
        (self.p - value).abs() / self.se.max(floor)
    }
}

/// Lower-triangular factor of a positive semi-definite matrix. Pivots within
/// `1e-12` of zero are treated as exact zeros.
pub(crate) fn psd_cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let sym = (a + a.transpose()) * 0.5;
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = sym[(j, j)];
        for p in 0..j {
            d -= l[(j, p)] * l[(j, p)];
        }
        if d < -1e-12 {
            return Err(Error::Numeric(format!("correlation matrix is not positive semi-definite (pivot {d:e})")));
        }
        let piv = if d > 1e-12 { d.sqrt() } else { 0.0 };
        l[(j, j)] = piv;
        for i in (j + 1)..n {
            let mut s = sym[(i, j)];
            for p in 0..j {
                s -= l[(i, p)] * l[(j, p)];
            }
            l[(i, j)] = if piv > 0.0 { s / piv } else { 0.0 };
            if piv == 0.0 && s.abs() > 1e-12 {
                return Err(Error::Numeric("correlation matrix is not positive semi-definite".into()));
            }
        }
    }
    Ok(l)
}

const MC_BLOCK: u64 = 1 << 16;

/// Monte Carlo `P(lower < Z < upper)` for any dimension. Draw block `b` uses
/// ChaCha8 stream `b` of `seed`, so the result does not depend on how many
/// threads share the work.
pub fn mc_rect_prob(law: &JointLaw, region: &Rectangle, n_draws: u64, seed: u64) -> Result<McEstimate> {
    if n_draws == 0 {
        return Err(Error::Domain("need at least one draw".into()));
    }
    if law.dim() != region.dim() {
        return Err(Error::Domain("law and region dimensions differ".into()));
    }
    let chol = psd_cholesky(&law.corr)?;
    let k = law.dim();
    let blocks = n_draws.div_ceil(MC_BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = MC_BLOCK.min(n_draws - b * MC_BLOCK);
            let mut e = vec![0.0; k];
            let mut z = vec![0.0; k];
            let mut hits = 0u64;
            for _ in 0..count {
                for v in e.iter_mut() {
                    *v = StandardNormal.sample(&mut rng);
                }
                for i in 0..k {
                    let mut s = law.mean[i];
                    for j in 0..=i {
                        s += chol[(i, j)] * e[j];
                    }
                    z[i] = s;
                }
                if region.contains(&z) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(McEstimate::from_counts(hits, n_draws))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const INF: f64 = f64::INFINITY;

    fn law2(m1: f64, m2: f64, r: f64) -> JointLaw {
        JointLaw::new(vec![m1, m2], DMatrix::from_row_slice(2, 2, &[1.0, r, r, 1.0])).unwrap()
    }

    /// Independent route: integrate `φ(x) Φ((b - r x)/√(1-r²))` over `x` by
    /// composite Simpson on a wide finite window.
    fn quad_orthant(a: f64, b: f64, r: f64) -> f64 {
        let s = (1.0 - r * r).sqrt();
        let lo = a.max(-12.0);
        let hi = 12.0;
        let n = 40_000;
        let h = (hi - lo) / n as f64;
        let f = |x: f64| (-x * x / 2.0).exp() / (2.0 * PI).sqrt() * norm_sf((b - r * x) / s);
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let x = lo + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * h / 3.0
    }

    #[test]
    fn bvnd_matches_quadrature_oracle() {
        for &r in &[-0.95, -0.6, -0.2, 0.1, 0.5, 0.7746, 0.93, 0.99] {
            for &(a, b) in &[(0.0, 0.0), (1.3, -0.4), (-2.0, 2.366), (2.366, 2.04), (-1.0, -1.5)] {
                let got = bvnd(a, b, r);
                let want = quad_orthant(a, b, r);
                assert!((got - want).abs() < 1e-10, "r={r} a={a} b={b}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-10, 0.009, 0.025, 0.5, 0.9, 0.999999] {
            assert_abs_diff_eq!(norm_cdf(norm_quantile(p)), p, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(norm_quantile(0.975), 1.959963984540054, epsilon = 1e-12);
    }

    #[test]
    fn interim_marginal_tail() {
        let law = law2(0.0, 0.0, 0.6f64.sqrt());
        let region = Rectangle::new(vec![2.366, -INF], vec![INF, INF]).unwrap();
        let p = rect_prob(&law, &region).unwrap();
        assert_abs_diff_eq!(p, norm_sf(2.366), epsilon = 1e-14);
        assert!((p - 0.008990).abs() < 1e-6, "{p}");
    }

    #[test]
    fn independence_and_perfect_dependence() {
        let region = Rectangle::new(vec![0.0, 0.0], vec![INF, INF]).unwrap();
        assert_abs_diff_eq!(rect_prob(&law2(0.0, 0.0, 0.0), &region).unwrap(), 0.25, epsilon = 1e-15);

        let c = 1.7;
        let region = Rectangle::new(vec![c, c], vec![INF, INF]).unwrap();
        assert_abs_diff_eq!(rect_prob(&law2(0.0, 0.0, 1.0), &region).unwrap(), norm_sf(c), epsilon = 1e-14);
    }

    #[test]
    fn one_look_and_three_looks() {
        let law = JointLaw::new(vec![0.5], DMatrix::identity(1, 1)).unwrap();
        let region = Rectangle::new(vec![-INF], vec![1.5]).unwrap();
        assert_abs_diff_eq!(rect_prob(&law, &region).unwrap(), norm_cdf(1.0), epsilon = 1e-15);

        let model = EfficacyModel::new(0.58, 0.6, -0.1).unwrap();
        let sched = LookSchedule::new(vec![200.0, 400.0, 800.0]).unwrap();
        let law = joint_law(&model, &sched, Hypothesis::H1).unwrap();
        let region = Rectangle::full(3);
        assert_eq!(rect_prob(&law, &region), Err(Error::UnsupportedDimension(3)));
        let mc = mc_rect_prob(&law, &region, 1000, 1).unwrap();
        assert_eq!(mc.p, 1.0);
    }

    #[test]
    fn joint_law_structure() {
        let model = EfficacyModel::new(0.58, 0.6, -0.1).unwrap();
        let sched = LookSchedule::new(vec![498.96, 831.6]).unwrap();
        let h0 = joint_law(&model, &sched, Hypothesis::H0).unwrap();
        assert_eq!(h0.mean(), &[0.0, 0.0]);
        assert_abs_diff_eq!(h0.corr()[(0, 1)], 0.6f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(h0.corr()[(1, 0)], 0.7746, epsilon = 1e-4);

        let single = joint_law(&model, &LookSchedule::new(vec![100.0]).unwrap(), Hypothesis::H1).unwrap();
        assert_eq!(single.corr(), &DMatrix::identity(1, 1));
    }

    #[test]
    fn empty_rectangle_rejected() {
        assert!(Rectangle::new(vec![1.0], vec![1.0]).is_err());
        assert!(Rectangle::new(vec![1.0, 0.0], vec![2.0, -1.0]).is_err());
    }

    #[test]
    fn non_psd_rejected() {
        let law = JointLaw::new(
            vec![0.0; 3],
            DMatrix::from_row_slice(3, 3, &[1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0]),
        )
        .unwrap();
        assert!(matches!(
            mc_rect_prob(&law, &Rectangle::full(3), 10, 0),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn partition_of_first_look_sums_to_one() {
        let law = law2(0.4, 1.1, 0.7);
        let cuts = [-INF, 0.548, 2.366, INF];
        let total: f64 = cuts
            .windows(2)
            .map(|w| rect_prob(&law, &Rectangle::new(vec![w[0], -INF], vec![w[1], INF]).unwrap()).unwrap())
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn mc_is_reproducible() {
        let law = law2(0.3, 0.9, 0.77);
        let region = Rectangle::new(vec![0.5, 1.0], vec![2.0, INF]).unwrap();
        let a = mc_rect_prob(&law, &region, 200_000, 42).unwrap();
        let b = mc_rect_prob(&law, &region, 200_000, 42).unwrap();
        assert_eq!(a, b);
        let exact = rect_prob(&law, &region).unwrap();
        assert!(a.z_score(exact) < 4.0);
    }

    proptest::proptest! {
        #[test]
        fn complement_of_marginal(c in -6.0f64..6.0, m in -3.0f64..3.0, r in 0.0f64..1.0) {
            let law = law2(m, 0.0, r);
            let hi = rect_prob(&law, &Rectangle::new(vec![c, -INF], vec![INF, INF]).unwrap()).unwrap();
            let lo = rect_prob(&law, &Rectangle::new(vec![-INF, -INF], vec![c, INF]).unwrap()).unwrap();
            proptest::prop_assert!((hi + lo - 1.0).abs() < 1e-12);
        }

        #[test]
        fn enlarging_never_decreases(l1 in -3.0f64..1.0, w1 in 0.1f64..3.0, l2 in -3.0f64..1.0, w2 in 0.1f64..3.0,
                                     grow in 0.0f64..1.0, r in 0.05f64..0.99) {
            let law = law2(0.2, -0.1, r);
            let small = Rectangle::new(vec![l1, l2], vec![l1 + w1, l2 + w2]).unwrap();
            let big = Rectangle::new(vec![l1 - grow, l2 - grow], vec![l1 + w1 + grow, l2 + w2]).unwrap();
            proptest::prop_assert!(rect_prob(&law, &big).unwrap() + 1e-12 >= rect_prob(&law, &small).unwrap());
        }
    }
}
