use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use gsd_core::sim::{compare, estimate_oc, integer_design, simulate_trajectory, write_trajectories_csv};
use gsd_core::{
    evaluate, grid_scan, joint_law, mc_rect_prob, select_feasible, solve_design, Design, Error, GridRow, GridSpec,
    Hypothesis, Mode, Rectangle, SolvedDesign,
};

use crate::config::{Config, ConfigError};
use crate::report::{Check, DesignReport, SimulationReport, VerifyReport};
use crate::Common;

/// Simulated-vs-analytic agreement threshold, in standard errors.
const TOLERANCE_SE: f64 = 4.0;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Infeasible(String),
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            Self::Validation(_) => 2,
            Self::Infeasible(_) => 3,
            Self::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) | Self::Infeasible(m) | Self::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) => Self::Validation(e.to_string()),
            Error::Infeasible(_) | Error::NonConvergence { .. } | Error::Singular { .. } | Error::DomainEscape { .. } => {
                Self::Infeasible(e.to_string())
            }
            Error::UnsupportedDimension(_) | Error::Numeric(_) => Self::Numeric(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Numeric(format!("i/o: {e}"))
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn sink(common: &Common) -> CliResult<Box<dyn Write>> {
    Ok(match &common.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<T: serde::Serialize>(common: &Common, doc: &T, human: impl FnOnce() -> String) -> CliResult {
    let mut out = sink(common)?;
    if common.json {
        let text = serde_json::to_string_pretty(doc).map_err(|e| CliError::Numeric(e.to_string()))?;
        writeln!(out, "{text}")?;
    } else {
        write!(out, "{}", human())?;
    }
    out.flush()?;
    Ok(())
}

fn mode_label(mode: Mode) -> &'static str {
    match mode {
        Mode::SolveN { .. } => "solve_n",
        Mode::SolvePower { .. } => "solve_power",
    }
}

fn solve_report(common: &Common, cfg: &Config, mode: Mode, ceil: bool) -> CliResult {
    let solved = solve_design(&cfg.spec(mode))?;
    let report = DesignReport::new(cfg, mode_label(mode), &solved, ceil);
    emit(common, &report, || report.human())
}

pub fn solve(common: &Common, ceil: bool) -> CliResult {
    let cfg = Config::load(&common.config)?;
    let mode = cfg.solve_n_mode()?;
    solve_report(common, &cfg, mode, ceil)
}

pub fn power(common: &Common, ceil: bool, fix: Option<&str>) -> CliResult {
    let cfg = Config::load(&common.config)?;
    let fixed_n = match fix.map(parse_fix).transpose()? {
        None => None,
        Some(Mode::SolvePower { n }) => Some(n),
        Some(Mode::SolveN { .. }) => return Err(CliError::Validation("--fix: power mode takes n=<v>".into())),
    };
    let mode = cfg.solve_power_mode(fixed_n)?;
    solve_report(common, &cfg, mode, ceil)
}

/// `start:end:step`, inclusive of `end` up to rounding.
pub fn parse_range(flag: &str, text: &str) -> CliResult<Vec<f64>> {
    let bad = |m: &str| CliError::Validation(format!("--{flag} {text:?}: {m}"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("expected numbers"))?;
    match parts.as_slice() {
        [v] => Ok(vec![*v]),
        [a, b, step] => {
            if !(*step > 0.0) || b < a {
                return Err(bad("need start <= end and a positive step"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12).collect())
        }
        _ => Err(bad("expected start:end:step or a single value")),
    }
}

/// `power=<v>` or `n=<v>`.
pub fn parse_fix(text: &str) -> CliResult<Mode> {
    let bad = || CliError::Validation(format!("--fix {text:?}: expected power=<v> or n=<v>"));
    let (key, value) = text.split_once('=').ok_or_else(bad)?;
    let value: f64 = value.trim().parse().map_err(|_| bad())?;
    match key.trim() {
        "power" => Ok(Mode::SolveN { power: value }),
        "n" | "N" => Ok(Mode::SolvePower { n: value }),
        _ => Err(bad()),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_scan_csv<W: Write>(out: &mut W, rows: &[GridRow], feasible: &[bool]) -> io::Result<()> {
    writeln!(
        out,
        "psi,rho_e,n,power,omega1,d1,p_boundary_interim,c11,c12,c2,converged,feasible"
    )?;
    for (row, ok) in rows.iter().zip(feasible) {
        let s: Option<&SolvedDesign> = row.solved.as_ref();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            row.psi,
            row.rho_e,
            cell(s.map(|s| s.total_n())),
            cell(s.map(|s| s.oc.power)),
            cell(s.map(|s| s.oc.omega1)),
            cell(s.map(|s| s.oc.d1)),
            cell(s.map(|s| s.interim_p_boundary())),
            cell(s.map(|s| s.boundaries().c11)),
            cell(s.map(|s| s.boundaries().c12)),
            cell(s.map(|s| s.boundaries().c2)),
            row.converged(),
            ok
        )?;
    }
    Ok(())
}

pub fn scan(common: &Common, psi: &str, rho: &str, fix: Option<&str>) -> CliResult {
    let cfg = Config::load(&common.config)?;
    let constraint = match fix {
        Some(f) => parse_fix(f)?,
        None => cfg.default_mode()?,
    };
    let grid = GridSpec {
        psi_grid: parse_range("psi", psi)?,
        rho_e_grid: parse_range("rho", rho)?,
        constraint,
    };
    let base = cfg.spec(constraint);
    base.validate()?;
    let rows = grid_scan(&grid, &base)?;
    let targets = cfg.targets();
    let search = select_feasible(&rows, &targets, constraint);
    let flags: Vec<bool> = rows
        .iter()
        .map(|r| search.feasible.iter().any(|f| f.psi == r.psi && f.rho_e == r.rho_e))
        .collect();

    let mut out = sink(common)?;
    if common.json {
        let doc = serde_json::json!({ "config": cfg, "rows": rows, "targets": targets, "search": search });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).map_err(|e| CliError::Numeric(e.to_string()))?)?;
    } else {
        write_scan_csv(&mut out, &rows, &flags)?;
    }
    out.flush()?;
    if cfg.targets.is_some() {
        match &search.recommended {
            Some(r) => eprintln!("recommended: psi={} rho_e={}", r.psi, r.rho_e),
            None => eprintln!("recommended: none (no grid point meets the targets)"),
        }
    }
    Ok(())
}

/// The analytic reference is always the design solved from the config.
/// `[boundaries]`, when present, replaces its critical values in the
/// simulated trials only, so a mis-specified boundary shows up as failed
/// comparisons.
pub fn simulate(common: &Common, trials: u64, seed: u64) -> CliResult {
    if trials == 0 {
        return Err(CliError::Validation("--trials: must be at least 1".into()));
    }
    let cfg = Config::load(&common.config)?;
    let reference = solve_design(&cfg.spec(cfg.default_mode()?))?.design;
    let simulated = Design {
        boundaries: cfg.boundaries().unwrap_or(reference.boundaries),
        ..reference.clone()
    };
    let empirical = estimate_oc(&simulated, trials, seed)?;
    let analytic = evaluate(&integer_design(&reference)?)?;
    let comparisons = compare(&empirical, &analytic, TOLERANCE_SE);
    let report = SimulationReport {
        config: cfg,
        boundaries: simulated.boundaries,
        reference_boundaries: reference.boundaries,
        tolerance_se: TOLERANCE_SE,
        empirical,
        analytic,
        comparisons,
    };
    emit(common, &report, || report.human())
}

pub fn trajectories(common: &Common, count: usize, max_n: usize, seed: u64) -> CliResult {
    if max_n < 2 {
        return Err(CliError::Validation("--max-n: must be at least 2".into()));
    }
    let cfg = Config::load(&common.config)?;
    let model = cfg.model();
    let runs = (0..count)
        .map(|k| simulate_trajectory(&model, max_n, seed.wrapping_add(k as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut meta = vec![
        ("p_t".to_string(), cfg.model.p_t.to_string()),
        ("p_c".to_string(), cfg.model.p_c.to_string()),
        ("delta".to_string(), cfg.model.delta.to_string()),
        ("seed".to_string(), seed.to_string()),
        ("interim_n".to_string(), ((cfg.schedule.psi * max_n as f64).round() as u64).to_string()),
        ("final_n".to_string(), max_n.to_string()),
    ];
    if let Some(b) = cfg.boundaries() {
        meta.push(("c11".into(), b.c11.to_string()));
        meta.push(("c12".into(), b.c12.to_string()));
        meta.push(("c2".into(), b.c2.to_string()));
    }
    let mut out = sink(common)?;
    write_trajectories_csv(&mut out, &runs, max_n, &meta)?;
    out.flush()?;
    Ok(())
}

pub fn verify(common: &Common, trials: u64, seed: u64) -> CliResult {
    if trials == 0 {
        return Err(CliError::Validation("--trials: must be at least 1".into()));
    }
    let cfg = Config::load(&common.config)?;
    let mode = cfg.default_mode()?;
    let solved = solve_design(&cfg.spec(mode))?;
    let oc = &solved.oc;
    let d = &solved.design;
    let mut checks = vec![
        Check::abs("alpha1 vs spend", oc.alpha1, solved.spend.a[0], 1e-7),
        Check::abs("alpha2 vs spend", oc.alpha2, solved.spend.a[1], 1e-7),
        Check::abs("beta1 vs spend", oc.beta1, solved.spend.b[0], 1e-7),
        Check::abs("beta2 vs spend", oc.beta2, solved.spend.b[1], 1e-7),
        Check::abs(
            "decision partition",
            oc.omega1 + oc.omega2 + oc.beta1 + oc.beta2,
            1.0,
            1e-10,
        ),
        Check::abs("power = omega1 + omega2", oc.power, oc.omega1 + oc.omega2, 1e-12),
    ];

    let inf = f64::INFINITY;
    let b = d.boundaries;
    let h0 = joint_law(&d.model, &d.schedule, Hypothesis::H0)?;
    let h1 = joint_law(&d.model, &d.schedule, Hypothesis::H1)?;
    let alpha2_lower = if d.plan.futility_binding { b.c11 } else { -inf };
    let events = [
        ("alpha1 vs Monte Carlo", &h0, [b.c12, -inf], [inf, inf], oc.alpha1),
        ("alpha2 vs Monte Carlo", &h0, [alpha2_lower, b.c2], [b.c12, inf], oc.alpha2),
        ("beta1 vs Monte Carlo", &h1, [-inf, -inf], [b.c11, inf], oc.beta1),
        ("beta2 vs Monte Carlo", &h1, [b.c11, -inf], [b.c12, b.c2], oc.beta2),
        ("omega1 vs Monte Carlo", &h1, [b.c12, -inf], [inf, inf], oc.omega1),
        ("omega2 vs Monte Carlo", &h1, [b.c11, b.c2], [b.c12, inf], oc.omega2),
    ];
    for (i, (name, law, lo, hi, exact)) in events.into_iter().enumerate() {
        let mc = mc_rect_prob(law, &Rectangle::new(lo.to_vec(), hi.to_vec())?, trials, seed.wrapping_add(i as u64))?;
        checks.push(Check::abs(name, mc.p, exact, TOLERANCE_SE * mc.se));
    }

    let report = VerifyReport {
        config: cfg.clone(),
        design: DesignReport::new(&cfg, mode_label(mode), &solved, false),
        checks,
    };
    emit(common, &report, || report.human())?;
    if report.all_pass() {
        Ok(())
    } else {
        Err(CliError::Numeric("one or more verification checks failed".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("psi", "0.3:0.5:0.1").unwrap(), vec![0.3, 0.4, 0.5]);
        assert_eq!(parse_range("rho", "2").unwrap(), vec![2.0]);
        assert_eq!(parse_range("rho", "1:3:0.5").unwrap().len(), 5);
        assert!(parse_range("psi", "0.5:0.3:0.1").is_err());
        assert!(parse_range("psi", "a:b:c").is_err());
        assert!(parse_range("psi", "0.1:0.2:0").is_err());
    }

    #[test]
    fn fix_flag() {
        assert_eq!(parse_fix("power=0.9").unwrap(), Mode::SolveN { power: 0.9 });
        assert_eq!(parse_fix("n=831.6").unwrap(), Mode::SolvePower { n: 831.6 });
        assert!(parse_fix("beta=0.1").is_err());
        assert!(parse_fix("power").is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::Domain("x".into())).code(), 2);
        assert_eq!(CliError::from(Error::Infeasible("x".into())).code(), 3);
        assert_eq!(CliError::from(Error::UnsupportedDimension(3)).code(), 4);
    }
}
