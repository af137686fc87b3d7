//! Run configuration: a TOML document with `[model]`, `[plan]`,
//! `[schedule]` and optional `[targets]` / `[boundaries]` sections. A JSON
//! report written by `--json` is accepted as well; its embedded `config`
//! object is used.

use std::fmt;
use std::path::Path;

use gsd_core::{BoundarySet, DesignSpec, EfficacyModel, Mode, SpendingPlan, Targets};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub plan: PlanSection,
    pub schedule: ScheduleSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<BoundariesSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub p_t: f64,
    pub p_c: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    pub rho_e: f64,
    pub rho_f: f64,
    #[serde(default)]
    pub futility_binding: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub psi: f64,
    /// Per-arm final sample size; required by `power`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsSection {
    #[serde(default)]
    pub power: f64,
    #[serde(default)]
    pub omega1_min: f64,
    #[serde(default = "vacuous_d1")]
    pub d1_min: f64,
}

fn vacuous_d1() -> f64 {
    -1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundariesSection {
    pub c11: f64,
    pub c12: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        message: message.into(),
    }
}

fn open_unit(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(err(field, format!("must lie strictly between 0 and 1, got {v}")))
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(err(field, format!("must be positive, got {v}")))
    }
}

#[derive(Deserialize)]
struct Embedded {
    config: Config,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| err("config", format!("{}: {e}", path.display())))?;
        let cfg = Self::parse(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str::<Embedded>(text)
                .map(|e| e.config)
                .or_else(|_| serde_json::from_str::<Config>(text))
                .map_err(|e| err("config", format!("invalid JSON: {e}")));
        }
        toml::from_str(text).map_err(|e| err("config", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        open_unit("model.p_t", self.model.p_t)?;
        open_unit("model.p_c", self.model.p_c)?;
        if !(self.model.delta > -1.0 && self.model.delta < 1.0) {
            return Err(err("model.delta", format!("must lie in (-1, 1), got {}", self.model.delta)));
        }
        open_unit("plan.alpha", self.plan.alpha)?;
        if let Some(p) = self.plan.power {
            open_unit("plan.power", p)?;
        }
        positive("plan.rho_e", self.plan.rho_e)?;
        positive("plan.rho_f", self.plan.rho_f)?;
        open_unit("schedule.psi", self.schedule.psi)?;
        if let Some(n) = self.schedule.n {
            positive("schedule.n", n)?;
        }
        if let Some(t) = &self.targets {
            if !(0.0..=1.0).contains(&t.power) {
                return Err(err("targets.power", format!("must lie in [0, 1], got {}", t.power)));
            }
            if !(0.0..=1.0).contains(&t.omega1_min) {
                return Err(err("targets.omega1_min", format!("must lie in [0, 1], got {}", t.omega1_min)));
            }
            if !(-1.0..=1.0).contains(&t.d1_min) {
                return Err(err("targets.d1_min", format!("must lie in [-1, 1], got {}", t.d1_min)));
            }
        }
        if let Some(b) = &self.boundaries {
            if b.c12 <= b.c11 {
                return Err(err("boundaries.c12", format!("must exceed c11 ({} <= {})", b.c12, b.c11)));
            }
        }
        Ok(())
    }

    pub fn model(&self) -> EfficacyModel {
        EfficacyModel::new(self.model.p_t, self.model.p_c, self.model.delta).expect("validated model")
    }

    /// Spending plan with `beta` from the configured power (0.1 when absent;
    /// solvers overwrite it).
    pub fn plan(&self) -> SpendingPlan {
        SpendingPlan {
            alpha_total: self.plan.alpha,
            beta_total: 1.0 - self.plan.power.unwrap_or(0.9),
            rho_e: self.plan.rho_e,
            rho_f: self.plan.rho_f,
            futility_binding: self.plan.futility_binding,
        }
    }

    pub fn spec(&self, mode: Mode) -> DesignSpec {
        DesignSpec {
            model: self.model(),
            plan: self.plan(),
            psi: self.schedule.psi,
            mode,
        }
    }

    pub fn solve_n_mode(&self) -> Result<Mode, ConfigError> {
        self.plan
            .power
            .map(|power| Mode::SolveN { power })
            .ok_or_else(|| err("plan.power", "required to solve for the sample size"))
    }

    pub fn solve_power_mode(&self, fixed_n: Option<f64>) -> Result<Mode, ConfigError> {
        let n = fixed_n
            .or(self.schedule.n)
            .ok_or_else(|| err("schedule.n", "required to solve for power (or pass --fix n=<v>)"))?;
        positive("schedule.n", n)?;
        Ok(Mode::SolvePower { n })
    }

    /// Default design mode: fixed power when configured, otherwise fixed N.
    pub fn default_mode(&self) -> Result<Mode, ConfigError> {
        self.solve_n_mode().or_else(|_| self.solve_power_mode(None))
    }

    pub fn targets(&self) -> Targets {
        let t = self.targets.unwrap_or(TargetsSection {
            power: 0.0,
            omega1_min: 0.0,
            d1_min: -1.0,
        });
        Targets {
            power: t.power,
            omega1: t.omega1_min,
            d1: t.d1_min,
        }
    }

    pub fn boundaries(&self) -> Option<BoundarySet> {
        self.boundaries.map(|b| BoundarySet {
            c11: b.c11,
            c12: b.c12,
            c2: b.c2,
        })
    }
}
