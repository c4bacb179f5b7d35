use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use hpa_dyn::model::{GrLevel, ModelParams, State};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    None,
    Dirac,
    Mixed,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    Medium,
    High,
}

impl From<Level> for GrLevel {
    fn from(l: Level) -> Self {
        match l {
            Level::Low => GrLevel::Low,
            Level::Medium => GrLevel::Medium,
            Level::High => GrLevel::High,
        }
    }
}

/// Grid for `sweep`: every pair of total lag and order, `τ₂ = τ − τ₁`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub tau_total: Vec<f64>,
    #[serde(default)]
    pub q: Vec<f64>,
}

/// One JSON document; every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ModelParams<f64>,
    /// Equilibrium analysed by `stability` and perturbed for `simulate`.
    pub equilibrium: Level,
    pub acth_bracket: Option<(f64, f64)>,
    pub grid_n: Option<usize>,
    pub kernel: KernelChoice,
    pub tau1: f64,
    pub tau2: f64,
    /// Rate of the weak gamma kernels.
    pub a: Option<f64>,
    /// Rate of the exponential ACTH kernel in the mixed case.
    pub a20: Option<f64>,
    pub q: f64,
    pub dt: f64,
    pub t_end: f64,
    pub transient_fraction: f64,
    /// Constant history; defaults to the chosen equilibrium with CRH raised by
    /// `perturbation`.
    pub history: Option<State<f64>>,
    pub perturbation: f64,
    pub j_max: usize,
    pub gamma_bracket: (f64, f64),
    pub sweep: Option<SweepSpec>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::reference(),
            equilibrium: Level::High,
            acth_bracket: None,
            grid_n: None,
            kernel: KernelChoice::Dirac,
            tau1: 0.0,
            tau2: 0.0,
            a: None,
            a20: None,
            q: 1.0,
            dt: 0.01,
            t_end: 5000.0,
            transient_fraction: 0.5,
            history: None,
            perturbation: 1e-3,
            j_max: 3,
            gamma_bracket: (1e-3, 10.0),
            sweep: None,
            output: None,
        }
    }
}

/// Command-line values that replace the corresponding config fields.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, value_enum)]
    pub kernel: Option<KernelChoice>,
    #[arg(long, value_enum)]
    pub equilibrium: Option<Level>,
    #[arg(long)]
    pub tau1: Option<f64>,
    #[arg(long)]
    pub tau2: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub a20: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(k) = o.kernel {
            self.kernel = k;
        }
        if let Some(l) = o.equilibrium {
            self.equilibrium = l;
        }
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut self.tau1, o.tau1);
        set(&mut self.tau2, o.tau2);
        set(&mut self.q, o.q);
        set(&mut self.dt, o.dt);
        set(&mut self.t_end, o.t_end);
        if o.a.is_some() {
            self.a = o.a;
        }
        if o.a20.is_some() {
            self.a20 = o.a20;
        }
        if o.output.is_some() {
            self.output.clone_from(&o.output);
        }
    }

    /// Checks that do not need a solver; the library validates the rest.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let bad = |m: String| Err(CliError::Config(m));
        for (name, v) in [("tau1", self.tau1), ("tau2", self.tau2)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if !(self.perturbation.is_finite() && self.perturbation >= 0.0) {
            return bad(format!(
                "perturbation must be non-negative, got {}",
                self.perturbation
            ));
        }
        Ok(())
    }

    pub fn rate(&self) -> Result<f64, CliError> {
        self.a
            .ok_or_else(|| CliError::Config("kernel `gamma` needs a rate `a`".into()))
    }

    pub fn mixed_rate(&self) -> Result<f64, CliError> {
        self.a20
            .ok_or_else(|| CliError::Config("kernel `mixed` needs a rate `a20`".into()))
    }
}
