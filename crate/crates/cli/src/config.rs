//! Run configuration: one flat JSON document, overridable from flags.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use dicke_grover::cavity::HeraldMode;
use dicke_grover::experiments::{CavityTemplate, SweepQuantity};
use dicke_grover::grover::{CatParity, GhzVariant};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    #[default]
    Plan,
    Simulate,
    Sweep,
    FitScaling,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    #[default]
    Dicke,
    Ghz,
    Cat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    #[default]
    Phi,
    M,
    N,
    /// Closed-form mismatch fidelities for `k = 1..4` at the exact overlap.
    Zeta,
}

fn default_n() -> usize {
    3
}
fn default_m() -> usize {
    1
}
fn default_one() -> f64 {
    1.0
}
fn default_mode() -> HeraldMode {
    HeraldMode::Unheralded
}
fn default_variant() -> GhzVariant {
    GhzVariant::Hadamard
}
fn default_parity() -> CatParity {
    CatParity::Plus
}
fn default_cooperativity() -> f64 {
    CavityTemplate::default().cooperativity
}
fn default_width() -> f64 {
    CavityTemplate::default().width
}
fn default_points() -> usize {
    61
}

/// Every key is optional in the file; missing keys take these defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Command,

    #[serde(default)]
    pub state: StateKind,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Dicke excitation number.
    #[serde(default = "default_m")]
    pub m: usize,
    /// Cat-state rotation angle.
    #[serde(default)]
    pub phi_cat: f64,
    #[serde(default = "default_parity")]
    pub parity: CatParity,
    #[serde(default = "default_variant")]
    pub ghz_variant: GhzVariant,

    #[serde(default = "default_cooperativity")]
    pub cooperativity: f64,
    /// Dicke resolution `d`; optimized when absent.
    #[serde(default)]
    pub resolution: Option<f64>,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "default_one")]
    pub gamma: f64,
    #[serde(default = "default_one")]
    pub kappa_r: f64,
    #[serde(default)]
    pub kappa_t: f64,
    #[serde(default)]
    pub kappa_m: f64,
    /// Raw coupling; overrides `cooperativity` when set.
    #[serde(default)]
    pub g: Option<f64>,
    /// Raw atom-cavity detuning; overrides `resolution` when set.
    #[serde(default)]
    pub delta: Option<f64>,

    #[serde(default = "default_mode")]
    pub mode: HeraldMode,
    /// Mode-matching efficiency.
    #[serde(default = "default_one")]
    pub zeta: f64,
    /// Fixed step count; chosen by the solver or optimizer when absent.
    #[serde(default)]
    pub steps: Option<usize>,
    /// Fixed rotation angle for `simulate`; needs `steps`.
    #[serde(default)]
    pub phi: Option<f64>,
    #[serde(default)]
    pub modified_phase: bool,

    #[serde(default)]
    pub axis: SweepAxis,
    /// Sweep values for the `m`, `n` and `zeta` axes, and cooperativities
    /// for `fit-scaling` and `baseline` excitation numbers.
    #[serde(default)]
    pub grid: Vec<f64>,
    /// Evenly spaced angles for the `phi` axis.
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub quantity: SweepQuantity,
    /// Grid points dropped from each end of a scaling fit.
    #[serde(default)]
    pub trim: usize,

    /// Output prefix; writes `<prefix>.csv` and `<prefix>.json`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Echoed for reproducibility; no command currently draws random numbers.
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all keys have defaults")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config: {e}")))
    }

    /// `(C, d)` after applying raw-rate overrides. Raw rates win, with a
    /// warning when both forms are given.
    pub fn dimensionless(&self) -> Result<(f64, Option<f64>), CliError> {
        let kappa = self.kappa_r + self.kappa_t + self.kappa_m;
        let mut c = self.cooperativity;
        let mut d = self.resolution;
        if let Some(g) = self.g {
            if self.cooperativity != default_cooperativity() {
                eprintln!("warning: g overrides cooperativity");
            }
            c = g * g / (kappa * self.gamma);
        }
        if let Some(delta) = self.delta {
            if self.resolution.is_some() {
                eprintln!("warning: delta overrides resolution");
            }
            let g2 = c * kappa * self.gamma;
            d = Some(if delta == 0.0 { f64::INFINITY } else { g2 / (delta * kappa) });
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(CliError::Config(format!("cooperativity {c} must be positive and finite")));
        }
        Ok((c, d))
    }

    pub fn template(&self) -> Result<CavityTemplate, CliError> {
        let (c, _) = self.dimensionless()?;
        if !(self.width >= 0.0 && self.width.is_finite()) {
            return Err(CliError::Config(format!("width {} must be non-negative", self.width)));
        }
        Ok(CavityTemplate {
            cooperativity: c,
            gamma: self.gamma,
            kappa_r: self.kappa_r,
            kappa_t: self.kappa_t,
            kappa_m: self.kappa_m,
            width: self.width,
        })
    }

    pub fn resolution(&self) -> Result<Option<f64>, CliError> {
        Ok(self.dimensionless()?.1)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(0.0..=1.0).contains(&self.zeta) {
            return Err(CliError::Config(format!("zeta {} outside [0, 1]", self.zeta)));
        }
        if self.phi.is_some() && self.steps.is_none() {
            return Err(CliError::Config("phi needs steps".into()));
        }
        self.template()?;
        Ok(())
    }

    /// Grid values as non-negative integers.
    pub fn integer_grid(&self) -> Result<Vec<usize>, CliError> {
        self.grid
            .iter()
            .map(|&v| {
                if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
                    Ok(v as usize)
                } else {
                    Err(CliError::Config(format!("grid value {v} is not a non-negative integer")))
                }
            })
            .collect()
    }
}
