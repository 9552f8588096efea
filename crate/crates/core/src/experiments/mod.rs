//! Campaigns over the cavity model: detuning and step optimizers, parameter
//! sweeps, log-log scaling fits and the probabilistic carving baseline.

mod carving;
mod optimize;
mod scaling;
mod sweeps;

use serde::{Deserialize, Serialize};

use crate::cavity::{build_superop, CavityParams, HeraldMode};
use crate::channels::{apply_superop, herald_metrics, HeraldMetrics};
use crate::dicke::{css_state, optimal_css_angle, DickeKet};
use crate::grover::PhaseInversion;
use crate::{Error, Result};

pub use carving::{carve_with_amplitudes, carving_baseline, CarvingResult};
pub use optimize::{optimize_detuning, optimize_steps, DetuningOptimum, StepsOptimum};
pub use scaling::{fit_scaling, log_log_fit, ScalingFit};
pub use sweeps::{sweep_m, sweep_n, sweep_phi, SweepPoint, SweepQuantity, SweepResult};

/// Cavity without a chosen detuning; `d` is picked per experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CavityTemplate {
    pub cooperativity: f64,
    pub gamma: f64,
    pub kappa_r: f64,
    pub kappa_t: f64,
    pub kappa_m: f64,
    /// Wavepacket width in units of `κ`.
    pub width: f64,
}

impl Default for CavityTemplate {
    /// Figure defaults: one-sided cavity, `κ = κ_r = γ = 1`, `C = 100`
    /// (`g = 10`), `w = 0.1`.
    fn default() -> Self {
        Self {
            cooperativity: 100.0,
            gamma: 1.0,
            kappa_r: 1.0,
            kappa_t: 0.0,
            kappa_m: 0.0,
            width: 0.1,
        }
    }
}

impl CavityTemplate {
    pub fn with_cooperativity(self, cooperativity: f64) -> Self {
        Self { cooperativity, ..self }
    }

    pub fn with_width(self, width: f64) -> Self {
        Self { width, ..self }
    }

    /// Concrete parameters at resolution `d`; `d = ∞` is the resonant cavity.
    pub fn at(&self, resolution: f64) -> Result<CavityParams> {
        CavityParams::from_dimensionless(
            self.cooperativity,
            resolution,
            self.gamma,
            self.kappa_r,
            self.kappa_t,
            self.kappa_m,
        )
    }
}

/// Input angle with the smallest inversion fidelity:
/// `arccos((N − 2m)/N)` for `m ≥ 1`, `1.5/√N` for `m = 0`.
pub fn worst_case_css_angle(n_qubits: usize, m: usize) -> Result<f64> {
    if m == 0 {
        if n_qubits == 0 {
            return Err(Error::ZeroQubits);
        }
        return Ok(1.5 / (n_qubits as f64).sqrt());
    }
    optimal_css_angle(n_qubits, m)
}

/// Fidelity of the cavity-implemented `χ_m` on the coherent spin state at
/// `φ`, against the ideal sign flip. Heralded fidelity is trace-normalized.
pub fn inversion_fidelity(
    n_qubits: usize,
    m: usize,
    phi: f64,
    resolution: f64,
    template: &CavityTemplate,
    mode: HeraldMode,
) -> Result<HeraldMetrics> {
    let params = template.at(resolution)?;
    let sup = build_superop(n_qubits, m, template.width, &params, mode)?;
    let input = css_state(n_qubits, phi)?;
    let out = apply_superop(&input.to_density(), &sup)?;
    let ideal: DickeKet = input.apply_diagonal(&PhaseInversion::flip(n_qubits, m)?.diagonal());
    herald_metrics(&out, &ideal)
}

/// Analytic starting point for the resolution search:
/// `(C/m)^{1/4}` unheralded, `(C/m)^{1/3}` heralded, `∞` for `m = 0`.
pub fn resolution_seed(m: usize, cooperativity: f64, mode: HeraldMode) -> f64 {
    if m == 0 {
        return f64::INFINITY;
    }
    let ratio = cooperativity / m as f64;
    match mode {
        HeraldMode::Unheralded => ratio.powf(0.25),
        HeraldMode::Heralded => ratio.cbrt(),
    }
}
