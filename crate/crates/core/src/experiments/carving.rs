//! Probabilistic carving with a two-sided cavity: the coherent spin state
//! is projected by conditioning on transmission of one photon.

use serde::{Deserialize, Serialize};

use crate::cavity::{scattering_amplitudes, shifted_resonance, CavityParams};
use crate::dicke::{css_state, optimal_css_angle, DickeKet};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarvingResult {
    /// Normalized amplitudes of the heralded state.
    pub projected: Vec<C64>,
    pub success_probability: f64,
    pub infidelity: f64,
}

/// Projects `initial` with per-component transmission amplitudes `t_n`.
pub fn carve_with_amplitudes(initial: &DickeKet, transmission: &[C64], m: usize) -> Result<CarvingResult> {
    if transmission.len() != initial.dim() {
        return Err(Error::DimensionMismatch {
            expected: initial.dim(),
            found: transmission.len(),
        });
    }
    if m > initial.n_qubits() {
        return Err(Error::ExcitationOutOfRange { n: initial.n_qubits(), m });
    }
    let raw: Vec<C64> = initial
        .amplitudes()
        .iter()
        .zip(transmission)
        .map(|(c, t)| c * t)
        .collect();
    let p: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
    if p < crate::channels::TOTAL_LOSS_TRACE {
        return Err(Error::TotalLoss);
    }
    let norm = p.sqrt();
    let projected: Vec<C64> = raw.iter().map(|z| z / norm).collect();
    let infidelity = 1.0 - projected[m].norm_sqr();
    Ok(CarvingResult {
        projected,
        success_probability: p,
        infidelity,
    })
}

/// Carving `|m⟩` from the coherent spin state at `phi` (default: the
/// overlap-maximizing angle) with the photon tuned to the shifted resonance
/// of `m`.
pub fn carving_baseline(n_qubits: usize, m: usize, params: &CavityParams, phi: Option<f64>) -> Result<CarvingResult> {
    if params.kappa_t() <= 0.0 {
        return Err(Error::InvalidParams("carving needs a transmitting mirror (κ_t > 0)".into()));
    }
    let phi = match phi {
        Some(p) => p,
        None => optimal_css_angle(n_qubits, m)?,
    };
    let initial = css_state(n_qubits, phi)?;
    let omega = shifted_resonance(m, params);
    let t: Vec<C64> = (0..=n_qubits).map(|n| scattering_amplitudes(n, omega, params).t).collect();
    carve_with_amplitudes(&initial, &t, m)
}
