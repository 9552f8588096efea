//! Closed-form wavepacket averages in the dispersive regime.
//!
//! Dropping the photon detuning next to `Δ` in the atomic response makes
//! every integrand a product of two simple poles, whose Gaussian average is
//! a scaled complementary error function. The neglected term is of order
//! `n g²/Δ²` relative to the kept ones.

use errorfunctions::ComplexErrorFunctions;

use super::{CavityParams, Channel, Wavepacket};
use crate::C64;

/// Largest `n g²/Δ²` for which the closed form is considered reliable.
pub const DISPERSIVE_REGIME_LIMIT: f64 = 1e-3;

/// Closed-form element together with the small parameter it neglects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxElement {
    pub value: C64,
    /// `max(n, l) g²/Δ²`; infinite on resonance.
    pub dispersive_ratio: f64,
}

impl ApproxElement {
    pub fn in_regime(&self) -> bool {
        self.dispersive_ratio <= DISPERSIVE_REGIME_LIMIT
    }
}

/// Pole location `x g²/(γ + iΔ) + κ + iΩ_c` of the `x`-excitation amplitude.
fn pole(x: f64, wp: &Wavepacket, p: &CavityParams) -> C64 {
    x * p.g() * p.g() / C64::new(p.gamma(), p.delta()) + p.kappa() + C64::new(0.0, wp.center())
}

/// `√(π/2)/σ · erfcx(B/(√2σ))`, tending to `1/B` as `σ → 0`.
fn gaussian_pole_average(b: C64, sigma: f64) -> C64 {
    if sigma == 0.0 {
        return b.inv();
    }
    let s2 = std::f64::consts::SQRT_2 * sigma;
    (b / s2).erfcx() * ((std::f64::consts::PI / 2.0).sqrt() / sigma)
}

/// Closed-form `𝒦^{ch}_{nl}` for a Gaussian wavepacket.
pub fn averaged_kraus_approx(
    channel: Channel,
    n: usize,
    l: usize,
    wp: &Wavepacket,
    params: &CavityParams,
) -> ApproxElement {
    let p = params;
    let bn = pole(n as f64, wp, p);
    let bl = pole(l as f64, wp, p).conj();
    let e = gaussian_pole_average(bn, wp.width()) + gaussian_pole_average(bl, wp.width());
    let s = bn + bl;
    let kr = p.kappa_r();
    let value = match channel {
        Channel::Reflection => 1.0 + e * (-2.0 * kr + 4.0 * kr * kr / s),
        other => {
            let x = match other {
                Channel::Transmission => p.kappa_t(),
                Channel::Mirror => p.kappa_m(),
                _ => {
                    let g2 = p.g() * p.g();
                    ((n * l) as f64).sqrt() * g2 * p.gamma() / (p.gamma() * p.gamma() + p.delta() * p.delta())
                }
            };
            e * (4.0 * kr * x) / s
        }
    };
    let dispersive_ratio = if p.delta() == 0.0 {
        f64::INFINITY
    } else {
        n.max(l) as f64 * p.g() * p.g() / (p.delta() * p.delta())
    };
    ApproxElement { value, dispersive_ratio }
}
