//! Single-photon reflection from an atom–cavity system.
//!
//! Rates are stored in units of the total cavity decay `κ = κ_r + κ_t + κ_m`,
//! so `κ = 1` after construction. `Δ = 0` is the resonant case (`d = ∞`).

mod dispersive;
mod quadrature;
mod superop;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

pub use dispersive::{averaged_kraus_approx, ApproxElement, DISPERSIVE_REGIME_LIMIT};
pub use quadrature::{averaged_kraus_element, kraus_matrix, QuadratureReport};
pub use superop::{build_superop, build_superop_at, DiagonalSuperop, HeraldMode};

/// Outgoing photon mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Reflection,
    Transmission,
    Atomic,
    Mirror,
}

impl Channel {
    pub const ALL: [Channel; 4] = [
        Channel::Reflection,
        Channel::Transmission,
        Channel::Atomic,
        Channel::Mirror,
    ];
}

/// Atom–cavity parameters, normalized to `κ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    g: f64,
    kappa_r: f64,
    kappa_t: f64,
    kappa_m: f64,
    gamma: f64,
    delta: f64,
    /// Total `κ` of the raw input, used to convert back to raw units.
    rate_unit: f64,
}

impl CavityParams {
    /// Raw rates in any common unit; rescaled so that `κ = 1`.
    pub fn new(g: f64, kappa_r: f64, kappa_t: f64, kappa_m: f64, gamma: f64, delta: f64) -> Result<Self> {
        let rates = [kappa_r, kappa_t, kappa_m, gamma];
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidParams(format!("g = {g} must be positive and finite")));
        }
        if rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidParams(format!("rates {rates:?} must be finite and non-negative")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParams(format!("detuning {delta} must be finite; use 0 for d = ∞")));
        }
        let kappa = kappa_r + kappa_t + kappa_m;
        if kappa <= 0.0 {
            return Err(Error::InvalidParams("total cavity decay must be positive".into()));
        }
        Ok(Self {
            g: g / kappa,
            kappa_r: kappa_r / kappa,
            kappa_t: kappa_t / kappa,
            kappa_m: kappa_m / kappa,
            gamma: gamma / kappa,
            delta: delta / kappa,
            rate_unit: kappa,
        })
    }

    /// Builds parameters from cooperativity `C = g²/(κγ)` and resolution
    /// `d = g²/(Δκ)` with `κ = 1`; `d = ∞` gives `Δ = 0`.
    pub fn from_dimensionless(
        cooperativity: f64,
        resolution: f64,
        gamma: f64,
        kappa_r: f64,
        kappa_t: f64,
        kappa_m: f64,
    ) -> Result<Self> {
        if !(cooperativity > 0.0 && cooperativity.is_finite()) {
            return Err(Error::InvalidParams(format!("cooperativity {cooperativity} must be positive")));
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidParams(format!("γ = {gamma} must be positive")));
        }
        if resolution == 0.0 || resolution.is_nan() {
            return Err(Error::InvalidParams(format!("resolution {resolution} must be nonzero")));
        }
        let kappa = kappa_r + kappa_t + kappa_m;
        let g = (cooperativity * kappa * gamma).sqrt();
        let delta = if resolution.is_infinite() { 0.0 } else { g * g / (resolution * kappa) };
        Self::new(g, kappa_r, kappa_t, kappa_m, gamma, delta)
    }

    /// One-sided cavity `κ = κ_r = 1`, `γ = 1`.
    pub fn one_sided(cooperativity: f64, resolution: f64) -> Result<Self> {
        Self::from_dimensionless(cooperativity, resolution, 1.0, 1.0, 0.0, 0.0)
    }

    /// Two-sided symmetric cavity `κ_r = κ_t = 1/2`, `γ = 1`.
    pub fn two_sided_symmetric(cooperativity: f64, resolution: f64) -> Result<Self> {
        Self::from_dimensionless(cooperativity, resolution, 1.0, 0.5, 0.5, 0.0)
    }

    /// Same cavity with a different detuning (normalized units).
    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..*self }
    }

    /// Same cavity on atomic resonance, `d = ∞`.
    pub fn resonant(&self) -> Self {
        self.with_delta(0.0)
    }

    /// Same cavity with resolution `d`.
    pub fn with_resolution(&self, resolution: f64) -> Self {
        if resolution.is_infinite() {
            self.resonant()
        } else {
            self.with_delta(self.g * self.g / resolution)
        }
    }

    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn kappa(&self) -> f64 {
        self.kappa_r + self.kappa_t + self.kappa_m
    }
    pub fn kappa_r(&self) -> f64 {
        self.kappa_r
    }
    pub fn kappa_t(&self) -> f64 {
        self.kappa_t
    }
    pub fn kappa_m(&self) -> f64 {
        self.kappa_m
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn rate_unit(&self) -> f64 {
        self.rate_unit
    }
    pub fn is_resonant(&self) -> bool {
        self.delta == 0.0
    }

    /// `C = g²/(κγ)`; infinite when `γ = 0`.
    pub fn cooperativity(&self) -> f64 {
        self.g * self.g / (self.kappa() * self.gamma)
    }

    /// `d = g²/(Δκ)`; infinite when `Δ = 0`.
    pub fn resolution(&self) -> f64 {
        if self.is_resonant() {
            f64::INFINITY
        } else {
            self.g * self.g / (self.delta * self.kappa())
        }
    }

    /// Dispersive shift per atom `Ω = g²/Δ`; infinite when `Δ = 0`.
    pub fn dispersive_shift(&self) -> f64 {
        if self.is_resonant() {
            f64::INFINITY
        } else {
            self.g * self.g / self.delta
        }
    }
}

/// Gaussian spectral envelope `|Φ(ω)|² = e^{−(ω−Ω_c)²/2σ²}/(√(2π)σ)`,
/// in units of `κ`. `σ = 0` is monochromatic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wavepacket {
    center: f64,
    width: f64,
}

impl Wavepacket {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(width >= 0.0 && width.is_finite()) || !center.is_finite() {
            return Err(Error::RangeViolation {
                what: "wavepacket width",
                value: width,
                range: "[0, ∞)",
            });
        }
        Ok(Self { center, width })
    }

    pub fn monochromatic(center: f64) -> Self {
        Self { center, width: 0.0 }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// `σ`; equal to the dimensionless width `w = σ/κ` since `κ = 1`.
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn with_center(&self, center: f64) -> Self {
        Self { center, ..*self }
    }

    /// `|Φ(ω)|²`.
    pub fn density(&self, omega: f64) -> f64 {
        let s = self.width;
        (-(omega - self.center).powi(2) / (2.0 * s * s)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * s)
    }
}

/// Reflection, transmission, atomic and mirror amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub r: C64,
    pub t: C64,
    pub a: C64,
    pub m: C64,
}

impl Amplitudes {
    pub fn get(&self, channel: Channel) -> C64 {
        match channel {
            Channel::Reflection => self.r,
            Channel::Transmission => self.t,
            Channel::Atomic => self.a,
            Channel::Mirror => self.m,
        }
    }

    pub fn norm_sqr_sum(&self) -> f64 {
        self.r.norm_sqr() + self.t.norm_sqr() + self.a.norm_sqr() + self.m.norm_sqr()
    }
}

/// Output amplitudes for a photon at detuning `ω` from the bare cavity with
/// `n` atoms coupled.
pub fn scattering_amplitudes(n: usize, omega: f64, p: &CavityParams) -> Amplitudes {
    let i = C64::i();
    let atom = i * (p.delta + omega) + p.gamma;
    let nf = n as f64;
    let den = nf * p.g * p.g + atom * (i * omega + p.kappa());
    let inv = den.inv();
    let common = 2.0 * atom * inv;
    Amplitudes {
        r: C64::new(1.0, 0.0) - p.kappa_r * common,
        t: (p.kappa_r * p.kappa_t).sqrt() * common,
        a: 2.0 * (p.kappa_r * p.gamma).sqrt() * nf.sqrt() * p.g * inv,
        m: (p.kappa_m * p.kappa_r).sqrt() * common,
    }
}

/// Cavity resonance with `n` atoms coupled: real part of the root of
/// `r_n(ω) = −1` on the cavity-like branch, which tends to `n g²/Δ` in the
/// dispersive limit and to `0` for `n = 0`.
pub fn shifted_resonance(n: usize, p: &CavityParams) -> f64 {
    let i = C64::i();
    let loss = p.kappa() - p.kappa_r;
    let inner = C64::new(p.gamma - loss, p.delta);
    let mut s = (C64::new(4.0 * p.g * p.g * n as f64, 0.0) - inner * inner).sqrt();
    if s.re * p.delta < 0.0 {
        s = -s;
    }
    (0.5 * (i * p.gamma - p.delta + i * loss + s)).re
}

/// Dispersive shortcut `n g²/Δ`; zero on resonance.
pub fn dispersive_resonance(n: usize, p: &CavityParams) -> f64 {
    if p.is_resonant() {
        0.0
    } else {
        n as f64 * p.g * p.g / p.delta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn figure_params(d: f64) -> CavityParams {
        CavityParams::one_sided(100.0, d).unwrap()
    }

    #[test]
    fn dimensionless_round_trip() {
        let p = figure_params(3.0);
        assert_abs_diff_eq!(p.g(), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.cooperativity(), 100.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p.resolution(), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.dispersive_shift(), 3.0, epsilon = 1e-12);
        let r = p.resonant();
        assert!(r.resolution().is_infinite());
        assert!(r.dispersive_shift().is_infinite());
    }

    #[test]
    fn raw_units_rescaled() {
        let p = CavityParams::new(20.0, 1.0, 0.5, 0.5, 2.0, 100.0).unwrap();
        assert_abs_diff_eq!(p.kappa(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.g(), 10.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.gamma(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.cooperativity(), 400.0 / (2.0 * 2.0), epsilon = 1e-12);
        assert_eq!(p.rate_unit(), 2.0);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(CavityParams::new(0.0, 1.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(CavityParams::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(CavityParams::new(1.0, 1.0, -0.1, 0.0, 1.0, 0.0).is_err());
        assert!(Wavepacket::new(0.0, -1.0).is_err());
    }

    #[test]
    fn empty_lossless_cavity_inverts() {
        let p = figure_params(f64::INFINITY);
        let a = scattering_amplitudes(0, 0.0, &p);
        assert_abs_diff_eq!(a.r.re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.r.im, 0.0, epsilon = 1e-15);
        assert_eq!(a.t, C64::new(0.0, 0.0));
        assert_eq!(a.a, C64::new(0.0, 0.0));
        assert_eq!(a.m, C64::new(0.0, 0.0));
    }

    #[test]
    fn far_detuned_reflects() {
        let p = figure_params(2.0);
        let a = scattering_amplitudes(0, 1e9, &p);
        assert!((a.r - C64::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn empty_cavity_resonance_at_zero() {
        for d in [f64::INFINITY, 1.0, -2.0, 7.0] {
            assert_abs_diff_eq!(shifted_resonance(0, &figure_params(d)), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn dispersive_limit_of_resonance() {
        // n g²/Δ² = 1e-4
        let p = CavityParams::new(10.0, 1.0, 0.0, 0.0, 1.0, 1000.0).unwrap();
        let exact = shifted_resonance(1, &p);
        let shortcut = dispersive_resonance(1, &p);
        assert!(((exact - shortcut) / shortcut).abs() < 1e-2);
        let neg = p.with_delta(-1000.0);
        assert!(((shifted_resonance(1, &neg) - dispersive_resonance(1, &neg)) / shortcut).abs() < 1e-2);
    }

    #[test]
    fn reflection_near_minus_one_on_resonance() {
        // unit resolution keeps the atomic loss at the 1/C scale
        for &c in &[100.0, 1e3, 1e4] {
            let p = CavityParams::one_sided(c, 1.0).unwrap();
            let r = scattering_amplitudes(1, shifted_resonance(1, &p), &p).r;
            assert!((r.re + 1.0).abs() < 5.0 / c, "C={c}: {r}");
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let wp = Wavepacket::new(0.3, 0.1).unwrap();
        let h = 1e-4;
        let total: f64 = (-20000..=20000).map(|k| wp.density(0.3 + k as f64 * h) * h).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    proptest! {
        #[test]
        fn channel_probabilities_sum_to_one(
            n in 0usize..500,
            omega in -1e3f64..1e3,
            c in 0.1f64..1e5,
            d in prop_oneof![Just(f64::INFINITY), -50.0f64..50.0],
            kr in 0.05f64..1.0,
            kt in 0.0f64..1.0,
            km in 0.0f64..1.0,
            gamma in 0.01f64..10.0,
        ) {
            prop_assume!(d != 0.0);
            let p = CavityParams::from_dimensionless(c, d, gamma, kr, kt, km).unwrap();
            let a = scattering_amplitudes(n, omega, &p);
            prop_assert!((a.norm_sqr_sum() - 1.0).abs() < 1e-12);
        }
    }
}
