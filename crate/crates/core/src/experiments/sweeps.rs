//! One-dimensional parameter sweeps. Points run in parallel; results keep
//! grid order.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{inversion_fidelity, optimize_detuning, optimize_steps, worst_case_css_angle, CavityTemplate};
use crate::cavity::HeraldMode;
use crate::{Error, Result};

/// What each sweep point measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepQuantity {
    /// `χ_m` on the worst-case coherent spin state at the optimized `d`.
    PhaseInversion,
    /// End-to-end Grover preparation at the optimized `(k, d, φ)`.
    #[default]
    Grover,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub fidelity: f64,
    pub success_probability: f64,
    pub steps: Option<usize>,
    pub resolution: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: String,
    pub quantity: SweepQuantity,
    pub mode: HeraldMode,
    pub template: CavityTemplate,
    /// Fixed qubit number, if the axis is not `N`.
    pub n_qubits: Option<usize>,
    /// Fixed excitation number, if the axis is not `m`.
    pub m: Option<usize>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    /// Point with the lowest fidelity.
    pub fn argmin(&self) -> Option<&SweepPoint> {
        self.points
            .iter()
            .min_by(|a, b| a.fidelity.total_cmp(&b.fidelity))
    }

    /// `max − min` fidelity over the grid.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.fidelity), hi.max(p.fidelity)));
        hi - lo
    }
}

/// `χ_m` fidelity against the input angle on `points` evenly spaced values
/// in `[0, π]`, at the `d` optimized for the worst-case angle.
pub fn sweep_phi(
    n_qubits: usize,
    m: usize,
    template: &CavityTemplate,
    mode: HeraldMode,
    points: usize,
) -> Result<SweepResult> {
    if points < 2 {
        return Err(Error::RangeViolation {
            what: "sweep points",
            value: points as f64,
            range: "at least 2",
        });
    }
    let d = optimize_detuning(n_qubits, m, template, mode)?.resolution;
    let grid: Vec<f64> = (0..points).map(|i| PI * i as f64 / (points - 1) as f64).collect();
    let out = grid
        .par_iter()
        .map(|&phi| {
            let h = inversion_fidelity(n_qubits, m, phi, d, template, mode)?;
            Ok(SweepPoint {
                x: phi,
                fidelity: h.fidelity,
                success_probability: h.success_probability,
                steps: None,
                resolution: d,
                phi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: "phi".into(),
        quantity: SweepQuantity::PhaseInversion,
        mode,
        template: *template,
        n_qubits: Some(n_qubits),
        m: Some(m),
        points: out,
    })
}

fn point(n_qubits: usize, m: usize, x: f64, template: &CavityTemplate, mode: HeraldMode, quantity: SweepQuantity) -> Result<SweepPoint> {
    match quantity {
        SweepQuantity::PhaseInversion => {
            let opt = optimize_detuning(n_qubits, m, template, mode)?;
            let phi = worst_case_css_angle(n_qubits, m)?;
            let h = inversion_fidelity(n_qubits, m, phi, opt.resolution, template, mode)?;
            Ok(SweepPoint {
                x,
                fidelity: h.fidelity,
                success_probability: h.success_probability,
                steps: None,
                resolution: opt.resolution,
                phi,
            })
        }
        SweepQuantity::Grover => {
            let o = optimize_steps(n_qubits, m, template, None, mode, false)?;
            Ok(SweepPoint {
                x,
                fidelity: o.fidelity,
                success_probability: o.success_probability,
                steps: Some(o.steps),
                resolution: o.resolution,
                phi: o.phi,
            })
        }
    }
}

fn check_grid(values: &[usize], what: &'static str) -> Result<()> {
    if values.is_empty() || values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::RangeViolation {
            what,
            value: values.len() as f64,
            range: "non-empty and strictly increasing",
        });
    }
    Ok(())
}

/// Fidelity against the excitation number at fixed `N`.
pub fn sweep_m(
    n_qubits: usize,
    ms: &[usize],
    template: &CavityTemplate,
    mode: HeraldMode,
    quantity: SweepQuantity,
) -> Result<SweepResult> {
    check_grid(ms, "excitation grid")?;
    let points = ms
        .par_iter()
        .map(|&m| point(n_qubits, m, m as f64, template, mode, quantity))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: "m".into(),
        quantity,
        mode,
        template: *template,
        n_qubits: Some(n_qubits),
        m: None,
        points,
    })
}

/// Fidelity against the qubit number at fixed `m`.
pub fn sweep_n(
    ns: &[usize],
    m: usize,
    template: &CavityTemplate,
    mode: HeraldMode,
    quantity: SweepQuantity,
) -> Result<SweepResult> {
    check_grid(ns, "qubit grid")?;
    let points = ns
        .par_iter()
        .map(|&n| point(n, m, n as f64, template, mode, quantity))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: "n".into(),
        quantity,
        mode,
        template: *template,
        n_qubits: None,
        m: Some(m),
        points,
    })
}
