//! Resolution and step-count optimizers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{inversion_fidelity, resolution_seed, worst_case_css_angle, CavityTemplate};
use crate::cavity::HeraldMode;
use crate::channels::PhysicalDickeRun;
use crate::grover::{min_steps_exact, solve_rotation_angle};
use crate::numeric::golden_max;
use crate::Result;

const COARSE_POINTS: usize = 17;
const FALLBACK_POINTS: usize = 64;
/// Search window is `[d₀/8, 8 d₀]`.
const WINDOW: f64 = 8.0;
const LOG_XTOL: f64 = 1e-5;
/// Profile steps smaller than this do not count as a change of direction.
const FLAT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetuningOptimum {
    /// Chosen `d`; infinite for `m = 0`.
    pub resolution: f64,
    pub fidelity: f64,
    pub seed: f64,
    pub seed_fidelity: f64,
    /// True when the coarse profile was not unimodal and the 64-point grid
    /// maximum was used instead of golden-section refinement.
    pub grid_fallback: bool,
}

fn is_unimodal(values: &[f64]) -> bool {
    let peak = argmax(values);
    values[..=peak].windows(2).all(|w| w[1] >= w[0] - FLAT_TOL)
        && values[peak..].windows(2).all(|w| w[1] <= w[0] + FLAT_TOL)
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Resolution maximizing the `χ_m` fidelity on the worst-case coherent spin
/// state, searched in `ln d` around the analytic seed.
pub fn optimize_detuning(
    n_qubits: usize,
    m: usize,
    template: &CavityTemplate,
    mode: HeraldMode,
) -> Result<DetuningOptimum> {
    let phi = worst_case_css_angle(n_qubits, m)?;
    let seed = resolution_seed(m, template.cooperativity, mode);
    let eval = |d: f64| inversion_fidelity(n_qubits, m, phi, d, template, mode).map(|h| h.fidelity);
    let seed_fidelity = eval(seed)?;
    if m == 0 {
        return Ok(DetuningOptimum {
            resolution: seed,
            fidelity: seed_fidelity,
            seed,
            seed_fidelity,
            grid_fallback: false,
        });
    }

    let (lo, hi) = ((seed / WINDOW).ln(), (seed * WINDOW).ln());
    let coarse = log_grid(lo, hi, COARSE_POINTS);
    let values = coarse
        .par_iter()
        .map(|&x| eval(x.exp()))
        .collect::<Result<Vec<f64>>>()?;

    let (mut best_x, mut best_f, grid_fallback) = if is_unimodal(&values) {
        let i = argmax(&values);
        let a = coarse[i.saturating_sub(1)];
        let b = coarse[(i + 1).min(COARSE_POINTS - 1)];
        let mut failure = None;
        let (x, f) = golden_max(
            |x| match eval(x.exp()) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NEG_INFINITY
                }
            },
            a,
            b,
            LOG_XTOL,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        if f >= values[i] { (x, f, false) } else { (coarse[i], values[i], false) }
    } else {
        let fine = log_grid(lo, hi, FALLBACK_POINTS);
        let fine_values = fine
            .par_iter()
            .map(|&x| eval(x.exp()))
            .collect::<Result<Vec<f64>>>()?;
        let i = argmax(&fine_values);
        (fine[i], fine_values[i], true)
    };
    if seed_fidelity > best_f {
        best_x = seed.ln();
        best_f = seed_fidelity;
    }
    Ok(DetuningOptimum {
        resolution: best_x.exp(),
        fidelity: best_f,
        seed,
        seed_fidelity,
        grid_fallback,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepsOptimum {
    pub steps: usize,
    pub min_steps: usize,
    pub phi: f64,
    pub resolution: f64,
    pub fidelity: f64,
    pub success_probability: f64,
    /// The run went through `N − m` and a final global flip.
    pub mirrored: bool,
}

/// Best end-to-end physical Grover fidelity over `k ∈ [k_min, k_min + 3]`
/// and every exact-overlap root at each `k`. The resolution is optimized
/// for the inversion actually performed (`min(m, N − m)`) unless given.
/// With `refine_phi` the angle is also tuned around each root.
pub fn optimize_steps(
    n_qubits: usize,
    m: usize,
    template: &CavityTemplate,
    resolution: Option<f64>,
    mode: HeraldMode,
    refine_phi: bool,
) -> Result<StepsOptimum> {
    let k_min = min_steps_exact(n_qubits, m)?;
    let mirrored = 2 * m > n_qubits;
    let m_run = m.min(n_qubits - m);
    let d = match resolution {
        Some(d) => d,
        None => optimize_detuning(n_qubits, m_run, template, mode)?.resolution,
    };
    let params = template.at(d)?;

    let mut candidates = Vec::new();
    for k in k_min..=k_min + 3 {
        for phi in solve_rotation_angle(n_qubits, m, k)? {
            candidates.push((k, phi));
        }
    }
    let run = |k: usize, phi: f64| -> Result<(f64, f64)> {
        let r = PhysicalDickeRun::new(n_qubits, m, phi, k, template.width, &params, mode)?.metrics()?;
        Ok((r.fidelity, r.success_probability))
    };
    let evaluated = candidates
        .par_iter()
        .map(|&(k, phi)| {
            let phi = if refine_phi {
                let (lo, hi) = ((phi - 0.2).max(0.0), (phi + 0.2).min(std::f64::consts::PI));
                golden_max(|p| run(k, p).map_or(f64::NEG_INFINITY, |r| r.0), lo, hi, 1e-6).0
            } else {
                phi
            };
            run(k, phi).map(|(f, p)| (k, phi, f, p))
        })
        .collect::<Result<Vec<_>>>()?;

    // ties (within rounding) go to fewer steps, then the smaller angle
    let best = evaluated
        .iter()
        .copied()
        .fold(None::<(usize, f64, f64, f64)>, |acc, c| match acc {
            Some(b) if c.2 <= b.2 + 1e-12 => Some(b),
            _ => Some(c),
        })
        .expect("at least one root exists at k_min");
    Ok(StepsOptimum {
        steps: best.0,
        min_steps: k_min,
        phi: best.1,
        resolution: d,
        fidelity: best.2,
        success_probability: best.3,
        mirrored,
    })
}
