//! Power-law fits of the inversion infidelity against cooperativity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{inversion_fidelity, optimize_detuning, worst_case_css_angle, CavityTemplate};
use crate::cavity::HeraldMode;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub n_qubits: usize,
    pub m: usize,
    pub mode: HeraldMode,
    pub cooperativities: Vec<f64>,
    pub infidelities: Vec<f64>,
    pub resolutions: Vec<f64>,
    /// Slope of `log₁₀(1 − F)` against `log₁₀ C`.
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the log-space residuals of the fitted points.
    pub residual_norm: f64,
    /// Grid points dropped from each end before fitting.
    pub trimmed: usize,
}

/// Ordinary least squares `y = slope·x + intercept` on `log₁₀` of both axes.
/// Returns `(slope, intercept, residual_norm)`.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateFit(format!("need at least two paired points, got {} and {}", xs.len(), ys.len())));
    }
    if let Some(bad) = xs.iter().chain(ys).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateFit(format!("log of non-positive value {bad}")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log10()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_norm = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((slope, intercept, residual_norm))
}

/// Infidelity of `χ_m` on the worst-case coherent spin state at each `C`,
/// with `d` optimized per point, and its log-log slope.
pub fn fit_scaling(
    n_qubits: usize,
    m: usize,
    mode: HeraldMode,
    cooperativities: &[f64],
    template: &CavityTemplate,
    trim: usize,
) -> Result<ScalingFit> {
    if cooperativities.len() < 2 * trim + 2 {
        return Err(Error::DegenerateFit(format!(
            "{} points cannot be trimmed by {trim} at each end",
            cooperativities.len()
        )));
    }
    let phi = worst_case_css_angle(n_qubits, m)?;
    let rows = cooperativities
        .par_iter()
        .map(|&c| {
            let t = template.with_cooperativity(c);
            let d = optimize_detuning(n_qubits, m, &t, mode)?.resolution;
            let f = inversion_fidelity(n_qubits, m, phi, d, &t, mode)?.fidelity;
            Ok((1.0 - f, d))
        })
        .collect::<Result<Vec<_>>>()?;
    let infidelities: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let resolutions: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let keep = trim..cooperativities.len() - trim;
    let (slope, intercept, residual_norm) = log_log_fit(&cooperativities[keep.clone()], &infidelities[keep])?;
    Ok(ScalingFit {
        n_qubits,
        m,
        mode,
        cooperativities: cooperativities.to_vec(),
        infidelities,
        resolutions,
        slope,
        intercept,
        residual_norm,
        trimmed: trim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let xs = [1e2, 1e3, 1e4, 1e5];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.7)).collect();
        let (s, b, r) = log_log_fit(&xs, &ys).unwrap();
        assert!((s + 0.7).abs() < 1e-12);
        assert!((b - 3f64.log10()).abs() < 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(matches!(log_log_fit(&[1.0], &[1.0]), Err(Error::DegenerateFit(_))));
        assert!(matches!(log_log_fit(&[1.0, 2.0], &[1.0, 0.0]), Err(Error::DegenerateFit(_))));
        assert!(matches!(log_log_fit(&[2.0, 2.0], &[1.0, 3.0]), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn ground_inversion_unheralded_slope() {
        let grid: Vec<f64> = (0..7).map(|i| 10f64.powf(2.0 + 0.5 * i as f64)).collect();
        let t = CavityTemplate::default().with_width(0.0);
        let fit = fit_scaling(15, 0, HeraldMode::Unheralded, &grid, &t, 0).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.1, "{}", fit.slope);
        assert!(fit.residual_norm < 0.05);
    }
}
