//! Cat-state preparation from a Dicke seed. The target reflection is
//! approximated by reflecting the two coherent components in turn:
//! `G ≈ χ_m R(φ) χ_0 R(−2φ) χ_0 R(φ)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::dicke::plan_dicke_exact;
use super::{
    exact_overlap, long_phase, long_phase_min_steps, overlap_angle, reflection_about, rotation_op,
    round_steps, steps_for_overlap, GroverIteration, PhaseInversion, ProtocolPlan, StepOp,
    TargetState,
};
use crate::dicke::{dicke_overlap, wigner_rotation, DickeKet};
use crate::numeric::brent;
use crate::{Error, Result, C64};

/// Tolerance on the overlap condition when scanning seeds.
const SEED_TOL: f64 = 1e-9;
/// Largest step count considered by the seed scan.
const SEED_MAX_STEPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatParity {
    /// Supported on even `m`.
    Plus,
    /// Supported on odd `m`.
    Minus,
}

impl CatParity {
    fn sign(self) -> f64 {
        match self {
            CatParity::Plus => 1.0,
            CatParity::Minus => -1.0,
        }
    }

    fn admits(self, m: usize) -> bool {
        match self {
            CatParity::Plus => m % 2 == 0,
            CatParity::Minus => m % 2 == 1,
        }
    }
}

/// `(|φ⟩^{⊗N} ± |−φ⟩^{⊗N}) / √(2 ± 2 cos^N φ)`.
pub fn cat_state(n_qubits: usize, phi: f64, parity: CatParity) -> Result<DickeKet> {
    if n_qubits == 0 {
        return Err(Error::ZeroQubits);
    }
    let amps = (0..=n_qubits)
        .map(|m| {
            let a = if parity.admits(m) {
                2.0 * dicke_overlap(n_qubits, m, phi).expect("index in range")
            } else {
                0.0
            };
            C64::new(a, 0.0)
        })
        .collect();
    DickeKet::normalized(amps)
}

/// `|⟨m|cat±, φ⟩|`; zero for the wrong parity.
pub fn cat_overlap(n_qubits: usize, m: usize, phi: f64, parity: CatParity) -> Result<f64> {
    let amp = dicke_overlap(n_qubits, m, phi)?;
    if !parity.admits(m) {
        return Ok(0.0);
    }
    let norm_sqr = 2.0 + parity.sign() * 2.0 * phi.cos().powi(n_qubits as i32);
    if norm_sqr <= 0.0 {
        return Err(Error::RangeViolation {
            what: "cat norm",
            value: norm_sqr,
            range: "> 0",
        });
    }
    Ok((2.0 * amp / norm_sqr.sqrt()).abs())
}

/// Every `φ ∈ (0, π)` at which `|m⟩` has overlap `sin(π/(2(2k+1)))` with
/// the cat state, found by a sign-change scan refined with Brent's method.
pub fn solve_cat_angle(n_qubits: usize, m: usize, k: usize, parity: CatParity) -> Result<Vec<f64>> {
    const GRID: usize = 4096;
    if n_qubits == 0 {
        return Err(Error::ZeroQubits);
    }
    if m > n_qubits {
        return Err(Error::ExcitationOutOfRange { n: n_qubits, m });
    }
    let required = exact_overlap(k);
    let residual = |phi: f64| cat_overlap(n_qubits, m, phi, parity).unwrap_or(0.0) - required;
    let lo = 1e-6;
    let hi = PI - 1e-6;
    let grid: Vec<f64> = (0..=GRID).map(|i| lo + (hi - lo) * i as f64 / GRID as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&p| residual(p)).collect();
    let mut roots = Vec::new();
    for i in 0..GRID {
        if values[i] == 0.0 {
            roots.push(grid[i]);
        } else if values[i] * values[i + 1] < 0.0 {
            if let Some(r) = brent(residual, grid[i], grid[i + 1], 1e-13) {
                roots.push(r);
            }
        }
    }
    if roots.is_empty() {
        let achievable = values.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v)) + required;
        return Err(Error::ExistenceViolated {
            n: n_qubits,
            m,
            steps: k,
            achievable,
            required,
        });
    }
    Ok(roots)
}

/// Approximate step `χ_m(α) χ_φ(α) χ_{−φ}(α)`.
pub fn build_cat_grover_step(n_qubits: usize, m: usize, phi: f64, alpha: f64) -> Result<GroverIteration> {
    let seed = PhaseInversion::new(n_qubits, vec![m], alpha)?;
    let ground = PhaseInversion::new(n_qubits, vec![0], alpha)?;
    let r = wigner_rotation(n_qubits, phi)?;
    let r2 = wigner_rotation(n_qubits, -2.0 * phi)?;
    let ops = vec![
        rotation_op(&r),
        StepOp::Inversion(ground.clone()),
        rotation_op(&r2),
        StepOp::Inversion(ground.clone()),
        rotation_op(&r),
        StepOp::Inversion(seed.clone()),
    ];
    Ok(GroverIteration::new(n_qubits, ops))
}

/// Reference step `χ_m(α) (𝟙 − (1 − e^{iα})|cat⟩⟨cat|)`.
pub fn cat_exact_iteration(
    n_qubits: usize,
    m: usize,
    phi: f64,
    parity: CatParity,
    alpha: f64,
) -> Result<GroverIteration> {
    let cat = cat_state(n_qubits, phi, parity)?;
    let seed = PhaseInversion::new(n_qubits, vec![m], alpha)?;
    let ops = vec![
        StepOp::Dense(reflection_about(&cat, alpha)),
        StepOp::Inversion(seed.clone()),
    ];
    Ok(GroverIteration::new(n_qubits, ops))
}

pub(super) fn components(
    n_qubits: usize,
    m: usize,
    phi: f64,
    parity: CatParity,
    alpha: f64,
) -> Result<(DickeKet, GroverIteration, DickeKet)> {
    Ok((
        DickeKet::basis(n_qubits, m)?,
        build_cat_grover_step(n_qubits, m, phi, alpha)?,
        cat_state(n_qubits, phi, parity)?,
    ))
}

/// Seeds meeting the overlap condition for some `k ≤ 4`, ordered by
/// `k` then `m`.
pub fn admissible_cat_seeds(n_qubits: usize, phi: f64, parity: CatParity) -> Result<Vec<(usize, usize)>> {
    let mut found = Vec::new();
    for m in (0..=n_qubits).filter(|&m| parity.admits(m)) {
        let ov = cat_overlap(n_qubits, m, phi, parity)?;
        for k in 1..=SEED_MAX_STEPS {
            if (ov - exact_overlap(k)).abs() < SEED_TOL {
                found.push((k, m));
            }
        }
    }
    found.sort();
    Ok(found)
}

/// Two-part cat protocol with a fixed seed `|m⟩`.
pub fn plan_cat_with_seed(
    n_qubits: usize,
    phi: f64,
    parity: CatParity,
    m: usize,
    modified_phase: bool,
) -> Result<(ProtocolPlan, GroverIteration)> {
    let overlap = cat_overlap(n_qubits, m, phi, parity)?;
    if overlap == 0.0 {
        return Err(Error::NoAdmissibleSeed { n: n_qubits });
    }
    let theta = overlap_angle(overlap);
    let exact_k = (1..=SEED_MAX_STEPS).find(|&k| (overlap - exact_overlap(k)).abs() < SEED_TOL);
    let (steps, alpha, exact) = match exact_k {
        Some(k) => (k, PI, true),
        None if modified_phase => {
            let k = long_phase_min_steps(theta);
            (k + 1, long_phase(theta, k)?, true)
        }
        None => (round_steps(steps_for_overlap(theta)), PI, false),
    };
    let seed_plan = if m == 0 || m == n_qubits {
        None
    } else {
        Some(Box::new(plan_dicke_exact(n_qubits, m)?))
    };
    let mut plan = ProtocolPlan {
        target: TargetState::Cat { phi, parity },
        n_qubits,
        steps,
        rotation_angle: phi,
        roots: Vec::new(),
        alpha,
        overlap,
        predicted_fidelity: 0.0,
        seed_m: Some(m),
        seed_plan,
        inversions: vec![0, 0, m],
        exact,
    };
    // includes the error of approximating the cat reflection
    plan.predicted_fidelity = plan.simulate()?;
    let step = build_cat_grover_step(n_qubits, m, phi, alpha)?;
    Ok((plan, step))
}

/// Cat protocol with an automatically chosen seed. Seeds that meet the
/// overlap condition for `k ≤ 4` win (smallest `k`, then smallest `m`);
/// otherwise the largest-overlap seed is used with rounded `k`, or with the
/// modified phase when `modified_phase` is set.
pub fn build_cat_grover(
    n_qubits: usize,
    phi: f64,
    parity: CatParity,
    modified_phase: bool,
) -> Result<(ProtocolPlan, GroverIteration)> {
    if n_qubits == 0 {
        return Err(Error::ZeroQubits);
    }
    cat_state(n_qubits, phi, parity).map_err(|_| Error::NoAdmissibleSeed { n: n_qubits })?;
    let seeds = admissible_cat_seeds(n_qubits, phi, parity)?;
    let m = match seeds.first() {
        Some(&(_, m)) => m,
        None => {
            let mut best = None;
            for m in (0..=n_qubits).filter(|&m| parity.admits(m)) {
                let ov = cat_overlap(n_qubits, m, phi, parity)?;
                if ov > 0.0 && best.is_none_or(|(_, b)| ov > b) {
                    best = Some((m, ov));
                }
            }
            best.ok_or(Error::NoAdmissibleSeed { n: n_qubits })?.0
        }
    };
    plan_cat_with_seed(n_qubits, phi, parity, m, modified_phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dicke::css_state;
    use crate::grover::{build_ghz_grover, GhzVariant};
    use approx::assert_abs_diff_eq;

    #[test]
    fn cat_state_matches_definition() {
        let n = 9;
        let phi = 0.8;
        for parity in [CatParity::Plus, CatParity::Minus] {
            let plus = css_state(n, phi).unwrap();
            let minus = css_state(n, -phi).unwrap();
            let raw: Vec<C64> = plus
                .amplitudes()
                .iter()
                .zip(minus.amplitudes())
                .map(|(a, b)| a + parity.sign() * b)
                .collect();
            let norm = 2.0 + parity.sign() * 2.0 * phi.cos().powi(n as i32);
            let reference = DickeKet::new(raw.iter().map(|z| z / norm.sqrt()).collect()).unwrap();
            let cat = cat_state(n, phi, parity).unwrap();
            assert_abs_diff_eq!(cat.fidelity(&reference), 1.0, epsilon = 1e-14);
            for m in 0..=n {
                assert_abs_diff_eq!(
                    cat_overlap(n, m, phi, parity).unwrap(),
                    cat.amplitudes()[m].norm(),
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn component_overlap_decays_geometrically() {
        let n = 20;
        let phi = PI / 3.0;
        let a = css_state(n, phi).unwrap();
        let b = css_state(n, -phi).unwrap();
        assert_abs_diff_eq!(a.fidelity(&b), phi.cos().powi(2 * n as i32), epsilon = 1e-18);
        assert_abs_diff_eq!(phi.cos().powi(2 * n as i32), 2f64.powi(-40), epsilon = 1e-25);
    }

    #[test]
    fn quarter_turn_matches_ghz_pipeline() {
        for n in [4usize, 6, 8, 9, 12, 15, 20] {
            let (ghz, ghz_step) = build_ghz_grover(n, GhzVariant::YBasis, false).unwrap();
            let m = ghz.seed_m.unwrap();
            let parity = if n % 2 == 0 { CatParity::Plus } else { CatParity::Minus };
            let (cat, cat_step) = plan_cat_with_seed(n, PI / 2.0, parity, m, false).unwrap();
            let (g_init, _, g_target) = ghz.components().unwrap();
            let (c_init, _, c_target) = cat.components().unwrap();
            let (mut g, mut c) = (g_init, c_init);
            for _ in 0..4 {
                g = ghz_step.apply(&g);
                c = cat_step.apply(&c);
                assert!((g_target.fidelity(&g) - c_target.fidelity(&c)).abs() < 1e-10, "N = {n}");
            }
        }
    }

    #[test]
    fn approximation_gap_bounded() {
        for n in 10..=30 {
            for &phi in &[PI / 3.0, PI / 4.0, 1.2, 2.0] {
                let (plan, approx_step) = build_cat_grover(n, phi, CatParity::Plus, false).unwrap();
                let m = plan.seed_m.unwrap();
                let exact_step = cat_exact_iteration(n, m, phi, CatParity::Plus, plan.alpha).unwrap();
                let (init, _, target) = plan.components().unwrap();
                let fa = target.fidelity(&approx_step.apply_steps(&init, plan.steps));
                let fe = target.fidelity(&exact_step.apply_steps(&init, plan.steps));
                let bound = 10.0 * phi.cos().abs().powi(n as i32);
                assert!((fa - fe).abs() <= bound, "N={n} φ={phi}: {} > {bound}", (fa - fe).abs());
            }
        }
    }

    #[test]
    fn solved_angle_gives_exact_seed() {
        let (n, m, k) = (12, 6, 2);
        let roots = solve_cat_angle(n, m, k, CatParity::Plus).unwrap();
        for phi in roots {
            assert!((cat_overlap(n, m, phi, CatParity::Plus).unwrap() - exact_overlap(k)).abs() < 1e-11);
            let seeds = admissible_cat_seeds(n, phi, CatParity::Plus).unwrap();
            assert!(seeds.contains(&(k, m)));
            let exact = cat_exact_iteration(n, m, phi, CatParity::Plus, PI).unwrap();
            let target = cat_state(n, phi, CatParity::Plus).unwrap();
            let out = exact.apply_steps(&DickeKet::basis(n, m).unwrap(), k);
            assert!((target.fidelity(&out) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn seed_parity_respected() {
        for parity in [CatParity::Plus, CatParity::Minus] {
            let (plan, _) = build_cat_grover(11, 1.0, parity, false).unwrap();
            assert!(parity.admits(plan.seed_m.unwrap()));
            assert_eq!(plan.inversions.len(), 3);
        }
    }

    #[test]
    fn modified_phase_with_exact_reflection_is_exact() {
        let (plan, _) = build_cat_grover(24, 1.1, CatParity::Plus, true).unwrap();
        let m = plan.seed_m.unwrap();
        let exact = cat_exact_iteration(24, m, 1.1, CatParity::Plus, plan.alpha).unwrap();
        let (init, _, target) = plan.components().unwrap();
        let f = target.fidelity(&exact.apply_steps(&init, plan.steps));
        assert!((f - 1.0).abs() < 1e-9);
    }

    #[test]
    fn undefined_cat_rejected() {
        assert!(matches!(
            build_cat_grover(6, 0.0, CatParity::Minus, false),
            Err(Error::NoAdmissibleSeed { n: 6 })
        ));
    }
}
