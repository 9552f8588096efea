//! GHZ preparation from a Dicke seed. Every variant iterates
//! `G = R(ψ) χ_m R(−ψ) χ_0 χ_N` on `R(ψ)|m⟩`; they differ in `ψ` and `m`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::dicke::plan_dicke_exact;
use super::{
    exact_overlap, grover_fidelity, long_phase, long_phase_min_steps, overlap_angle, rotation_op,
    round_steps, steps_for_overlap, GroverIteration, PhaseInversion, ProtocolPlan, StepOp,
    TargetState,
};
use crate::dicke::{dicke_overlap, parity_diagonal, wigner_rotation, DickeKet};
use crate::numeric::{brent, ln_binomial};
use crate::{Error, Result, C64};

/// Which basis the seed Dicke state is rotated into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhzVariant {
    /// `H^{⊗N}`; seed `m` even.
    Hadamard,
    /// `R(−π/2)`; seed `m ≡ N (mod 2)`.
    YBasis,
    /// `R(−φ)` with `φ` solving the exact-overlap condition; `m = N/2` even.
    Exact,
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz_state(n_qubits: usize) -> Result<DickeKet> {
    if n_qubits == 0 {
        return Err(Error::ZeroQubits);
    }
    let mut amps = vec![C64::new(0.0, 0.0); n_qubits + 1];
    amps[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[n_qubits] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    DickeKet::new(amps)
}

/// `|⟨GHZ| R(ψ) |m⟩|`.
pub fn ghz_overlap(n_qubits: usize, m: usize, psi: f64) -> Result<f64> {
    // ⟨GHZ|R(ψ)|m⟩ = (⟨m|R(−ψ)|0⟩ + ⟨m|R(−ψ)|N⟩)/√2 and |N⟩ = R(π)|0⟩
    let a = dicke_overlap(n_qubits, m, -psi)?;
    let b = dicke_overlap(n_qubits, m, PI - psi)?;
    Ok(((a + b) / std::f64::consts::SQRT_2).abs())
}

fn seed_rotation(variant: GhzVariant, angle: f64) -> f64 {
    match variant {
        GhzVariant::Hadamard => angle,
        GhzVariant::YBasis | GhzVariant::Exact => -angle,
    }
}

fn build_iteration(
    n_qubits: usize,
    m: usize,
    variant: GhzVariant,
    angle: f64,
    alpha: f64,
) -> Result<GroverIteration> {
    let target = PhaseInversion::new(n_qubits, vec![0, n_qubits], alpha)?;
    let seed = PhaseInversion::new(n_qubits, vec![m], alpha)?;
    let psi = seed_rotation(variant, angle);
    let r = wigner_rotation(n_qubits, psi)?;
    let ops = match variant {
        // H χ_m H with H = R(π/2) Z = Z R(−π/2)
        GhzVariant::Hadamard => vec![
            StepOp::Inversion(target.clone()),
            rotation_op(&r.inverse()),
            StepOp::Diagonal(parity_diagonal(n_qubits)),
            StepOp::Inversion(seed.clone()),
            StepOp::Diagonal(parity_diagonal(n_qubits)),
            rotation_op(&r),
        ],
        _ => vec![
            StepOp::Inversion(target.clone()),
            rotation_op(&r.inverse()),
            StepOp::Inversion(seed.clone()),
            rotation_op(&r),
        ],
    };
    Ok(GroverIteration::new(n_qubits, ops))
}

fn initial_state(n_qubits: usize, m: usize, variant: GhzVariant, angle: f64) -> Result<DickeKet> {
    let basis = DickeKet::basis(n_qubits, m)?;
    let psi = seed_rotation(variant, angle);
    let r = wigner_rotation(n_qubits, psi)?;
    let seeded = match variant {
        GhzVariant::Hadamard => basis.apply_diagonal(&parity_diagonal(n_qubits)),
        _ => basis,
    };
    Ok(r.apply(&seeded))
}

pub(super) fn components(
    n_qubits: usize,
    m: usize,
    variant: GhzVariant,
    angle: f64,
    alpha: f64,
) -> Result<(DickeKet, GroverIteration, DickeKet)> {
    Ok((
        initial_state(n_qubits, m, variant, angle)?,
        build_iteration(n_qubits, m, variant, angle, alpha)?,
        ghz_state(n_qubits)?,
    ))
}

/// Seed index with the required parity closest to `N/2`; ties go to the
/// larger overlap, then the smaller `m`.
fn choose_seed(n_qubits: usize, parity: usize) -> usize {
    let half = n_qubits as f64 / 2.0;
    let mut candidates: Vec<usize> = (0..=n_qubits).filter(|m| m % 2 == parity).collect();
    candidates.sort_by(|&a, &b| {
        let da = (a as f64 - half).abs();
        let db = (b as f64 - half).abs();
        da.partial_cmp(&db)
            .unwrap()
            .then_with(|| ln_binomial(n_qubits, b).partial_cmp(&ln_binomial(n_qubits, a)).unwrap())
            .then(a.cmp(&b))
    });
    candidates[0]
}

/// Plan that prepares `|m⟩` from `|0…0⟩`; `None` for the trivial extremes.
fn seed_plan(n_qubits: usize, m: usize) -> Result<Option<Box<ProtocolPlan>>> {
    if m == 0 || m == n_qubits {
        return Ok(None);
    }
    Ok(Some(Box::new(plan_dicke_exact(n_qubits, m)?)))
}

/// Peak exact-variant overlap `√(C(N,N/2)/2^{N−1})` at `φ = π/2`.
fn exact_variant_peak(n_qubits: usize) -> f64 {
    (0.5 * (ln_binomial(n_qubits, n_qubits / 2) - (n_qubits as f64 - 1.0) * 2f64.ln())).exp()
}

/// Smallest `k` for which the exact variant has a solution.
pub fn ghz_min_steps_exact(n_qubits: usize) -> Result<usize> {
    check_exact_parity(n_qubits)?;
    let peak = exact_variant_peak(n_qubits);
    Ok((1..).find(|&k| peak >= exact_overlap(k)).expect("overlap is positive"))
}

fn check_exact_parity(n_qubits: usize) -> Result<()> {
    if n_qubits < 2 {
        return Err(Error::ZeroQubits);
    }
    if n_qubits % 2 == 1 {
        return Err(Error::ParityInfeasible {
            m: n_qubits / 2,
            fallback: choose_seed(n_qubits, 0),
        });
    }
    let half = n_qubits / 2;
    if half % 2 == 1 {
        return Err(Error::ParityInfeasible {
            m: half,
            fallback: choose_seed(n_qubits, 0),
        });
    }
    Ok(())
}

/// Roots of `√(2 C(N,N/2)) (sin φ / 2)^{N/2} = sin(π/(2(2k+1)))`, ascending.
fn solve_exact_angle(n_qubits: usize, k: usize) -> Result<Vec<f64>> {
    let half = n_qubits / 2;
    let required = exact_overlap(k);
    let achievable = exact_variant_peak(n_qubits);
    if achievable < required {
        return Err(Error::ExistenceViolated {
            n: n_qubits,
            m: half,
            steps: k,
            achievable,
            required,
        });
    }
    let residual = |phi: f64| ghz_overlap(n_qubits, half, -phi).expect("valid index") - required;
    if residual(PI / 2.0) <= 0.0 {
        return Ok(vec![PI / 2.0]);
    }
    let left = brent(residual, 0.0, PI / 2.0, 1e-13).expect("bracketed by construction");
    let right = brent(residual, PI / 2.0, PI, 1e-13).expect("bracketed by construction");
    Ok(vec![left, right])
}

/// Two-part GHZ protocol: an exact Dicke plan for the seed, then the GHZ
/// iteration. `modified_phase` replaces nearest-integer rounding with the
/// modified inversion phase (ignored by the exact variant).
pub fn build_ghz_grover(
    n_qubits: usize,
    variant: GhzVariant,
    modified_phase: bool,
) -> Result<(ProtocolPlan, GroverIteration)> {
    if n_qubits < 2 {
        return Err(Error::ZeroQubits);
    }
    let (m, angle, roots) = match variant {
        GhzVariant::Hadamard => (choose_seed(n_qubits, 0), PI / 2.0, Vec::new()),
        GhzVariant::YBasis => (choose_seed(n_qubits, n_qubits % 2), PI / 2.0, Vec::new()),
        GhzVariant::Exact => {
            check_exact_parity(n_qubits)?;
            let k = ghz_min_steps_exact(n_qubits)?;
            let roots = solve_exact_angle(n_qubits, k)?;
            (n_qubits / 2, roots[0], roots)
        }
    };
    let overlap = ghz_overlap(n_qubits, m, seed_rotation(variant, angle))?;
    let theta = overlap_angle(overlap);
    let (steps, alpha, predicted, exact) = match variant {
        GhzVariant::Exact => (ghz_min_steps_exact(n_qubits)?, PI, 1.0, true),
        _ if modified_phase => {
            let k = long_phase_min_steps(theta);
            (k + 1, long_phase(theta, k)?, 1.0, true)
        }
        _ => {
            let k = round_steps(steps_for_overlap(theta));
            (k, PI, grover_fidelity(theta, k), false)
        }
    };
    let plan = ProtocolPlan {
        target: TargetState::Ghz { variant },
        n_qubits,
        steps,
        rotation_angle: angle,
        roots,
        alpha,
        overlap,
        predicted_fidelity: predicted,
        seed_m: Some(m),
        seed_plan: seed_plan(n_qubits, m)?,
        inversions: vec![0, n_qubits, m],
        exact,
    };
    let iteration = build_iteration(n_qubits, m, variant, angle, alpha)?;
    Ok((plan, iteration))
}
