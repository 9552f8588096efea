//! Dicke-state protocols: normal (Hadamard), scalable (peak-overlap) and exact.

use std::f64::consts::PI;

use super::{
    exact_overlap, grover_fidelity, long_phase, long_phase_min_steps, overlap_angle, rotation_op,
    round_steps, steps_for_overlap, GroverIteration, PhaseInversion, ProtocolPlan, StepOp,
    TargetState,
};
use crate::dicke::{css_state, dicke_overlap, max_dicke_overlap, optimal_css_angle, wigner_rotation, DickeKet};
use crate::numeric::brent;
use crate::{Error, Result};

const ROOT_XTOL: f64 = 1e-13;

/// `G = R(φ) χ_0(α) R(−φ) χ_m(α)`; ops are stored in the order they act.
pub fn build_dicke_grover(n_qubits: usize, m: usize, phi: f64, alpha: f64) -> Result<GroverIteration> {
    let target = PhaseInversion::new(n_qubits, vec![m], alpha)?;
    let ground = PhaseInversion::new(n_qubits, vec![0], alpha)?;
    let forward = wigner_rotation(n_qubits, phi)?;
    let ops = vec![
        StepOp::Inversion(target.clone()),
        rotation_op(&forward.inverse()),
        StepOp::Inversion(ground.clone()),
        rotation_op(&forward),
    ];
    Ok(GroverIteration::new(n_qubits, ops))
}

pub(super) fn components(
    n_qubits: usize,
    m: usize,
    phi: f64,
    alpha: f64,
) -> Result<(DickeKet, GroverIteration, DickeKet)> {
    Ok((
        css_state(n_qubits, phi)?,
        build_dicke_grover(n_qubits, m, phi, alpha)?,
        DickeKet::basis(n_qubits, m)?,
    ))
}

fn check_interior(n_qubits: usize, m: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::ZeroQubits);
    }
    if m == 0 || m >= n_qubits {
        return Err(Error::ExcitationOutOfRange { n: n_qubits, m });
    }
    Ok(())
}

/// Whether some `φ ∈ [0, π]` gives overlap `sin(π/(2(2k+1)))` with `|m⟩`.
pub fn exact_preparation_exists(n_qubits: usize, m: usize, k: usize) -> Result<bool> {
    check_interior(n_qubits, m)?;
    let canonical = m.min(n_qubits - m);
    Ok(max_dicke_overlap(n_qubits, canonical)? >= exact_overlap(k))
}

/// All `φ ∈ [0, π]` with `dicke_overlap(N, m, φ) = sin(π/(2(2k+1)))`, ascending.
pub fn solve_rotation_angle(n_qubits: usize, m: usize, k: usize) -> Result<Vec<f64>> {
    check_interior(n_qubits, m)?;
    if k == 0 {
        return Err(Error::RangeViolation {
            what: "steps",
            value: 0.0,
            range: "k >= 1",
        });
    }
    let required = exact_overlap(k);
    let achievable = max_dicke_overlap(n_qubits, m)?;
    if achievable < required {
        return Err(Error::ExistenceViolated {
            n: n_qubits,
            m,
            steps: k,
            achievable,
            required,
        });
    }
    let peak = optimal_css_angle(n_qubits, m)?;
    let residual = |phi: f64| dicke_overlap(n_qubits, m, phi).expect("checked index") - required;
    if residual(peak) <= 0.0 {
        // tangent root at the peak
        return Ok(vec![peak]);
    }
    let left = brent(residual, 0.0, peak, ROOT_XTOL).expect("bracketed by construction");
    let right = brent(residual, peak, PI, ROOT_XTOL).expect("bracketed by construction");
    Ok(vec![left, right])
}

/// Smallest `k` with an exact rotation angle. Symmetric in `m ↔ N − m`.
pub fn min_steps_exact(n_qubits: usize, m: usize) -> Result<usize> {
    check_interior(n_qubits, m)?;
    let canonical = m.min(n_qubits - m);
    let peak = max_dicke_overlap(n_qubits, canonical)?;
    Ok((1..).find(|&k| peak >= exact_overlap(k)).expect("overlap is positive"))
}

/// Exact protocol with the minimal step count.
pub fn plan_dicke_exact(n_qubits: usize, m: usize) -> Result<ProtocolPlan> {
    let k = min_steps_exact(n_qubits, m)?;
    plan_dicke_exact_with_steps(n_qubits, m, k)
}

/// Exact protocol with a caller-chosen step count; the smaller root is used.
pub fn plan_dicke_exact_with_steps(n_qubits: usize, m: usize, k: usize) -> Result<ProtocolPlan> {
    let roots = solve_rotation_angle(n_qubits, m, k)?;
    Ok(ProtocolPlan {
        target: TargetState::Dicke { m },
        n_qubits,
        steps: k,
        rotation_angle: roots[0],
        roots,
        alpha: PI,
        overlap: exact_overlap(k),
        predicted_fidelity: 1.0,
        seed_m: None,
        seed_plan: None,
        inversions: vec![m, 0],
        exact: true,
    })
}

fn plan_at_angle(n_qubits: usize, m: usize, phi: f64, modified_phase: bool) -> Result<ProtocolPlan> {
    check_interior(n_qubits, m)?;
    let overlap = dicke_overlap(n_qubits, m, phi)?.abs();
    let theta = overlap_angle(overlap);
    let (steps, alpha, predicted) = if modified_phase {
        let k = long_phase_min_steps(theta);
        (k + 1, long_phase(theta, k)?, 1.0)
    } else {
        let k = round_steps(steps_for_overlap(theta));
        (k, PI, grover_fidelity(theta, k))
    };
    Ok(ProtocolPlan {
        target: TargetState::Dicke { m },
        n_qubits,
        steps,
        rotation_angle: phi,
        roots: Vec::new(),
        alpha,
        overlap,
        predicted_fidelity: predicted,
        seed_m: None,
        seed_plan: None,
        inversions: vec![m, 0],
        exact: modified_phase,
    })
}

/// Rotation to the peak-overlap angle `arccos((N−2m)/N)`, step count
/// rounded to the nearest non-zero integer (or the modified phase).
pub fn plan_dicke_scalable(n_qubits: usize, m: usize, modified_phase: bool) -> Result<ProtocolPlan> {
    check_interior(n_qubits, m)?;
    plan_at_angle(n_qubits, m, optimal_css_angle(n_qubits, m)?, modified_phase)
}

/// Starts from the equal superposition. `H χ_0 H = R(π/2) χ_0 R(−π/2)`,
/// so this is the scalable iteration at `φ = π/2`.
pub fn plan_dicke_normal(n_qubits: usize, m: usize, modified_phase: bool) -> Result<ProtocolPlan> {
    plan_at_angle(n_qubits, m, PI / 2.0, modified_phase)
}
