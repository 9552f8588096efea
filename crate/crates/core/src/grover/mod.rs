//! Error-free Grover iterations in the Dicke basis.
//!
//! A Grover step is stored as a sequence of diagonal phases and real
//! rotations in the order they act, so applying it to a ket costs
//! `O(N²)` per rotation and the dense matrix is only formed on request.

mod cat;
mod dicke;
mod ghz;

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dicke::{DickeKet, WignerRotation};
use crate::{Error, Result, C64};

pub use cat::{
    admissible_cat_seeds, build_cat_grover, build_cat_grover_step, cat_exact_iteration, cat_overlap,
    cat_state, plan_cat_with_seed, solve_cat_angle, CatParity,
};
pub use dicke::{
    build_dicke_grover, exact_preparation_exists, min_steps_exact, plan_dicke_exact,
    plan_dicke_exact_with_steps, plan_dicke_normal, plan_dicke_scalable, solve_rotation_angle,
};
pub use ghz::{build_ghz_grover, ghz_min_steps_exact, ghz_overlap, ghz_state, GhzVariant};

/// `sin²((2k+1)θ/2)`: target population after `k` ideal iterations.
pub fn grover_fidelity(theta: f64, k: usize) -> f64 {
    ((2 * k + 1) as f64 * theta / 2.0).sin().powi(2)
}

/// Real-valued step count `π/(2θ) − 1/2` for an overlap angle `θ`.
pub fn steps_for_overlap(theta: f64) -> f64 {
    PI / (2.0 * theta) - 0.5
}

/// Nearest integer, but never zero.
pub fn round_steps(k: f64) -> usize {
    (k.round().max(1.0)) as usize
}

/// Overlap angle `θ = 2 arcsin(overlap)`.
pub fn overlap_angle(overlap: f64) -> f64 {
    2.0 * overlap.clamp(-1.0, 1.0).asin()
}

/// Overlap that makes `k` iterations land exactly: `sin(π / (2(2k+1)))`.
pub fn exact_overlap(k: usize) -> f64 {
    (PI / (2.0 * (2 * k + 1) as f64)).sin()
}

/// Smallest `k` accepted by [`long_phase`]: the integer part of `(π−θ)/(2θ)`.
pub fn long_phase_min_steps(theta: f64) -> usize {
    ((PI - theta) / (2.0 * theta)).floor().max(0.0) as usize
}

/// Modified inversion phase for which `k + 1` iterations reach the target
/// exactly: `α = 2 arcsin(sin(π/(4k+6)) / sin(θ/2))`.
pub fn long_phase(theta: f64, k: usize) -> Result<f64> {
    let arg = (PI / (4 * k + 6) as f64).sin() / (theta / 2.0).sin();
    if !(0.0..=1.0 + 1e-12).contains(&arg) {
        return Err(Error::StepsBelowMinimum {
            steps: k,
            min_steps: long_phase_min_steps(theta),
        });
    }
    Ok(2.0 * arg.min(1.0).asin())
}

/// Diagonal phase `e^{iα}` on a set of Dicke indices, identity elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseInversion {
    pub n_qubits: usize,
    pub targets: Vec<usize>,
    pub alpha: f64,
}

impl PhaseInversion {
    pub fn new(n_qubits: usize, targets: Vec<usize>, alpha: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::ZeroQubits);
        }
        if let Some(&m) = targets.iter().find(|&&m| m > n_qubits) {
            return Err(Error::ExcitationOutOfRange { n: n_qubits, m });
        }
        Ok(Self {
            n_qubits,
            targets,
            alpha,
        })
    }

    /// Standard sign flip of a single Dicke state.
    pub fn flip(n_qubits: usize, m: usize) -> Result<Self> {
        Self::new(n_qubits, vec![m], PI)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        let phase = if self.alpha == PI {
            C64::new(-1.0, 0.0)
        } else {
            C64::from_polar(1.0, self.alpha)
        };
        let mut d = vec![C64::new(1.0, 0.0); self.n_qubits + 1];
        for &m in &self.targets {
            d[m] = phase;
        }
        d
    }
}

/// One operation of a Grover step.
#[derive(Debug, Clone)]
pub enum StepOp {
    Diagonal(Vec<C64>),
    /// Photon-driven phase inversion; one photon per target index.
    Inversion(PhaseInversion),
    Rotation(Arc<Array2<f64>>),
    Dense(Array2<C64>),
}

/// Ordered list of operations, first element acts first.
#[derive(Debug, Clone)]
pub struct GroverIteration {
    n_qubits: usize,
    ops: Vec<StepOp>,
}

impl GroverIteration {
    pub fn new(n_qubits: usize, ops: Vec<StepOp>) -> Self {
        Self { n_qubits, ops }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[StepOp] {
        &self.ops
    }

    pub fn apply(&self, ket: &DickeKet) -> DickeKet {
        let mut out = ket.clone();
        for op in &self.ops {
            out = match op {
                StepOp::Diagonal(d) => out.apply_diagonal(d),
                StepOp::Inversion(p) => out.apply_diagonal(&p.diagonal()),
                StepOp::Rotation(r) => out.apply_real(r),
                StepOp::Dense(m) => out.apply_complex(m),
            };
        }
        out
    }

    pub fn apply_steps(&self, ket: &DickeKet, k: usize) -> DickeKet {
        (0..k).fold(ket.clone(), |acc, _| self.apply(&acc))
    }

    /// Dense unitary of one step.
    pub fn matrix(&self) -> Array2<C64> {
        let dim = self.n_qubits + 1;
        let mut acc = Array2::<C64>::eye(dim);
        for op in &self.ops {
            let inversion;
            let op = match op {
                StepOp::Inversion(p) => {
                    inversion = StepOp::Diagonal(p.diagonal());
                    &inversion
                }
                other => other,
            };
            acc = match op {
                StepOp::Inversion(_) => unreachable!("lowered above"),
                StepOp::Diagonal(d) => {
                    let mut next = acc;
                    for (i, mut row) in next.rows_mut().into_iter().enumerate() {
                        row.mapv_inplace(|z| z * d[i]);
                    }
                    next
                }
                StepOp::Rotation(r) => r.mapv(|x| C64::new(x, 0.0)).dot(&acc),
                StepOp::Dense(m) => m.dot(&acc),
            };
        }
        acc
    }

    /// `max |G†G − 𝟙|`.
    pub fn unitarity_error(&self) -> f64 {
        let g = self.matrix();
        let prod = g.t().mapv(|z| z.conj()).dot(&g);
        prod.indexed_iter()
            .map(|((i, j), z)| (z - if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn rotation_op(r: &WignerRotation) -> StepOp {
    StepOp::Rotation(Arc::new(r.matrix().clone()))
}

/// `𝟙 − (1 − e^{iα})|ψ⟩⟨ψ|` as a dense matrix.
pub fn reflection_about(state: &DickeKet, alpha: f64) -> Array2<C64> {
    let dim = state.dim();
    let a = state.amplitudes();
    let factor = C64::new(1.0, 0.0) - C64::from_polar(1.0, alpha);
    Array2::from_shape_fn((dim, dim), |(i, j)| {
        let id = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        id - factor * a[i] * a[j].conj()
    })
}

/// Which state a plan prepares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetState {
    Dicke { m: usize },
    Ghz { variant: GhzVariant },
    Cat { phi: f64, parity: CatParity },
}

/// Everything needed to run one ideal protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolPlan {
    pub target: TargetState,
    pub n_qubits: usize,
    /// Iterations of the (final) Grover step.
    pub steps: usize,
    /// Rotation angle used by the iteration's initial-state reflection.
    pub rotation_angle: f64,
    /// Every angle that solves the exact-overlap condition, ascending.
    pub roots: Vec<f64>,
    /// Inversion phase; `π` for the standard sign flip.
    pub alpha: f64,
    /// `sin(θ/2)`: overlap of the initial state with the target.
    pub overlap: f64,
    pub predicted_fidelity: f64,
    /// Dicke index the iteration starts from (two-part protocols).
    pub seed_m: Option<usize>,
    /// Plan that prepares the seed Dicke state.
    pub seed_plan: Option<Box<ProtocolPlan>>,
    /// Dicke indices whose phase is inverted during one step, in order.
    pub inversions: Vec<usize>,
    /// True when the overlap condition is met exactly (for cat targets,
    /// with respect to the exact target reflection).
    pub exact: bool,
}

impl ProtocolPlan {
    /// Ideal target population after running the plan's iteration.
    pub fn simulate(&self) -> Result<f64> {
        let (initial, iteration, target) = self.components()?;
        let out = iteration.apply_steps(&initial, self.steps);
        Ok(target.fidelity(&out))
    }

    /// `(initial state, step, target state)` of the final protocol stage.
    pub fn components(&self) -> Result<(DickeKet, GroverIteration, DickeKet)> {
        match &self.target {
            TargetState::Dicke { m } => dicke::components(self.n_qubits, *m, self.rotation_angle, self.alpha),
            TargetState::Ghz { variant } => ghz::components(
                self.n_qubits,
                self.seed_m.unwrap_or(self.n_qubits / 2),
                *variant,
                self.rotation_angle,
                self.alpha,
            ),
            TargetState::Cat { phi, parity } => cat::components(
                self.n_qubits,
                self.seed_m.unwrap_or(0),
                *phi,
                *parity,
                self.alpha,
            ),
        }
    }

    /// Total photon reflections across all stages.
    pub fn photon_count(&self) -> usize {
        let own = self.steps * self.inversions.len();
        own + self.seed_plan.as_ref().map_or(0, |p| p.photon_count())
    }
}
