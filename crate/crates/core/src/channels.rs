//! Channels on vectorized density matrices: imperfect mode matching, the
//! cavity superoperator, collective rotations and the physical Grover step.
//!
//! States are row-major `vec(ρ)`, so a diagonal superoperator is an
//! elementwise product and a rotation is applied as `R ρ Rᵀ` after reshaping.

use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::cavity::{build_superop, CavityParams, DiagonalSuperop, HeraldMode};
use crate::dicke::{css_state, wigner_rotation, DickeKet, LiouvilleState, WignerRotation};
use crate::grover::{GroverIteration, PhaseInversion, StepOp};
use crate::numeric::{brent, conjugate_real};
use crate::{Error, Result, C64};

/// Heralded traces below this are reported as total loss.
pub const TOTAL_LOSS_TRACE: f64 = 1e-15;

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_zeta(zeta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&zeta) {
        return Err(Error::RangeViolation {
            what: "mode-matching efficiency",
            value: zeta,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// `ρ ↦ U ρ U†` for any step operation.
pub fn conjugate_by(state: &LiouvilleState, op: &StepOp) -> Result<LiouvilleState> {
    match op {
        StepOp::Diagonal(d) => conjugate_diagonal(state, d),
        StepOp::Inversion(p) => conjugate_diagonal(state, &p.diagonal()),
        StepOp::Rotation(r) => {
            check_dims(state.dim(), r.nrows())?;
            let out = conjugate_real(r.view(), &state.to_matrix());
            Ok(LiouvilleState::from_matrix_unchecked(out))
        }
        StepOp::Dense(u) => {
            check_dims(state.dim(), u.nrows())?;
            let rho = state.to_matrix();
            let out = u.dot(&rho).dot(&u.t().mapv(|z| z.conj()));
            Ok(LiouvilleState::from_matrix_unchecked(out))
        }
    }
}

fn conjugate_diagonal(state: &LiouvilleState, d: &[C64]) -> Result<LiouvilleState> {
    check_dims(state.dim(), d.len())?;
    let dim = state.dim();
    let mut out = state.clone();
    for (idx, z) in out.as_mut_slice().iter_mut().enumerate() {
        *z *= d[idx / dim] * d[idx % dim].conj();
    }
    Ok(out)
}

/// Imperfectly mode-matched application of a unitary: with probability
/// `ζ` the photon couples and `χ` acts, otherwise the state is untouched.
#[derive(Debug, Clone)]
pub struct MismatchChannel {
    zeta: f64,
    inner: StepOp,
}

impl MismatchChannel {
    pub fn new(zeta: f64, inner: StepOp) -> Result<Self> {
        check_zeta(zeta)?;
        Ok(Self { zeta, inner })
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn inner(&self) -> &StepOp {
        &self.inner
    }

    pub fn apply(&self, state: &LiouvilleState) -> Result<LiouvilleState> {
        let coupled = conjugate_by(state, &self.inner)?;
        Ok(mix(&coupled, state, self.zeta))
    }
}

/// `ζ a + (1 − ζ) b`.
fn mix(a: &LiouvilleState, b: &LiouvilleState, zeta: f64) -> LiouvilleState {
    let mut out = a.clone();
    for (o, &x) in out.as_mut_slice().iter_mut().zip(b.as_slice()) {
        *o = *o * zeta + x * (1.0 - zeta);
    }
    out
}

/// `ζ χρχ† + (1 − ζ)ρ`.
pub fn apply_mismatch(state: &LiouvilleState, chi: &StepOp, zeta: f64) -> Result<LiouvilleState> {
    MismatchChannel::new(zeta, chi.clone())?.apply(state)
}

/// How many mismatch events a phase inversion contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MismatchEvents {
    /// One per reflected photon, i.e. per inverted Dicke index.
    #[default]
    PerPhoton,
    /// One per inversion operator regardless of how many indices it flips.
    PerInversion,
}

/// Runs `k` Grover steps where every phase inversion is mode-mismatched
/// and every other operation is exact.
pub fn apply_mismatched_steps(
    state: &LiouvilleState,
    iteration: &GroverIteration,
    zeta: f64,
    events: MismatchEvents,
    k: usize,
) -> Result<LiouvilleState> {
    check_zeta(zeta)?;
    let mut rho = state.clone();
    for _ in 0..k {
        for op in iteration.ops() {
            rho = match (op, events) {
                (StepOp::Inversion(p), MismatchEvents::PerPhoton) => {
                    let mut acc = rho;
                    for &t in &p.targets {
                        let single = PhaseInversion::new(p.n_qubits, vec![t], p.alpha)?;
                        acc = apply_mismatch(&acc, &StepOp::Inversion(single), zeta)?;
                    }
                    acc
                }
                (StepOp::Inversion(_), MismatchEvents::PerInversion) => apply_mismatch(&rho, op, zeta)?,
                _ => conjugate_by(&rho, op)?,
            };
        }
    }
    Ok(rho)
}

/// Target fidelity after `k ∈ 1..=4` mismatched Dicke Grover steps from an
/// initial state with `sin(θ/2)` overlap.
pub fn mismatch_fidelity_closed(k: usize, zeta: f64, theta: f64) -> Result<f64> {
    check_zeta(zeta)?;
    let c = |j: f64| (j * theta).cos();
    let z = zeta;
    let base = 0.5 * (1.0 - c(1.0));
    let poly = match k {
        1 => z.powi(2) * (c(1.0) - c(3.0)),
        2 => {
            z.powi(4) * (2.0 * c(1.0) - 2.0 * c(1.0) * c(4.0))
                + z.powi(3) * (8.0 * c(1.0) * c(2.0) - 8.0 * c(1.0))
                + z.powi(2) * (6.0 * c(1.0) - 6.0 * c(1.0) * c(2.0))
        }
        3 => {
            z.powi(6) * (5.0 * c(1.0) - c(3.0) - 3.0 * c(5.0) - c(7.0))
                + z.powi(5) * (-16.0 * c(1.0) + 8.0 * c(3.0) + 8.0 * c(5.0))
                + z.powi(4) * (22.0 * c(1.0) - 17.0 * c(3.0) - 5.0 * c(5.0))
                + z.powi(3) * (16.0 * c(3.0) - 16.0 * c(1.0))
                + z.powi(2) * (6.0 * c(1.0) - 6.0 * c(3.0))
        }
        4 => {
            z.powi(8) * (14.0 * c(1.0) - 8.0 * c(5.0) - 5.0 * c(7.0) - c(9.0))
                + z.powi(7) * (-60.0 * c(1.0) + 12.0 * c(3.0) + 36.0 * c(5.0) + 12.0 * c(7.0))
                + z.powi(6) * (115.0 * c(1.0) - 47.0 * c(3.0) - 61.0 * c(5.0) - 7.0 * c(7.0))
                + z.powi(5) * (-128.0 * c(1.0) + 80.0 * c(3.0) + 48.0 * c(5.0))
                + z.powi(4) * (90.0 * c(1.0) - 75.0 * c(3.0) - 15.0 * c(5.0))
                + z.powi(3) * (40.0 * c(3.0) - 40.0 * c(1.0))
                + z.powi(2) * (10.0 * c(1.0) - 10.0 * c(3.0))
        }
        _ => return Err(Error::UnsupportedSteps(k)),
    };
    Ok(0.5 * poly + base)
}

/// Same fidelity at the exact-preparation overlap `θ/2 = π/(2(2k+1))`,
/// from the polynomial with its special-angle coefficients.
pub fn mismatch_fidelity_exact_overlap(k: usize, zeta: f64) -> Result<f64> {
    check_zeta(zeta)?;
    let z = zeta;
    let (s, c) = (f64::sin, f64::cos);
    let f = match k {
        1 => (1.0 + 3.0 * z * z) / 4.0,
        2 => {
            let r5 = 5f64.sqrt();
            ((5.0 + 3.0 * r5) * z.powi(4) - 8.0 * r5 * z.powi(3) + 6.0 * r5 * z * z - r5 + 3.0) / 8.0
        }
        3 => {
            let (a, b, cc) = (s(PI / 14.0), s(3.0 * PI / 14.0), c(PI / 7.0));
            a * a
                * (2.0 * z.powi(6) * (10.0 + 4.0 * a + 13.0 * b + 19.0 * cc)
                    - 16.0 * z.powi(5) * (3.0 + a + 4.0 * b + 6.0 * cc)
                    + z.powi(4) * (54.0 + 10.0 * a + 64.0 * b + 108.0 * cc)
                    - 32.0 * z.powi(3) * (1.0 + b + 2.0 * cc)
                    + 12.0 * z * z * (1.0 + b + 2.0 * cc)
                    + 1.0)
        }
        4 => {
            let (a, c1, c2) = (s(PI / 18.0), c(PI / 9.0), c(2.0 * PI / 9.0));
            a * a
                * (z.powi(8) * (104.0 + 28.0 * a + 138.0 * c1 + 108.0 * c2)
                    + z.powi(7) * (-348.0 - 96.0 * a - 480.0 * c1 - 360.0 * c2)
                    + z.powi(6) * (523.0 + 136.0 * a + 760.0 * c1 + 530.0 * c2)
                    + z.powi(5) * (-448.0 - 96.0 * a - 704.0 * c1 - 448.0 * c2)
                    + z.powi(4) * (240.0 + 30.0 * a + 420.0 * c1 + 240.0 * c2)
                    + z.powi(3) * (-80.0 - 160.0 * c1 - 80.0 * c2)
                    + z * z * (20.0 + 40.0 * c1 + 20.0 * c2)
                    + 1.0)
        }
        _ => return Err(Error::UnsupportedSteps(k)),
    };
    Ok(f)
}

/// Smallest `ζ` reaching `fidelity` after `k` steps at the exact-preparation
/// overlap. The fidelity is increasing in `ζ` on `[1/2, 1]`.
pub fn mismatch_threshold(k: usize, fidelity: f64) -> Result<f64> {
    let f = |z: f64| mismatch_fidelity_exact_overlap(k, z).map(|v| v - fidelity);
    let lo = f(0.5)?;
    if lo >= 0.0 {
        return Ok(0.5);
    }
    if f(1.0)? < 0.0 {
        return Err(Error::RangeViolation {
            what: "target fidelity",
            value: fidelity,
            range: "at most 1",
        });
    }
    brent(|z| f(z).expect("k validated above"), 0.5, 1.0, 1e-15)
        .ok_or_else(|| Error::InvalidParams("threshold root not bracketed".into()))
}

/// Elementwise product with the superoperator diagonal.
pub fn apply_superop(state: &LiouvilleState, sup: &DiagonalSuperop) -> Result<LiouvilleState> {
    check_dims(state.as_slice().len(), sup.entries().len())?;
    let mut out = state.clone();
    for (z, k) in out.as_mut_slice().iter_mut().zip(sup.entries()) {
        *z *= k;
    }
    Ok(out)
}

/// `R ρ Rᵀ`.
pub fn apply_rotation_conjugation(state: &LiouvilleState, r: &WignerRotation) -> Result<LiouvilleState> {
    check_dims(state.dim(), r.matrix().nrows())?;
    let out = conjugate_real(r.matrix().view(), &state.to_matrix());
    Ok(LiouvilleState::from_matrix_unchecked(out))
}

/// Reverses the Dicke index on rows and columns (global `X^{⊗N}`).
pub fn x_flip_all(state: &LiouvilleState) -> LiouvilleState {
    let mut data = state.as_slice().to_vec();
    data.reverse();
    LiouvilleState::from_vec(state.n_qubits(), data).expect("same shape")
}

/// One Dicke Grover step with cavity-implemented inversions:
/// `χ_m`, then `R(−φ)`, then `χ_0`, then `R(φ)`.
#[derive(Debug, Clone)]
pub struct PhysicalGroverStep {
    rotation: WignerRotation,
    inverse: WignerRotation,
    target: DiagonalSuperop,
    ground: DiagonalSuperop,
    mode: HeraldMode,
    zeta: f64,
}

impl PhysicalGroverStep {
    /// Superoperators built from the cavity model. The target photon is
    /// centred on the shifted resonance of `m`, the ground photon on the
    /// empty resonant cavity.
    pub fn new(
        n_qubits: usize,
        m: usize,
        phi: f64,
        width: f64,
        params: &CavityParams,
        mode: HeraldMode,
    ) -> Result<Self> {
        let target = build_superop(n_qubits, m, width, params, mode)?;
        let ground = build_superop(n_qubits, 0, width, params, mode)?;
        Self::from_superops(phi, target, ground)
    }

    pub fn from_superops(phi: f64, target: DiagonalSuperop, ground: DiagonalSuperop) -> Result<Self> {
        check_dims(target.n_qubits() + 1, ground.n_qubits() + 1)?;
        let rotation = wigner_rotation(target.n_qubits(), phi)?;
        let mode = if target.mode() == HeraldMode::Heralded || ground.mode() == HeraldMode::Heralded {
            HeraldMode::Heralded
        } else {
            HeraldMode::Unheralded
        };
        Ok(Self {
            inverse: rotation.inverse(),
            rotation,
            target,
            ground,
            mode,
            zeta: 1.0,
        })
    }

    /// Mode mismatch on both photons. Composing it with a lossy cavity is a
    /// modelling extension; only the ideal-inversion case has closed forms.
    pub fn with_mismatch(mut self, zeta: f64) -> Result<Self> {
        check_zeta(zeta)?;
        self.zeta = zeta;
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.rotation.n_qubits()
    }

    pub fn angle(&self) -> f64 {
        self.rotation.angle()
    }

    pub fn mode(&self) -> HeraldMode {
        self.mode
    }

    fn inversion(&self, state: &LiouvilleState, sup: &DiagonalSuperop) -> Result<LiouvilleState> {
        let hit = apply_superop(state, sup)?;
        Ok(if self.zeta == 1.0 { hit } else { mix(&hit, state, self.zeta) })
    }

    pub fn apply(&self, state: &LiouvilleState) -> Result<LiouvilleState> {
        let rho = self.inversion(state, &self.target)?;
        let rho = apply_rotation_conjugation(&rho, &self.inverse)?;
        let rho = self.inversion(&rho, &self.ground)?;
        apply_rotation_conjugation(&rho, &self.rotation)
    }
}

/// `k ≥ 1` repetitions of the physical step.
pub fn physical_grover_apply(state: &LiouvilleState, step: &PhysicalGroverStep, k: usize) -> Result<LiouvilleState> {
    if k == 0 {
        return Err(Error::RangeViolation {
            what: "Grover steps",
            value: 0.0,
            range: "at least 1",
        });
    }
    let mut rho = state.clone();
    for _ in 0..k {
        rho = step.apply(&rho)?;
    }
    Ok(rho)
}

/// Physical preparation of Dicke state `|m⟩` from the coherent spin state
/// at `φ`. Targets above `N/2` run the mirrored protocol for `N − m` at
/// `π − φ` and finish with a global flip, which keeps the cavity shift
/// small.
#[derive(Debug, Clone)]
pub struct PhysicalDickeRun {
    step: PhysicalGroverStep,
    initial: LiouvilleState,
    target: DickeKet,
    steps: usize,
    flipped: bool,
}

impl PhysicalDickeRun {
    pub fn new(
        n_qubits: usize,
        m: usize,
        phi: f64,
        steps: usize,
        width: f64,
        params: &CavityParams,
        mode: HeraldMode,
    ) -> Result<Self> {
        let target = DickeKet::basis(n_qubits, m)?;
        let flipped = 2 * m > n_qubits;
        let (m_run, phi_run) = if flipped { (n_qubits - m, PI - phi) } else { (m, phi) };
        let step = PhysicalGroverStep::new(n_qubits, m_run, phi_run, width, params, mode)?;
        let initial = css_state(n_qubits, phi_run)?.to_density();
        Ok(Self {
            step,
            initial,
            target,
            steps,
            flipped,
        })
    }

    pub fn with_mismatch(mut self, zeta: f64) -> Result<Self> {
        self.step = self.step.with_mismatch(zeta)?;
        Ok(self)
    }

    pub fn step(&self) -> &PhysicalGroverStep {
        &self.step
    }

    pub fn initial(&self) -> &LiouvilleState {
        &self.initial
    }

    pub fn target(&self) -> &DickeKet {
        &self.target
    }

    pub fn output(&self) -> Result<LiouvilleState> {
        let rho = physical_grover_apply(&self.initial, &self.step, self.steps)?;
        Ok(if self.flipped { x_flip_all(&rho) } else { rho })
    }

    pub fn metrics(&self) -> Result<HeraldMetrics> {
        herald_metrics(&self.output()?, &self.target)
    }
}

/// Trace-normalized fidelity and the trace itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldMetrics {
    pub fidelity: f64,
    pub success_probability: f64,
}

pub fn herald_metrics(state: &LiouvilleState, target: &DickeKet) -> Result<HeraldMetrics> {
    let p = state.trace();
    if p < TOTAL_LOSS_TRACE {
        return Err(Error::TotalLoss);
    }
    Ok(HeraldMetrics {
        fidelity: state.fidelity_with(target)? / p,
        success_probability: p,
    })
}

/// `(N+1)²` identity superoperator diagonal.
pub fn identity_superop(n_qubits: usize) -> Array2<C64> {
    Array2::from_elem((n_qubits + 1, n_qubits + 1), C64::new(1.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{scattering_amplitudes, shifted_resonance, Channel, QuadratureReport};
    use crate::grover::{build_dicke_grover, plan_dicke_exact};
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_density(n_qubits: usize, rng: &mut ChaCha8Rng) -> LiouvilleState {
        let dim = n_qubits + 1;
        let a = Array2::from_shape_fn((dim, dim), |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let rho = a.dot(&a.t().mapv(|z| z.conj()));
        let tr: f64 = (0..dim).map(|i| rho[[i, i]].re).sum();
        LiouvilleState::from_matrix_unchecked(rho.mapv(|z| z / tr))
    }

    /// Dense `(N+1)² × (N+1)²` superoperator of `ρ ↦ A ρ B` for row-major
    /// vectorization: `A ⊗ Bᵀ`.
    fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
        let (n, m) = (a.nrows(), b.nrows());
        Array2::from_shape_fn((n * m, n * m), |(i, j)| a[[i / m, j / m]] * b[[j % m, i % m]])
    }

    fn dense_apply(s: &Array2<C64>, state: &LiouvilleState) -> Vec<C64> {
        let v = ndarray::Array1::from(state.as_slice().to_vec());
        s.dot(&v).to_vec()
    }

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn real_to_complex(r: &Array2<f64>) -> Array2<C64> {
        r.mapv(|x| C64::new(x, 0.0))
    }

    fn min_eigenvalue(state: &LiouvilleState) -> f64 {
        let dim = state.dim();
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            let z = state.get(i, j);
            nalgebra::Complex::new(z.re, z.im)
        });
        let m = (&m + m.adjoint()) * nalgebra::Complex::new(0.5, 0.0);
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn recursive_mismatch_fidelity(k: usize, zeta: f64, theta: f64) -> f64 {
        // two-level model in the (target, complement) plane
        let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
        let psi = [s, c];
        let chi_t = [[-1.0, 0.0], [0.0, 1.0]];
        let chi_i = [
            [1.0 - 2.0 * psi[0] * psi[0], -2.0 * psi[0] * psi[1]],
            [-2.0 * psi[1] * psi[0], 1.0 - 2.0 * psi[1] * psi[1]],
        ];
        let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
            let mut o = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    o[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                }
            }
            o
        };
        let conj = |u: [[f64; 2]; 2], r: [[f64; 2]; 2]| {
            let ut = [[u[0][0], u[1][0]], [u[0][1], u[1][1]]];
            mul(mul(u, r), ut)
        };
        let mix2 = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
            let mut o = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    o[i][j] = zeta * a[i][j] + (1.0 - zeta) * b[i][j];
                }
            }
            o
        };
        let mut rho = [[s * s, s * c], [c * s, c * c]];
        for _ in 0..k {
            rho = mix2(conj(chi_t, rho), rho);
            rho = mix2(conj(chi_i, rho), rho);
        }
        rho[0][0]
    }

    #[test]
    fn mismatch_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(4, &mut rng);
        let chi = StepOp::Inversion(PhaseInversion::flip(4, 2).unwrap());
        let full = apply_mismatch(&rho, &chi, 1.0).unwrap();
        let exact = conjugate_by(&rho, &chi).unwrap();
        assert_eq!(full, exact);
        assert_eq!(apply_mismatch(&rho, &chi, 0.0).unwrap(), rho);
        let half = apply_mismatch(&rho, &chi, 0.37).unwrap();
        assert!((half.trace() - rho.trace()).abs() < 1e-12);
        assert!(apply_mismatch(&rho, &chi, 1.2).is_err());
    }

    #[test]
    fn mismatch_spot_values() {
        assert_eq!(mismatch_fidelity_closed(1, 1.0, PI / 3.0).unwrap(), 1.0);
        let f = mismatch_fidelity_closed(1, 0.9, PI / 3.0).unwrap();
        assert!((f - 0.8575).abs() < 1e-15);
        assert_eq!(mismatch_fidelity_exact_overlap(1, 0.9).unwrap(), 0.8575);
        assert!(matches!(mismatch_fidelity_closed(5, 0.9, 0.3), Err(Error::UnsupportedSteps(5))));
    }

    #[test]
    fn closed_forms_match_two_level_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let zetas = [0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0];
        for k in 1..=4 {
            let special = PI / (2 * k + 1) as f64;
            let mut thetas = vec![special];
            thetas.extend((0..20).map(|_| rng.gen_range(0.0..PI)));
            for &theta in &thetas {
                for &z in &zetas {
                    let want = recursive_mismatch_fidelity(k, z, theta);
                    assert!((mismatch_fidelity_closed(k, z, theta).unwrap() - want).abs() < 1e-10);
                }
            }
            for &z in &zetas {
                let want = recursive_mismatch_fidelity(k, z, special);
                assert!((mismatch_fidelity_exact_overlap(k, z).unwrap() - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_step_form_matches_random_zeta() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let z = rng.gen_range(0.0..1.0);
            let want = recursive_mismatch_fidelity(2, z, PI / 5.0);
            assert!((mismatch_fidelity_closed(2, z, PI / 5.0).unwrap() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_form_matches_dicke_space_simulation() {
        for (n, m) in [(6usize, 1usize), (9, 3), (12, 6), (20, 2)] {
            let plan = plan_dicke_exact(n, m).unwrap();
            let g = build_dicke_grover(n, m, plan.rotation_angle, plan.alpha).unwrap();
            let rho0 = css_state(n, plan.rotation_angle).unwrap().to_density();
            let target = DickeKet::basis(n, m).unwrap();
            let theta = 2.0 * plan.overlap.asin();
            for z in [0.3, 0.8, 0.97] {
                let out = apply_mismatched_steps(&rho0, &g, z, MismatchEvents::PerPhoton, plan.steps).unwrap();
                let f = out.fidelity_with(&target).unwrap();
                let want = mismatch_fidelity_closed(plan.steps, z, theta).unwrap();
                assert!((f - want).abs() < 1e-10, "N={n} m={m} ζ={z}: {f} vs {want}");
            }
        }
    }

    #[test]
    fn linearized_infidelity_one_and_two_steps() {
        for k in 1..=2 {
            for eps in [1e-4, 1e-3, 5e-3, 1e-2] {
                let f = mismatch_fidelity_exact_overlap(k, 1.0 - eps).unwrap();
                let lin = (2 * k + 1) as f64 * eps / 2.0;
                assert!(((1.0 - f) - lin).abs() <= 5.0 * eps * eps, "k={k} eps={eps}");
            }
        }
    }

    /// Beyond two steps the second-order term exceeds `5ε²`; check the
    /// residual against the curvature of the two-level recursion instead.
    #[test]
    fn linearized_infidelity_second_order_matches_recursion() {
        for k in 3..=4 {
            let theta = PI / (2 * k + 1) as f64;
            let h = 1e-3;
            let infid = |e: f64| 1.0 - recursive_mismatch_fidelity(k, 1.0 - e, theta);
            // polynomial in ζ, so evaluating just past ζ = 1 is fine
            let curvature = (infid(h) - 2.0 * infid(0.0) + infid(-h)) / (2.0 * h * h);
            assert!(curvature < -5.0, "k={k}: {curvature}");
            for eps in [1e-4, 1e-3, 5e-3, 1e-2] {
                let f = mismatch_fidelity_exact_overlap(k, 1.0 - eps).unwrap();
                let lin = (2 * k + 1) as f64 * eps / 2.0;
                let resid = (1.0 - f) - lin;
                assert!((resid - curvature * eps * eps).abs() <= 200.0 * eps.powi(3), "k={k} eps={eps}");
            }
        }
    }

    #[test]
    fn thresholds_round_to_listed_values() {
        for (k, listed) in [(1, 0.993), (2, 0.996), (3, 0.997), (4, 0.998)] {
            let z = mismatch_threshold(k, 0.99).unwrap();
            assert!(((z * 1000.0).round() / 1000.0 - listed).abs() < 1e-12, "k={k}: {z}");
        }
    }

    #[test]
    fn identity_superop_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(5, &mut rng);
        let sup = DiagonalSuperop::from_matrix(&identity_superop(5), HeraldMode::Unheralded, QuadratureReport { nodes: 1, change: 0.0 });
        assert_eq!(apply_superop(&rho, &sup).unwrap(), rho);
        let wrong = DiagonalSuperop::ideal(4, 0);
        assert!(matches!(apply_superop(&rho, &wrong), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn unheralded_superop_keeps_dicke_populations() {
        let p = CavityParams::one_sided(100.0, 2.0).unwrap();
        let sup = build_superop(10, 3, 0.1, &p, HeraldMode::Unheralded).unwrap();
        for m in [0, 3, 7] {
            let rho = DickeKet::basis(10, m).unwrap().to_density();
            let out = apply_superop(&rho, &sup).unwrap();
            let f = out.fidelity_with(&DickeKet::basis(10, m).unwrap()).unwrap();
            assert!((f - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn elementwise_engine_matches_dense_kraus_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = CavityParams::from_dimensionless(80.0, 1.5, 1.0, 0.8, 0.15, 0.05).unwrap();
        for n in 1..=6 {
            let omega = shifted_resonance(1, &p);
            let sup = build_superop(n, 1, 0.0, &p, HeraldMode::Unheralded).unwrap();
            let mut dense = Array2::<C64>::zeros(((n + 1) * (n + 1), (n + 1) * (n + 1)));
            for ch in Channel::ALL {
                let a = Array2::from_diag(&ndarray::Array1::from_shape_fn(n + 1, |i| {
                    scattering_amplitudes(i, omega, &p).get(ch)
                }));
                dense = dense + kron(&a, &a.t().mapv(|z| z.conj()));
            }
            for _ in 0..5 {
                let rho = random_density(n, &mut rng);
                let fast = apply_superop(&rho, &sup).unwrap();
                assert!(max_diff(fast.as_slice(), &dense_apply(&dense, &rho)) < 1e-11);
            }
        }
    }

    #[test]
    fn rotation_conjugation_matches_dense_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = wigner_rotation(5, 0.83).unwrap();
        let rc = real_to_complex(r.matrix());
        let dense = kron(&rc, &rc.t().to_owned());
        for _ in 0..5 {
            let rho = random_density(5, &mut rng);
            let fast = apply_rotation_conjugation(&rho, &r).unwrap();
            assert!(max_diff(fast.as_slice(), &dense_apply(&dense, &rho)) < 1e-11);
        }
    }

    #[test]
    fn rotation_round_trip_and_zero_angle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = random_density(7, &mut rng);
        let r = wigner_rotation(7, 1.1).unwrap();
        let back = apply_rotation_conjugation(&apply_rotation_conjugation(&rho, &r).unwrap(), &r.inverse()).unwrap();
        assert!(max_diff(back.as_slice(), rho.as_slice()) < 1e-11);
        let id = apply_rotation_conjugation(&rho, &wigner_rotation(7, 0.0).unwrap()).unwrap();
        assert!(max_diff(id.as_slice(), rho.as_slice()) < 1e-15);
    }

    #[test]
    fn ideal_superops_reproduce_unitary_grover() {
        for (n, m) in [(5usize, 1usize), (8, 3), (12, 2)] {
            let plan = plan_dicke_exact(n, m).unwrap();
            let step = PhysicalGroverStep::from_superops(
                plan.rotation_angle,
                DiagonalSuperop::ideal(n, m),
                DiagonalSuperop::ideal(n, 0),
            )
            .unwrap();
            let rho0 = css_state(n, plan.rotation_angle).unwrap().to_density();
            let out = physical_grover_apply(&rho0, &step, plan.steps).unwrap();
            let g = build_dicke_grover(n, m, plan.rotation_angle, PI).unwrap();
            let ket = g.apply_steps(&css_state(n, plan.rotation_angle).unwrap(), plan.steps);
            assert!(max_diff(out.as_slice(), ket.to_density().as_slice()) < 1e-12);
        }
    }

    #[test]
    fn strong_cavity_approaches_ideal_evolution() {
        let (n, m) = (6, 2);
        let plan = plan_dicke_exact(n, m).unwrap();
        let p = CavityParams::one_sided(1e16, 1e4).unwrap();
        let step = PhysicalGroverStep::new(n, m, plan.rotation_angle, 0.0, &p, HeraldMode::Unheralded).unwrap();
        let rho0 = css_state(n, plan.rotation_angle).unwrap().to_density();
        let out = physical_grover_apply(&rho0, &step, plan.steps).unwrap();
        let f = out.fidelity_with(&DickeKet::basis(n, m).unwrap()).unwrap();
        assert!(f > 1.0 - 1e-6, "{f}");
    }

    #[test]
    fn unheralded_is_cptp_and_heralded_loses_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = CavityParams::one_sided(100.0, 2.0).unwrap();
        for n in [2usize, 5, 8] {
            let un = PhysicalGroverStep::new(n, 1, 0.9, 0.1, &p, HeraldMode::Unheralded).unwrap();
            let he = PhysicalGroverStep::new(n, 1, 0.9, 0.1, &p, HeraldMode::Heralded).unwrap();
            let rho = random_density(n, &mut rng);
            let mut prev = 1.0;
            for k in 1..=4 {
                let out = physical_grover_apply(&rho, &un, k).unwrap();
                assert!((out.trace() - 1.0).abs() < 1e-9);
                assert!(min_eigenvalue(&out) >= -1e-9);
                let h = physical_grover_apply(&rho, &he, k).unwrap();
                assert!(h.trace() <= prev + 1e-12);
                assert!(min_eigenvalue(&h) >= -1e-9);
                prev = h.trace();
            }
        }
    }

    #[test]
    fn lossless_resonant_reflection_is_certain() {
        let p = CavityParams::one_sided(100.0, 1.0).unwrap().resonant();
        let sup = crate::cavity::build_superop_at(4, &crate::cavity::Wavepacket::monochromatic(0.0), &p, HeraldMode::Heralded).unwrap();
        let ground = DickeKet::basis(4, 0).unwrap();
        let out = apply_superop(&ground.to_density(), &sup).unwrap();
        let m = herald_metrics(&out, &ground).unwrap();
        assert!((m.success_probability - 1.0).abs() < 1e-14);
        assert!((m.fidelity - 1.0).abs() < 1e-14);
    }

    #[test]
    fn total_loss_is_reported() {
        let rho = LiouvilleState::from_vec(2, vec![C64::new(0.0, 0.0); 9]).unwrap();
        let t = DickeKet::basis(2, 0).unwrap();
        assert!(matches!(herald_metrics(&rho, &t), Err(Error::TotalLoss)));
    }

    #[test]
    fn x_flip_maps_ground_to_top_and_is_involution() {
        let rho = DickeKet::basis(5, 0).unwrap().to_density();
        let flipped = x_flip_all(&rho);
        assert_eq!(flipped, DickeKet::basis(5, 5).unwrap().to_density());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = random_density(5, &mut rng);
        assert_eq!(x_flip_all(&x_flip_all(&r)), r);
        let id = StepOp::Diagonal(vec![C64::new(1.0, 0.0); 6]);
        let a = x_flip_all(&apply_mismatch(&r, &id, 1.0).unwrap());
        let b = apply_mismatch(&x_flip_all(&r), &id, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mirrored_run_matches_direct_run_in_ideal_limit() {
        let (n, m) = (7, 5);
        let plan = plan_dicke_exact(n, m).unwrap();
        let p = CavityParams::one_sided(1e16, 1e4).unwrap();
        let run = PhysicalDickeRun::new(n, m, plan.rotation_angle, plan.steps, 0.0, &p, HeraldMode::Unheralded).unwrap();
        let f = run.metrics().unwrap().fidelity;
        assert!(f > 1.0 - 1e-6, "{f}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn mismatch_preserves_trace(seed in 0u64..1000, zeta in 0.0f64..=1.0, n in 1usize..9, m in 0usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density(n, &mut rng);
            let chi = StepOp::Inversion(PhaseInversion::flip(n, m.min(n)).unwrap());
            let out = apply_mismatch(&rho, &chi, zeta).unwrap();
            prop_assert!((out.trace() - rho.trace()).abs() < 1e-12);
        }

        #[test]
        fn rotation_conjugation_preserves_trace(seed in 0u64..1000, phi in -PI..PI, n in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density(n, &mut rng);
            let out = apply_rotation_conjugation(&rho, &wigner_rotation(n, phi).unwrap()).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-12);
            prop_assert!(out.hermiticity_error() < 1e-12);
        }
    }
}
