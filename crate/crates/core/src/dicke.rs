//! Symmetric-subspace states of N qubits.
//!
//! Index `m` of every vector or matrix counts excitations, so `|0⟩` is the
//! all-ground product state and `|N⟩` the fully excited one. Density
//! matrices are flattened row-major: entry `(i, j)` sits at `i * (N + 1) + j`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::numeric::{ln_binomial, signed_log_pow};
use crate::{Error, Result, C64, STRUCTURAL_TOL};

/// Pure state over the Dicke basis `|0⟩..|N⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DickeKet {
    amps: Vec<C64>,
}

impl DickeKet {
    /// Wraps amplitudes after checking the norm.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::ZeroQubits);
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::RangeViolation {
                what: "squared norm",
                value: norm,
                range: "1 ± 1e-10",
            });
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::ZeroQubits);
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::RangeViolation {
                what: "norm",
                value: norm,
                range: "finite and > 0",
            });
        }
        Ok(Self {
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn basis(n_qubits: usize, m: usize) -> Result<Self> {
        check_index(n_qubits, m)?;
        let mut amps = vec![C64::new(0.0, 0.0); n_qubits + 1];
        amps[m] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &DickeKet) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &DickeKet) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Multiplies each amplitude by the matching diagonal entry.
    pub fn apply_diagonal(&self, diag: &[C64]) -> DickeKet {
        debug_assert_eq!(diag.len(), self.amps.len());
        Self {
            amps: self.amps.iter().zip(diag).map(|(a, d)| a * d).collect(),
        }
    }

    pub fn apply_real(&self, matrix: &Array2<f64>) -> DickeKet {
        let dim = self.amps.len();
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (i, o) in out.iter_mut().enumerate() {
            let row = matrix.row(i);
            *o = row.iter().zip(&self.amps).map(|(&r, a)| a * r).sum();
        }
        Self { amps: out }
    }

    pub fn apply_complex(&self, matrix: &Array2<C64>) -> DickeKet {
        let dim = self.amps.len();
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (i, o) in out.iter_mut().enumerate() {
            *o = matrix.row(i).iter().zip(&self.amps).map(|(r, a)| r * a).sum();
        }
        Self { amps: out }
    }

    /// Global X on every qubit: `|m⟩ → |N−m⟩`.
    pub fn flipped(&self) -> DickeKet {
        Self {
            amps: self.amps.iter().rev().copied().collect(),
        }
    }

    pub fn to_density(&self) -> LiouvilleState {
        let dim = self.amps.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in &self.amps {
            for b in &self.amps {
                data.push(a * b.conj());
            }
        }
        LiouvilleState {
            n_qubits: dim - 1,
            data,
        }
    }
}

/// Row-major vectorized density matrix, possibly sub-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleState {
    n_qubits: usize,
    data: Vec<C64>,
}

impl LiouvilleState {
    pub fn from_vec(n_qubits: usize, data: Vec<C64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::ZeroQubits);
        }
        let expected = (n_qubits + 1) * (n_qubits + 1);
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: data.len(),
            });
        }
        Ok(Self { n_qubits, data })
    }

    /// Maximally mixed state `𝟙/(N+1)`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::ZeroQubits);
        }
        let dim = n_qubits + 1;
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { n_qubits, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Side of the density matrix, `N + 1`.
    pub fn dim(&self) -> usize {
        self.n_qubits + 1
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|z| *z *= factor);
    }

    pub fn trace(&self) -> f64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i].re).sum()
    }

    /// `⟨t|ρ|t⟩`, the overlap with a pure target.
    pub fn fidelity_with(&self, target: &DickeKet) -> Result<f64> {
        if target.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: target.dim(),
            });
        }
        let dim = self.dim();
        let t = target.amplitudes();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..dim {
            let row = &self.data[i * dim..(i + 1) * dim];
            let inner: C64 = row.iter().zip(t).map(|(r, tj)| r * tj).sum();
            acc += t[i].conj() * inner;
        }
        Ok(acc.re)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let d = self.data[i * dim + j] - self.data[j * dim + i].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn to_matrix(&self) -> Array2<C64> {
        let dim = self.dim();
        Array2::from_shape_vec((dim, dim), self.data.clone()).expect("square by construction")
    }

    pub(crate) fn from_matrix_unchecked(matrix: Array2<C64>) -> Self {
        let dim = matrix.nrows();
        let data = if matrix.is_standard_layout() {
            matrix.into_raw_vec_and_offset().0
        } else {
            matrix.iter().copied().collect()
        };
        Self {
            n_qubits: dim - 1,
            data,
        }
    }
}

/// Collective rotation `R(φ)^{⊗N}` restricted to the symmetric subspace.
///
/// For one qubit this is `[[cos φ/2, −sin φ/2], [sin φ/2, cos φ/2]]`, so the
/// first column of the N-qubit matrix is the coherent spin state at `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerRotation {
    n_qubits: usize,
    angle: f64,
    matrix: Array2<f64>,
}

impl WignerRotation {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// `R(−φ)`, which is the transpose.
    pub fn inverse(&self) -> WignerRotation {
        WignerRotation {
            n_qubits: self.n_qubits,
            angle: -self.angle,
            matrix: self.matrix.t().to_owned(),
        }
    }

    pub fn apply(&self, ket: &DickeKet) -> DickeKet {
        ket.apply_real(&self.matrix)
    }

    pub fn orthogonality_error(&self) -> f64 {
        let prod = self.matrix.t().dot(&self.matrix);
        prod.indexed_iter()
            .map(|((i, j), &v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }
}

fn check_index(n_qubits: usize, m: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::ZeroQubits);
    }
    if m > n_qubits {
        return Err(Error::ExcitationOutOfRange { n: n_qubits, m });
    }
    Ok(())
}

fn overlap_unchecked(n_qubits: usize, m: usize, phi: f64) -> f64 {
    let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    let (sc, lc) = signed_log_pow(c, n_qubits - m);
    let (ss, ls) = signed_log_pow(s, m);
    sc * ss * (0.5 * ln_binomial(n_qubits, m) + lc + ls).exp()
}

/// `⟨m|R(φ)^{⊗N}|0⟩ = √C(N,m) cos^{N−m}(φ/2) sin^m(φ/2)`.
pub fn dicke_overlap(n_qubits: usize, m: usize, phi: f64) -> Result<f64> {
    check_index(n_qubits, m)?;
    Ok(overlap_unchecked(n_qubits, m, phi))
}

/// Coherent spin state `(cos φ/2 |0⟩ + sin φ/2 |1⟩)^{⊗N}` in the Dicke basis.
pub fn css_state(n_qubits: usize, phi: f64) -> Result<DickeKet> {
    if n_qubits == 0 {
        return Err(Error::ZeroQubits);
    }
    let amps = (0..=n_qubits)
        .map(|m| C64::new(overlap_unchecked(n_qubits, m, phi), 0.0))
        .collect();
    Ok(DickeKet { amps })
}

/// Angle `arccos((N − 2m)/N)` at which `dicke_overlap(N, m, ·)` peaks.
pub fn optimal_css_angle(n_qubits: usize, m: usize) -> Result<f64> {
    check_index(n_qubits, m)?;
    Ok(((n_qubits as f64 - 2.0 * m as f64) / n_qubits as f64).clamp(-1.0, 1.0).acos())
}

/// Peak value of `dicke_overlap(N, m, ·)`:
/// `√(C(N,m) (1−m/N)^{N−m} (m/N)^m)`.
pub fn max_dicke_overlap(n_qubits: usize, m: usize) -> Result<f64> {
    check_index(n_qubits, m)?;
    let n = n_qubits as f64;
    let p = m as f64 / n;
    let (_, lq) = signed_log_pow(1.0 - p, n_qubits - m);
    let (_, lp) = signed_log_pow(p, m);
    Ok((0.5 * (ln_binomial(n_qubits, m) + lq + lp)).exp())
}

/// Builds `R(φ)^{⊗N}` by adding one qubit at a time to the symmetric
/// subspace, which avoids factorials and stays finite at large N.
pub fn wigner_rotation(n_qubits: usize, phi: f64) -> Result<WignerRotation> {
    if n_qubits == 0 {
        return Err(Error::ZeroQubits);
    }
    let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    let size = n_qubits + 1;
    let mut cur = vec![0.0; size * size];
    let mut next = vec![0.0; size * size];
    cur[0] = c;
    cur[1] = -s;
    cur[size] = s;
    cur[size + 1] = c;

    let sqrt_table: Vec<f64> = (0..=size).map(|k| (k as f64).sqrt()).collect();
    for n in 1..n_qubits {
        // grow from n to n+1 qubits; `cur` holds an (n+1)×(n+1) block
        let np1 = n + 1;
        let inv = 1.0 / (np1 as f64).sqrt();
        for a in 0..=np1 {
            let a0 = sqrt_table[np1 - a] * inv;
            let a1 = sqrt_table[a] * inv;
            for b in 0..=np1 {
                let b0 = sqrt_table[np1 - b] * inv;
                let b1 = sqrt_table[b] * inv;
                let mut v = 0.0;
                if a <= n && b <= n {
                    v += a0 * b0 * c * cur[a * size + b];
                }
                if a <= n && b >= 1 {
                    v -= a0 * b1 * s * cur[a * size + b - 1];
                }
                if a >= 1 && b <= n {
                    v += a1 * b0 * s * cur[(a - 1) * size + b];
                }
                if a >= 1 && b >= 1 {
                    v += a1 * b1 * c * cur[(a - 1) * size + b - 1];
                }
                next[a * size + b] = v;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let matrix = Array2::from_shape_vec((size, size), cur).expect("square buffer");
    Ok(WignerRotation {
        n_qubits,
        angle: phi,
        matrix,
    })
}

/// Flattens a square matrix row-major.
pub fn vectorize(rho: &Array2<C64>) -> Result<LiouvilleState> {
    let (rows, cols) = rho.dim();
    if rows != cols {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: cols,
        });
    }
    if rows < 2 {
        return Err(Error::ZeroQubits);
    }
    Ok(LiouvilleState {
        n_qubits: rows - 1,
        data: rho.iter().copied().collect(),
    })
}

pub fn devectorize(state: &LiouvilleState) -> Array2<C64> {
    state.to_matrix()
}

/// Overlap of a (possibly sub-normalized) state with a pure target.
pub fn pure_fidelity(state: &LiouvilleState, target: &DickeKet) -> Result<f64> {
    state.fidelity_with(target)
}

/// Trace, i.e. the dot product with the vectorized identity.
pub fn trace_of(state: &LiouvilleState) -> f64 {
    state.trace()
}

/// `Z^{⊗N}` in the Dicke basis: `(−1)^m`.
pub fn parity_diagonal(n_qubits: usize) -> Vec<C64> {
    (0..=n_qubits)
        .map(|m| C64::new(if m % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect()
}
