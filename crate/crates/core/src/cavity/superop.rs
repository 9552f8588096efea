//! Wavepacket-averaged cavity phase inversion as a diagonal Liouville-space
//! superoperator: `ρ_{nl} ↦ 𝒦_{nl} ρ_{nl}`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{kraus_matrix, shifted_resonance, CavityParams, Channel, QuadratureReport, Wavepacket};
use crate::{Result, C64};

/// Whether the photon outcome is post-selected on reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeraldMode {
    /// Sum over every outgoing mode; trace preserving.
    Unheralded,
    /// Reflection only; trace decreasing.
    Heralded,
}

impl HeraldMode {
    fn channels(self) -> &'static [Channel] {
        match self {
            HeraldMode::Unheralded => &Channel::ALL,
            HeraldMode::Heralded => &Channel::ALL[..1],
        }
    }
}

/// Row-major `(N+1)²` diagonal of the averaged superoperator.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSuperop {
    n_qubits: usize,
    entries: Vec<C64>,
    mode: HeraldMode,
    report: QuadratureReport,
}

impl DiagonalSuperop {
    /// Wraps a Hermitian `(N+1)×(N+1)` matrix of averaged elements.
    pub fn from_matrix(k: &Array2<C64>, mode: HeraldMode, report: QuadratureReport) -> Self {
        let dim = k.nrows();
        assert_eq!(k.ncols(), dim, "superop matrix must be square");
        Self {
            n_qubits: dim - 1,
            entries: k.iter().copied().collect(),
            mode,
            report,
        }
    }

    /// Exact phase inversion of Dicke component `m` (the lossless limit).
    pub fn ideal(n_qubits: usize, m: usize) -> Self {
        let dim = n_qubits + 1;
        let sign = |i: usize| if i == m { -1.0 } else { 1.0 };
        let entries = (0..dim * dim)
            .map(|idx| C64::new(sign(idx / dim) * sign(idx % dim), 0.0))
            .collect();
        Self {
            n_qubits,
            entries,
            mode: HeraldMode::Unheralded,
            report: QuadratureReport { nodes: 0, change: 0.0 },
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn mode(&self) -> HeraldMode {
        self.mode
    }

    pub fn report(&self) -> QuadratureReport {
        self.report
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, n: usize, l: usize) -> C64 {
        self.entries[n * (self.n_qubits + 1) + l]
    }

    /// `max |𝒦_{nl} − 𝒦_{ln}*|`.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.n_qubits + 1;
        let mut worst = 0.0f64;
        for n in 0..dim {
            for l in 0..dim {
                worst = worst.max((self.get(n, l) - self.get(l, n).conj()).norm());
            }
        }
        worst
    }
}

/// Averaged superop for a Gaussian wavepacket of width `width` centred on
/// the shifted resonance of Dicke component `center_m`. `center_m = 0`
/// selects the resonant cavity (`Δ = 0`) driven at `Ω_c = 0`.
pub fn build_superop(
    n_qubits: usize,
    center_m: usize,
    width: f64,
    params: &CavityParams,
    mode: HeraldMode,
) -> Result<DiagonalSuperop> {
    let (p, center) = if center_m == 0 {
        (params.resonant(), 0.0)
    } else {
        (*params, shifted_resonance(center_m, params))
    };
    let wp = Wavepacket::new(center, width)?;
    build_superop_at(n_qubits, &wp, &p, mode)
}

/// Averaged superop for an explicit wavepacket.
pub fn build_superop_at(
    n_qubits: usize,
    wp: &Wavepacket,
    params: &CavityParams,
    mode: HeraldMode,
) -> Result<DiagonalSuperop> {
    let (k, report) = kraus_matrix(n_qubits, mode.channels(), wp, params)?;
    Ok(DiagonalSuperop::from_matrix(&k, mode, report))
}
