//! Wavepacket averages `∫ |Φ(ω)|² x_n(ω) x_l*(ω) dω` by Gauss–Hermite
//! quadrature. Substituting `ω = Ω_c + √2 σ t` turns the Gaussian into the
//! native `e^{−t²}` weight, so no truncation of the real line is needed.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::hermite::GaussHermite;
use ndarray::Array2;

use super::{scattering_amplitudes, CavityParams, Channel, Wavepacket};
use crate::{Error, Result, C64};

const BASE_NODES: usize = 64;
const MAX_NODES: usize = 512;
/// Largest change allowed between successive node doublings.
pub(crate) const CONVERGENCE_TOL: f64 = 1e-10;

/// Node count used and the change seen at the last doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureReport {
    pub nodes: usize,
    pub change: f64,
}

/// `(√2 t_i, w_i/√π)` so that `Σ w'_i f(Ω_c + σ x'_i)` averages `f`.
fn rule(nodes: usize) -> &'static [(f64, f64)] {
    static RULES: [OnceLock<Vec<(f64, f64)>>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let slot = match nodes {
        64 => 0,
        128 => 1,
        256 => 2,
        512 => 3,
        _ => unreachable!("node counts are powers of two between 64 and 512"),
    };
    RULES[slot].get_or_init(|| {
        let gh = GaussHermite::new(NonZeroUsize::new(nodes).expect("nonzero"));
        let norm = std::f64::consts::PI.sqrt();
        gh.as_node_weight_pairs()
            .iter()
            .map(|&(t, w)| (std::f64::consts::SQRT_2 * t, w / norm))
            .collect()
    })
}

/// Sample frequencies and weights for a wavepacket; one point when `σ = 0`.
fn samples(wp: &Wavepacket, nodes: usize) -> Vec<(f64, f64)> {
    if wp.width() == 0.0 {
        return vec![(wp.center(), 1.0)];
    }
    rule(nodes)
        .iter()
        .map(|&(x, w)| (wp.center() + wp.width() * x, w))
        .collect()
}

/// Runs `eval` at 64, 128, … nodes until two successive results agree.
fn converge<T, F>(wp: &Wavepacket, mut eval: F, diff: impl Fn(&T, &T) -> f64) -> Result<(T, QuadratureReport)>
where
    F: FnMut(&[(f64, f64)]) -> T,
{
    if wp.width() == 0.0 {
        let value = eval(&samples(wp, BASE_NODES));
        return Ok((value, QuadratureReport { nodes: 1, change: 0.0 }));
    }
    let mut nodes = BASE_NODES;
    let mut prev = eval(&samples(wp, nodes));
    loop {
        let next_nodes = nodes * 2;
        let next = eval(&samples(wp, next_nodes));
        let change = diff(&prev, &next);
        if change < CONVERGENCE_TOL {
            return Ok((next, QuadratureReport { nodes: next_nodes, change }));
        }
        if next_nodes >= MAX_NODES {
            return Err(Error::QuadratureNonConvergence {
                achieved: change,
                nodes: next_nodes,
            });
        }
        prev = next;
        nodes = next_nodes;
    }
}

/// One averaged Kraus element `𝒦^{ch}_{nl}`.
pub fn averaged_kraus_element(
    channel: Channel,
    n: usize,
    l: usize,
    wp: &Wavepacket,
    params: &CavityParams,
) -> Result<C64> {
    let eval = |pts: &[(f64, f64)]| -> C64 {
        pts.iter()
            .map(|&(omega, w)| {
                let xn = scattering_amplitudes(n, omega, params).get(channel);
                let xl = scattering_amplitudes(l, omega, params).get(channel);
                w * xn * xl.conj()
            })
            .sum()
    };
    converge(wp, eval, |a, b| (a - b).norm()).map(|(v, _)| v)
}

/// Table `X[n, j] = x_n(ω_i) √w_i` over all requested channels, so that
/// the averaged matrix is `X X†`.
fn amplitude_table(n_qubits: usize, channels: &[Channel], pts: &[(f64, f64)], params: &CavityParams) -> (Array2<f64>, Array2<f64>) {
    let cols = pts.len() * channels.len();
    let mut re = Array2::<f64>::zeros((n_qubits + 1, cols));
    let mut im = Array2::<f64>::zeros((n_qubits + 1, cols));
    for n in 0..=n_qubits {
        for (i, &(omega, w)) in pts.iter().enumerate() {
            let amps = scattering_amplitudes(n, omega, params);
            let sw = w.sqrt();
            for (c, &ch) in channels.iter().enumerate() {
                let v = amps.get(ch) * sw;
                let j = c * pts.len() + i;
                re[[n, j]] = v.re;
                im[[n, j]] = v.im;
            }
        }
    }
    (re, im)
}

fn gram(n_qubits: usize, channels: &[Channel], pts: &[(f64, f64)], params: &CavityParams) -> Array2<C64> {
    let (re, im) = amplitude_table(n_qubits, channels, pts, params);
    // (A + iB)(A − iB)ᵀ = (AAᵀ + BBᵀ) + i(BAᵀ − ABᵀ)
    let real = re.dot(&re.t()) + im.dot(&im.t());
    let cross = im.dot(&re.t());
    let dim = n_qubits + 1;
    let mut out = Array2::<C64>::zeros((dim, dim));
    for n in 0..dim {
        out[[n, n]] = C64::new(real[[n, n]], 0.0);
        for l in (n + 1)..dim {
            let z = C64::new(real[[n, l]], cross[[n, l]] - cross[[l, n]]);
            out[[n, l]] = z;
            out[[l, n]] = z.conj();
        }
    }
    out
}

/// Full matrix `𝒦_{nl} = Σ_ch ∫|Φ|² x_n x_l*` for `n, l ∈ 0..=N`.
/// Hermitian by construction.
pub fn kraus_matrix(
    n_qubits: usize,
    channels: &[Channel],
    wp: &Wavepacket,
    params: &CavityParams,
) -> Result<(Array2<C64>, QuadratureReport)> {
    converge(
        wp,
        |pts| gram(n_qubits, channels, pts, params),
        |a, b| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max),
    )
}
