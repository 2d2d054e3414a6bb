use faer::{Mat, Side};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{dot, SparseHamiltonian};
use crate::error::{Error, Result};
use crate::sim::State;

/// Largest matrix dimension accepted by the dense solver (12 sites).
pub const DENSE_MAX_DIM: usize = 1 << 12;

/// Largest matrix dimension accepted by the Lanczos solver (16 sites).
pub const LANCZOS_MAX_DIM: usize = 1 << 16;

/// Eigenvalues closer than this to the lowest one are treated as one degenerate manifold.
pub const DEGENERACY_TOL: f64 = 1e-10;

const MAX_MANIFOLD: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Dense,
    Lanczos,
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Solver::Dense => "dense",
            Solver::Lanczos => "lanczos",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    pub state: State,
    /// Dimension of the (numerically) degenerate lowest manifold that was resolved.
    pub degeneracy: usize,
}

impl GroundState {
    pub fn real_amplitudes(&self) -> Vec<f64> {
        self.state.amplitudes().iter().map(|a| a.re).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LanczosConfig {
    pub max_krylov: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig { max_krylov: 300, tol: 1e-8, seed: 0 }
    }
}

/// Lowest eigenpair by full dense diagonalization.
///
/// The eigenvector is real, normalized and sign-fixed so its largest-magnitude
/// amplitude is positive. An exactly degenerate lowest manifold is resolved
/// by [`resolve_manifold`].
pub fn ground_state_dense(h: &SparseHamiltonian) -> Result<GroundState> {
    let dim = h.dimension();
    if dim > DENSE_MAX_DIM {
        return Err(Error::DenseCeiling { dimension: dim, ceiling: DENSE_MAX_DIM });
    }
    let spectrum = if dim >= 2 && dim.is_power_of_two() && commutes_with_flip(h) {
        let half = dim / 2;
        let mut blocks = [Mat::<f64>::zeros(half, half), Mat::<f64>::zeros(half, half)];
        for &(r, c, v) in h.entries().iter().filter(|e| e.0 < half) {
            if c < half {
                blocks[0][(r, c)] += v;
                blocks[1][(r, c)] += v;
            } else {
                let c = c ^ (dim - 1);
                blocks[0][(r, c)] += v;
                blocks[1][(r, c)] -= v;
            }
        }
        let mut spectrum = Vec::new();
        for (block, sign) in blocks.iter().zip([1.0, -1.0]) {
            for (e, u) in symmetric_spectrum(block)? {
                let mut v = vec![0.0; dim];
                for (a, x) in u.into_iter().enumerate() {
                    v[a] = x * std::f64::consts::FRAC_1_SQRT_2;
                    v[a ^ (dim - 1)] = sign * x * std::f64::consts::FRAC_1_SQRT_2;
                }
                spectrum.push((e, v));
            }
        }
        spectrum
    } else {
        let mut m = Mat::<f64>::zeros(dim, dim);
        for &(r, c, v) in h.entries() {
            m[(r, c)] = v;
        }
        symmetric_spectrum(&m)?
    };
    let e0 = spectrum.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let manifold: Vec<Vec<f64>> =
        spectrum.into_iter().filter(|p| p.0 - e0 <= DEGENERACY_TOL).map(|p| p.1).collect();
    let degeneracy = manifold.len();
    let v = resolve_manifold(&manifold);
    let energy = h.rayleigh_quotient(&v);
    Ok(GroundState { energy, state: State::from_real(&v)?, degeneracy })
}

/// Whether `H` commutes with the global spin flip `X⊗…⊗X`.
fn commutes_with_flip(h: &SparseHamiltonian) -> bool {
    let all = h.dimension() - 1;
    h.entries().iter().all(|&(r, c, v)| h.get(r ^ all, c ^ all) == v)
}

/// Eigenvalues within the degeneracy window of the block minimum, with their eigenvectors.
fn symmetric_spectrum(m: &Mat<f64>) -> Result<Vec<(f64, Vec<f64>)>> {
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence { iterations: 0, residual: f64::NAN })?;
    let (s, u) = (eig.S(), eig.U());
    let n = m.nrows();
    let e0 = (0..n).map(|k| s[k]).fold(f64::INFINITY, f64::min);
    Ok((0..n)
        .filter(|&k| s[k] - e0 <= DEGENERACY_TOL)
        .map(|k| (s[k], (0..n).map(|i| u[(i, k)]).collect()))
        .collect())
}

/// Lowest eigenpair by Lanczos with full reorthogonalization.
///
/// The first Krylov run starts from the uniform vector, which overlaps the
/// ground state of any stoquastic Hamiltonian and respects the spin-flip
/// symmetry of both chain models. Further runs, seeded from `config.seed` and
/// deflated against the vectors found so far, probe for a degenerate
/// manifold; if one is found it is resolved exactly as in the dense solver.
pub fn ground_state_lanczos(h: &SparseHamiltonian, config: &LanczosConfig) -> Result<GroundState> {
    let dim = h.dimension();
    if dim > LANCZOS_MAX_DIM {
        return Err(Error::DenseCeiling { dimension: dim, ceiling: LANCZOS_MAX_DIM });
    }
    if !(config.tol > 0.0) || config.max_krylov == 0 {
        return Err(Error::InvalidOptimizer("Lanczos needs tol > 0 and max_krylov > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let uniform = vec![1.0 / (dim as f64).sqrt(); dim];
    let (mut e0, v0) = lowest_eigenpair(h, config, &[], uniform)?;
    let mut manifold = vec![v0];
    while manifold.len() < dim.min(MAX_MANIFOLD) {
        let start: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (e, v) = lowest_eigenpair(h, config, &manifold, start)?;
        if e < e0 - DEGENERACY_TOL {
            // The first run missed the true ground state; restart the manifold.
            e0 = e;
            manifold = vec![v];
        } else if e - e0 <= DEGENERACY_TOL {
            manifold.push(v);
        } else {
            break;
        }
    }
    let degeneracy = manifold.len();
    let v = resolve_manifold(&manifold);
    let energy = h.rayleigh_quotient(&v);
    let residual = h.residual(&v, energy);
    if !(residual <= config.tol) {
        return Err(Error::NoConvergence { iterations: config.max_krylov, residual });
    }
    Ok(GroundState { energy, state: State::from_real(&v)?, degeneracy })
}

/// Picks one deterministic vector out of an orthonormal basis of the lowest manifold.
///
/// For a single vector this is just the sign fix. Otherwise the basis state
/// with the largest weight in the manifold (ties to the lowest index) is
/// projected onto it, so both solvers land on the same vector whatever basis
/// they happened to produce.
pub fn resolve_manifold(basis: &[Vec<f64>]) -> Vec<f64> {
    let mut v = if basis.len() == 1 {
        basis[0].clone()
    } else {
        let dim = basis[0].len();
        let weights: Vec<f64> = (0..dim).map(|i| basis.iter().map(|u| u[i] * u[i]).sum()).collect();
        let wmax = weights.iter().cloned().fold(0.0, f64::max);
        let pivot = weights.iter().position(|&w| w >= wmax - 1e-9).unwrap_or(0);
        let mut v = vec![0.0; dim];
        for u in basis {
            let coef = u[pivot];
            v.iter_mut().zip(u).for_each(|(a, b)| *a += coef * b);
        }
        v
    };
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    fix_sign(&mut v);
    v
}

/// Makes the largest-magnitude amplitude positive (first index among near-ties).
pub fn fix_sign(v: &mut [f64]) {
    let amax = v.iter().fold(0.0, |m: f64, a| m.max(a.abs()));
    if let Some(k) = v.iter().position(|a| a.abs() >= amax * (1.0 - 1e-6)) {
        if v[k] < 0.0 {
            v.iter_mut().for_each(|a| *a = -*a);
        }
    }
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    for u in against {
        let c = dot(u, w);
        w.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
    }
}

const CHECK_EVERY: usize = 5;
const BREAKDOWN: f64 = 1e-13;

/// Lowest Ritz pair of `H` restricted to the complement of `deflate`.
fn lowest_eigenpair(
    h: &SparseHamiltonian,
    config: &LanczosConfig,
    deflate: &[Vec<f64>],
    mut start: Vec<f64>,
) -> Result<(f64, Vec<f64>)> {
    let dim = h.dimension();
    for _ in 0..2 {
        orthogonalize(&mut start, deflate);
    }
    let norm = dot(&start, &start).sqrt();
    if !(norm > BREAKDOWN) {
        return Err(Error::NoConvergence { iterations: 0, residual: f64::NAN });
    }
    start.iter_mut().for_each(|a| *a /= norm);

    let max_k = config.max_krylov.min(dim - deflate.len());
    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut last_residual = f64::INFINITY;

    loop {
        let j = basis.len() - 1;
        h.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        w.iter_mut().zip(&basis[j]).for_each(|(x, v)| *x -= a * v);
        if j > 0 {
            let b = beta[j - 1];
            w.iter_mut().zip(&basis[j - 1]).for_each(|(x, v)| *x -= b * v);
        }
        for _ in 0..2 {
            orthogonalize(&mut w, deflate);
            orthogonalize(&mut w, &basis);
        }
        let b = dot(&w, &w).sqrt();
        let k = alpha.len();
        let exhausted = b < BREAKDOWN || k >= max_k;
        if exhausted || k % CHECK_EVERY == 0 {
            let y = lowest_ritz(&alpha, &beta);
            let estimate = b * y[k - 1].abs();
            if estimate <= 0.1 * config.tol || exhausted {
                let mut x = vec![0.0; dim];
                for (coef, v) in y.iter().zip(&basis) {
                    x.iter_mut().zip(v).for_each(|(a, b)| *a += coef * b);
                }
                for _ in 0..2 {
                    orthogonalize(&mut x, deflate);
                }
                let nx = dot(&x, &x).sqrt();
                x.iter_mut().for_each(|a| *a /= nx);
                let e = h.rayleigh_quotient(&x);
                last_residual = deflated_residual(h, &x, e, deflate);
                if last_residual <= config.tol {
                    return Ok((e, x));
                }
                if exhausted {
                    return Err(Error::NoConvergence { iterations: k, residual: last_residual });
                }
            }
        }
        if k >= max_k {
            return Err(Error::NoConvergence { iterations: k, residual: last_residual });
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}

fn deflated_residual(h: &SparseHamiltonian, x: &[f64], e: f64, deflate: &[Vec<f64>]) -> f64 {
    let mut hx = vec![0.0; x.len()];
    h.apply(x, &mut hx);
    hx.iter_mut().zip(x).for_each(|(a, b)| *a -= e * b);
    orthogonalize(&mut hx, deflate);
    dot(&hx, &hx).sqrt()
}

/// Eigenvector of the lowest eigenvalue of the symmetric tridiagonal matrix (alpha, beta).
fn lowest_ritz(alpha: &[f64], beta: &[f64]) -> Vec<f64> {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let idx = eig.eigenvalues.imin();
    eig.eigenvectors.column(idx).iter().copied().collect()
}
