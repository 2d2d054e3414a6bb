//! Slow reference constructions used only by tests.
//!
//! Everything here is built from explicit matrices (Kronecker products,
//! element formulas, density matrices) and shares no code path with the
//! kernels it checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::sim::{Circuit, Gate, State};

type CMat = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn local_matrix(gate: &Gate, theta: f64) -> Vec<Vec<Complex64>> {
    let (s, co) = (theta / 2.0).sin_cos();
    let i = Complex64::new(0.0, 1.0);
    let z = c(0.0);
    let o = c(1.0);
    match gate {
        Gate::RY { .. } => vec![vec![c(co), c(-s)], vec![c(s), c(co)]],
        Gate::RX { .. } => vec![vec![c(co), -i * s], vec![-i * s, c(co)]],
        Gate::RZ { .. } => vec![
            vec![Complex64::from_polar(1.0, -theta / 2.0), z],
            vec![z, Complex64::from_polar(1.0, theta / 2.0)],
        ],
        Gate::X { .. } => vec![vec![z, o], vec![o, z]],
        Gate::H { .. } => {
            let r = c(std::f64::consts::FRAC_1_SQRT_2);
            vec![vec![r, r], vec![r, -r]]
        }
        Gate::CNOT { .. } => vec![
            vec![o, z, z, z],
            vec![z, o, z, z],
            vec![z, z, z, o],
            vec![z, z, o, z],
        ],
        Gate::CZ { .. } => vec![
            vec![o, z, z, z],
            vec![z, o, z, z],
            vec![z, z, o, z],
            vec![z, z, z, -o],
        ],
        Gate::CRY { .. } => vec![
            vec![o, z, z, z],
            vec![z, o, z, z],
            vec![z, z, c(co), c(-s)],
            vec![z, z, c(s), c(co)],
        ],
        Gate::U2 { matrix, .. } => matrix.iter().map(|r| r.to_vec()).collect(),
    }
}

/// Full `2^N x 2^N` matrix of a gate via the element formula
/// `M[i][j] = G[loc(i)][loc(j)] * prod_{q untouched} delta(i_q, j_q)`.
pub fn gate_matrix(gate: &Gate, num_qubits: usize, theta: f64) -> CMat {
    let dim = 1usize << num_qubits;
    let qs = gate.qubits();
    let g = local_matrix(gate, theta);
    let bit = |i: usize, q: usize| (i >> (num_qubits - 1 - q)) & 1;
    let loc = |i: usize| qs.iter().fold(0, |acc, &q| (acc << 1) | bit(i, q));
    DMatrix::from_fn(dim, dim, |i, j| {
        let same_rest = (0..num_qubits).filter(|q| !qs.contains(q)).all(|q| bit(i, q) == bit(j, q));
        if same_rest {
            g[loc(i)][loc(j)]
        } else {
            c(0.0)
        }
    })
}

/// Product of gate matrices in circuit order.
pub fn circuit_matrix(circuit: &Circuit, params: &[f64]) -> CMat {
    let n = circuit.num_qubits();
    let mut u = CMat::identity(1 << n, 1 << n);
    for g in circuit.gates() {
        let theta = g.angle().map_or(0.0, |a| a.resolve(params).unwrap());
        u = gate_matrix(g, n, theta) * u;
    }
    u
}

pub fn to_vector(state: &State) -> DVector<Complex64> {
    DVector::from_column_slice(state.amplitudes())
}

fn pauli(p: char) -> CMat {
    let i = Complex64::new(0.0, 1.0);
    match p {
        'I' => CMat::identity(2, 2),
        'X' => CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        'Y' => CMat::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
        'Z' => CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
        _ => unreachable!(),
    }
}

/// Kronecker product of single-site Paulis; `ops` gives (site, symbol) pairs, qubit 0 leftmost.
pub fn pauli_string(num_sites: usize, ops: &[(usize, char)]) -> CMat {
    let mut m = CMat::identity(1, 1);
    for site in 0..num_sites {
        let p = ops.iter().find(|(s, _)| *s == site).map_or('I', |(_, p)| *p);
        m = m.kronecker(&pauli(p));
    }
    m
}

/// TFI Hamiltonian assembled from Pauli Kronecker products.
pub fn tfi_dense(num_sites: usize, h: f64) -> CMat {
    let dim = 1 << num_sites;
    let mut m = CMat::zeros(dim, dim);
    for j in 0..num_sites - 1 {
        m -= pauli_string(num_sites, &[(j, 'Z'), (j + 1, 'Z')]);
    }
    for j in 0..num_sites {
        m -= pauli_string(num_sites, &[(j, 'X')]) * c(h);
    }
    m
}

/// XXZ Hamiltonian assembled from Pauli Kronecker products.
pub fn xxz_dense(num_sites: usize, h: f64) -> CMat {
    let dim = 1 << num_sites;
    let mut m = CMat::zeros(dim, dim);
    for j in 0..num_sites - 1 {
        m -= pauli_string(num_sites, &[(j, 'X'), (j + 1, 'X')]);
        m -= pauli_string(num_sites, &[(j, 'Y'), (j + 1, 'Y')]);
        m -= pauli_string(num_sites, &[(j, 'Z'), (j + 1, 'Z')]) * c(h);
    }
    m
}

/// Lowest eigenvalue of a Hermitian matrix that is real in the computational basis.
pub fn lowest_eigenvalue(m: &CMat) -> f64 {
    let real = m.map(|z| z.re);
    real.symmetric_eigen().eigenvalues.min()
}

/// Partial trace over the qubits in `traced` of a density matrix on `num_qubits` qubits.
fn partial_trace(rho: &CMat, num_qubits: usize, traced: &[usize]) -> CMat {
    let kept: Vec<usize> = (0..num_qubits).filter(|q| !traced.contains(q)).collect();
    let bit = |i: usize, q: usize| (i >> (num_qubits - 1 - q)) & 1;
    let pack = |i: usize, qs: &[usize]| qs.iter().fold(0, |acc, &q| (acc << 1) | bit(i, q));
    let dk = 1 << kept.len();
    let mut out = CMat::zeros(dk, dk);
    let dim = 1 << num_qubits;
    for i in 0..dim {
        for j in 0..dim {
            if pack(i, traced) == pack(j, traced) {
                out[(pack(i, &kept), pack(j, &kept))] += rho[(i, j)];
            }
        }
    }
    out
}

/// Reconstruction fidelity via explicit density matrices:
/// `rho_enc = Tr_discard(U|psi><psi|U^†)`, `rho_dec = U^† (|0><0|_discard ⊗ rho_enc) U`,
/// `F = <psi|rho_dec|psi>`.
pub fn density_matrix_fidelity(encoder: &Circuit, params: &[f64], discard: &[usize], psi: &State) -> f64 {
    let n = encoder.num_qubits();
    let u = circuit_matrix(encoder, params);
    let v = to_vector(psi);
    let phi = &u * &v;
    let rho = &phi * phi.adjoint();
    let rho_enc = partial_trace(&rho, n, discard);
    let kept: Vec<usize> = (0..n).filter(|q| !discard.contains(q)).collect();
    let bit = |i: usize, q: usize| (i >> (n - 1 - q)) & 1;
    let pack = |i: usize, qs: &[usize]| qs.iter().fold(0, |acc, &q| (acc << 1) | bit(i, q));
    let dim = 1 << n;
    let mut reset = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if pack(i, discard) == 0 && pack(j, discard) == 0 {
                reset[(i, j)] = rho_enc[(pack(i, &kept), pack(j, &kept))];
            }
        }
    }
    let rho_dec = u.adjoint() * reset * &u;
    (v.adjoint() * rho_dec * &v)[(0, 0)].re
}

/// Central finite-difference gradient.
pub fn finite_difference<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], step: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|k| {
            p[k] = x[k] + step;
            let up = f(&p);
            p[k] = x[k] - step;
            let down = f(&p);
            p[k] = x[k];
            (up - down) / (2.0 * step)
        })
        .collect()
}
