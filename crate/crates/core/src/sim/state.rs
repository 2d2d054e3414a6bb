use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 26;

const NORM_TOL: f64 = 1e-9;

/// Bit mask of `qubit` inside a basis index. Qubit 0 is the most significant bit.
#[inline]
pub fn qubit_mask(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// Pure state of `num_qubits` qubits as a dense amplitude vector.
///
/// Basis index `i` labels `|q0 q1 ... q_{N-1}>` with `q0` as the most
/// significant bit. Kraus branches produced by the reset channel are carried
/// in the same type with `normalized == false`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
    normalized: bool,
}

impl State {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: index });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(State { num_qubits, amplitudes, normalized: true })
    }

    /// Builds a normalized state, rejecting vectors whose squared norm is off by more than 1e-9.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = width_of(amplitudes.len())?;
        let state = State { num_qubits, amplitudes, normalized: true };
        let n2 = state.norm_sqr();
        if !n2.is_finite() || (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(state)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalize_from(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = width_of(amplitudes.len())?;
        let n2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(n2.is_finite() && n2 > 0.0) {
            return Err(Error::NotNormalized(n2));
        }
        let scale = n2.sqrt().recip();
        Ok(State {
            num_qubits,
            amplitudes: amplitudes.into_iter().map(|a| a * scale).collect(),
            normalized: true,
        })
    }

    pub(crate) fn unnormalized(num_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        State { num_qubits, amplitudes, normalized: false }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// False for unnormalized Kraus branches.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &State) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &State) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Largest imaginary part in magnitude.
    pub fn max_imag(&self) -> f64 {
        self.amplitudes.iter().fold(0.0, |m, a| m.max(a.im.abs()))
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    /// `self ⊗ other`, with `self` occupying the leading (most significant) qubits.
    pub fn tensor(&self, other: &State) -> Result<State> {
        let num_qubits = self.num_qubits + other.num_qubits;
        check_width(num_qubits)?;
        let mut amplitudes = Vec::with_capacity(1 << num_qubits);
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(State { num_qubits, amplitudes, normalized: self.normalized && other.normalized })
    }

    pub(crate) fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    /// `<psi|Z_q|psi>`, divided by the squared norm for unnormalized inputs.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = qubit_mask(self.num_qubits, qubit);
        let mut acc = 0.0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i & mask == 0 {
                acc += a.norm_sqr();
            } else {
                acc -= a.norm_sqr();
            }
        }
        if self.normalized {
            Ok(acc)
        } else {
            Ok(acc / self.norm_sqr())
        }
    }
}

fn check_width(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::DimensionMismatch { expected: MAX_QUBITS, found: num_qubits });
    }
    Ok(())
}

fn width_of(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    let n = len.trailing_zeros() as usize;
    check_width(n)?;
    Ok(n)
}

/// `<psi|Z_q|psi>`.
pub fn expectation_z(state: &State, qubit: usize) -> Result<f64> {
    state.expectation_z(qubit)
}

/// Enumerates the Kraus branches `K_b|psi>` of resetting the `discard` qubits to `|0>`.
///
/// `K_b = |0><b|` on the discarded qubits tensored with the identity elsewhere.
/// Branch `b` is ordered with the lowest-indexed discarded qubit as its most
/// significant bit, so the returned list has `2^{n_d}` entries.
pub fn kraus_reset_branches(state: &State, discard: &[usize]) -> Result<Vec<State>> {
    let n = state.num_qubits();
    let masks = discard_masks(n, discard)?;
    let dmask: usize = masks.iter().sum();
    let nd = masks.len();
    let amps = state.amplitudes();
    let mut branches = Vec::with_capacity(1 << nd);
    for b in 0..(1usize << nd) {
        let bmask: usize = masks
            .iter()
            .enumerate()
            .filter(|(k, _)| (b >> (nd - 1 - k)) & 1 == 1)
            .map(|(_, m)| m)
            .sum();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (i, slot) in out.iter_mut().enumerate() {
            if i & dmask == 0 {
                *slot = amps[i | bmask];
            }
        }
        branches.push(State::unnormalized(n, out));
    }
    Ok(branches)
}

/// Sorted per-qubit masks for a discard set; rejects empty, duplicate or out-of-range entries.
pub(crate) fn discard_masks(num_qubits: usize, discard: &[usize]) -> Result<Vec<usize>> {
    if discard.is_empty() {
        return Err(Error::EmptyDiscard);
    }
    let mut sorted = discard.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidDiscard(format!("qubit {} listed twice", w[0])));
        }
    }
    if let Some(&q) = sorted.last() {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange { index: q, num_qubits });
        }
    }
    if sorted.len() == num_qubits {
        return Err(Error::InvalidDiscard("cannot discard every qubit".into()));
    }
    Ok(sorted.into_iter().map(|q| qubit_mask(num_qubits, q)).collect())
}
