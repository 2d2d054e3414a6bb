use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{qubit_mask, State};
use crate::error::{Error, Result};

/// Deviation from unitarity tolerated for `U2` literals.
pub const UNITARY_TOL: f64 = 1e-10;

/// Rotation angle of a parameterized gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    /// Fixed angle in radians.
    Bound(f64),
    /// Angle read from `params[index]`, negated when `negated` is set (used by adjoints).
    Slot { index: usize, negated: bool },
}

impl Angle {
    pub fn slot(index: usize) -> Self {
        Angle::Slot { index, negated: false }
    }

    pub fn resolve(&self, params: &[f64]) -> Result<f64> {
        match *self {
            Angle::Bound(v) => Ok(v),
            Angle::Slot { index, negated } => {
                let v = *params
                    .get(index)
                    .ok_or(Error::UnresolvedSlot { slot: index, available: params.len() })?;
                Ok(if negated { -v } else { v })
            }
        }
    }

    pub fn adjoint(&self) -> Self {
        match *self {
            Angle::Bound(v) => Angle::Bound(-v),
            Angle::Slot { index, negated } => Angle::Slot { index, negated: !negated },
        }
    }

    /// Slot index and the sign of d(angle)/d(param).
    pub fn slot_index(&self) -> Option<(usize, f64)> {
        match *self {
            Angle::Bound(_) => None,
            Angle::Slot { index, negated } => Some((index, if negated { -1.0 } else { 1.0 })),
        }
    }
}

/// Row-major 4x4 matrix on a qubit pair; local index is `2*bit(first) + bit(second)`.
pub type Matrix4 = [[Complex64; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    RY,
    RX,
    RZ,
    X,
    H,
    CNOT,
    CZ,
    CRY,
    U2,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    RY { qubit: usize, angle: Angle },
    RX { qubit: usize, angle: Angle },
    RZ { qubit: usize, angle: Angle },
    X { qubit: usize },
    H { qubit: usize },
    CNOT { control: usize, target: usize },
    CZ { qubits: [usize; 2] },
    CRY { control: usize, target: usize, angle: Angle },
    U2 { qubits: [usize; 2], matrix: Box<Matrix4> },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::RY { .. } => GateKind::RY,
            Gate::RX { .. } => GateKind::RX,
            Gate::RZ { .. } => GateKind::RZ,
            Gate::X { .. } => GateKind::X,
            Gate::H { .. } => GateKind::H,
            Gate::CNOT { .. } => GateKind::CNOT,
            Gate::CZ { .. } => GateKind::CZ,
            Gate::CRY { .. } => GateKind::CRY,
            Gate::U2 { .. } => GateKind::U2,
        }
    }

    /// Qubits touched by the gate, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::RY { qubit, .. }
            | Gate::RX { qubit, .. }
            | Gate::RZ { qubit, .. }
            | Gate::X { qubit }
            | Gate::H { qubit } => vec![qubit],
            Gate::CNOT { control, target } | Gate::CRY { control, target, .. } => {
                vec![control, target]
            }
            Gate::CZ { qubits } | Gate::U2 { qubits, .. } => qubits.to_vec(),
        }
    }

    pub fn angle(&self) -> Option<Angle> {
        match *self {
            Gate::RY { angle, .. }
            | Gate::RX { angle, .. }
            | Gate::RZ { angle, .. }
            | Gate::CRY { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub(crate) fn angle_mut(&mut self) -> Option<&mut Angle> {
        match self {
            Gate::RY { angle, .. }
            | Gate::RX { angle, .. }
            | Gate::RZ { angle, .. }
            | Gate::CRY { angle, .. } => Some(angle),
            _ => None,
        }
    }

    /// Hermitian adjoint; slot references are kept so the same parameters drive both.
    pub fn adjoint(&self) -> Gate {
        match self {
            Gate::RY { qubit, angle } => Gate::RY { qubit: *qubit, angle: angle.adjoint() },
            Gate::RX { qubit, angle } => Gate::RX { qubit: *qubit, angle: angle.adjoint() },
            Gate::RZ { qubit, angle } => Gate::RZ { qubit: *qubit, angle: angle.adjoint() },
            Gate::CRY { control, target, angle } => {
                Gate::CRY { control: *control, target: *target, angle: angle.adjoint() }
            }
            Gate::U2 { qubits, matrix } => {
                let mut dag = [[Complex64::new(0.0, 0.0); 4]; 4];
                for (r, row) in dag.iter_mut().enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = matrix[c][r].conj();
                    }
                }
                Gate::U2 { qubits: *qubits, matrix: Box::new(dag) }
            }
            g => g.clone(),
        }
    }

    /// Checks targets against the register width and U2 unitarity.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange { index: q, num_qubits });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::DuplicateTarget(qs[0]));
        }
        if let Gate::U2 { matrix, .. } = self {
            let dev = unitarity_deviation(matrix);
            if !(dev <= UNITARY_TOL) {
                return Err(Error::NonUnitary(dev));
            }
        }
        Ok(())
    }

    /// Applies the gate in place.
    pub fn apply(&self, state: &mut State, params: &[f64]) -> Result<()> {
        self.validate(state.num_qubits())?;
        let theta = match self.angle() {
            Some(a) => a.resolve(params)?,
            None => 0.0,
        };
        self.apply_unchecked(state, theta);
        Ok(())
    }

    /// Applies the gate with an explicit angle, skipping validation.
    pub(crate) fn apply_unchecked(&self, state: &mut State, theta: f64) {
        let n = state.num_qubits();
        let amps = state.amplitudes_mut();
        match self {
            Gate::RY { qubit, .. } => {
                let (s, c) = (theta / 2.0).sin_cos();
                pair_map(amps, qubit_mask(n, *qubit), |a, b| (a * c - b * s, a * s + b * c));
            }
            Gate::RX { qubit, .. } => {
                let (s, c) = (theta / 2.0).sin_cos();
                let ms = Complex64::new(0.0, -s);
                pair_map(amps, qubit_mask(n, *qubit), |a, b| (a * c + b * ms, a * ms + b * c));
            }
            Gate::RZ { qubit, .. } => {
                let lo = Complex64::from_polar(1.0, -theta / 2.0);
                let hi = lo.conj();
                pair_map(amps, qubit_mask(n, *qubit), |a, b| (a * lo, b * hi));
            }
            Gate::X { qubit } => pair_map(amps, qubit_mask(n, *qubit), |a, b| (b, a)),
            Gate::H { qubit } => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                pair_map(amps, qubit_mask(n, *qubit), |a, b| ((a + b) * r, (a - b) * r));
            }
            Gate::CNOT { control, target } => {
                let cm = qubit_mask(n, *control);
                controlled_pair_map(amps, cm, qubit_mask(n, *target), |a, b| (b, a));
            }
            Gate::CRY { control, target, .. } => {
                let (s, c) = (theta / 2.0).sin_cos();
                let cm = qubit_mask(n, *control);
                controlled_pair_map(amps, cm, qubit_mask(n, *target), |a, b| {
                    (a * c - b * s, a * s + b * c)
                });
            }
            Gate::CZ { qubits } => {
                let m = qubit_mask(n, qubits[0]) | qubit_mask(n, qubits[1]);
                for (i, a) in amps.iter_mut().enumerate() {
                    if i & m == m {
                        *a = -*a;
                    }
                }
            }
            Gate::U2 { qubits, matrix } => {
                let hi = qubit_mask(n, qubits[0]);
                let lo = qubit_mask(n, qubits[1]);
                for i in 0..amps.len() {
                    if i & (hi | lo) != 0 {
                        continue;
                    }
                    let idx = [i, i | lo, i | hi, i | hi | lo];
                    let v = idx.map(|k| amps[k]);
                    for (r, &k) in idx.iter().enumerate() {
                        amps[k] = (0..4).map(|c| matrix[r][c] * v[c]).sum();
                    }
                }
            }
        }
    }
}

/// Max entry of `|U^† U - I|`.
pub fn unitarity_deviation(m: &Matrix4) -> f64 {
    let mut dev: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            let v: Complex64 = (0..4).map(|k| m[k][r].conj() * m[k][c]).sum();
            let target = if r == c { 1.0 } else { 0.0 };
            let d = (v - target).norm();
            dev = if d.is_nan() { f64::NAN } else { dev.max(d) };
        }
    }
    dev
}

#[inline]
fn pair_map<F>(amps: &mut [Complex64], mask: usize, f: F)
where
    F: Fn(Complex64, Complex64) -> (Complex64, Complex64),
{
    let stride = mask << 1;
    for base in (0..amps.len()).step_by(stride) {
        for i in base..base + mask {
            let (a, b) = f(amps[i], amps[i | mask]);
            amps[i] = a;
            amps[i | mask] = b;
        }
    }
}

#[inline]
fn controlled_pair_map<F>(amps: &mut [Complex64], control: usize, target: usize, f: F)
where
    F: Fn(Complex64, Complex64) -> (Complex64, Complex64),
{
    for i in 0..amps.len() {
        if i & control != 0 && i & target == 0 {
            let j = i | target;
            let (a, b) = f(amps[i], amps[j]);
            amps[i] = a;
            amps[j] = b;
        }
    }
}

/// Applies `gate` to a copy of `state`.
pub fn apply_gate(state: &State, gate: &Gate, params: &[f64]) -> Result<State> {
    let mut out = state.clone();
    gate.apply(&mut out, params)?;
    Ok(out)
}
