use std::ops::Range;

use super::gate::{Angle, Gate};
use super::state::State;
use crate::error::{Error, Result};

/// Ordered gate list over a fixed register, with a table of trainable slots.
///
/// Slots may be shared between gates (QCNN weight sharing); every declared
/// slot must be referenced at least once.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    param_count: usize,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit { num_qubits, gates: Vec::new(), param_count: 0 }
    }

    /// Assembles and validates a circuit from raw parts.
    pub fn from_parts(num_qubits: usize, gates: Vec<Gate>, param_count: usize) -> Result<Self> {
        let c = Circuit { num_qubits, gates, param_count };
        c.validate()?;
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    /// Reserves a fresh parameter slot.
    pub fn new_param(&mut self) -> Angle {
        let a = Angle::slot(self.param_count);
        self.param_count += 1;
        a
    }

    /// Appends a gate after checking its targets; slot references grow `param_count` as needed.
    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.num_qubits)?;
        if let Some((slot, _)) = gate.angle().and_then(|a| a.slot_index()) {
            self.param_count = self.param_count.max(slot + 1);
        }
        self.gates.push(gate);
        Ok(self)
    }

    /// Number of gates referencing each slot.
    pub fn slot_usage(&self) -> Vec<usize> {
        let mut usage = vec![0; self.param_count];
        for g in &self.gates {
            if let Some((slot, _)) = g.angle().and_then(|a| a.slot_index()) {
                if let Some(u) = usage.get_mut(slot) {
                    *u += 1;
                }
            }
        }
        usage
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            g.validate(self.num_qubits)?;
            if let Some((slot, _)) = g.angle().and_then(|a| a.slot_index()) {
                if slot >= self.param_count {
                    return Err(Error::UnresolvedSlot { slot, available: self.param_count });
                }
            }
        }
        if let Some(unused) = self.slot_usage().iter().position(|&u| u == 0) {
            return Err(Error::UnusedSlot(unused));
        }
        Ok(())
    }

    fn check_inputs(&self, params: &[f64], state: &State) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::ParamLength { expected: self.param_count, found: params.len() });
        }
        if state.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: state.num_qubits(),
            });
        }
        Ok(())
    }

    /// Resolved angle for every gate (0 for unparameterized gates).
    pub(crate) fn resolve_angles(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.gates
            .iter()
            .map(|g| g.angle().map_or(Ok(0.0), |a| a.resolve(params)))
            .collect()
    }

    /// Applies gates in list order to `state`.
    pub fn run_in_place(&self, params: &[f64], state: &mut State) -> Result<()> {
        self.check_inputs(params, state)?;
        let angles = self.resolve_angles(params)?;
        apply_range(&self.gates, &angles, state, 0..self.gates.len());
        Ok(())
    }

    pub fn run(&self, params: &[f64], input: &State) -> Result<State> {
        let mut out = input.clone();
        self.run_in_place(params, &mut out)?;
        Ok(out)
    }

    /// Reversed gate list of adjoints; slot table is unchanged.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
            param_count: self.param_count,
        }
    }

    /// Same gates with every slot given its own parameter; returns the new circuit and,
    /// for each new slot, the original slot it came from.
    pub fn unshare(&self) -> (Circuit, Vec<usize>) {
        let mut gates = self.gates.clone();
        let mut origin = Vec::new();
        for g in &mut gates {
            if let Some(angle) = g.angle_mut() {
                if let Angle::Slot { index, negated } = *angle {
                    *angle = Angle::Slot { index: origin.len(), negated };
                    origin.push(index);
                }
            }
        }
        let param_count = origin.len();
        (Circuit { num_qubits: self.num_qubits, gates, param_count }, origin)
    }
}

pub(crate) fn apply_range(gates: &[Gate], angles: &[f64], state: &mut State, range: Range<usize>) {
    for k in range {
        gates[k].apply_unchecked(state, angles[k]);
    }
}

pub fn run_circuit(circuit: &Circuit, params: &[f64], input: &State) -> Result<State> {
    circuit.run(params, input)
}

pub fn inverse_circuit(circuit: &Circuit) -> Circuit {
    circuit.inverse()
}
