use std::f64::consts::{FRAC_PI_2, SQRT_2};

use rayon::prelude::*;

use super::{check_inputs, Task};
use crate::error::Result;
use crate::sim::{apply_range, Circuit, GateKind, State};
use crate::spin::Dataset;

/// `(shift, coefficient)` pairs such that `df/dθ = Σ c f(θ + s)`.
fn shift_rule(kind: GateKind) -> &'static [(f64, f64)] {
    const C_PLUS: f64 = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
    const C_MINUS: f64 = (SQRT_2 - 1.0) / (4.0 * SQRT_2);
    const THREE_HALF_PI: f64 = 3.0 * FRAC_PI_2;
    match kind {
        GateKind::RX | GateKind::RY | GateKind::RZ => &[(FRAC_PI_2, 0.5), (-FRAC_PI_2, -0.5)],
        GateKind::CRY => &[
            (FRAC_PI_2, C_PLUS),
            (-FRAC_PI_2, -C_PLUS),
            (THREE_HALF_PI, -C_MINUS),
            (-THREE_HALF_PI, C_MINUS),
        ],
        _ => &[],
    }
}

/// Gradient of `observable(U(θ)|ψ⟩)` with respect to every parameter slot.
///
/// Every parameterized gate is shifted in turn; shared slots accumulate the
/// contributions of all gates that read them, with the sign of adjoint slots applied.
pub fn expectation_gradient<O>(circuit: &Circuit, params: &[f64], input: &State, observable: O) -> Result<Vec<f64>>
where
    O: Fn(&State) -> f64,
{
    let angles = circuit.resolve_angles(params)?;
    Ok(expectation_gradient_resolved(circuit, &angles, input, &observable))
}

fn expectation_gradient_resolved<O>(circuit: &Circuit, angles: &[f64], input: &State, observable: &O) -> Vec<f64>
where
    O: Fn(&State) -> f64,
{
    let gates = circuit.gates();
    let mut grad = vec![0.0; circuit.param_count()];
    let mut prefix = input.clone();
    let mut shifted_angles = angles.to_vec();
    for (k, gate) in gates.iter().enumerate() {
        if let Some((slot, sign)) = gate.angle().and_then(|a| a.slot_index()) {
            let mut derivative = 0.0;
            for &(shift, coef) in shift_rule(gate.kind()) {
                let mut s = prefix.clone();
                shifted_angles[k] = angles[k] + shift;
                apply_range(gates, &shifted_angles, &mut s, k..gates.len());
                derivative += coef * observable(&s);
            }
            shifted_angles[k] = angles[k];
            grad[slot] += sign * derivative;
        }
        apply_range(gates, angles, &mut prefix, k..k + 1);
    }
    grad
}

/// Parameter-shift gradient of the task cost over the whole dataset.
pub fn param_shift_gradient(task: &Task, circuit: &Circuit, dataset: &Dataset, params: &[f64]) -> Result<Vec<f64>> {
    check_inputs(task, circuit, dataset, params)?;
    Ok(gradient_unchecked(task, circuit, dataset, params))
}

pub(crate) fn gradient_unchecked(task: &Task, circuit: &Circuit, dataset: &Dataset, params: &[f64]) -> Vec<f64> {
    let angles = circuit.resolve_angles(params).expect("parameter length checked");
    let gates = circuit.gates();
    let per_sample: Vec<Vec<f64>> = dataset
        .records
        .par_iter()
        .map(|r| {
            let mut out = r.state.clone();
            apply_range(gates, &angles, &mut out, 0..gates.len());
            let slope = task.cost_slope(task.observable(&out), r.label);
            let mut g = expectation_gradient_resolved(circuit, &angles, &r.state, &|s: &State| task.observable(s));
            g.iter_mut().for_each(|v| *v *= slope);
            g
        })
        .collect();
    let m = dataset.len() as f64;
    let mut total = vec![0.0; circuit.param_count()];
    for g in &per_sample {
        total.iter_mut().zip(g).for_each(|(t, v)| *t += v);
    }
    total.iter_mut().for_each(|t| *t /= m);
    total
}
