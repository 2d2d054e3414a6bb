#![allow(dead_code)]

use qcnn_core::oracle;
use qcnn_core::sim::{Angle, Circuit, Gate, Matrix4, State};
use qcnn_core::spin::{Dataset, DatasetMeta, ModelKind, Record, Solver};
use qcnn_core::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_state<R: Rng>(rng: &mut R, n: usize, real: bool) -> State {
    let amps: Vec<Complex64> = (0..1 << n)
        .map(|_| {
            let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
            Complex64::new(rng.gen_range(-1.0..1.0), im)
        })
        .collect();
    State::normalize_from(amps).unwrap()
}

pub fn random_unitary4<R: Rng>(rng: &mut R) -> Box<Matrix4> {
    let mut c = Circuit::new(2);
    for _ in 0..6 {
        let q = rng.gen_range(0..2);
        let t = rng.gen_range(-3.0..3.0);
        c.push(Gate::RX { qubit: q, angle: Angle::Bound(t) }).unwrap();
        c.push(Gate::RZ { qubit: 1 - q, angle: Angle::Bound(-t * 0.7) }).unwrap();
        c.push(Gate::CNOT { control: q, target: 1 - q }).unwrap();
        c.push(Gate::RY { qubit: q, angle: Angle::Bound(t * 1.3) }).unwrap();
    }
    let m = oracle::circuit_matrix(&c, &[]);
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    Box::new(out)
}

fn two_distinct<R: Rng>(rng: &mut R, n: usize) -> (usize, usize) {
    let mut qs: Vec<usize> = (0..n).collect();
    qs.shuffle(rng);
    (qs[0], qs[1])
}

/// Random gate drawn from every kind; parameterized gates read a random existing slot
/// (possibly negated) or a bound angle.
pub fn random_gate<R: Rng>(rng: &mut R, n: usize, slots: usize) -> Gate {
    let angle = |rng: &mut R| {
        if slots > 0 && rng.gen_bool(0.7) {
            Angle::Slot { index: rng.gen_range(0..slots), negated: rng.gen_bool(0.2) }
        } else {
            Angle::Bound(rng.gen_range(-4.0..4.0))
        }
    };
    let q = rng.gen_range(0..n);
    let kinds = if n >= 2 { 9 } else { 5 };
    match rng.gen_range(0..kinds) {
        0 => Gate::RY { qubit: q, angle: angle(rng) },
        1 => Gate::RX { qubit: q, angle: angle(rng) },
        2 => Gate::RZ { qubit: q, angle: angle(rng) },
        3 => Gate::X { qubit: q },
        4 => Gate::H { qubit: q },
        5 => {
            let (a, b) = two_distinct(rng, n);
            Gate::CNOT { control: a, target: b }
        }
        6 => {
            let (a, b) = two_distinct(rng, n);
            Gate::CZ { qubits: [a, b] }
        }
        7 => {
            let (a, b) = two_distinct(rng, n);
            Gate::CRY { control: a, target: b, angle: angle(rng) }
        }
        _ => {
            let (a, b) = two_distinct(rng, n);
            Gate::U2 { qubits: [a, b], matrix: random_unitary4(rng) }
        }
    }
}

/// Random circuit with `slots` parameters, each referenced at least once.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize, gates: usize, slots: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for s in 0..slots {
        let a = c.new_param();
        assert_eq!(a, Angle::slot(s));
        c.push(Gate::RY { qubit: rng.gen_range(0..n), angle: a }).unwrap();
    }
    for _ in 0..gates {
        c.push(random_gate(rng, n, slots)).unwrap();
    }
    c
}

pub fn params<R: Rng>(rng: &mut R, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
}

pub fn dataset(records: Vec<(State, i8)>) -> Dataset {
    let meta = DatasetMeta {
        model: ModelKind::TFI,
        num_sites: records[0].0.num_qubits(),
        h_c: 1.0,
        solver: Solver::Dense,
        seed: 0,
        grid: String::new(),
        global_phase: String::new(),
    };
    let records = records
        .into_iter()
        .enumerate()
        .map(|(k, (state, label))| Record { h: k as f64, label, state })
        .collect();
    Dataset::new(meta, records).unwrap()
}
