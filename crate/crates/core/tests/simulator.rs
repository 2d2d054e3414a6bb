mod common;

use common::*;
use proptest::prelude::*;
use qcnn_core::oracle;
use qcnn_core::sim::*;
use qcnn_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_diff(a: &State, b: &[Complex64]) -> f64 {
    a.amplitudes().iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn kernels_match_dense_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=4 {
        for _ in 0..300 {
            let g = random_gate(&mut rng, n, 1);
            let p = [rng.gen_range(-4.0..4.0)];
            let psi = random_state(&mut rng, n, false);
            let out = apply_gate(&psi, &g, &p).unwrap();
            let theta = g.angle().map_or(0.0, |a| a.resolve(&p).unwrap());
            let expected = oracle::gate_matrix(&g, n, theta) * oracle::to_vector(&psi);
            assert!(max_diff(&out, expected.as_slice()) < 1e-12, "{g:?} on {n} qubits");
        }
    }
}

#[test]
fn circuits_match_dense_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 1..=4 {
        for _ in 0..20 {
            let c = random_circuit(&mut rng, n, 15, 3);
            let p = params(&mut rng, 3);
            let psi = random_state(&mut rng, n, false);
            let out = run_circuit(&c, &p, &psi).unwrap();
            let expected = oracle::circuit_matrix(&c, &p) * oracle::to_vector(&psi);
            assert!(max_diff(&out, expected.as_slice()) < 1e-12);
        }
    }
}

#[test]
fn inverse_round_trip_over_random_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..100 {
        let n = 1 + k % 6;
        let c = random_circuit(&mut rng, n, 30, 4);
        let p = params(&mut rng, 4);
        let psi = random_state(&mut rng, n, false);
        let back = run_circuit(&inverse_circuit(&c), &p, &run_circuit(&c, &p, &psi).unwrap()).unwrap();
        assert!(max_diff(&back, psi.amplitudes()) < 1e-10);
    }
}

#[test]
fn inverse_reverses_and_adjoints() {
    let mut c = Circuit::new(2);
    let a = c.new_param();
    c.push(Gate::RY { qubit: 0, angle: a }).unwrap();
    c.push(Gate::CNOT { control: 0, target: 1 }).unwrap();
    let inv = inverse_circuit(&c);
    assert_eq!(inv.param_count(), 1);
    assert_eq!(inv.gates()[0], Gate::CNOT { control: 0, target: 1 });
    assert_eq!(inv.gates()[1], Gate::RY { qubit: 0, angle: Angle::Slot { index: 0, negated: true } });
}

#[test]
fn bit_order_puts_qubit_zero_first() {
    let mut c = Circuit::new(2);
    let a = c.new_param();
    c.push(Gate::RY { qubit: 0, angle: a }).unwrap();
    let out = run_circuit(&c, &[std::f64::consts::PI], &State::zero(2).unwrap()).unwrap();
    assert!((out.amplitudes()[0b10] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn kraus_examples() {
    let zero = State::zero(3).unwrap();
    let branches = kraus_reset_branches(&zero, &[0, 2]).unwrap();
    assert_eq!(branches.len(), 4);
    assert_eq!(branches[0].amplitudes(), zero.amplitudes());
    assert!(branches[1..].iter().all(|b| b.norm_sqr() == 0.0));

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus0 = State::from_real(&[h, 0.0, h, 0.0]).unwrap();
    let branches = kraus_reset_branches(&plus0, &[0]).unwrap();
    for b in &branches {
        assert!((b.norm_sqr() - 0.5).abs() < 1e-15);
        assert!((b.amplitudes()[0].re - h).abs() < 1e-15);
    }
}

#[test]
fn kraus_branches_match_projector_algebra() {
    // K_b|psi> = |0><b|_D |psi>, checked through explicit matrices
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 3;
    let psi = random_state(&mut rng, n, false);
    let discard = [0, 2];
    let branches = kraus_reset_branches(&psi, &discard).unwrap();
    for (b, branch) in branches.iter().enumerate() {
        let bits = [(b >> 1) & 1, b & 1];
        let expected: Vec<Complex64> = (0..8usize)
            .map(|i| {
                let q = |k: usize| (i >> (n - 1 - k)) & 1;
                if q(0) == 0 && q(2) == 0 {
                    let src = i | (bits[0] << 2) | bits[1];
                    psi.amplitudes()[src]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        assert!(max_diff(branch, &expected) < 1e-15);
    }
}

#[test]
fn errors_are_reported() {
    let s = State::zero(2).unwrap();
    assert!(matches!(
        apply_gate(&s, &Gate::X { qubit: 2 }, &[]),
        Err(qcnn_core::Error::QubitOutOfRange { .. })
    ));
    assert!(matches!(
        apply_gate(&s, &Gate::RY { qubit: 0, angle: Angle::slot(1) }, &[0.0]),
        Err(qcnn_core::Error::UnresolvedSlot { .. })
    ));
    let mut c = Circuit::new(2);
    let a = c.new_param();
    c.push(Gate::RX { qubit: 1, angle: a }).unwrap();
    assert!(run_circuit(&c, &[], &s).is_err());
    assert!(run_circuit(&c, &[0.0], &State::zero(3).unwrap()).is_err());
    assert!(kraus_reset_branches(&s, &[]).is_err());
    assert!(kraus_reset_branches(&s, &[5]).is_err());
}

fn real_gate<R: Rng>(rng: &mut R, n: usize) -> Gate {
    loop {
        let g = random_gate(rng, n, 0);
        if matches!(
            g.kind(),
            GateKind::RY | GateKind::CRY | GateKind::CNOT | GateKind::CZ | GateKind::X
        ) {
            return g;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gates_preserve_norm(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(&mut rng, n, false);
        let g = random_gate(&mut rng, n, 1);
        let out = apply_gate(&psi, &g, &[rng.gen_range(-6.0..6.0)]).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kraus_branches_are_complete(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(&mut rng, n, false);
        let nd = rng.gen_range(1..n);
        let mut qs: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(qs.as_mut_slice(), &mut rng);
        let branches = kraus_reset_branches(&psi, &qs[..nd]).unwrap();
        prop_assert_eq!(branches.len(), 1 << nd);
        let total: f64 = branches.iter().map(State::norm_sqr).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn real_gate_set_keeps_states_real(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(n);
        for _ in 0..25 {
            c.push(real_gate(&mut rng, n)).unwrap();
        }
        let out = run_circuit(&c, &[], &random_state(&mut rng, n, true)).unwrap();
        prop_assert!(out.max_imag() < 1e-12);
    }

    #[test]
    fn expectation_is_bounded(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(&mut rng, n, false);
        for q in 0..n {
            let z = expectation_z(&psi, q).unwrap();
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&z));
        }
    }
}
