use std::time::Instant;

use proptest::prelude::*;
use qcnn_core::oracle;
use qcnn_core::sim::{qubit_mask, State};
use qcnn_core::spin::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ham(kind: ModelKind, n: usize, h: f64) -> SparseHamiltonian {
    build_hamiltonian(&SpinModel::new(kind, n, h)).unwrap()
}

#[test]
fn sparse_assembly_matches_pauli_kronecker_oracle() {
    for n in 2..=5 {
        for &h in &[0.0, 0.3, 1.0, 1.7] {
            let sparse = ham(ModelKind::TFI, n, h).to_dense();
            let dense = oracle::tfi_dense(n, h);
            assert!(dense.iter().all(|z| z.im == 0.0));
            assert!((sparse - dense.map(|z| z.re)).amax() < 1e-14, "TFI n={n} h={h}");

            let sparse = ham(ModelKind::XXZ, n, h).to_dense();
            let dense = oracle::xxz_dense(n, h);
            assert!(dense.iter().all(|z| z.im.abs() == 0.0));
            assert!((sparse - dense.map(|z| z.re)).amax() < 1e-14, "XXZ n={n} h={h}");
        }
    }
}

#[test]
fn tfi_two_site_energy_is_minus_sqrt5() {
    let g = ground_state_dense(&ham(ModelKind::TFI, 2, 1.0)).unwrap();
    assert!((g.energy + 5f64.sqrt()).abs() < 1e-10);
    let oracle_e = oracle::lowest_eigenvalue(&oracle::tfi_dense(2, 1.0));
    assert!((g.energy - oracle_e).abs() < 1e-12);
}

#[test]
fn tfi_zero_field_energy_is_minus_bonds() {
    for n in 2..=10 {
        let g = ground_state_dense(&ham(ModelKind::TFI, n, 0.0)).unwrap();
        assert_eq!(g.energy, -((n - 1) as f64), "n={n}");
    }
}

#[test]
fn tfi_large_field_is_paramagnet() {
    let n = 4;
    let g = ground_state_dense(&ham(ModelKind::TFI, n, 10.0)).unwrap();
    let plus = State::from_real(&vec![0.25; 16]).unwrap();
    // each bond mixes in |--> with amplitude 1/(4h)
    let fid = g.state.fidelity(&plus).unwrap();
    assert!((fid - (1.0 - 3.0 / 1600.0)).abs() < 1e-5, "fidelity {fid}");
    assert!(fid >= 0.998);
    // per-site <X_j> >= 0.99
    let v = g.real_amplitudes();
    for j in 0..n {
        let m = qubit_mask(n, j);
        let x: f64 = (0..16).map(|i| v[i] * v[i ^ m]).sum();
        assert!(x >= 0.99, "site {j}: <X> = {x}");
    }
}

#[test]
fn xxz_polarized_regime_has_sharp_magnetization() {
    for n in [4, 6, 8] {
        let g = ground_state_dense(&ham(ModelKind::XXZ, n, 2.0)).unwrap();
        let v = g.real_amplitudes();
        let mz = |i: usize| (0..n).map(|q| if i & qubit_mask(n, q) == 0 { 1.0 } else { -1.0 }).sum::<f64>();
        let mean: f64 = (0..v.len()).map(|i| v[i] * v[i] * mz(i)).sum();
        let var: f64 = (0..v.len()).map(|i| v[i] * v[i] * (mz(i) - mean).powi(2)).sum();
        assert!(var < 1e-9, "n={n} variance {var}");
    }
}

#[test]
fn lanczos_agrees_with_dense_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for kind in [ModelKind::TFI, ModelKind::XXZ] {
        for n in 2..=10 {
            for _ in 0..3 {
                let h: f64 = rng.gen_range(0.2..2.0);
                let m = ham(kind, n, h);
                let d = ground_state_dense(&m).unwrap();
                let l = ground_state_lanczos(&m, &LanczosConfig::default()).unwrap();
                let fid = d.state.fidelity(&l.state).unwrap();
                assert!((d.energy - l.energy).abs() <= 1e-8, "{kind} n={n} h={h}");
                assert!(fid >= 1.0 - 1e-8, "{kind} n={n} h={h} fidelity {fid}");
            }
        }
    }
}

#[test]
fn lanczos_agrees_with_dense_at_twelve_sites() {
    for (kind, h) in [(ModelKind::TFI, 0.2), (ModelKind::TFI, 1.3), (ModelKind::XXZ, 0.6), (ModelKind::XXZ, 1.9)] {
        let m = ham(kind, 12, h);
        let t = Instant::now();
        let d = ground_state_dense(&m).unwrap();
        let td = t.elapsed();
        let t = Instant::now();
        let l = ground_state_lanczos(&m, &LanczosConfig::default()).unwrap();
        let tl = t.elapsed();
        eprintln!("{kind} N=12 h={h}: dense {td:?}, lanczos {tl:?}, degeneracy {}", d.degeneracy);
        assert!((d.energy - l.energy).abs() <= 1e-8);
        assert!(d.state.fidelity(&l.state).unwrap() >= 1.0 - 1e-8);
    }
}

#[test]
fn lanczos_sixteen_site_ferromagnet() {
    let m = ham(ModelKind::TFI, 16, 0.0);
    let g = ground_state_lanczos(&m, &LanczosConfig::default()).unwrap();
    assert!((g.energy + 15.0).abs() < 1e-10);
    let rq = m.rayleigh_quotient(&g.real_amplitudes());
    assert!((rq - g.energy).abs() < 1e-10);
}

#[test]
fn lanczos_rayleigh_quotient_matches_energy() {
    let m = ham(ModelKind::XXZ, 9, 0.4);
    let g = ground_state_lanczos(&m, &LanczosConfig::default()).unwrap();
    assert!((m.rayleigh_quotient(&g.real_amplitudes()) - g.energy).abs() < 1e-10);
    assert!(m.residual(&g.real_amplitudes(), g.energy) <= 1e-8);
}

#[test]
fn dataset_states_are_real_ground_states() {
    let grid = default_grid(0.2, 1.8, 6, 1.0);
    let split = Split { train_fraction: 0.5, seed: 5 };
    let (train, test) = generate_dataset(ModelKind::TFI, 4, &grid, 1.0, split, SolverChoice::Auto).unwrap();
    assert_eq!(train.len() + test.len(), 6);
    for r in train.records.iter().chain(&test.records) {
        assert_eq!(r.state.max_imag(), 0.0);
        let m = ham(ModelKind::TFI, 4, r.h);
        let e0 = ground_state_dense(&m).unwrap().energy;
        let v: Vec<f64> = r.state.amplitudes().iter().map(|a| a.re).collect();
        assert!((m.rayleigh_quotient(&v) - e0).abs() < 1e-9);
        assert_eq!(r.label, if r.h > 1.0 { 1 } else { -1 });
    }
}

#[test]
fn dataset_generation_is_deterministic() {
    let grid = default_grid(0.2, 1.8, 10, 1.0);
    let split = Split { train_fraction: 0.7, seed: 11 };
    let a = generate_dataset(ModelKind::XXZ, 5, &grid, 1.0, split, SolverChoice::Lanczos).unwrap();
    let b = generate_dataset(ModelKind::XXZ, 5, &grid, 1.0, split, SolverChoice::Lanczos).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rayleigh_quotient_bounded_by_ground_energy(
        xxz in any::<bool>(),
        n in 2usize..=6,
        h in 0.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let kind = if xxz { ModelKind::XXZ } else { ModelKind::TFI };
        let m = ham(kind, n, h);
        let e0 = ground_state_dense(&m).unwrap().energy;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        prop_assert!(m.rayleigh_quotient(&v) >= e0 - 1e-9);
    }
}
