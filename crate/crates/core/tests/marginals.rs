use nalgebra::DMatrix;
use proptest::prelude::*;
use shadowbench::estimation::Estimator;
use shadowbench::gates;
use shadowbench::groups::GateSet;
use shadowbench::marginals::*;
use shadowbench::measurement::Measurement;
use shadowbench::noise::{assign_noise, build_channel, ChannelSpec, NoiseSpec, SpamSpec};
use shadowbench::ptm::{max_abs_diff, ptm_from_unitary, tau_index};
use shadowbench::simulator::{run_experiment, SequenceMode, SequencePlan, Simulator};

fn channel(spec: ChannelSpec) -> DMatrix<f64> {
    build_channel(&spec).unwrap().into_matrix()
}

#[test]
fn local_clifford_set_sizes() {
    let gs = GateSet::c1xc1().unwrap();
    let sets = local_clifford_sets(&gs).unwrap();
    assert_eq!([sets[0].len(), sets[1].len(), sets[2].len()], [24, 24, 576]);
    assert!(local_clifford_sets(&GateSet::c1().unwrap()).is_err());
}

#[test]
fn noiseless_blocks_are_identity() {
    let gs = GateSet::c1xc1().unwrap();
    let map = exact_decay_map(&gs, &DMatrix::identity(16, 16)).unwrap();
    assert_eq!(map.len(), 624);
    let ms = MarginalSet::reconstruct(&gs, &map).unwrap();
    assert!(max_abs_diff(&ms.full(), &DMatrix::identity(16, 16)) < 1e-12);
}

#[test]
fn missing_decay_is_an_error() {
    let gs = GateSet::c1xc1().unwrap();
    let mut map = exact_decay_map(&gs, &DMatrix::identity(16, 16)).unwrap();
    map.decays.get_mut("P3").unwrap().remove(&5);
    assert!(MarginalSet::reconstruct(&gs, &map).is_err());
}

#[test]
fn product_noise_has_trivial_crosstalk() {
    let gs = GateSet::c1xc1().unwrap();
    for spec in [
        ChannelSpec::Rz { theta: [0.1, 0.1] },
        ChannelSpec::AmplitudeDamping { gamma: [0.1, 0.05] },
        ChannelSpec::Composite { channels: vec![ChannelSpec::Rz { theta: [0.3, -0.2] }, ChannelSpec::AmplitudeDamping { gamma: [0.02, 0.07] }] },
    ] {
        let lam = channel(spec);
        let map = exact_decay_map(&gs, &lam).unwrap();
        let ms = MarginalSet::reconstruct(&gs, &map).unwrap();
        let x = crosstalk_matrices(&ms);
        assert!(x.delta_r1.amax() < 1e-9);
        let d2 = x.delta_r2.unwrap();
        assert!(max_abs_diff(&d2, &DMatrix::identity(9, 9)) < 1e-9);
    }
}

#[test]
fn rxx_crosstalk_is_diagonal() {
    let gs = GateSet::c1xc1().unwrap();
    let lam = channel(ChannelSpec::Rxx { theta: 0.5 });
    let ms = MarginalSet::reconstruct(&gs, &exact_decay_map(&gs, &lam).unwrap()).unwrap();
    let d2 = crosstalk_matrices(&ms).delta_r2.unwrap();
    // XY ↔ IZ style couplings leave the block, so Λ₃ stays diagonal.
    // YY, YZ, ZY, ZZ commute with XX while their local factors do not.
    let c = 0.5f64.cos();
    for i in 0..9 {
        for j in 0..9 {
            let want = match (i == j, i) {
                (false, _) => 0.0,
                (true, 4 | 5 | 7 | 8) => 1.0 / (c * c),
                (true, _) => 1.0,
            };
            assert!((d2[(i, j)] - want).abs() < 1e-9, "({i},{j}) {} vs {want}", d2[(i, j)]);
        }
    }
}

#[test]
fn pauli_rates_examples() {
    let r = pauli_error_rates(&DMatrix::identity(16, 16)).unwrap();
    assert!((r.rates[0] - 1.0).abs() < 1e-12 && r.rates[1..].iter().all(|p| p.abs() < 1e-12));

    let mut probs = vec![0.0; 16];
    probs[0] = 0.9;
    probs[3] = 0.04;
    probs[8] = 0.05;
    probs[15] = 0.01;
    let r = pauli_error_rates(&channel(ChannelSpec::Pauli { probs: probs.clone() })).unwrap();
    for (a, b) in r.raw.iter().zip(&probs) {
        assert!((a - b).abs() < 1e-12);
    }

    let cnot = ptm_from_unitary(&gates::cnot01()).unwrap().into_matrix();
    let gs = GateSet::c1xc1().unwrap();
    let ms = MarginalSet::reconstruct(&gs, &exact_decay_map(&gs, &cnot).unwrap()).unwrap();
    let r = pauli_error_rates(&ms.full()).unwrap();
    let sig = [tau_index(0, 0), tau_index(3, 0), tau_index(0, 1), tau_index(3, 1)];
    for i in 0..16 {
        let want = if sig.contains(&i) { 0.25 } else { 0.0 };
        assert!((r.rates[i] - want).abs() < 1e-9, "τ{i}: {}", r.rates[i]);
    }
}

#[test]
fn two_body_rotations_give_table_amplitudes() {
    let gs = GateSet::c1xc1().unwrap();
    for spec in [ChannelSpec::Rxx { theta: 0.5 }, ChannelSpec::Ryy { theta: 0.5 }, ChannelSpec::Rzz { theta: 0.5 }] {
        let t = gs.twirl(&channel(spec)).unwrap();
        let e = epsilon_amplitudes(t.lambda("P1").unwrap(), t.lambda("P2").unwrap(), t.lambda("P3").unwrap()).unwrap();
        assert!(e.eps[0].abs() < 1e-9 && e.eps[1].abs() < 1e-9);
        assert!((e.eps[2] - 0.068).abs() < 1e-3, "{}", e.eps[2]);
    }
    let cnot = ptm_from_unitary(&gates::cnot01()).unwrap().into_matrix();
    let t = gs.twirl(&cnot).unwrap();
    let e = epsilon_amplitudes(t.lambda("P1").unwrap(), t.lambda("P2").unwrap(), t.lambda("P3").unwrap()).unwrap();
    assert!((e.eps[0] - 2.0 / 3.0).abs() < 1e-12 && (e.eps[1] - 2.0 / 3.0).abs() < 1e-12 && e.eps[2].abs() < 1e-12);
}

#[test]
fn small_negative_amplitudes_are_thresholded() {
    let f = epsilon_forward([-0.02, 0.1, 0.05]);
    let e = epsilon_amplitudes(f[0], f[1], f[2]).unwrap();
    assert_eq!(e.eps[0], 0.0);
    assert!(e.thresholded[0]);
    assert!((e.eps[1] - 0.1).abs() < 1e-12);
}

#[test]
fn epsilon_interval_brackets_estimate() {
    let f = epsilon_forward([0.1, 0.2, 0.15]);
    let iv = epsilon_with_interval(f, [0.002, 0.002, 0.003], 2.0).unwrap();
    for i in 0..3 {
        assert!(iv.lower[i] <= iv.estimate.eps[i] && iv.estimate.eps[i] <= iv.upper[i]);
        assert!(iv.upper[i] - iv.lower[i] > 0.0);
    }
}

#[test]
fn monte_carlo_marginal_error_matches_shot_noise() {
    let gs = GateSet::c1xc1().unwrap();
    let spec = ChannelSpec::Rzz { theta: 0.5 };
    let lam = channel(spec.clone());
    let ng = assign_noise(&gs, &NoiseSpec::uniform(spec), &SpamSpec::default()).unwrap();
    let meas = Measurement::by_name("z").unwrap();
    let sim = Simulator::new(&ng, &meas, &SequenceMode::Random, None).unwrap();
    let n = 3000;
    let plan = SequencePlan::random(vec![1, 2, 3, 4, 6], n, 5);
    let ds = run_experiment(&plan, &sim, "rzz").unwrap();
    let map = mc_decay_map(&ds, &gs, &meas, Estimator::Mean).unwrap();
    let ms = MarginalSet::reconstruct(&gs, &map).unwrap();
    let exact = MarginalSet::from_channel(&lam);
    // A z-basis record at m = 2 lands on one of |P|² block entries, so the
    // per-entry standard error is about |P|/√n.
    let rms = |a: &DMatrix<f64>, b: &DMatrix<f64>| ((a - b).norm_squared() / a.len() as f64).sqrt();
    let sn = (n as f64).sqrt();
    assert!(rms(&ms.l1, &exact.l1) < 1.5 * 3.0 / sn, "{}", rms(&ms.l1, &exact.l1));
    assert!(rms(&ms.l2, &exact.l2) < 1.5 * 3.0 / sn, "{}", rms(&ms.l2, &exact.l2));
    assert!(rms(&ms.l3, &exact.l3) < 1.5 * 9.0 / sn, "{}", rms(&ms.l3, &exact.l3));
    // no systematic offset on the diagonal
    let bias = (0..9).map(|i| ms.l3[(i, i)] - exact.l3[(i, i)]).sum::<f64>() / 9.0;
    assert!(bias.abs() < 3.0 * 9.0 / sn / 3.0, "{bias}");
    let report = marginal_report(&gs, &map).unwrap();
    assert_eq!(report.diagnostics.decay_count, 624);
}

fn random_channel(seed: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(16, 16, |i, j| seed[(i * 17 + j * 5) % seed.len()] * 0.3);
    for j in 0..16 {
        m[(0, j)] = if j == 0 { 1.0 } else { 0.0 };
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reconstruction_round_trip(seed in prop::collection::vec(-1.0f64..1.0, 41)) {
        let gs = GateSet::c1xc1().unwrap();
        let lam = random_channel(&seed);
        let ms = MarginalSet::reconstruct(&gs, &exact_decay_map(&gs, &lam).unwrap()).unwrap();
        let exact = MarginalSet::from_channel(&lam);
        prop_assert!(max_abs_diff(&ms.l1, &exact.l1) < 1e-9);
        prop_assert!(max_abs_diff(&ms.l2, &exact.l2) < 1e-9);
        prop_assert!(max_abs_diff(&ms.l3, &exact.l3) < 1e-9);
    }

    #[test]
    fn simplex_projection_is_nearest(v in prop::collection::vec(-1.0f64..1.0, 16), probes in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 16), 20)) {
        let p = project_simplex(&v);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // KKT: positive entries share v_i − p_i = θ, zero entries have v_i ≤ θ
        let theta = p.iter().zip(&v).find(|(pi, _)| **pi > 0.0).map(|(pi, vi)| vi - pi).unwrap();
        for (pi, vi) in p.iter().zip(&v) {
            if *pi > 0.0 {
                prop_assert!((vi - pi - theta).abs() < 1e-12);
            } else {
                prop_assert!(*vi <= theta + 1e-12);
            }
        }
        let d = |q: &[f64]| q.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        for q in probes {
            let s: f64 = q.iter().sum();
            let q: Vec<f64> = q.iter().map(|x| x / s).collect();
            prop_assert!(d(&p) <= d(&q) + 1e-12);
        }
    }

    #[test]
    fn epsilon_round_trip(e1 in 0.0f64..0.6, e2 in 0.0f64..0.6, e3 in 0.0f64..0.5) {
        let f = epsilon_forward([e1, e2, e3]);
        let e = epsilon_amplitudes(f[0], f[1], f[2]).unwrap();
        let back = epsilon_forward(e.eps);
        for i in 0..3 {
            prop_assert!((back[i] - f[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn pauli_twirl_is_diagonal_and_idempotent(seed in prop::collection::vec(-1.0f64..1.0, 23)) {
        let m = random_channel(&seed);
        let t = pauli_twirl(&m);
        for i in 0..16 {
            for j in 0..16 {
                if i != j {
                    prop_assert!(t[(i, j)].abs() < 1e-12);
                }
            }
        }
        prop_assert!(max_abs_diff(&pauli_twirl(&t), &t) < 1e-12);
    }
}
