use nalgebra::DMatrix;
use proptest::prelude::*;
use shadowbench::estimation::*;
use shadowbench::gates;
use shadowbench::groups::GateSet;
use shadowbench::measurement::Measurement;
use shadowbench::noise::{assign_noise, build_channel, ChannelSpec, NoiseSpec, SpamSpec};
use shadowbench::ptm::ptm_from_unitary;
use shadowbench::simulator::{run_experiment, SequenceMode, SequencePlan, Simulator};

fn probe(gs: &GateSet, block: &str, basis: &str) -> ProbeConfig {
    ProbeConfig::sector(gs, block, &Measurement::by_name(basis).unwrap()).unwrap()
}

fn catalog() -> Vec<(GateSet, &'static str, &'static str)> {
    let mut v = Vec::new();
    for (name, block, basis) in [
        ("c2", "P1", "z"),
        ("g1", "P1", "mixed_zx"),
        ("g1", "P2", "mixed_zx"),
        ("c1xc1", "P1", "z"),
        ("c1xc1", "P2", "z"),
        ("c1xc1", "P3", "z"),
        ("c1xi", "P1", "qubit1_z"),
        ("leakage", "P0", "leakage"),
        ("leakage", "P0_2", "leakage"),
    ] {
        v.push((GateSet::by_name(name).unwrap(), block, basis));
    }
    v
}

#[test]
fn normalization_constants() {
    let cases = [
        ("c2", "P1", "z", 20.0 / 3.0),
        ("c1xc1", "P1", "z", 12.0),
        ("c1xc1", "P2", "z", 12.0),
        ("c1xc1", "P3", "z", 36.0),
        ("c1xi", "P1", "qubit1_z", 6.0),
        ("leakage", "P0", "leakage", 1.0),
        ("leakage", "P0_2", "leakage", 2.0),
    ];
    for (name, block, basis, c0) in cases {
        let gs = GateSet::by_name(name).unwrap();
        let p = probe(&gs, block, basis);
        assert!((p.c0 - c0).abs() < 1e-10, "{name} {block}: {}", p.c0);
    }
}

#[test]
fn probe_without_overlap_is_rejected() {
    let gs = GateSet::g1().unwrap();
    let err = ProbeConfig::sector(&gs, "P2", &Measurement::by_name("z").unwrap()).unwrap_err();
    assert!(err.to_string().contains("no overlap"));
}

#[test]
fn noiseless_analytic_is_one() {
    for (gs, block, basis) in catalog() {
        let p = probe(&gs, block, basis);
        let ng = assign_noise(&gs, &NoiseSpec::none(), &SpamSpec::default()).unwrap();
        let meas = Measurement::by_name(basis).unwrap();
        let sim = Simulator::new(&ng, &meas, &SequenceMode::Random, None).unwrap();
        let k = analytic_sequence_function(&p, &sim, &[1, 2, 5]).unwrap();
        for v in k {
            assert!((v - 1.0).abs() < 1e-10, "{} {block}: {v}", gs.name);
        }
    }
}

#[test]
fn clifford_pauli_decay_closed_form() {
    let gs = GateSet::c2().unwrap();
    let p = probe(&gs, "P1", "z");
    let spec = ChannelSpec::default_pauli();
    let lam_ptm = build_channel(&spec).unwrap().into_matrix();
    let lam = (lam_ptm.trace() - 1.0) / 15.0;
    let ng = assign_noise(&gs, &NoiseSpec::uniform(spec), &SpamSpec::default()).unwrap();
    let meas = Measurement::by_name("z").unwrap();
    let sim = Simulator::new(&ng, &meas, &SequenceMode::Random, None).unwrap();
    let ms = [1, 2, 3, 10];
    let k = analytic_sequence_function(&p, &sim, &ms).unwrap();
    // the last noise layer only rescales the prefactor
    assert!((k[1] / k[0] - lam).abs() < 1e-12);
    assert!((k[2] / k[1] - lam).abs() < 1e-12);
    assert!((k[3] / k[2] - lam.powi(7)).abs() < 1e-12);
    assert!((p.twirl_decay(&lam_ptm) - lam).abs() < 1e-15);
}

#[test]
fn analytic_matches_transfer_oracle_for_uniform_noise() {
    let noises = [
        ChannelSpec::Rxx { theta: 0.5 },
        ChannelSpec::Composite { channels: vec![ChannelSpec::default_pauli(), ChannelSpec::AmplitudeDamping { gamma: [0.05, 0.02] }] },
    ];
    let spam = SpamSpec { prep: Some(ChannelSpec::AmplitudeDamping { gamma: [0.03, 0.01] }), meas: Some(ChannelSpec::weight_one_pauli(0.02)) };
    for (gs, block, basis) in catalog() {
        if gs.name == "c2" {
            continue;
        }
        for n in &noises {
            let ng = assign_noise(&gs, &NoiseSpec::uniform(n.clone()), &spam).unwrap();
            let meas = Measurement::by_name(basis).unwrap();
            let sim = Simulator::new(&ng, &meas, &SequenceMode::Random, None).unwrap();
            let p = probe(&gs, block, basis);
            let a = analytic_sequence_function(&p, &sim, &[1, 2, 3, 7]).unwrap();
            let t = transfer_sequence_function(&p, &sim, &[1, 2, 3, 7]).unwrap();
            for (x, y) in a.iter().zip(&t) {
                assert!((x - y).abs() < 1e-10, "{} {block}: {x} vs {y}", gs.name);
            }
        }
    }
}

#[test]
fn gate_dependent_noise_needs_transfer_oracle() {
    let gs = GateSet::g1().unwrap();
    let spec = NoiseSpec::PerCnotCount { base: ChannelSpec::default_pauli(), entangling: ChannelSpec::Rzz { theta: 0.1 } };
    let ng = assign_noise(&gs, &spec, &SpamSpec::default()).unwrap();
    let meas = Measurement::by_name("mixed_zx").unwrap();
    let sim = Simulator::new(&ng, &meas, &SequenceMode::Random, None).unwrap();
    let p = probe(&gs, "P1", "mixed_zx");
    let err = analytic_sequence_function(&p, &sim, &[1, 2]).unwrap_err();
    assert!(err.to_string().contains("Monte-Carlo"));
    assert!(transfer_sequence_function(&p, &sim, &[1, 2]).is_ok());
}

#[test]
fn interleaved_clifford_decay() {
    let gs = GateSet::c2().unwrap();
    let target = gs.find_unitary(&gates::cnot01()).unwrap();
    let meas = Measurement::by_name("z").unwrap();
    let p = ProbeConfig::element(&gs, "P1", target, &meas).unwrap();
    let pauli = ChannelSpec::default_pauli();
    let cnot_err = ChannelSpec::Rzz { theta: 0.1 };
    let ng = assign_noise(&gs, &NoiseSpec::uniform(pauli.clone()), &SpamSpec::default()).unwrap();
    let sim = Simulator::new(&ng, &meas, &SequenceMode::Interleaved { target }, Some(&cnot_err)).unwrap();
    let lam = build_channel(&pauli).unwrap().into_matrix();
    let lu = build_channel(&cnot_err).unwrap().into_matrix();
    let expect = ((&lu * &lam).trace() - 1.0) / 15.0;
    let k = analytic_sequence_function(&p, &sim, &[2, 3, 4]).unwrap();
    assert!((k[1] / k[0] - expect).abs() < 1e-12);
    assert!((k[2] / k[1] - expect).abs() < 1e-12);
    let t = transfer_sequence_function(&p, &sim, &[2, 3, 4]).unwrap();
    for (a, b) in k.iter().zip(&t) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn monte_carlo_matches_analytic_for_clifford() {
    let gs = GateSet::c2().unwrap();
    let ng = assign_noise(&gs, &NoiseSpec::uniform(ChannelSpec::weight_one_pauli(0.03)), &SpamSpec::default()).unwrap();
    let meas = Measurement::by_name("z").unwrap();
    let sim = Simulator::new(&ng, &meas, &SequenceMode::Random, None).unwrap();
    let lengths = vec![1, 3, 6, 10];
    let plan = SequencePlan::random(lengths.clone(), 1000, 11);
    let ds = run_experiment(&plan, &sim, "test").unwrap();
    let p = probe(&gs, "P1", "z");
    let est = estimate_sequence_function(&ds, &gs, &p, Estimator::Mean).unwrap();
    let exact = analytic_sequence_function(&p, &sim, &lengths).unwrap();
    for (pm, e) in est.per_m.iter().zip(&exact) {
        assert!((pm.k - e).abs() < 4.0 * pm.stderr, "m={}: {} vs {e} (se {})", pm.m, pm.k, pm.stderr);
    }
}

#[test]
fn leakage_correlation_values() {
    let gs = GateSet::leakage().unwrap();
    let meas = Measurement::by_name("leakage").unwrap();
    let p0 = ProbeConfig::sector(&gs, "P0", &meas).unwrap();
    let p2 = ProbeConfig::sector(&gs, "P0_2", &meas).unwrap();
    let seq = [3, 7, 1];
    assert!((sequence_correlation(&gs, &seq, "comp", &p0).unwrap() - 1.0).abs() < 1e-12);
    assert!(sequence_correlation(&gs, &seq, "leak", &p0).unwrap().abs() < 1e-12);
    assert!((sequence_correlation(&gs, &seq, "comp", &p2).unwrap() - 1.0).abs() < 1e-12);
    assert!((sequence_correlation(&gs, &seq, "leak", &p2).unwrap() + 1.0).abs() < 1e-12);
    assert!(sequence_correlation(&gs, &[99], "comp", &p0).is_err());
}

#[test]
fn noiseless_m1_records_average_to_one() {
    for (gs, block, basis) in catalog() {
        let p = probe(&gs, block, basis);
        let ng = assign_noise(&gs, &NoiseSpec::none(), &SpamSpec::default()).unwrap();
        let meas = Measurement::by_name(basis).unwrap();
        let sim = Simulator::new(&ng, &meas, &SequenceMode::Random, None).unwrap();
        if gs.order() > 1000 {
            continue;
        }
        // exact average over g and outcomes
        let mut acc = 0.0;
        for g in 0..gs.order() {
            let probs = sim.outcome_distribution(&[g]).unwrap();
            for (x, px) in probs.iter().enumerate() {
                if *px > 0.0 {
                    acc += px * sequence_correlation(&gs, &[g], &meas.labels[x], &p).unwrap();
                }
            }
        }
        let n = gs.order() as f64;
        assert!((acc / n - 1.0).abs() < 1e-10, "{} {block}: {}", gs.name, acc / n);
    }
}

#[test]
fn exact_fit_recovery() {
    let ms: Vec<usize> = (1..=15).collect();
    let ys: Vec<f64> = ms.iter().map(|&m| 0.9 * 0.95f64.powi(m as i32 - 1)).collect();
    let f = fit_points(FitModel::Single, &ms, &ys, None, None).unwrap();
    assert!((f.params[0] - 0.9).abs() < 1e-8);
    assert!((f.lambda() - 0.95).abs() < 1e-8);

    // leakage model 1 with L = 0.02, S = 0.05
    let (l, s) = (0.02f64, 0.05f64);
    let ms: Vec<usize> = (1..=60).step_by(3).collect();
    let ys: Vec<f64> = ms.iter().map(|&m| s / (s + l) + l / (s + l) * (1.0 - l - s).powi(m as i32 - 1)).collect();
    let f = fit_points(FitModel::Offset, &ms, &ys, None, None).unwrap();
    assert!((f.params[0] - 5.0 / 7.0).abs() < 1e-8);
    assert!((f.params[1] - 2.0 / 7.0).abs() < 1e-8);
    assert!((f.lambda() - 0.93).abs() < 1e-8);
    let r = leakage_rates(&f, LeakageModel::Projector).unwrap();
    assert!((r.leakage - l).abs() < 1e-8 && (r.seepage - s).abs() < 1e-8);
}

#[test]
fn fit_rejects_too_few_lengths() {
    assert!(fit_points(FitModel::Single, &[1, 2], &[1.0, 0.9], None, None).is_err());
    assert!(fit_points(FitModel::Offset, &[1, 2, 3], &[1.0, 0.9, 0.8], None, None).is_err());
}

#[test]
fn negative_decay_is_fitted() {
    let ms: Vec<usize> = (1..=8).collect();
    let ys: Vec<f64> = ms.iter().map(|&m| (-0.3f64).powi(m as i32 - 1)).collect();
    let f = fit_points(FitModel::Single, &ms, &ys, None, None).unwrap();
    assert!((f.lambda() + 0.3).abs() < 1e-8);
}

#[test]
fn leakage_rates_edge_cases() {
    let f = fit_points(FitModel::Offset, &[1, 2, 3, 4], &[1.0; 4], None, Some(&[0.5, 0.0, 1.0])).unwrap();
    let r = leakage_rates(&f, LeakageModel::Projector).unwrap();
    assert!(r.leakage.abs() < 1e-12 && r.seepage.abs() < 1e-12);
}

#[test]
fn leakage_fits_recover_exact_rates() {
    let gs = GateSet::leakage().unwrap();
    let meas = Measurement::by_name("leakage").unwrap();
    let spec = ChannelSpec::Composite { channels: vec![ChannelSpec::default_pauli(), ChannelSpec::AmplitudeDamping { gamma: [0.02, 0.02] }] };
    let lam = build_channel(&spec).unwrap().into_matrix();
    let (l, s) = exact_leakage(&lam);
    let ng = assign_noise(&gs, &NoiseSpec::uniform(spec), &SpamSpec::default()).unwrap();
    let sim = Simulator::new(&ng, &meas, &SequenceMode::Random, None).unwrap();
    let ms: Vec<usize> = (1..=200).step_by(10).collect();
    for (block, model) in [("P0", LeakageModel::Projector), ("P0_2", LeakageModel::Signed)] {
        let p = ProbeConfig::sector(&gs, block, &meas).unwrap();
        let k = analytic_sequence_function(&p, &sim, &ms).unwrap();
        let f = fit_points(FitModel::Offset, &ms, &k, None, None).unwrap();
        let r = leakage_rates(&f, model).unwrap();
        assert!((r.leakage - l).abs() < 1e-7, "{block}: {} vs {l}", r.leakage);
        assert!((r.seepage - s).abs() < 1e-7, "{block}: {} vs {s}", r.seepage);
    }
}

#[test]
fn spam_leaves_decay_unchanged() {
    let gs = GateSet::c1xc1().unwrap();
    let meas = Measurement::by_name("z").unwrap();
    let noise = NoiseSpec::uniform(ChannelSpec::Rzz { theta: 0.3 });
    let spam = SpamSpec { prep: Some(ChannelSpec::weight_one_pauli(0.05)), meas: Some(ChannelSpec::AmplitudeDamping { gamma: [0.04, 0.04] }) };
    let ms: Vec<usize> = (1..=12).collect();
    let p = probe(&gs, "P3", "z");
    let mut lams = Vec::new();
    let mut amps = Vec::new();
    for sp in [SpamSpec::default(), spam] {
        let ng = assign_noise(&gs, &noise, &sp).unwrap();
        let sim = Simulator::new(&ng, &meas, &SequenceMode::Random, None).unwrap();
        let k = analytic_sequence_function(&p, &sim, &ms).unwrap();
        let f = fit_points(FitModel::Single, &ms, &k, None, None).unwrap();
        lams.push(f.lambda());
        amps.push(f.params[0]);
    }
    assert!((lams[0] - lams[1]).abs() < 1e-9);
    assert!((amps[0] - amps[1]).abs() > 1e-3);
}

#[test]
fn c1xi_single_decay_survives_multiplicity() {
    let gs = GateSet::c1xi().unwrap();
    let meas = Measurement::by_name("qubit1_z").unwrap();
    let ng = assign_noise(&gs, &NoiseSpec::PerQubitLocal { theta: [0.2, 0.1], gamma: [0.05, 0.1] }, &SpamSpec::default()).unwrap();
    let sim = Simulator::new(&ng, &meas, &SequenceMode::Random, None).unwrap();
    let p = probe(&gs, "P1", "qubit1_z");
    let ms: Vec<usize> = (1..=12).collect();
    let k = analytic_sequence_function(&p, &sim, &ms).unwrap();
    let f = fit_points(FitModel::Single, &ms, &k, None, None).unwrap();
    let lam = gs.twirl(ng.uniform_noise().unwrap()).unwrap().lambda("P1").unwrap();
    assert!((f.lambda() - lam).abs() < 1e-9, "{} vs {lam}", f.lambda());
    assert!(f.residual_norm < 1e-12);
}

#[test]
fn crosstalk_examples() {
    let gs = GateSet::c1xc1().unwrap();
    let cnot = ptm_from_unitary(&gates::cnot01()).unwrap().into_matrix();
    let t = gs.twirl(&cnot).unwrap();
    let x = crosstalk_scalars(1.0, t.lambda("P1").unwrap(), t.lambda("P2").unwrap(), t.lambda("P3").unwrap(), 2);
    assert!(x.delta_lambda.abs() < 1e-12);
    let rxx = build_channel(&ChannelSpec::Rxx { theta: 0.5 }).unwrap().into_matrix();
    let t = gs.twirl(&rxx).unwrap();
    let c = 0.5f64.cos();
    let x = crosstalk_scalars(1.0, t.lambda("P1").unwrap(), t.lambda("P2").unwrap(), t.lambda("P3").unwrap(), 2);
    let want = (5.0 + 4.0 * c) / 9.0 - ((1.0 + 2.0 * c) / 3.0).powi(2);
    assert!((x.delta_lambda - want).abs() < 1e-12);
    assert!((x.delta_lambda - 0.102).abs() < 1e-3);
    assert!((x.delta_r - (1.0 - (1.0 + 2.0 * c) / 3.0) / 2.0).abs() < 1e-12);
}

#[test]
fn fidelity_consistency() {
    let c2 = GateSet::c2().unwrap();
    let g1 = GateSet::g1().unwrap();
    let a = fidelity_from_decays(&c2, &[("P1".into(), 0.97)]).unwrap();
    let b = fidelity_from_decays(&g1, &[("P1".into(), 0.97), ("P2".into(), 0.97)]).unwrap();
    assert!((a - b).abs() < 1e-15);
    assert!((fidelity_from_decays(&c2, &[("P1".into(), 1.0)]).unwrap() - 1.0).abs() < 1e-15);
    assert!(fidelity_from_decays(&g1, &[("P1".into(), 0.97)]).is_err());
}

fn random_unitary_channel(angles: &[f64]) -> DMatrix<f64> {
    let u = gates::rzz(angles[0]) * gates::rxx(angles[1]) * gates::on_first(&gates::rz(angles[2]));
    ptm_from_unitary(&u).unwrap().into_matrix()
}

fn pauli_from(w: &[f64], scale: f64) -> DMatrix<f64> {
    let total: f64 = w.iter().sum();
    let mut probs = vec![0.0; 16];
    probs[0] = 1.0 - scale;
    for i in 1..16 {
        probs[i] = scale * w[i - 1] / total;
    }
    build_channel(&ChannelSpec::Pauli { probs }).unwrap().into_matrix()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_recovers_exact_curves(c0 in 0.2f64..2.0, lam in 0.3f64..0.999) {
        let ms: Vec<usize> = (1..=20).collect();
        let ys: Vec<f64> = ms.iter().map(|&m| c0 * lam.powi(m as i32 - 1)).collect();
        let f = fit_points(FitModel::Single, &ms, &ys, None, None).unwrap();
        prop_assert!((f.lambda() - lam).abs() / lam < 1e-7);
        prop_assert!((f.params[0] - c0).abs() / c0 < 1e-7);
    }

    #[test]
    fn offset_fit_recovers_exact_curves(b0 in 0.1f64..0.9, a0 in 0.05f64..0.9, lam in 0.5f64..0.97) {
        let ms: Vec<usize> = (1..=80).step_by(3).collect();
        let ys: Vec<f64> = ms.iter().map(|&m| b0 + a0 * lam.powi(m as i32 - 1)).collect();
        let f = fit_points(FitModel::Offset, &ms, &ys, None, None).unwrap();
        prop_assert!((f.lambda() - lam).abs() / lam < 1e-7);
        prop_assert!((f.params[0] - b0).abs() / b0 < 1e-7);
    }

    #[test]
    fn mean_and_mom_agree_on_gaussian_data(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..400).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let mean = Estimator::Mean.apply(&v).unwrap();
        let mom = Estimator::Mom { groups: None }.apply(&v).unwrap();
        let se = 1.0 / 20.0;
        prop_assert!((mean - mom).abs() < 3.0 * se * 1.3);
    }

    #[test]
    fn interleaved_bounds_contain_exact_target(
        angles in prop::collection::vec(-0.4f64..0.4, 3),
        w in prop::collection::vec(0.01f64..1.0, 15),
        scale in 0.0f64..0.08,
    ) {
        let lam = pauli_from(&w, scale);
        let lu = random_unitary_channel(&angles);
        let f_sta = average_fidelity(&lam);
        let f_int = average_fidelity(&(&lu * &lam));
        let e = interleaved_estimate(f_sta, f_int, 4).unwrap();
        let exact = average_fidelity(&lu);
        prop_assert!(e.lower <= exact + 1e-9 && exact <= e.upper + 1e-9, "{exact} not in [{}, {}]", e.lower, e.upper);
    }
}

