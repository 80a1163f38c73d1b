use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use shadowbench::estimation::{Correlations, Estimator, FitModel};
use shadowbench::noise::{ChannelSpec, NoiseSpec};
use shadowbench::stats::*;

fn exact_correlations(lam: f64, lengths: &[usize], k: usize) -> Correlations {
    Correlations {
        lengths: lengths.to_vec(),
        values: lengths.iter().map(|&m| vec![0.9 * lam.powi(m as i32 - 1); k]).collect(),
    }
}

fn gaussian_correlations(lam: f64, sd: f64, lengths: &[usize], k: usize, seed: u64) -> Correlations {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let values = lengths
        .iter()
        .map(|&m| {
            (0..k)
                .map(|_| 0.9 * lam.powi(m as i32 - 1) + sd * Distribution::<f64>::sample(&StandardNormal, &mut rng))
                .collect()
        })
        .collect();
    Correlations { lengths: lengths.to_vec(), values }
}

#[test]
fn constant_dataset_gives_zero_width() {
    let c = exact_correlations(0.95, &[1, 2, 4, 8, 16], 20);
    let opts = BootstrapOptions { replicates: 200, ..Default::default() };
    for ci in bootstrap_intervals(&c, Estimator::Mean, &CI_METHODS, &opts).unwrap() {
        assert!((ci.point - 0.95).abs() < 1e-9, "{ci:?}");
        assert!(ci.width().abs() < 1e-9, "{ci:?}");
        assert!(ci.contains(0.95) && !ci.unreliable);
    }
}

#[test]
fn too_few_replicates_rejected() {
    let c = exact_correlations(0.95, &[1, 2, 4], 5);
    let opts = BootstrapOptions { replicates: 199, ..Default::default() };
    assert!(bootstrap_intervals(&c, Estimator::Mean, &[CiMethod::Percentile], &opts).is_err());
    let mut empty = c.clone();
    empty.values[1].clear();
    let opts = BootstrapOptions { replicates: 200, ..Default::default() };
    assert!(bootstrap_intervals(&empty, Estimator::Mean, &[CiMethod::Percentile], &opts).is_err());
}

#[test]
fn bca_equals_percentile_without_bias_or_skew() {
    // symmetric replicates around the point and a symmetric jackknife
    let mut reps: Vec<f64> = (1..=500).flat_map(|i| [0.9 + i as f64 * 1e-4, 0.9 - i as f64 * 1e-4]).collect();
    reps.sort_by(|a, b| a.total_cmp(b));
    let z0 = bias_correction(&reps, 0.9);
    let a = acceleration(&[0.89, 0.9, 0.91]);
    assert_eq!(z0, 0.0);
    assert_eq!(a, 0.0);
    for level in [0.8, 0.9, 0.95] {
        let (pl, ph) = percentile_bounds(&reps, level);
        let (bl, bh) = bca_bounds(&reps, z0, a, level);
        assert!((pl - bl).abs() < 1e-12 && (ph - bh).abs() < 1e-12, "{level}: {pl} {bl} {ph} {bh}");
    }
}

#[test]
fn percentile_and_normal_agree_on_gaussian_data() {
    let c = gaussian_correlations(0.97, 0.2, &[1, 2, 4, 8, 16, 32], 200, 3);
    let opts = BootstrapOptions { replicates: 10000, seed: 11, ..Default::default() };
    let cis = bootstrap_intervals(&c, Estimator::Mean, &[CiMethod::Percentile, CiMethod::Normal], &opts).unwrap();
    let (p, n) = (&cis[0], &cis[1]);
    assert!((p.width() - n.width()).abs() / n.width() < 0.1, "{p:?} {n:?}");
    assert!(!p.point_outside && !n.point_outside);
}

#[test]
fn bootstrap_is_deterministic_and_seed_sensitive() {
    let c = gaussian_correlations(0.95, 0.3, &[1, 2, 4, 8], 30, 5);
    let opts = BootstrapOptions { replicates: 300, seed: 1, ..Default::default() };
    let a = bootstrap_intervals(&c, Estimator::Mean, &[CiMethod::Percentile], &opts).unwrap();
    let b = bootstrap_intervals(&c, Estimator::Mean, &[CiMethod::Percentile], &opts).unwrap();
    assert_eq!((a[0].lo, a[0].hi), (b[0].lo, b[0].hi));
    let other = BootstrapOptions { seed: 2, ..opts };
    let d = bootstrap_intervals(&c, Estimator::Mean, &[CiMethod::Percentile], &other).unwrap();
    assert_ne!((a[0].lo, a[0].hi), (d[0].lo, d[0].hi));
}

#[test]
fn fit_cov_is_two_sigma_of_the_fit() {
    let c = gaussian_correlations(0.9, 0.1, &[1, 2, 3, 5, 8], 50, 9);
    let opts = BootstrapOptions { replicates: 200, ..Default::default() };
    let s = bootstrap_sample(&c, Estimator::Mean, &opts, false).unwrap();
    let ci = interval_from_sample(&s, CiMethod::FitCov2Sigma, 0.9).unwrap();
    assert!((ci.hi - ci.lo - 4.0 * s.fit.lambda_sigma()).abs() < 1e-14);
    assert_eq!(ci.replicates, 0);
    assert!(interval_from_sample(&s, CiMethod::Bca, 0.9).is_err());
}

#[test]
fn offset_model_parameter_target() {
    let lengths = [1, 2, 4, 8, 16, 32];
    let c = Correlations {
        lengths: lengths.to_vec(),
        values: lengths.iter().map(|&m| vec![0.3 + 0.6 * 0.9f64.powi(m as i32 - 1); 10]).collect(),
    };
    let opts = BootstrapOptions { replicates: 200, model: FitModel::Offset, parameter: "b0".into(), ..Default::default() };
    let ci = &bootstrap_intervals(&c, Estimator::Mean, &[CiMethod::Percentile], &opts).unwrap()[0];
    assert!((ci.point - 0.3).abs() < 1e-8);
    let bad = BootstrapOptions { parameter: "b0".into(), ..Default::default() };
    assert!(bootstrap_intervals(&c, Estimator::Mean, &[CiMethod::Percentile], &bad).is_err());
}

fn small_study(noise: NoiseSpec, gate_set: &str, ks: Vec<usize>, trials: usize) -> CoverageConfig {
    CoverageConfig {
        gate_set: gate_set.into(),
        noise,
        spam: Default::default(),
        basis: "z".into(),
        probe: "P1".into(),
        lengths: vec![1, 2, 4, 8, 16],
        ks,
        estimators: vec![Estimator::Mean, Estimator::Mom { groups: None }],
        methods: CI_METHODS.to_vec(),
        trials,
        bootstrap: BootstrapOptions { replicates: 200, ..Default::default() },
        seed: 4,
    }
}

#[test]
fn noiseless_coverage_is_one() {
    // G(1) sequence correlations are deterministic without noise
    let rep = coverage_study(&small_study(NoiseSpec::none(), "g1", vec![10], 5)).unwrap();
    assert_eq!(rep.truth, 1.0);
    assert_eq!(rep.cells.len(), 8);
    for c in &rep.cells {
        assert_eq!(c.coverage, 1.0, "{c:?}");
    }
}

#[test]
fn coverage_is_deterministic_and_csv_shaped() {
    let cfg = small_study(NoiseSpec::uniform(ChannelSpec::default_pauli()), "g1", vec![8, 16], 4);
    let a = coverage_study(&cfg).unwrap();
    let b = coverage_study(&cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    let csv = a.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "K,estimator,method,coverage,trials,seed");
    assert_eq!(lines.len(), 1 + 2 * 2 * 4);
    for c in &a.cells {
        assert!((0.0..=1.0).contains(&c.coverage));
        assert_eq!(c.trials, 4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn percentile_bounds_are_ordered_quantiles(mut v in prop::collection::vec(-1.0f64..1.0, 5..200), level in 0.5f64..0.99) {
        v.sort_by(|a, b| a.total_cmp(b));
        let (lo, hi) = percentile_bounds(&v, level);
        prop_assert!(lo <= hi);
        prop_assert!(v[0] <= lo && hi <= v[v.len() - 1]);
    }

    #[test]
    fn bca_collapses_to_percentile(mut v in prop::collection::vec(-1.0f64..1.0, 5..200), level in 0.5f64..0.99) {
        v.sort_by(|a, b| a.total_cmp(b));
        let p = percentile_bounds(&v, level);
        let b = bca_bounds(&v, 0.0, 0.0, level);
        prop_assert!((p.0 - b.0).abs() < 1e-12 && (p.1 - b.1).abs() < 1e-12);
    }

    #[test]
    fn resampling_keeps_counts(k in 3usize..20, seed in 0u64..1000) {
        let c = gaussian_correlations(0.9, 0.1, &[1, 2, 4, 8], k, seed);
        let opts = BootstrapOptions { replicates: 200, seed, ..Default::default() };
        let s = bootstrap_sample(&c, Estimator::Mean, &opts, true).unwrap();
        prop_assert_eq!(s.replicates.len() + s.failures, 200);
        prop_assert!(s.jackknife.len() <= 4 * k);
        prop_assert!(s.replicates.windows(2).all(|w| w[0] <= w[1]));
    }
}
