use ratescale::compression::ClampRange;
use ratescale::distributions::{gen_gaussian_pmf, gen_uniform_pmf, GaussianParams, RngSeed};
use ratescale::harness::{run_experiment, run_trial, ExperimentConfig, Model, SchemeTag};

#[test]
fn uniform_floor_error_decreases_with_k() {
    let config = ExperimentConfig::new(
        Model::Uniform,
        vec![2, 3, 4, 5, 10],
        10_000,
        SchemeTag::Floor,
    )
    .with_seed(3);
    let report = run_experiment(&config).unwrap();
    let errors: Vec<f64> = report.per_k_avg_error.values().copied().collect();
    assert!(errors.windows(2).all(|w| w[0] > w[1]), "{errors:?}");
}

#[test]
fn rounding_plateaus_near_one_half() {
    for model in [Model::Uniform, Model::Gaussian] {
        let config =
            ExperimentConfig::new(model, vec![2, 3, 4, 5, 10], 10_000, SchemeTag::Rounding)
                .with_seed(8);
        let report = run_experiment(&config).unwrap();
        let e10 = report.per_k_avg_error[&10];
        assert!((0.45..=0.55).contains(&e10), "{model:?}: {e10}");
    }
}

#[test]
fn per_trial_errors_do_not_depend_on_the_k_set() {
    let narrow = ExperimentConfig::new(Model::Gaussian, vec![2, 3], 1, SchemeTag::Floor);
    let wide = ExperimentConfig::new(Model::Gaussian, vec![2, 3, 4, 5, 10], 1, SchemeTag::Floor);
    for trial in 0..500 {
        let mut rng = RngSeed(17).stream(trial);
        let pmf = if trial % 2 == 0 {
            gen_uniform_pmf(100, &mut rng).unwrap()
        } else {
            gen_gaussian_pmf(100, &GaussianParams::default(), &mut rng).unwrap()
        };
        let a = run_trial(&pmf, &narrow).unwrap();
        let b = run_trial(&pmf, &wide).unwrap();
        assert_eq!(a[&2].to_bits(), b[&2].to_bits());
        assert_eq!(a[&3].to_bits(), b[&3].to_bits());
    }
}

#[test]
fn same_seed_same_report_different_seed_different_report() {
    let base = ExperimentConfig::new(Model::Uniform, vec![2, 10], 3000, SchemeTag::Floor)
        .with_clamp(10, ClampRange::new(3, 6));
    let a = run_experiment(&base.clone().with_seed(1)).unwrap();
    let b = run_experiment(&base.clone().with_seed(1)).unwrap();
    let c = run_experiment(&base.with_seed(2)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.per_k_avg_error, c.per_k_avg_error);
}

#[test]
fn default_gaussian_sigma_still_favours_large_k() {
    // σ = 50/3, the library default
    let config = ExperimentConfig::new(
        Model::Gaussian,
        vec![2, 3, 4, 5, 10],
        5000,
        SchemeTag::Floor,
    );
    let report = run_experiment(&config).unwrap();
    let wins: Vec<u64> = report.per_k_victories.values().copied().collect();
    assert!(wins.windows(2).all(|w| w[0] < w[1]), "{wins:?}");
}
