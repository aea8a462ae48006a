use approx::assert_abs_diff_eq;

use sizeshape::bench::BinRule;
use sizeshape::decomp::{
    decompose_dataset_monotone, decompose_dataset_positive, decompose_positive_exact, frechet_mean_monotone,
    frechet_mean_positive, recompose_positive,
};
use sizeshape::io::{load_covariates_csv, load_longitudinal_csv, save_longitudinal_csv, write_covariates_csv};
use sizeshape::quantile::{quantile_from_cdf, quantile_from_density, wasserstein};
use sizeshape::regress::{MonotoneRegressor, PositiveRegressor, RegressionMode};
use sizeshape::simgen::{
    generate_monotone, generate_positive, generate_regression, DataKind, MonotoneSimConfig, PositiveSimConfig,
    RegressionSimConfig,
};
use sizeshape::{Constraint, Trajectory32, TimeGrid32};

#[test]
fn saved_dataset_decomposes_like_the_original() {
    let cfg = PositiveSimConfig { n: 25, n_obs: 80, seed: 11, shape_len: 201, ..Default::default() };
    let (ds, _) = generate_positive(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("obs.csv");
    save_longitudinal_csv(&path, &ds, Some((0.0, 30.0))).unwrap();
    let back = load_longitudinal_csv(&path, Some((0.0, 30.0))).unwrap();
    let bins = BinRule::Auto.resolve(&ds).unwrap();
    let a = decompose_dataset_positive(&ds, &bins, 201).unwrap();
    let b = decompose_dataset_positive(&back, &bins, 201).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_abs_diff_eq!(x.size(), y.size(), epsilon = 1e-12);
        let d = wasserstein(&quantile_from_density(x.shape()).unwrap(), &quantile_from_density(y.shape()).unwrap());
        assert_abs_diff_eq!(d.unwrap(), 0.0, epsilon = 1e-9);
    }
}

#[test]
fn noiseless_sizes_are_recovered() {
    let cfg = PositiveSimConfig { n: 20, n_obs: 2000, nu0: 0.0, seed: 4, shape_len: 201, ..Default::default() };
    let (ds, truth) = generate_positive(&cfg).unwrap();
    let bins = BinRule::Auto.resolve(&ds).unwrap();
    let est = decompose_dataset_positive(&ds, &bins, 201).unwrap();
    for (t, e) in truth.iter().zip(&est) {
        assert_abs_diff_eq!(t.size(), e.size(), epsilon = 1e-5);
    }

    let cfg = MonotoneSimConfig { n: 20, n_obs: 2000, nu0: 0.0, seed: 4, shape_len: 201, ..Default::default() };
    let (ds, truth) = generate_monotone(&cfg).unwrap();
    let bins = BinRule::Width(0.01).resolve(&ds).unwrap();
    let est = decompose_dataset_monotone(&ds, &bins, 201).unwrap();
    for (t, e) in truth.iter().zip(&est) {
        // first and last bins average over a width-0.01 window
        assert_abs_diff_eq!(t.minimum(), e.minimum(), epsilon = 0.02 * t.range());
        assert_abs_diff_eq!(t.range(), e.range(), epsilon = 0.02 * t.range());
        let d = wasserstein(&quantile_from_cdf(t.shape()).unwrap(), &quantile_from_cdf(e.shape()).unwrap()).unwrap();
        assert!(d < 0.01, "shape distance {d}");
    }
}

#[test]
fn regression_at_the_mean_predictor_matches_the_frechet_mean() {
    let cfg = RegressionSimConfig { n: 80, n_obs: 100, seed: 9, shape_len: 201, ..RegressionSimConfig::global_design() };
    for kind in [DataKind::Positive, DataKind::Monotone] {
        let (ds, _, _) = generate_regression(&cfg, kind).unwrap();
        let design = ds.covariates().unwrap();
        let xbar = design.mean();
        let bins = BinRule::Auto.resolve(&ds).unwrap();
        match kind {
            DataKind::Positive => {
                let est = decompose_dataset_positive(&ds, &bins, 201).unwrap();
                let fit = PositiveRegressor::new(&est, design).unwrap().fit(&xbar, &RegressionMode::Global).unwrap();
                let mean = frechet_mean_positive(&est).unwrap();
                assert_abs_diff_eq!(fit.decomposition.size(), mean.decomposition.size(), epsilon = 1e-10);
                assert_abs_diff_eq!(wasserstein(&fit.quantile, &mean.quantile).unwrap(), 0.0, epsilon = 1e-10);
            }
            DataKind::Monotone => {
                let est = decompose_dataset_monotone(&ds, &bins, 201).unwrap();
                let fit = MonotoneRegressor::new(&est, design).unwrap().fit(&xbar, &RegressionMode::Global).unwrap();
                let mean = frechet_mean_monotone(&est).unwrap();
                assert_abs_diff_eq!(fit.decomposition.range(), mean.decomposition.range(), epsilon = 1e-10);
                assert_abs_diff_eq!(fit.decomposition.minimum(), mean.decomposition.minimum(), epsilon = 1e-10);
                assert_abs_diff_eq!(wasserstein(&fit.quantile, &mean.quantile).unwrap(), 0.0, epsilon = 1e-10);
            }
        }
    }
}

#[test]
fn covariates_survive_a_file_round_trip() {
    let cfg = RegressionSimConfig { n: 15, n_obs: 20, seed: 2, shape_len: 101, ..RegressionSimConfig::local_design() };
    let (ds, _, _) = generate_regression(&cfg, DataKind::Monotone).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("obs.csv");
    let cov = dir.path().join("cov.csv");
    save_longitudinal_csv(&obs, &ds, None).unwrap();
    write_covariates_csv(std::fs::File::create(&cov).unwrap(), &ds).unwrap();
    let back = load_longitudinal_csv(&obs, None).unwrap().attach_covariates(&load_covariates_csv(&cov).unwrap()).unwrap();
    assert_eq!(back.covariates(), ds.covariates());
}

#[test]
fn single_precision_round_trip() {
    let grid = TimeGrid32::uniform(257).unwrap();
    let y = Trajectory32::from_fn(grid.clone(), Constraint::Positive, |t| 1.5 + t * t).unwrap();
    let d = decompose_positive_exact(&y, 257).unwrap();
    assert_abs_diff_eq!(d.size(), 1.5 + 1.0 / 3.0, epsilon = 1e-4);
    let back = recompose_positive(&d, grid).unwrap();
    for (a, b) in y.values().iter().zip(back.values()) {
        assert_abs_diff_eq!(*a, *b, epsilon = 1e-5);
    }
}
