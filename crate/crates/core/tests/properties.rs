use proptest::prelude::*;

use sizeshape::decomp::{frechet_mean_monotone, frechet_mean_positive};
use sizeshape::domain::{CdfGrid, DensityGrid, MetricWeights, MonotoneDecomposition, PositiveDecomposition};
use sizeshape::isotonic::{pava, pava_weighted};
use sizeshape::metric::{metric_monotone, metric_positive};
use sizeshape::quantile::{
    project_to_quantile_space, quantile_barycenter, quantile_from_cdf, quantile_from_density, wasserstein,
};
use sizeshape::regress::{global_weights, local_weights, CovariateMatrix, KernelFamily, KernelSpec};

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn density() -> impl Strategy<Value = DensityGrid<f64>> {
    prop::collection::vec(0.05f64..3.0, 17).prop_map(|v| DensityGrid::normalized(v).unwrap())
}

fn cdf() -> impl Strategy<Value = CdfGrid<f64>> {
    prop::collection::vec(0.0f64..1.0, 15).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        let mut out = vec![0.0];
        out.extend(v);
        out.push(1.0);
        CdfGrid::new(out).unwrap()
    })
}

fn positive() -> impl Strategy<Value = PositiveDecomposition<f64>> {
    (0.1f64..5.0, density()).prop_map(|(s, f)| PositiveDecomposition::new(s, f).unwrap())
}

fn monotone() -> impl Strategy<Value = MonotoneDecomposition<f64>> {
    (0.1f64..5.0, -3.0f64..3.0, cdf()).prop_map(|(r, l, f)| MonotoneDecomposition::new(r, l, f).unwrap())
}

proptest! {
    #[test]
    fn pava_is_monotone_and_preserves_sum(ys in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let fit = pava(&ys);
        prop_assert!(fit.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let (a, b): (f64, f64) = (ys.iter().sum(), fit.iter().sum());
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn pava_is_idempotent(ys in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let once = pava(&ys);
        let twice = pava(&once);
        prop_assert!(sq_dist(&once, &twice) < 1e-20);
    }

    #[test]
    fn pava_beats_any_sorted_candidate(ys in prop::collection::vec(-5.0f64..5.0, 2..20)) {
        let fit = pava(&ys);
        let mut sorted = ys.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assert!(sq_dist(&ys, &fit) <= sq_dist(&ys, &sorted) + 1e-12);
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        prop_assert!(sq_dist(&ys, &fit) <= sq_dist(&ys, &vec![mean; ys.len()]) + 1e-12);
    }

    #[test]
    fn unit_weights_match_plain_pava(ys in prop::collection::vec(-5.0f64..5.0, 1..30)) {
        let w = vec![1.0; ys.len()];
        prop_assert!(sq_dist(&pava(&ys), &pava_weighted(&ys, Some(&w))) < 1e-20);
    }

    #[test]
    fn projection_lands_in_quantile_space(ys in prop::collection::vec(-1.0f64..2.0, 2..50)) {
        let q = project_to_quantile_space(&ys).unwrap();
        let v = q.values();
        prop_assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
        let again = project_to_quantile_space(v).unwrap();
        prop_assert!(sq_dist(v, again.values()) < 1e-24);
    }

    #[test]
    fn wasserstein_is_a_metric(a in density(), b in density(), c in density()) {
        let (qa, qb, qc) = (
            quantile_from_density(&a).unwrap(),
            quantile_from_density(&b).unwrap(),
            quantile_from_density(&c).unwrap(),
        );
        let ab = wasserstein(&qa, &qb).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!(wasserstein(&qa, &qa).unwrap() < 1e-12);
        prop_assert!((ab - wasserstein(&qb, &qa).unwrap()).abs() < 1e-14);
        let ac = wasserstein(&qa, &qc).unwrap();
        let cb = wasserstein(&qc, &qb).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn metrics_are_symmetric(a in positive(), b in positive(), c in monotone(), d in monotone()) {
        let w = MetricWeights::default();
        let p1 = metric_positive(&a, &b, w).unwrap();
        prop_assert!((p1 - metric_positive(&b, &a, w).unwrap()).abs() < 1e-14);
        prop_assert!(metric_positive(&a, &a, w).unwrap() < 1e-12);
        let m1 = metric_monotone(&c, &d, w).unwrap();
        prop_assert!((m1 - metric_monotone(&d, &c, w).unwrap()).abs() < 1e-14);
        prop_assert!(metric_monotone(&c, &c, w).unwrap() < 1e-12);
        prop_assert!(p1 >= (a.size() - b.size()).abs() - 1e-12);
    }

    #[test]
    fn barycenter_stays_in_quantile_space(
        fs in prop::collection::vec(cdf(), 1..6),
        ws in prop::collection::vec(0.1f64..3.0, 6),
    ) {
        let qs: Vec<_> = fs.iter().map(|f| quantile_from_cdf(f).unwrap()).collect();
        let ws = &ws[..qs.len()];
        let scale = qs.len() as f64 / ws.iter().sum::<f64>();
        let ws: Vec<f64> = ws.iter().map(|w| w * scale).collect();
        let q = quantile_barycenter(&qs, &ws).unwrap();
        let v = q.values();
        prop_assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn frechet_mean_sizes_are_averages(ps in prop::collection::vec(positive(), 1..8), ms in prop::collection::vec(monotone(), 1..8)) {
        let n = ps.len() as f64;
        let mp = frechet_mean_positive(&ps).unwrap();
        prop_assert!((mp.decomposition.size() - ps.iter().map(|d| d.size()).sum::<f64>() / n).abs() < 1e-12);
        let n = ms.len() as f64;
        let mm = frechet_mean_monotone(&ms).unwrap();
        prop_assert!((mm.decomposition.range() - ms.iter().map(|d| d.range()).sum::<f64>() / n).abs() < 1e-12);
        prop_assert!((mm.decomposition.minimum() - ms.iter().map(|d| d.minimum()).sum::<f64>() / n).abs() < 1e-12);
        prop_assert!(mm.trajectory.values().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn global_weights_reproduce_moments(
        rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 8..40),
        x in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        let design = CovariateMatrix::new(rows.clone()).unwrap();
        // near-collinear draws are rejected, which is fine here
        if let Ok(s) = global_weights(&design, &x) {
            let n = rows.len() as f64;
            prop_assert!((s.iter().sum::<f64>() / n - 1.0).abs() < 1e-8);
            for j in 0..2 {
                let m = rows.iter().zip(&s).map(|(r, w)| w * r[j]).sum::<f64>() / n;
                prop_assert!((m - x[j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn local_weights_have_zero_first_moment(xs in prop::collection::vec(0.0f64..2.0, 10..60), x0 in 0.6f64..1.4) {
        let design = CovariateMatrix::from_column(xs.clone()).unwrap();
        let k = KernelSpec::new(KernelFamily::Gaussian, 0.4).unwrap();
        let s = local_weights(&design, x0, &k).unwrap();
        let n = xs.len() as f64;
        prop_assert!((s.iter().sum::<f64>() / n - 1.0).abs() < 1e-9);
        prop_assert!((xs.iter().zip(&s).map(|(x, w)| w * (x - x0)).sum::<f64>() / n).abs() < 1e-9);
    }
}
