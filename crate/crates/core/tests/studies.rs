use cdsupport::christoffel::{fit, AffineMap, ChristoffelModel, FitOptions};
use cdsupport::geometry::{compare, rasterize, sample_shape, BoundingBox, ShapeSpec};
use cdsupport::harness::outlier::split;
use cdsupport::harness::stats::argsort;
use cdsupport::harness::{
    run_convergence_study, separable_benchmark, thyroid_surrogate, ExperimentConfig, ExperimentKind, Method,
    ReportBody,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Geometric mean of the error ratio per doubling of the resolution.
fn mean_ratio(errors: &[f64]) -> f64 {
    (errors[0] / errors[errors.len() - 1]).powf(1.0 / (errors.len() - 1) as f64)
}

#[test]
fn raster_errors_halve_under_refinement() {
    let bbox = BoundingBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let centers: Vec<(f64, f64)> =
        (0..40).map(|_| (rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))).collect();
    let exact_symdiff = std::f64::consts::PI * (1.44 - 1.0);
    let (mut h_err, mut s_err) = (Vec::new(), Vec::new());
    for res in [64usize, 128, 256, 512, 1024] {
        let (mut h, mut s) = (0.0, 0.0);
        for &(cx, cy) in &centers {
            let a = rasterize(|x| (x[0] - cx).hypot(x[1] - cy) <= 1.0, &bbox, &[res, res]).unwrap();
            let b = rasterize(|x| (x[0] - cx).hypot(x[1] - cy) <= 1.2, &bbox, &[res, res]).unwrap();
            let r = compare(&a, &b).unwrap();
            assert!((r.hausdorff - 0.2).abs() <= r.cell_diagonal);
            h += (r.hausdorff - 0.2).abs();
            s += (r.symdiff_measure - exact_symdiff).abs();
        }
        h_err.push(h / centers.len() as f64);
        s_err.push(s / centers.len() as f64);
    }
    // Individual doublings fluctuate with the lattice; the average rate is stable.
    for (name, errs) in [("hausdorff", &h_err), ("symdiff", &s_err)] {
        let ratio = mean_ratio(errs);
        assert!((2.0 / 1.5..=2.0 * 1.5).contains(&ratio), "{name}: {errs:?} ratio {ratio}");
    }
}

#[test]
fn disk_divergences_shrink_with_n() {
    let cfg = ExperimentConfig {
        shape: Some(ShapeSpec::unit_disk()),
        n_grid: vec![500, 2000, 8000, 32000],
        seeds: vec![0, 1, 2],
        resolution: 192,
        ..ExperimentConfig::new(ExperimentKind::Convergence)
    };
    let report = run_convergence_study(&cfg).unwrap();
    let ReportBody::Convergence(body) = &report.body else { panic!() };
    assert!(body.rows.windows(2).all(|w| w[0].n <= w[1].n));
    let series = [
        body.summary.iter().map(|s| s.hausdorff.unwrap()).collect::<Vec<_>>(),
        body.summary.iter().map(|s| s.symdiff_measure.unwrap()).collect::<Vec<_>>(),
    ];
    for s in &series {
        let inversions = s.windows(2).filter(|w| w[1] > w[0]).count();
        assert!(inversions <= 1, "{s:?}");
    }
    assert!(body.symdiff_slope.unwrap() < 0.0);
    assert!(body.hausdorff_slope.unwrap() < 0.0);
    // Every numeric field of the report is finite.
    let json = report.to_json().unwrap();
    assert!(!json.contains("NaN") && !json.contains("inf"));
    assert_eq!(report.version, cdsupport::VERSION);
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sample = sample_shape(&ShapeSpec::four_disks(), 4000, 1.0, 8).unwrap();
    let probe = sample_shape(&ShapeSpec::ball(vec![0.0, 0.0], 2.0).unwrap(), 1000, 0.0, 9).unwrap();
    for d in [1, 6, 12] {
        let model = fit(&sample, d, &FitOptions::default()).unwrap();
        let path = dir.path().join(format!("m{d}.json"));
        model.save(&path).unwrap();
        let back = ChristoffelModel::load(&path).unwrap();
        assert_eq!(back.degree(), d);
        for (a, b) in model.scores(&probe).unwrap().iter().zip(back.scores(&probe).unwrap()) {
            assert!((a - b).abs() <= 1e-12 * a.abs(), "d={d}: {a} vs {b}");
        }
    }
}

#[test]
fn surrogate_ranking_beats_chance() {
    let data = thyroid_surrogate(3);
    let (train, test) = split(&data, None, 0).unwrap();
    let scores = Method::Christoffel { degree: 3 }.score(&train, test.points(), 0).unwrap();
    let p = cdsupport::harness::outlier::precision_at_half(&scores, test.labels().unwrap());
    assert!(p > 0.7, "{p}");
}

fn affine_2d() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-2.0f64..2.0, 4), prop::collection::vec(-10.0f64..10.0, 2))
        .prop_filter("well conditioned", |(m, _)| (m[0] * m[3] - m[1] * m[2]).abs() > 0.3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn christoffel_ranking_is_affine_invariant((linear, offset) in affine_2d(), seed in 0u64..1000) {
        let data = separable_benchmark(300, 30, seed);
        let (train, test) = split(&data, None, seed).unwrap();
        let map = AffineMap::new(DMatrix::from_row_slice(2, 2, &linear), offset).unwrap();
        let method = Method::Christoffel { degree: 3 };
        let before = method.score(&train, test.points(), 0).unwrap();
        let after = method
            .score(&map.apply_all(&train).unwrap(), &map.apply_all(test.points()).unwrap(), 0)
            .unwrap();
        prop_assert_eq!(argsort(&before), argsort(&after));
    }
}
