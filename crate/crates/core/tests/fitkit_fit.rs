use cross_symmetry::fitkit::{
    chi_square, fit, fit_angular, lm, synth_dataset, AngularDataset, FitError, FitMode, FitOptions, FitOutput,
};
use cross_symmetry::xsection::{AngularModel, ChannelConfig, ShapeParams};
use proptest::prelude::*;

fn model() -> AngularModel {
    AngularModel::new(&ChannelConfig::default()).unwrap()
}

fn reference() -> ShapeParams {
    ShapeParams::new(0.082, 0.47, 0.37, 0.11).unwrap()
}

fn angles() -> Vec<f64> {
    (0..10).map(|i| 20.0 + 15.5 * f64::from(i)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn zero_noise_round_trip() {
    let m = model();
    let data = synth_dataset(&reference(), &[1.0, 0.8, 1.3], &angles(), 0.0, 1, &m).unwrap();
    let out = fit_angular(&data, &m, &FitOptions::default()).unwrap();
    let p = out.params;
    for (got, want) in [(p.a(), 0.082), (p.b(), 0.47), (p.c(), 0.37), (p.r(), 0.11)] {
        assert!(rel(got, want) < 1e-4, "{got} vs {want}");
    }
    for (got, want) in out.norms.iter().zip([1.0, 0.8, 1.3]) {
        assert!(rel(*got, want) < 1e-4);
    }
    assert!(out.chi2 < 1e-10, "{}", out.chi2);
    assert_eq!(out.dof, 30 - 7);
    assert!(out.converged);
    assert!(out.n_starts_agreeing >= 1);
}

#[test]
fn reported_optimum_is_below_every_start() {
    let m = model();
    let data = synth_dataset(&reference(), &[1.0, 1.1], &angles(), 0.05, 4, &m).unwrap();
    let out = fit_angular(&data, &m, &FitOptions::default()).unwrap();
    assert_eq!(out.start_chi2.len(), 32);
    for c in &out.start_chi2 {
        assert!(out.chi2 <= *c);
    }
    let direct = chi_square(&out.params, &out.norms, &data, &m).unwrap();
    assert!(rel(direct, out.chi2) < 1e-10);
}

#[test]
fn covariance_is_symmetric_psd() {
    let m = model();
    let data = synth_dataset(&reference(), &[1.0, 1.1, 0.9], &angles(), 0.05, 8, &m).unwrap();
    let out = fit_angular(&data, &m, &FitOptions::default()).unwrap();
    let n = out.covariance.len();
    assert_eq!(n, 7);
    let cov = nalgebra::DMatrix::from_fn(n, n, |i, j| out.covariance[i][j]);
    for i in 0..n {
        for j in 0..n {
            assert_eq!(cov[(i, j)], cov[(j, i)]);
        }
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    assert!(eig.eigenvalues.iter().all(|&l| l >= 0.0));
    let (lo, hi) = out.r_interval(1.0);
    assert!(lo <= out.params.r() && out.params.r() <= hi);
}

#[test]
fn isotropic_data_is_not_identifiable() {
    let rows: Vec<_> = angles().into_iter().map(|t| (t, 1.0, Some(0.01))).collect();
    let data: Vec<_> = (0..3)
        .map(|i| AngularDataset::new(format!("iso{i}"), &rows).unwrap())
        .collect();
    let out = fit_angular(&data, &model(), &FitOptions::default()).unwrap();
    assert!(out.covariance[3][3] > 1e2, "{}", out.covariance[3][3]);
    assert!(!out.identifiable);
}

#[test]
fn doubling_errors_quarters_chi_square() {
    let m = model();
    let p = reference();
    let data = synth_dataset(&p, &[1.0, 1.2], &angles(), 0.05, 2, &m).unwrap();
    let doubled: Vec<_> = data
        .iter()
        .map(|d| {
            let rows: Vec<_> = d.points().iter().map(|q| (q.theta_deg, q.value, Some(2.0 * q.err))).collect();
            AngularDataset::new(d.label(), &rows).unwrap()
        })
        .collect();
    let trial = ShapeParams::new(0.1, 0.4, 0.3, 0.2).unwrap();
    let a = chi_square(&trial, &[1.1, 1.0], &data, &m).unwrap();
    let b = chi_square(&trial, &[1.1, 1.0], &doubled, &m).unwrap();
    assert!(rel(b, a / 4.0) < 1e-14);
}

#[test]
fn isotropic_chi_square_matches_direct_sum() {
    let m = model();
    let p = reference();
    let rows: Vec<_> = angles().into_iter().map(|t| (t, 2.5, None)).collect();
    let data = [AngularDataset::new("flat", &rows).unwrap()];
    let norm = 2.0;
    let series = m.legendre_coefficients(&p).unwrap();
    let mut direct = 0.0;
    for t in angles() {
        let x = t.to_radians().cos();
        let sigma: f64 = (0..=4)
            .map(|l| series.coefficient(l) * cross_symmetry::angmom::legendre_p(l as u32, x).unwrap())
            .sum();
        direct += (norm * sigma - 2.5f64).powi(2);
    }
    let chi2 = chi_square(&p, &[norm], &data, &m).unwrap();
    assert!(rel(chi2, direct) < 1e-12);
}

#[test]
fn exact_data_has_zero_chi_square() {
    let m = model();
    let data = synth_dataset(&reference(), &[1.0, 3.0], &angles(), 0.0, 0, &m).unwrap();
    assert!(chi_square(&reference(), &[1.0, 3.0], &data, &m).unwrap() <= 1e-18);
}

#[test]
fn normalization_decouples_from_shape() {
    let m = model();
    let data = synth_dataset(&reference(), &[1.0, 1.0, 1.0], &angles(), 0.05, 21, &m).unwrap();
    let base = fit_angular(&data, &m, &FitOptions::default()).unwrap();
    let mut scaled = data.clone();
    scaled[1] = data[1].scaled(7.0);
    let out = fit_angular(&scaled, &m, &FitOptions::default()).unwrap();
    assert!(rel(out.norms[1], 7.0 * base.norms[1]) < 1e-5);
    for i in [0, 2] {
        assert!(rel(out.norms[i], base.norms[i]) < 1e-5);
    }
    let (p, q) = (base.params, out.params);
    for (x, y) in [(p.a(), q.a()), (p.b(), q.b()), (p.c(), q.c()), (p.r(), q.r())] {
        assert!(rel(y, x) < 1e-5, "{x} vs {y}");
    }
}

#[test]
fn log_fit_matches_direct_bounded_fit() {
    // Direct fit in linear coordinates with non-negativity bounds, started
    // from the log-space optimum's neighbourhood.
    let m = model();
    let data = synth_dataset(&reference(), &[1.0, 0.9], &angles(), 0.05, 5, &m).unwrap();
    let log_fit = fit_angular(&data, &m, &FitOptions::default()).unwrap();
    let n_rows: usize = data.iter().map(|d| d.len()).sum();
    let problem = (n_rows, |x: &[f64], out: &mut [f64]| {
        let Ok(p) = ShapeParams::new(x[0], x[1], x[2], x[3]) else {
            return false;
        };
        let Ok(series) = m.legendre_coefficients(&p) else {
            return false;
        };
        let mut k = 0;
        for (i, d) in data.iter().enumerate() {
            for q in d.points() {
                out[k] = (q.value - x[4 + i] * series.eval(q.theta_deg.to_radians()).unwrap()) / q.err;
                k += 1;
            }
        }
        true
    });
    let mut opts = lm::LmOptions::unbounded(6);
    for b in opts.lower.iter_mut() {
        *b = 0.0;
    }
    let x0 = [0.1, 0.4, 0.3, 0.2, 1.0, 1.0];
    let direct = lm::minimize(&problem, &x0, &opts);
    assert!(direct.converged);
    assert!(rel(direct.cost, log_fit.chi2) < 1e-6, "{} vs {}", direct.cost, log_fit.chi2);
}

#[test]
fn per_bin_mode_fits_each_dataset() {
    let m = model();
    let data = synth_dataset(&reference(), &[1.0, 2.0], &angles(), 0.0, 0, &m).unwrap();
    let opts = FitOptions {
        mode: FitMode::PerBin,
        ..FitOptions::default()
    };
    let FitOutput::PerBin { bins } = fit(&data, &m, &opts).unwrap() else {
        panic!("expected per-bin output");
    };
    assert_eq!(bins.len(), 2);
    for ((label, r), want) in bins.iter().zip([1.0, 2.0]) {
        assert!(label.starts_with("bin"));
        assert_eq!(r.dof, 10 - 5);
        assert!(rel(r.norms[0], want) < 1e-4);
        assert!(rel(r.params.r(), 0.11) < 1e-4);
    }
}

#[test]
fn fit_is_deterministic() {
    let m = model();
    let data = synth_dataset(&reference(), &[1.0, 1.0], &angles(), 0.05, 13, &m).unwrap();
    let a = fit_angular(&data, &m, &FitOptions::default()).unwrap();
    let b = fit_angular(&data, &m, &FitOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn json_has_documented_fields() {
    let m = model();
    let data = synth_dataset(&reference(), &[1.0], &angles(), 0.05, 2, &m).unwrap();
    let out = fit_angular(&data, &m, &FitOptions::default()).unwrap();
    let v = serde_json::to_value(&out).unwrap();
    for key in ["params", "norms", "chi2", "dof", "covariance", "converged", "identifiable", "n_starts_agreeing"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    for key in ["A", "B", "C", "r"] {
        assert!(v["params"].get(key).is_some());
    }
}

#[test]
fn underdetermined_and_invalid_inputs() {
    let m = model();
    let rows: Vec<_> = (0..5).map(|i| (30.0 + 20.0 * f64::from(i), 1.0, None)).collect();
    let data = [AngularDataset::new("tiny", &rows).unwrap()];
    assert!(matches!(fit_angular(&data, &m, &FitOptions::default()), Err(FitError::Underdetermined(_))));
    assert!(matches!(fit_angular(&[], &m, &FitOptions::default()), Err(FitError::InvalidArgument(_))));
}

#[test]
fn reference_parameters_peak_forward() {
    let m = model();
    let thetas: Vec<f64> = (1..=5).map(|i| 30.0 * f64::from(i)).collect();
    let data = synth_dataset(&reference(), &[1.0], &thetas, 0.0, 0, &m).unwrap();
    let pts = data[0].points();
    assert!(pts[0].value > pts[4].value);
    assert!(pts[1].value > pts[3].value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn chi_square_grows_with_norm_offset(k in 1.01..3.0f64) {
        let m = model();
        let data = synth_dataset(&reference(), &[1.0], &angles(), 0.0, 0, &m).unwrap();
        let near = chi_square(&reference(), &[k], &data, &m).unwrap();
        let far = chi_square(&reference(), &[k + 0.5], &data, &m).unwrap();
        prop_assert!(far > near);
    }
}
