use superres::camera::{central_statistic, scan_seed, simulate_batch, CameraConfig, ScanRecord};
use superres::estimator::{
    empirical_calibration, estimate_separation, evaluate_estimator, expected_central_count, model_calibration,
    CalibrationCurve,
};
use superres::fisher::{crlb, fisher_pixelated};
use superres::psf::{DensityFamily, DensityKind};

const GRID: [f64; 5] = [0.042, 0.06, 0.1, 0.14, 0.18];

fn sgn() -> DensityFamily {
    DensityFamily::gaussian(DensityKind::SignumFiltered, 1.0).unwrap()
}

fn calibration() -> CalibrationCurve {
    model_calibration(&sgn(), &CameraConfig::experiment(), &GRID).unwrap()
}

fn campaign(s: f64, setting: u64, n: u64) -> Vec<ScanRecord> {
    let seeds: Vec<u64> = (0..n).map(|k| scan_seed(424_242, setting, k)).collect();
    simulate_batch(&sgn().at(s).unwrap(), &CameraConfig::experiment(), &seeds).unwrap()
}

/// `E[ŝ]` summed over the Poisson law of the central count.
fn exact_mean_estimate(mean_count: f64, cal: &CalibrationCurve) -> f64 {
    let mut log_p = -mean_count;
    let mut total = 0.0;
    for k in 0..2000u32 {
        if k > 0 {
            log_p += mean_count.ln() - (k as f64).ln();
        }
        total += log_p.exp() * estimate_separation(k as f64, cal);
    }
    total
}

#[test]
fn calibration_curve_matches_parabolic_law() {
    let cal = calibration();
    // Near the origin the central pixel collects α(x² + s²/4) over its width.
    let w = CameraConfig::experiment().pixel_width;
    let b_parabolic = 434_000.0 * (2.0 * std::f64::consts::PI.powi(3)).powf(-0.5) * w / 4.0;
    assert!((cal.b / b_parabolic - 1.0).abs() < 0.05, "{} vs {b_parabolic}", cal.b);
    assert!(cal.residual_rms < 0.1);
    let n0 = expected_central_count(&sgn(), 0.0, &CameraConfig::experiment()).unwrap();
    assert!((cal.a / n0 - 1.0).abs() < 1e-3, "{} vs {n0}", cal.a);
}

#[test]
fn nearly_unbiased_at_moderate_separation() {
    let cal = calibration();
    let st = evaluate_estimator(&campaign(0.1, 2, 200), &cal, 1).unwrap();
    assert!(st.bias.abs() <= 3.0 * st.standard_error(), "{st:?}");
}

#[test]
fn near_efficiency_for_larger_separations() {
    let cal = calibration();
    let cam = CameraConfig::experiment();
    for (i, s) in [0.1, 0.14, 0.18].into_iter().enumerate() {
        let st = evaluate_estimator(&campaign(s, 10 + i as u64, 200), &cal, 1).unwrap();
        let bound = crlb(&fisher_pixelated(&sgn(), s, &cam, s * 1e-3).unwrap(), 434_000)
            .unwrap()
            .variance_bound;
        assert!(st.variance <= 2.0 * bound, "s={s}: {} vs {bound}", st.variance);
    }
}

#[test]
fn clamp_gives_positive_mean_at_zero_separation() {
    let cal = calibration();
    let scans = campaign(0.0, 20, 400);
    let est: Vec<f64> = scans
        .iter()
        .map(|r| estimate_separation(central_statistic(r, 1).unwrap(), &cal))
        .collect();
    assert!(est.iter().all(|e| *e >= 0.0));
    let st = evaluate_estimator(&scans, &cal, 1).unwrap();
    assert!(st.mean_estimate > 0.0);
    let exact = exact_mean_estimate(cal.a, &cal);
    assert!(
        (st.mean_estimate - exact).abs() < 3.0 * st.standard_error(),
        "{st:?} vs {exact}"
    );
}

/// At 0.042σ the shot noise on the central count exceeds the signal, and the
/// concave square root pulls the mean below the truth even after clamping.
#[test]
fn small_separation_bias_follows_exact_expectation() {
    let cal = calibration();
    let mean_count = expected_central_count(&sgn(), 0.042, &CameraConfig::experiment()).unwrap();
    let exact = exact_mean_estimate(mean_count, &cal);
    assert!(exact < 0.042);
    let st = evaluate_estimator(&campaign(0.042, 30, 400), &cal, 1).unwrap();
    assert!(
        (st.mean_estimate - exact).abs() < 3.0 * st.standard_error(),
        "{st:?} vs {exact}"
    );
    // The zero-separation bias is positive, so the crossover lies below 0.042σ.
    assert!(exact_mean_estimate(cal.a, &cal) > 0.0);
    let at_002 = exact_mean_estimate(
        expected_central_count(&sgn(), 0.02, &CameraConfig::experiment()).unwrap(),
        &cal,
    );
    assert!(at_002 > 0.02);
}

#[test]
fn empirical_calibration_close_to_model() {
    let model = calibration();
    let scans: Vec<ScanRecord> = GRID
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| campaign(s, 40 + i as u64, 200))
        .collect();
    let emp = empirical_calibration(&scans, 1).unwrap();
    // Sample means of 200 scans carry about 0.6 counts of noise each.
    assert!((emp.a - model.a).abs() < 3.0, "{emp:?}");
    assert!((emp.b / model.b - 1.0).abs() < 0.15, "{emp:?}");
}
