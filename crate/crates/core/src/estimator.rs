//! Calibration-curve estimator of the separation from the central-column count.
//!
//! The mean central count responds as `a + b s²`; a least-squares fit gives
//! `(a, b)` and a single scan is inverted as `ŝ = √max(0, (n - a)/b)`.

use rayon::prelude::*;

use crate::camera::{central_statistic, pixel_integrals, CameraConfig, ScanRecord};
use crate::error::{Error, Result};
use crate::psf::DensityFamily;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationCurve {
    /// Counts at zero separation.
    pub a: f64,
    /// Counts per σ².
    pub b: f64,
    pub residual_rms: f64,
    pub s_grid: Vec<f64>,
}

impl CalibrationCurve {
    /// Predicted mean count at separation `s`.
    pub fn response(&self, s: f64) -> f64 {
        self.a + self.b * s * s
    }
}

/// Least-squares fit of `mean_count = a + b s²`.
pub fn fit_calibration(pairs: &[(f64, f64)]) -> Result<CalibrationCurve> {
    let mut distinct: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 distinct separations, got {}",
            distinct.len()
        )));
    }
    if let Some(bad) = pairs.iter().find(|p| !(p.1 >= 0.0) || !p.0.is_finite()) {
        return Err(Error::Fit(format!("invalid calibration point {bad:?}")));
    }
    let n = pairs.len() as f64;
    let u_mean = pairs.iter().map(|p| p.0 * p.0).sum::<f64>() / n;
    let y_mean = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxx, sxy) = pairs.iter().fold((0.0, 0.0), |(sxx, sxy), &(s, y)| {
        let du = s * s - u_mean;
        (sxx + du * du, sxy + du * (y - y_mean))
    });
    if !(sxx > 0.0) {
        return Err(Error::Fit("rank-deficient design: all s² equal".into()));
    }
    let b = sxy / sxx;
    let a = y_mean - b * u_mean;
    let residual_rms = (pairs
        .iter()
        .map(|&(s, y)| {
            let r = y - (a + b * s * s);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    if !(b > 0.0) {
        return Err(Error::Fit(format!(
            "degenerate response: curvature b = {b:e} is not positive"
        )));
    }
    if a < 0.0 {
        return Err(Error::Fit(format!("negative zero-separation response a = {a:e}")));
    }
    Ok(CalibrationCurve {
        a,
        b,
        residual_rms,
        s_grid: distinct,
    })
}

/// `ŝ = √max(0, (n - a)/b)`.
pub fn estimate_separation(n: f64, cal: &CalibrationCurve) -> f64 {
    ((n - cal.a) / cal.b).max(0.0).sqrt()
}

/// Expected central statistic `N · P_c(s)` with noiseless readout.
pub fn expected_central_count(family: &DensityFamily, s: f64, camera: &CameraConfig) -> Result<f64> {
    let c = camera.center_index()?;
    let density = family.at(s)?;
    let px = pixel_integrals(&density, camera, false)?;
    let total: f64 = px.mass.iter().sum();
    let h = camera.columns_summed / 2;
    if camera.columns_summed.is_multiple_of(2) {
        return Err(Error::Config("columns_summed must be odd".into()));
    }
    let central: f64 = px.mass[c - h..=c + h].iter().sum();
    Ok(camera.mean_detections * central / total)
}

/// Calibration from noiseless model means at each separation of `s_grid`.
pub fn model_calibration(family: &DensityFamily, camera: &CameraConfig, s_grid: &[f64]) -> Result<CalibrationCurve> {
    let pairs = s_grid
        .par_iter()
        .map(|&s| Ok((s, expected_central_count(family, s, camera)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_calibration(&pairs)
}

/// Calibration from the sample means of simulated or measured scans,
/// grouped by their `true_s`.
pub fn empirical_calibration(scans: &[ScanRecord], columns_summed: usize) -> Result<CalibrationCurve> {
    let groups = group_by_separation(scans);
    let pairs = groups
        .iter()
        .map(|(s, batch)| {
            let total = batch
                .iter()
                .map(|r| central_statistic(r, columns_summed))
                .sum::<Result<f64>>()?;
            Ok((*s, total / batch.len() as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    fit_calibration(&pairs)
}

/// Split scans into batches sharing `true_s`, in order of first appearance.
pub fn group_by_separation(scans: &[ScanRecord]) -> Vec<(f64, Vec<ScanRecord>)> {
    let mut groups: Vec<(f64, Vec<ScanRecord>)> = Vec::new();
    for r in scans {
        match groups.iter_mut().find(|g| g.0 == r.true_s) {
            Some(g) => g.1.push(r.clone()),
            None => groups.push((r.true_s, vec![r.clone()])),
        }
    }
    groups
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorStats {
    pub s_true: f64,
    pub mean_estimate: f64,
    /// Unbiased sample variance (n - 1 denominator).
    pub variance: f64,
    pub bias: f64,
    pub n_samples: usize,
}

impl EstimatorStats {
    /// Standard error of the mean estimate.
    pub fn standard_error(&self) -> f64 {
        (self.variance / self.n_samples as f64).sqrt()
    }
}

/// Sample statistics of a set of estimates of the same true separation.
pub fn summarize(s_true: f64, estimates: &[f64]) -> Result<EstimatorStats> {
    let n = estimates.len();
    if n < 2 {
        return Err(Error::Input(format!("need at least 2 samples, got {n}")));
    }
    let mean = estimates.iter().sum::<f64>() / n as f64;
    let variance = estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1) as f64;
    Ok(EstimatorStats {
        s_true,
        mean_estimate: mean,
        variance,
        bias: mean - s_true,
        n_samples: n,
    })
}

/// Estimator mean, variance and bias over a batch of scans of one separation.
pub fn evaluate_estimator(
    scans: &[ScanRecord],
    cal: &CalibrationCurve,
    columns_summed: usize,
) -> Result<EstimatorStats> {
    let Some(first) = scans.first() else {
        return Err(Error::Input("empty scan batch".into()));
    };
    if scans.iter().any(|r| r.true_s != first.true_s) {
        return Err(Error::Input("scan batch mixes different true separations".into()));
    }
    let estimates = scans
        .iter()
        .map(|r| Ok(estimate_separation(central_statistic(r, columns_summed)?, cal)))
        .collect::<Result<Vec<_>>>()?;
    summarize(first.true_s, &estimates)
}
