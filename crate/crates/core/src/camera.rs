//! Photon-counting camera: pixel binning, Poisson shot noise, readout noise
//! and the central-column statistic.
//!
//! The camera is one-dimensional: each "pixel" is a full column, since the
//! sources are separated horizontally and column sums keep all the
//! separation information.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::psf::DetectionDensity;
use crate::quad::{integrate, QuadConfig};

/// Pixel probabilities must capture at least this much of the density.
pub const MIN_COVERAGE: f64 = 1.0 - 1e-3;

/// Pixel pitch of the experiment's camera, 7.4 µm, over σ = 33.2 µm.
pub const EXPERIMENT_PIXEL_WIDTH: f64 = 7.4 / 33.2;

/// Mean detection count per scan in the experiment.
pub const EXPERIMENT_DETECTIONS: f64 = 434_000.0;

/// Columns of the default camera. The signum-filtered intensity falls off
/// as `0.51/x²`, so the camera must reach beyond ±1016σ to collect 99.9 %
/// of the light; 10001 columns of 0.223σ span ±1114σ.
pub const EXPERIMENT_COLUMNS: usize = 10_001;

/// Per-pixel readout noise (electrons) quoted for the experiment; the central
/// statistic summed three pixels.
pub const EXPERIMENT_READOUT_SD: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraConfig {
    /// Column width, σ units.
    pub pixel_width: f64,
    pub n_pixels: usize,
    /// Offset of the camera centre from the optical axis, σ units.
    pub center_offset: f64,
    /// Mean number of detections per scan.
    pub mean_detections: f64,
    /// Gaussian readout noise per column, electrons.
    pub readout_noise_sd: f64,
    /// Number of central columns summed into the statistic.
    pub columns_summed: usize,
}

impl CameraConfig {
    /// The experiment's camera with noiseless readout.
    pub fn experiment() -> Self {
        Self {
            pixel_width: EXPERIMENT_PIXEL_WIDTH,
            n_pixels: EXPERIMENT_COLUMNS,
            center_offset: 0.0,
            mean_detections: EXPERIMENT_DETECTIONS,
            readout_noise_sd: 0.0,
            columns_summed: 1,
        }
    }

    pub fn validate(&self, sigma: f64) -> Result<()> {
        if !(self.pixel_width > 0.0 && self.pixel_width.is_finite()) {
            return Err(Error::Config(format!(
                "pixel width must be positive, got {}",
                self.pixel_width
            )));
        }
        if self.n_pixels == 0 {
            return Err(Error::Config("camera needs at least one pixel".into()));
        }
        if !(self.mean_detections > 0.0 && self.mean_detections.is_finite()) {
            return Err(Error::Config(format!(
                "mean detections must be positive, got {}",
                self.mean_detections
            )));
        }
        if !(self.readout_noise_sd >= 0.0 && self.readout_noise_sd.is_finite()) {
            return Err(Error::Config(format!(
                "readout noise must be non-negative, got {}",
                self.readout_noise_sd
            )));
        }
        if !self.center_offset.is_finite() {
            return Err(Error::Config("center offset must be finite".into()));
        }
        if self.columns_summed == 0 || self.columns_summed > self.n_pixels {
            return Err(Error::Config(format!(
                "columns_summed must lie in 1..={}, got {}",
                self.n_pixels, self.columns_summed
            )));
        }
        let span = self.pixel_width * self.n_pixels as f64;
        if span < 8.0 * sigma {
            return Err(Error::Config(format!(
                "pixel grid spans {span}, less than 8σ = {}",
                8.0 * sigma
            )));
        }
        Ok(())
    }

    /// Column boundaries, `n_pixels + 1` values.
    pub fn edges(&self) -> Vec<f64> {
        let half = 0.5 * self.n_pixels as f64 * self.pixel_width;
        (0..=self.n_pixels)
            .map(|i| self.center_offset - half + i as f64 * self.pixel_width)
            .collect()
    }

    /// Index of the unique central column.
    pub fn center_index(&self) -> Result<usize> {
        center_index(self.n_pixels)
    }
}

fn center_index(n: usize) -> Result<usize> {
    if n.is_multiple_of(2) {
        return Err(Error::Config(format!("{n} columns have no unique central column")));
    }
    Ok(n / 2)
}

/// Raw per-pixel integrals of a density and, optionally, of `∂p/∂s`.
pub(crate) struct PixelIntegrals {
    pub mass: Vec<f64>,
    pub ds: Option<Vec<f64>>,
    pub error: f64,
}

pub(crate) fn pixel_integrals(
    density: &DetectionDensity,
    camera: &CameraConfig,
    with_ds: bool,
) -> Result<PixelIntegrals> {
    camera.validate(density.sigma())?;
    if with_ds && density.ds(0.0).is_none() {
        return Err(Error::Config("density has no analytic separation derivative".into()));
    }
    let edges = camera.edges();
    let cfg = QuadConfig::with_tolerances(1e-18, 1e-12);
    let cells: Vec<(f64, f64, f64)> = edges
        .par_windows(2)
        .map(|w| {
            let m = integrate(|x| density.value(x), w[0], w[1], &cfg)?;
            let d = if with_ds {
                integrate(|x| density.ds(x).unwrap_or(0.0), w[0], w[1], &cfg)?.value
            } else {
                0.0
            };
            Ok((m.value, d, m.error))
        })
        .collect::<Result<_>>()?;
    let coverage: f64 = cells.iter().map(|c| c.0).sum();
    if coverage < MIN_COVERAGE {
        return Err(Error::Config(format!(
            "camera collects only {coverage:.6} of the light (need >= {MIN_COVERAGE})"
        )));
    }
    Ok(PixelIntegrals {
        mass: cells.iter().map(|c| c.0).collect(),
        ds: with_ds.then(|| cells.iter().map(|c| c.1).collect()),
        error: cells.iter().map(|c| c.2).sum(),
    })
}

/// `Pᵢ = ∫_{pixel i} p(x|s) dx`, renormalized to sum to one.
pub fn pixel_probabilities(density: &DetectionDensity, camera: &CameraConfig) -> Result<Vec<f64>> {
    let raw = pixel_integrals(density, camera, false)?;
    let total: f64 = raw.mass.iter().sum();
    Ok(raw.mass.into_iter().map(|m| m / total).collect())
}

/// One recorded scan: detections per column.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    pub counts: Vec<f64>,
    pub seed: u64,
    pub true_s: f64,
    pub n_emitted: u64,
}

/// Simulate one scan from precomputed pixel probabilities.
pub fn simulate_scan_from_probabilities(probs: &[f64], camera: &CameraConfig, true_s: f64, seed: u64) -> ScanRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n_emitted = 0u64;
    let mut counts: Vec<f64> = probs
        .iter()
        .map(|p| {
            let mean = camera.mean_detections * p;
            let k = if mean > 0.0 {
                Poisson::new(mean).map(|d| d.sample(&mut rng)).unwrap_or(0.0)
            } else {
                0.0
            };
            n_emitted += k as u64;
            k
        })
        .collect();
    if camera.readout_noise_sd > 0.0 {
        let noise = Normal::new(0.0, camera.readout_noise_sd).expect("validated readout sd");
        for c in &mut counts {
            *c = (*c + noise.sample(&mut rng)).max(0.0);
        }
    }
    ScanRecord {
        counts,
        seed,
        true_s,
        n_emitted,
    }
}

/// Simulate one scan: independent Poisson counts per column with means
/// `N·Pᵢ`, then Gaussian readout noise clamped at zero.
pub fn simulate_scan(density: &DetectionDensity, camera: &CameraConfig, seed: u64) -> Result<ScanRecord> {
    let probs = pixel_probabilities(density, camera)?;
    Ok(simulate_scan_from_probabilities(
        &probs,
        camera,
        density.separation(),
        seed,
    ))
}

/// Simulate many scans of the same density, one per seed, in parallel.
/// Output order follows `seeds`.
pub fn simulate_batch(density: &DetectionDensity, camera: &CameraConfig, seeds: &[u64]) -> Result<Vec<ScanRecord>> {
    let probs = pixel_probabilities(density, camera)?;
    Ok(seeds
        .par_iter()
        .map(|&seed| simulate_scan_from_probabilities(&probs, camera, density.separation(), seed))
        .collect())
}

/// Per-scan seed for scan `scan` of separation `setting` in a campaign.
pub fn scan_seed(campaign_seed: u64, setting: u64, scan: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(campaign_seed);
    rng.set_stream(setting);
    rng.set_word_pos(u128::from(scan) * 2);
    rng.random()
}

/// Total count in the `columns_summed` central columns.
pub fn central_statistic(scan: &ScanRecord, columns_summed: usize) -> Result<f64> {
    let c = center_index(scan.counts.len())?;
    if columns_summed == 0 || columns_summed.is_multiple_of(2) || columns_summed > scan.counts.len() {
        return Err(Error::Config(format!(
            "columns_summed must be an odd number in 1..={}, got {columns_summed}",
            scan.counts.len()
        )));
    }
    let h = columns_summed / 2;
    Ok(scan.counts[c - h..=c + h].iter().sum())
}

/// Version tag written in the first line of a scan CSV.
pub const SCAN_CSV_VERSION: &str = "superres-scans/1";

/// Write scans as CSV: `#` metadata lines, a header
/// `scan_id,seed,true_s,pixel_0,...` and one row per scan.
pub fn write_scan_csv<W: Write>(mut out: W, metadata: &[(String, String)], scans: &[ScanRecord]) -> Result<()> {
    writeln!(out, "# version={SCAN_CSV_VERSION}")?;
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    let m = scans.first().map_or(0, |s| s.counts.len());
    write!(out, "scan_id,seed,true_s")?;
    for i in 0..m {
        write!(out, ",pixel_{i}")?;
    }
    writeln!(out)?;
    for (id, s) in scans.iter().enumerate() {
        if s.counts.len() != m {
            return Err(Error::Input("scans have different column counts".into()));
        }
        write!(out, "{id},{},{}", s.seed, s.true_s)?;
        for c in &s.counts {
            write!(out, ",{c}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Parsed scan CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub metadata: BTreeMap<String, String>,
    pub scans: Vec<ScanRecord>,
}

/// Read a scan CSV written by [`write_scan_csv`]. `n_emitted` is recovered as
/// the rounded column sum, exact when the readout noise is zero.
pub fn read_scan_csv<R: BufRead>(input: R) -> Result<ScanTable> {
    let mut metadata = BTreeMap::new();
    let mut header: Option<Vec<String>> = None;
    let mut scans = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.trim().split_once('=') {
                metadata.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let Some(head) = &header else {
            if fields.len() < 3 || fields[..3] != ["scan_id", "seed", "true_s"] {
                return Err(Error::Input(format!("line {}: unexpected header", lineno + 1)));
            }
            header = Some(fields.iter().map(|s| s.to_string()).collect());
            continue;
        };
        if fields.len() != head.len() {
            return Err(Error::Input(format!(
                "line {}: {} fields, header has {}",
                lineno + 1,
                fields.len(),
                head.len()
            )));
        }
        let bad = |what: &str| Error::Input(format!("line {}: bad {what}", lineno + 1));
        let seed: u64 = fields[1].parse().map_err(|_| bad("seed"))?;
        let true_s: f64 = fields[2].parse().map_err(|_| bad("true_s"))?;
        let counts = fields[3..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad("count")))
            .collect::<Result<Vec<f64>>>()?;
        let n_emitted = counts.iter().sum::<f64>().round() as u64;
        scans.push(ScanRecord {
            counts,
            seed,
            true_s,
            n_emitted,
        });
    }
    if header.is_none() {
        return Err(Error::Input("scan CSV has no header".into()));
    }
    if let Some(v) = metadata.get("version") {
        if v != SCAN_CSV_VERSION {
            return Err(Error::Input(format!("unsupported scan CSV version {v}")));
        }
    }
    Ok(ScanTable { metadata, scans })
}
