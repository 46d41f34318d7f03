//! Experiment configuration and the `superres` subcommands.
//!
//! Configuration comes from three layers, later ones winning: built-in
//! defaults, a flat `key = value` file, and command-line flags. Lengths are
//! given in micrometres at this boundary and converted to σ units here.
//!
//! Config file keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `sigma_um` | PSF width σ in µm | 33.2 |
//! | `pixel_um` | pixel column width in µm | 7.4 |
//! | `n_pixels` | number of pixel columns (odd) | 10001 |
//! | `center_offset_um` | camera misalignment in µm | 0 |
//! | `n_detections` | mean detections per scan | 434000 |
//! | `readout_sd` | readout noise sd per column, electrons | 0 |
//! | `columns_summed` | central columns in the statistic (odd) | 1 |
//! | `density` | `sgn` or `direct` | sgn |
//! | `s_list` | comma-separated separations in σ units | 0.042,0.06,0.1,0.14,0.18 |
//! | `n_scans` | scans per separation | 200 |
//! | `seed` | campaign seed | 1 |
//! | `out` | output path | stdout |
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::camera::{read_scan_csv, scan_seed, simulate_batch, write_scan_csv, CameraConfig, ScanRecord};
use crate::error::{Error, Result};
use crate::estimator::{
    empirical_calibration, evaluate_estimator, group_by_separation, model_calibration, CalibrationCurve, EstimatorStats,
};
use crate::fisher::{crlb, fisher_continuous, fisher_curve, fisher_pixelated, fisher_sgn_asymptote, FisherDensity};
use crate::psf::{DensityFamily, DensityKind};
use crate::selftest::{run_all, CriterionReport};

pub const FISHER_CSV_VERSION: &str = "superres-fisher/1";
pub const DENSITY_CSV_VERSION: &str = "superres-density/1";
pub const STATS_CSV_VERSION: &str = "superres-stats/1";

pub const DEFAULT_SIGMA_UM: f64 = 33.2;
pub const DEFAULT_PIXEL_UM: f64 = 7.4;
pub const DEFAULT_S_LIST: [f64; 5] = [0.042, 0.06, 0.1, 0.14, 0.18];

/// Sparse configuration layer; `None` fields defer to the layer below.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct ConfigOverrides {
    /// PSF width σ in micrometres.
    #[arg(long = "sigma-um", global = true)]
    pub sigma_um: Option<f64>,
    /// Pixel column width in micrometres.
    #[arg(long = "pixel-um", global = true)]
    pub pixel_um: Option<f64>,
    #[arg(skip)]
    pub n_pixels: Option<usize>,
    #[arg(skip)]
    pub center_offset_um: Option<f64>,
    /// Mean number of detections per scan.
    #[arg(long = "n-detections", global = true)]
    pub n_detections: Option<f64>,
    /// Readout noise standard deviation per column, in electrons.
    #[arg(long = "readout-sd", global = true)]
    pub readout_sd: Option<f64>,
    #[arg(skip)]
    pub columns_summed: Option<usize>,
    #[arg(skip)]
    pub density: Option<DensityKind>,
    /// Comma-separated separations in σ units.
    #[arg(long = "s-list", global = true, value_delimiter = ',')]
    pub s_list: Option<Vec<f64>>,
    /// Scans per separation.
    #[arg(long = "n-scans", global = true)]
    pub n_scans: Option<usize>,
    /// Campaign seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Input(format!("invalid value {v:?} for config key {key}")))
}

fn parse_s_list(v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|t| parse_value::<f64>("s_list", t.trim())).collect()
}

fn parse_density(v: &str) -> Result<DensityKind> {
    match v {
        "sgn" => Ok(DensityKind::SignumFiltered),
        "direct" => Ok(DensityKind::Direct),
        _ => Err(Error::Input(format!("unknown density {v:?}, expected sgn or direct"))),
    }
}

impl ConfigOverrides {
    /// Parse a flat `key = value` document. Unknown keys are errors unless
    /// `lenient`, which is used for metadata read back from our own CSV.
    pub fn parse(text: &str, lenient: bool) -> Result<Self> {
        let mut o = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Input(format!("config line {}: expected key = value", i + 1)));
            };
            o.set(k.trim(), v.trim(), lenient)?;
        }
        Ok(o)
    }

    fn set(&mut self, key: &str, v: &str, lenient: bool) -> Result<()> {
        match key {
            "sigma_um" => self.sigma_um = Some(parse_value(key, v)?),
            "pixel_um" => self.pixel_um = Some(parse_value(key, v)?),
            "n_pixels" => self.n_pixels = Some(parse_value(key, v)?),
            "center_offset_um" => self.center_offset_um = Some(parse_value(key, v)?),
            "n_detections" => self.n_detections = Some(parse_value(key, v)?),
            "readout_sd" => self.readout_sd = Some(parse_value(key, v)?),
            "columns_summed" => self.columns_summed = Some(parse_value(key, v)?),
            "density" => self.density = Some(parse_density(v)?),
            "s_list" => self.s_list = Some(parse_s_list(v)?),
            "n_scans" => self.n_scans = Some(parse_value(key, v)?),
            "seed" => self.seed = Some(parse_value(key, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            _ if lenient => {}
            _ => return Err(Error::Input(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Read a config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, false)
    }

    /// Layer `top` over `self`.
    pub fn merged_with(&self, top: &Self) -> Self {
        Self {
            sigma_um: top.sigma_um.or(self.sigma_um),
            pixel_um: top.pixel_um.or(self.pixel_um),
            n_pixels: top.n_pixels.or(self.n_pixels),
            center_offset_um: top.center_offset_um.or(self.center_offset_um),
            n_detections: top.n_detections.or(self.n_detections),
            readout_sd: top.readout_sd.or(self.readout_sd),
            columns_summed: top.columns_summed.or(self.columns_summed),
            density: top.density.or(self.density),
            s_list: top.s_list.clone().or_else(|| self.s_list.clone()),
            n_scans: top.n_scans.or(self.n_scans),
            seed: top.seed.or(self.seed),
            out: top.out.clone().or_else(|| self.out.clone()),
        }
    }
}

/// A fully resolved experiment. Camera geometry is in σ units.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// σ in micrometres.
    pub sigma_physical: f64,
    pub camera: CameraConfig,
    pub density: DensityKind,
    pub s_list: Vec<f64>,
    pub n_scans: usize,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sigma_physical: DEFAULT_SIGMA_UM,
            camera: CameraConfig::experiment(),
            density: DensityKind::SignumFiltered,
            s_list: DEFAULT_S_LIST.to_vec(),
            n_scans: 200,
            seed: 1,
            output_path: None,
        }
    }
}

impl ExperimentConfig {
    /// Resolve overrides on top of the defaults and validate.
    pub fn resolve(o: &ConfigOverrides) -> Result<Self> {
        let d = Self::default();
        let sigma_um = o.sigma_um.unwrap_or(d.sigma_physical);
        if !(sigma_um > 0.0 && sigma_um.is_finite()) {
            return Err(Error::Config(format!("sigma_um must be positive, got {sigma_um}")));
        }
        let camera = CameraConfig {
            pixel_width: o.pixel_um.unwrap_or(DEFAULT_PIXEL_UM) / sigma_um,
            n_pixels: o.n_pixels.unwrap_or(d.camera.n_pixels),
            center_offset: o.center_offset_um.unwrap_or(0.0) / sigma_um,
            mean_detections: o.n_detections.unwrap_or(d.camera.mean_detections),
            readout_noise_sd: o.readout_sd.unwrap_or(d.camera.readout_noise_sd),
            columns_summed: o.columns_summed.unwrap_or(d.camera.columns_summed),
        };
        let cfg = Self {
            sigma_physical: sigma_um,
            camera,
            density: o.density.unwrap_or(d.density),
            s_list: o.s_list.clone().unwrap_or(d.s_list),
            n_scans: o.n_scans.unwrap_or(d.n_scans),
            seed: o.seed.unwrap_or(d.seed),
            output_path: o.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.camera.validate(1.0)?;
        if self.camera.columns_summed.is_multiple_of(2) || self.camera.columns_summed > self.camera.n_pixels {
            return Err(Error::Config(format!(
                "columns_summed must be odd and at most n_pixels, got {}",
                self.camera.columns_summed
            )));
        }
        if self.s_list.is_empty() {
            return Err(Error::Config("s_list is empty".into()));
        }
        if self.s_list.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Config("s_list entries must be positive".into()));
        }
        if self.s_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("s_list must be strictly increasing".into()));
        }
        if self.n_scans == 0 {
            return Err(Error::Config("n_scans must be positive".into()));
        }
        Ok(())
    }

    pub fn family(&self) -> Result<DensityFamily> {
        DensityFamily::gaussian(self.density, 1.0)
    }

    /// Canonical `key=value` lines in physical units. The output path is
    /// left out so that it does not affect the hash.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let s = self.sigma_physical;
        let list: Vec<String> = self.s_list.iter().map(f64::to_string).collect();
        vec![
            ("sigma_um".into(), s.to_string()),
            ("pixel_um".into(), (self.camera.pixel_width * s).to_string()),
            ("n_pixels".into(), self.camera.n_pixels.to_string()),
            ("center_offset_um".into(), (self.camera.center_offset * s).to_string()),
            ("n_detections".into(), self.camera.mean_detections.to_string()),
            ("readout_sd".into(), self.camera.readout_noise_sd.to_string()),
            ("columns_summed".into(), self.camera.columns_summed.to_string()),
            ("density".into(), self.density.label().into()),
            ("s_list".into(), list.join(",")),
            ("n_scans".into(), self.n_scans.to_string()),
            ("seed".into(), self.seed.to_string()),
        ]
    }

    /// First 16 hex digits of the SHA-256 of the canonical form.
    pub fn config_hash(&self) -> String {
        hash_lines(&self.to_kv())
    }
}

fn hash_lines(kv: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    for (k, v) in kv {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().take(8).fold(String::new(), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    })
}

fn write_header<W: Write>(out: &mut W, version: &str, kv: &[(String, String)], seed: Option<u64>) -> Result<()> {
    writeln!(out, "# version={version}")?;
    writeln!(out, "# config_hash={}", hash_lines(kv))?;
    match seed {
        Some(s) => writeln!(out, "# seed={s}")?,
        None => writeln!(out, "# seed=none")?,
    }
    Ok(())
}

/// Which curves `fisher-curve` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveKind {
    Direct,
    Sgn,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherRow {
    pub s: f64,
    pub f_direct: Option<f64>,
    pub f_sgn: Option<f64>,
    pub f_sgn_asymptote: f64,
}

/// `n` evenly spaced separations over `[0, s_max]`.
pub fn s_range(s_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(s_max > 0.0 && s_max.is_finite()) {
        return Err(Error::Input(format!(
            "empty separation range: s_max = {s_max}, points = {n}"
        )));
    }
    Ok((0..n).map(|i| s_max * i as f64 / (n - 1) as f64).collect())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Fisher information per detection for direct imaging and the signum
/// filter, with the small-separation law alongside.
/// Columns `s,F_direct,F_sgn,F_sgn_asymptote`; unrequested curves are empty.
pub fn cmd_fisher_curve<W: Write>(kind: CurveKind, s_values: &[f64], mut out: W) -> Result<Vec<FisherRow>> {
    if s_values.is_empty() {
        return Err(Error::Input("empty separation range".into()));
    }
    if s_values.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::Input("separations must be finite and non-negative".into()));
    }
    let curve = |k: DensityKind, wanted: bool| -> Result<Vec<Option<f64>>> {
        if !wanted {
            return Ok(vec![None; s_values.len()]);
        }
        let fam = DensityFamily::gaussian(k, 1.0)?;
        Ok(fisher_curve(&fam, s_values, 1e-3)?
            .into_iter()
            .map(|r| Some(r.value))
            .collect())
    };
    let direct = curve(DensityKind::Direct, kind != CurveKind::Sgn)?;
    let sgn = curve(DensityKind::SignumFiltered, kind != CurveKind::Direct)?;
    let rows = s_values
        .iter()
        .zip(direct.into_iter().zip(sgn))
        .map(|(&s, (d, g))| {
            Ok(FisherRow {
                s,
                f_direct: d,
                f_sgn: g,
                f_sgn_asymptote: fisher_sgn_asymptote(s, 1.0)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let list: Vec<String> = s_values.iter().map(f64::to_string).collect();
    let kv = vec![
        ("kind".to_string(), format!("{kind:?}").to_lowercase()),
        ("s".to_string(), list.join(",")),
    ];
    write_header(&mut out, FISHER_CSV_VERSION, &kv, None)?;
    writeln!(out, "s,F_direct,F_sgn,F_sgn_asymptote")?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.s,
            opt(r.f_direct),
            opt(r.f_sgn),
            r.f_sgn_asymptote
        )?;
    }
    Ok(rows)
}

/// Detection density and Fisher integrand on `points` positions across
/// `[-x_max, x_max]` for each separation. Columns `s,x,p,fisher_density`.
pub fn cmd_density_profile<W: Write>(
    s_list: &[f64],
    kind: DensityKind,
    x_max: f64,
    points: usize,
    mut out: W,
) -> Result<usize> {
    if s_list.is_empty() || s_list.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::Input(
            "separations must be a nonempty list of positive values".into(),
        ));
    }
    let xs = s_range(2.0 * x_max, points)?;
    let fam = DensityFamily::gaussian(kind, 1.0)?;
    let list: Vec<String> = s_list.iter().map(f64::to_string).collect();
    let kv = vec![
        ("kind".to_string(), kind.label().to_string()),
        ("s".to_string(), list.join(",")),
        ("x_max".to_string(), x_max.to_string()),
        ("points".to_string(), points.to_string()),
    ];
    write_header(&mut out, DENSITY_CSV_VERSION, &kv, None)?;
    writeln!(out, "s,x,p,fisher_density")?;
    let mut rows = 0;
    for &s in s_list {
        let fd = FisherDensity::new(&fam, s, s * 1e-3)?;
        for &u in &xs {
            let x = u - x_max;
            writeln!(out, "{s},{x},{},{}", fd.density().value(x), fd.at(x))?;
            rows += 1;
        }
    }
    Ok(rows)
}

/// All scans of a campaign, ordered by separation then scan index.
pub fn simulate_campaign(cfg: &ExperimentConfig) -> Result<Vec<ScanRecord>> {
    cfg.validate()?;
    let fam = cfg.family()?;
    let batches = cfg
        .s_list
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let seeds: Vec<u64> = (0..cfg.n_scans as u64)
                .map(|k| scan_seed(cfg.seed, i as u64, k))
                .collect();
            simulate_batch(&fam.at(s)?, &cfg.camera, &seeds)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(batches.into_iter().flatten().collect())
}

/// Run a Monte Carlo campaign and write the scan CSV.
pub fn cmd_simulate<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<Vec<ScanRecord>> {
    let scans = simulate_campaign(cfg)?;
    let mut meta = vec![("config_hash".to_string(), cfg.config_hash())];
    meta.extend(cfg.to_kv());
    write_scan_csv(out, &meta, &scans)?;
    Ok(scans)
}

/// How `estimate` obtains the calibration curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CalibrationMode {
    /// Noiseless model means `N·P_c(s)` at the measured separations.
    Model,
    /// Sample means of the scans themselves.
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub stats: EstimatorStats,
    pub crlb_pixelated: f64,
    pub crlb_direct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub calibration: CalibrationCurve,
    pub rows: Vec<EstimateRow>,
}

/// Estimate the separation of every scan and summarize per separation.
/// The camera and density are taken from the scan file's metadata, with
/// `overrides` on top. Columns
/// `s_true,mean,variance,bias,n,crlb_pixelated,crlb_direct`.
pub fn cmd_estimate<R: BufRead, W: Write>(
    input: R,
    mode: CalibrationMode,
    overrides: &ConfigOverrides,
    mut out: W,
) -> Result<EstimateReport> {
    let table = read_scan_csv(input)?;
    let meta_text: String = table.metadata.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    let from_file = ConfigOverrides::parse(&meta_text, true)?;
    let mut layered = from_file.merged_with(overrides);
    // The separations come from the scans, not from any configured list.
    layered.s_list = None;
    let cfg = ExperimentConfig::resolve(&layered)?;
    let groups = group_by_separation(&table.scans);
    let fam = cfg.family()?;
    let s_grid: Vec<f64> = groups.iter().map(|g| g.0).collect();
    let calibration = match mode {
        CalibrationMode::Model => model_calibration(&fam, &cfg.camera, &s_grid)?,
        CalibrationMode::Empirical => empirical_calibration(&table.scans, cfg.camera.columns_summed)?,
    };
    let direct = DensityFamily::gaussian(DensityKind::Direct, 1.0)?;
    let n = cfg.camera.mean_detections.round().max(1.0) as u64;
    let rows = groups
        .par_iter()
        .map(|(s, batch)| {
            Ok(EstimateRow {
                stats: evaluate_estimator(batch, &calibration, cfg.camera.columns_summed)?,
                crlb_pixelated: crlb(&fisher_pixelated(&fam, *s, &cfg.camera, s * 1e-3)?, n)?.variance_bound,
                crlb_direct: crlb(&fisher_continuous(&direct, *s, s * 1e-3)?, n)?.variance_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut kv = cfg.to_kv();
    kv.retain(|(k, _)| k != "s_list" && k != "n_scans");
    kv.push(("calibration".into(), format!("{mode:?}").to_lowercase()));
    write_header(
        &mut out,
        STATS_CSV_VERSION,
        &kv,
        table.metadata.get("seed").and_then(|s| s.parse().ok()),
    )?;
    writeln!(out, "# calibration_a={}", calibration.a)?;
    writeln!(out, "# calibration_b={}", calibration.b)?;
    writeln!(out, "# calibration_residual_rms={}", calibration.residual_rms)?;
    writeln!(out, "s_true,mean,variance,bias,n,crlb_pixelated,crlb_direct")?;
    for r in &rows {
        let st = &r.stats;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            st.s_true, st.mean_estimate, st.variance, st.bias, st.n_samples, r.crlb_pixelated, r.crlb_direct
        )?;
    }
    Ok(EstimateReport { calibration, rows })
}

/// Parsed stats CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsTable {
    pub metadata: BTreeMap<String, String>,
    pub rows: Vec<EstimateRow>,
}

/// Read a stats CSV written by [`cmd_estimate`].
pub fn read_stats_csv<R: BufRead>(input: R) -> Result<StatsTable> {
    let mut metadata = BTreeMap::new();
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(m) = line.strip_prefix('#') {
            if let Some((k, v)) = m.trim().split_once('=') {
                metadata.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !seen_header {
            if line != "s_true,mean,variance,bias,n,crlb_pixelated,crlb_direct" {
                return Err(Error::Input(format!("line {}: unexpected header", i + 1)));
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::Input(format!("line {}: expected 7 fields", i + 1)));
        }
        let num = |j: usize| parse_value::<f64>("stats field", f[j]);
        rows.push(EstimateRow {
            stats: EstimatorStats {
                s_true: num(0)?,
                mean_estimate: num(1)?,
                variance: num(2)?,
                bias: num(3)?,
                n_samples: parse_value("n", f[4])?,
            },
            crlb_pixelated: num(5)?,
            crlb_direct: num(6)?,
        });
    }
    if metadata.get("version").map(String::as_str) != Some(STATS_CSV_VERSION) {
        return Err(Error::Input("missing or unsupported stats CSV version".into()));
    }
    Ok(StatsTable { metadata, rows })
}

/// Run the acceptance checks, writing one line per criterion.
pub fn cmd_selftest<W: Write>(mut out: W) -> Result<Vec<CriterionReport>> {
    let mut reports = Vec::new();
    for r in run_all() {
        writeln!(out, "{r}")?;
        reports.push(r);
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    writeln!(out, "{passed}/{} criteria passed", reports.len())?;
    Ok(reports)
}

#[derive(Debug, Parser)]
#[command(
    name = "superres",
    version,
    about = "Sub-Rayleigh separation estimation with a signum-filtered PSF"
)]
pub struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fisher information curves for direct and signum-filtered imaging.
    FisherCurve {
        #[arg(long, value_enum, default_value_t = CurveKind::Both)]
        kind: CurveKind,
        /// Largest separation in σ units when --s-list is not given.
        #[arg(long, default_value_t = 5.0)]
        s_max: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Detection density and Fisher integrand profiles.
    Density {
        #[arg(long, value_enum, default_value_t = DensityArg::Sgn)]
        kind: DensityArg,
        /// Half-width of the profile in σ units.
        #[arg(long, default_value_t = 4.0)]
        x_max: f64,
        #[arg(long, default_value_t = 801)]
        points: usize,
    },
    /// Monte Carlo scan campaign.
    Simulate,
    /// Estimator statistics from a scan CSV.
    Estimate {
        /// Scan CSV written by `simulate`.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = CalibrationMode::Model)]
        calibration: CalibrationMode,
    },
    /// Run the acceptance checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityArg {
    Direct,
    Sgn,
}

impl From<DensityArg> for DensityKind {
    fn from(d: DensityArg) -> Self {
        match d {
            DensityArg::Direct => DensityKind::Direct,
            DensityArg::Sgn => DensityKind::SignumFiltered,
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Execute a parsed command line. Returns `false` when a selftest criterion
/// failed.
pub fn run(cli: Cli) -> Result<bool> {
    let file = match &cli.config {
        Some(p) => ConfigOverrides::from_file(p)?,
        None => ConfigOverrides::default(),
    };
    let layered = file.merged_with(&cli.overrides);
    let mut out = open_output(layered.out.as_deref())?;
    let mut ok = true;
    match cli.command {
        Command::FisherCurve { kind, s_max, points } => {
            let s = match &layered.s_list {
                Some(list) => list.clone(),
                None => s_range(s_max, points)?,
            };
            let rows = cmd_fisher_curve(kind, &s, &mut out)?;
            eprintln!("{} rows", rows.len());
        }
        Command::Density { kind, x_max, points } => {
            let s = layered.s_list.clone().unwrap_or_else(|| vec![0.05, 0.2, 1.0]);
            cmd_density_profile(&s, kind.into(), x_max, points, &mut out)?;
        }
        Command::Simulate => {
            let cfg = ExperimentConfig::resolve(&layered)?;
            let scans = cmd_simulate(&cfg, &mut out)?;
            eprintln!(
                "{} scans over {} separations, config {}",
                scans.len(),
                cfg.s_list.len(),
                cfg.config_hash()
            );
        }
        Command::Estimate { input, calibration } => {
            let reader = BufReader::new(
                File::open(&input).map_err(|e| Error::Io(format!("cannot open {}: {e}", input.display())))?,
            );
            let report = cmd_estimate(reader, calibration, &cli.overrides, &mut out)?;
            eprintln!(
                "calibration a = {:.4}, b = {:.4}, rms = {:.3e}",
                report.calibration.a, report.calibration.b, report.calibration.residual_rms
            );
            eprintln!(
                "{:>8} {:>10} {:>11} {:>10} {:>9}",
                "s_true", "mean", "variance", "var/CRLB", "gain"
            );
            for r in &report.rows {
                let st = &r.stats;
                eprintln!(
                    "{:>8} {:>10.5} {:>11.4e} {:>10.3} {:>9.2}",
                    st.s_true,
                    st.mean_estimate,
                    st.variance,
                    st.variance / r.crlb_pixelated,
                    r.crlb_direct / st.variance
                );
            }
        }
        Command::Selftest => {
            ok = cmd_selftest(&mut out)?.iter().all(|r| r.passed);
        }
    }
    out.flush()?;
    Ok(ok)
}
