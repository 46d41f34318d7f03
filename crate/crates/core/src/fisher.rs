//! Fisher information about the separation and the Cramér–Rao bound.
//!
//! Values are per detection (`N = 1`); [`crlb`] reintroduces the count.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::camera::{pixel_integrals, CameraConfig};
use crate::error::{Error, Result};
use crate::psf::{DensityFamily, DetectionDensity};
use crate::quad::{integrate_pieces, QuadConfig};

/// Densities below this floor contribute their analytic limit (zero) to the
/// Fisher integrand instead of `0/0`.
pub const DENSITY_FLOOR: f64 = 1e-280;

/// Relative tolerance of the Fisher quadrature.
pub const FISHER_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherMethod {
    Quadrature,
    Pixelated,
    AsymptoteDirect,
    AsymptoteSgn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherResult {
    /// Information per detection, units length⁻².
    pub value: f64,
    pub s: f64,
    pub method: FisherMethod,
    pub quadrature_error_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrlbResult {
    /// Lower bound on the estimator variance, units length². Infinite when
    /// the information vanishes.
    pub variance_bound: f64,
    pub n_detections: u64,
}

impl CrlbResult {
    pub fn is_bounded(&self) -> bool {
        self.variance_bound.is_finite()
    }
}

/// Integrand `(∂ₛp)² / p` of the Fisher information at one separation.
pub struct FisherDensity {
    center: DetectionDensity,
    // Neighbours at s ± ds when the density has no analytic derivative.
    stencil: Option<(DetectionDensity, DetectionDensity, f64)>,
}

impl FisherDensity {
    pub fn new(family: &DensityFamily, s: f64, ds: f64) -> Result<Self> {
        let center = family.at(s)?;
        let stencil = if center.ds(0.0).is_some() {
            None
        } else {
            Some((family.at(s - ds)?, family.at(s + ds)?, ds))
        };
        Ok(Self { center, stencil })
    }

    pub fn density(&self) -> &DetectionDensity {
        &self.center
    }

    /// `∂p(x|s)/∂s`.
    pub fn score_numerator(&self, x: f64) -> f64 {
        match &self.stencil {
            None => self.center.ds(x).unwrap_or(0.0),
            Some((lo, hi, ds)) => (hi.value(x) - lo.value(x)) / (2.0 * ds),
        }
    }

    pub fn at(&self, x: f64) -> f64 {
        let p = self.center.value(x);
        if p < DENSITY_FLOOR {
            return 0.0;
        }
        let d = self.score_numerator(x);
        d * d / p
    }
}

fn check_step(s: f64, ds: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("Fisher information needs s > 0, got {s}")));
    }
    if !(ds > 0.0 && ds <= s / 10.0) {
        return Err(Error::Domain(format!(
            "derivative step must lie in (0, s/10], got {ds} at s = {s}"
        )));
    }
    Ok(())
}

/// Breakpoints for integrals over the line that concentrate nodes where the
/// Fisher density of a separation-`s` pair lives.
pub(crate) fn breakpoints(s: f64, sigma: f64) -> Vec<f64> {
    let h = 0.5 * s;
    let mut pts = vec![0.0];
    for v in [
        h,
        s,
        2.0 * s,
        h + 0.5 * sigma,
        h + 2.0 * sigma,
        h + 6.0 * sigma,
        h + 12.0 * sigma,
    ] {
        pts.push(v);
        pts.push(-v);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * sigma);
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(f64::NEG_INFINITY);
    out.extend(pts);
    out.push(f64::INFINITY);
    out
}

/// Continuous Fisher information by adaptive quadrature over the whole line.
/// `ds` is the central-difference step used when the density has no analytic
/// derivative; it must satisfy `0 < ds <= s/10`.
pub fn fisher_continuous(family: &DensityFamily, s: f64, ds: f64) -> Result<FisherResult> {
    check_step(s, ds)?;
    let fd = FisherDensity::new(family, s, ds)?;
    let cfg = QuadConfig {
        abs_tol: 1e-300,
        rel_tol: FISHER_REL_TOL,
        max_intervals: 20_000,
    };
    let r = integrate_pieces(|x| fd.at(x), &breakpoints(s, family.sigma()), &cfg).map_err(|e| match e {
        Error::Numerical { message, diagnostic } => {
            Error::numerical(format!("fisher_continuous at s = {s}: {message}"), diagnostic)
        }
        other => other,
    })?;
    Ok(FisherResult {
        value: r.value.max(0.0),
        s,
        method: FisherMethod::Quadrature,
        quadrature_error_estimate: r.error,
    })
}

/// Fisher information over a grid of separations, evaluated in parallel.
/// Zero separations yield zero without quadrature. `ds` is `ds_rel · s`.
pub fn fisher_curve(family: &DensityFamily, s_values: &[f64], ds_rel: f64) -> Result<Vec<FisherResult>> {
    s_values
        .par_iter()
        .map(|&s| {
            if s == 0.0 {
                Ok(FisherResult {
                    value: 0.0,
                    s,
                    method: FisherMethod::Quadrature,
                    quadrature_error_estimate: 0.0,
                })
            } else {
                fisher_continuous(family, s, ds_rel * s)
            }
        })
        .collect()
}

/// Separation in `(lo, hi)` at which two Fisher curves are equal, found by
/// bisection to `tol`. The difference must change sign across the bracket.
pub fn fisher_crossing(a: &DensityFamily, b: &DensityFamily, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo > 0.0 && hi > lo && tol > 0.0) {
        return Err(Error::Domain(format!(
            "invalid bracket [{lo}, {hi}] or tolerance {tol}"
        )));
    }
    let diff = |s: f64| -> Result<f64> {
        Ok(fisher_continuous(a, s, s * 1e-3)?.value - fisher_continuous(b, s, s * 1e-3)?.value)
    };
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = diff(lo)?;
    if f_lo.signum() == diff(hi)?.signum() {
        return Err(Error::Domain(format!("curves do not cross in [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = diff(mid)?;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fraction of the Fisher integrand mass within `|x| <= radius`.
pub fn information_fraction_within(family: &DensityFamily, s: f64, radius: f64) -> Result<f64> {
    let total = fisher_continuous(family, s, s / 100.0)?.value;
    let fd = FisherDensity::new(family, s, s / 100.0)?;
    let mut pts: Vec<f64> = breakpoints(s, family.sigma())
        .into_iter()
        .filter(|p| p.is_finite() && p.abs() < radius)
        .collect();
    pts.insert(0, -radius);
    pts.push(radius);
    let cfg = QuadConfig::with_tolerances(1e-300, FISHER_REL_TOL);
    let inner = integrate_pieces(|x| fd.at(x), &pts, &cfg)?.value;
    Ok(inner / total)
}

fn check_asymptote_args(s: f64, sigma: f64) -> Result<()> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("separation must be non-negative, got {s}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

/// Small-separation law for direct imaging, `(s/σ)² / (8σ²)`.
pub fn fisher_direct_asymptote(s: f64, sigma: f64) -> Result<FisherResult> {
    check_asymptote_args(s, sigma)?;
    let r = s / sigma;
    Ok(FisherResult {
        value: r * r / (8.0 * sigma * sigma),
        s,
        method: FisherMethod::AsymptoteDirect,
        quadrature_error_estimate: 0.0,
    })
}

/// Small-separation law behind the signum filter, `(s/σ) / (2√(2π) σ²)`.
pub fn fisher_sgn_asymptote(s: f64, sigma: f64) -> Result<FisherResult> {
    check_asymptote_args(s, sigma)?;
    Ok(FisherResult {
        value: (s / sigma) / (2.0 * (2.0 * PI).sqrt() * sigma * sigma),
        s,
        method: FisherMethod::AsymptoteSgn,
        quadrature_error_estimate: 0.0,
    })
}

/// Linear-law slope `λ = πα/2` for a parabolic density `α(x² + s²/4)`.
pub fn linear_law_slope(alpha: f64) -> f64 {
    0.5 * PI * alpha
}

/// Fisher information of the pixel-binned counts,
/// `Σᵢ (∂ₛPᵢ)² / Pᵢ` over the renormalized pixel probabilities.
pub fn fisher_pixelated(family: &DensityFamily, s: f64, camera: &CameraConfig, ds: f64) -> Result<FisherResult> {
    check_step(s, ds)?;
    let center = family.at(s)?;
    let analytic = center.ds(0.0).is_some();
    let (mass, dmass, err) = if analytic {
        let px = pixel_integrals(&center, camera, true)?;
        (px.mass, px.ds.expect("derivative requested"), px.error)
    } else {
        let px = pixel_integrals(&center, camera, false)?;
        let lo = pixel_integrals(&family.at(s - ds)?, camera, false)?;
        let hi = pixel_integrals(&family.at(s + ds)?, camera, false)?;
        let d = lo
            .mass
            .iter()
            .zip(&hi.mass)
            .map(|(a, b)| (b - a) / (2.0 * ds))
            .collect();
        (px.mass, d, px.error + lo.error + hi.error)
    };
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Config("all pixel probabilities vanish".into()));
    }
    let dtotal: f64 = dmass.iter().sum();
    let value: f64 = mass
        .iter()
        .zip(&dmass)
        .filter(|(m, _)| **m / total >= DENSITY_FLOOR)
        .map(|(m, dm)| {
            let p = m / total;
            let dp = (dm - p * dtotal) / total;
            dp * dp / p
        })
        .sum();
    Ok(FisherResult {
        value: value.max(0.0),
        s,
        method: FisherMethod::Pixelated,
        quadrature_error_estimate: err,
    })
}

/// `(Δŝ)² >= 1 / (N F)`.
pub fn crlb(f: &FisherResult, n: u64) -> Result<CrlbResult> {
    if n == 0 {
        return Err(Error::Domain("detection count must be positive".into()));
    }
    if !(f.value >= 0.0) {
        return Err(Error::Domain(format!(
            "Fisher information must be non-negative, got {}",
            f.value
        )));
    }
    let variance_bound = if f.value == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (n as f64 * f.value)
    };
    Ok(CrlbResult {
        variance_bound,
        n_detections: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psf::{gaussian_psf, parabolic_alpha, DensityKind, GaussianPsf};

    fn fam(kind: DensityKind) -> DensityFamily {
        DensityFamily::gaussian(kind, 1.0).unwrap()
    }

    #[test]
    fn continuous_examples() {
        let d = fisher_continuous(&fam(DensityKind::Direct), 0.05, 0.005).unwrap();
        assert!((d.value / 3.125e-4 - 1.0).abs() < 0.02, "{}", d.value);
        let g = fisher_continuous(&fam(DensityKind::SignumFiltered), 0.01, 0.001).unwrap();
        assert!((g.value / 1.9947e-3 - 1.0).abs() < 0.05, "{}", g.value);
        // Near s = 0 the direct information vanishes quadratically and the
        // filtered information linearly.
        let z = fisher_continuous(&fam(DensityKind::Direct), 1e-6, 1e-7).unwrap();
        assert!(z.value < 1e-8 && z.value >= 0.0, "{}", z.value);
        let z = fisher_continuous(&fam(DensityKind::SignumFiltered), 1e-6, 1e-7).unwrap();
        let lin = fisher_sgn_asymptote(1e-6, 1.0).unwrap().value;
        assert!((z.value / lin - 1.0).abs() < 1e-3, "{}", z.value);
    }

    #[test]
    fn step_preconditions() {
        let f = fam(DensityKind::Direct);
        assert!(fisher_continuous(&f, 0.0, 0.0).is_err());
        assert!(fisher_continuous(&f, 0.1, 0.02).is_err());
        assert!(fisher_continuous(&f, 0.1, 0.0).is_err());
    }

    #[test]
    fn asymptote_examples() {
        assert_eq!(fisher_direct_asymptote(0.0, 1.0).unwrap().value, 0.0);
        assert!((fisher_direct_asymptote(0.2, 1.0).unwrap().value - 5.0e-3).abs() < 1e-16);
        assert!((fisher_direct_asymptote(0.2, 2.0).unwrap().value - 5.0e-3 / 16.0).abs() < 1e-17);
        assert_eq!(fisher_sgn_asymptote(0.0, 1.0).unwrap().value, 0.0);
        let v = fisher_sgn_asymptote(0.2, 1.0).unwrap().value;
        assert!((v - 3.989_422_804_014_327e-2).abs() < 1e-15);
        let ratio = fisher_sgn_asymptote(0.05, 1.0).unwrap().value / fisher_direct_asymptote(0.05, 1.0).unwrap().value;
        assert!((ratio - 31.9).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn sgn_asymptote_is_linear_law_of_alpha() {
        let alpha = parabolic_alpha(&GaussianPsf::new(1.0).unwrap()).unwrap();
        for &s in &[0.001, 0.02, 0.3] {
            let a = fisher_sgn_asymptote(s, 1.0).unwrap().value;
            let b = linear_law_slope(alpha) * s;
            assert!(((a - b) / a).abs() < 4.0 * f64::EPSILON, "s={s}");
        }
    }

    #[test]
    fn generic_psf_uses_finite_differences() {
        #[derive(Debug)]
        struct Opaque(GaussianPsf);
        impl crate::psf::AmplitudePsf for Opaque {
            fn sigma(&self) -> f64 {
                self.0.sigma()
            }
            fn amplitude(&self, x: f64) -> f64 {
                self.0.amplitude(x)
            }
        }
        let opaque = DensityFamily::new(
            DensityKind::Direct,
            std::sync::Arc::new(Opaque(GaussianPsf::new(1.0).unwrap())),
        );
        let s = 0.3;
        let a = fisher_continuous(&opaque, s, s / 100.0).unwrap().value;
        let b = fisher_continuous(&fam(DensityKind::Direct), s, s / 100.0)
            .unwrap()
            .value;
        assert!(((a - b) / b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn crlb_examples() {
        let f = FisherResult {
            value: 0.01,
            s: 1.0,
            method: FisherMethod::Quadrature,
            quadrature_error_estimate: 0.0,
        };
        assert!((crlb(&f, 1).unwrap().variance_bound - 100.0).abs() < 1e-12);
        let f12 = fisher_sgn_asymptote(0.1, 1.0).unwrap();
        let b = crlb(&f12, 434_000).unwrap().variance_bound;
        assert!((b - 1.155_128_237e-4).abs() < 1e-12, "{b}");
        let b2 = crlb(&f12, 868_000).unwrap().variance_bound;
        assert!((b2 - b / 2.0).abs() < 1e-18);
        let zero = crlb(&fisher_sgn_asymptote(0.0, 1.0).unwrap(), 10).unwrap();
        assert!(!zero.is_bounded());
    }

    #[test]
    fn pixelated_refinement_limit() {
        let f = fam(DensityKind::Direct);
        let s = 0.3;
        let cont = fisher_continuous(&f, s, s / 100.0).unwrap().value;
        let camera = CameraConfig {
            pixel_width: 1.0 / 512.0,
            n_pixels: 14 * 512 + 1,
            ..CameraConfig::experiment()
        };
        let pix = fisher_pixelated(&f, s, &camera, s / 100.0).unwrap().value;
        assert!(pix <= cont * (1.0 + 1e-9));
        assert!((pix / cont - 1.0).abs() < 0.005, "{pix} vs {cont}");
    }

    #[test]
    fn one_huge_pixel_has_no_information() {
        let f = fam(DensityKind::SignumFiltered);
        let camera = CameraConfig {
            pixel_width: 1e6,
            n_pixels: 1,
            ..CameraConfig::experiment()
        };
        let v = fisher_pixelated(&f, 0.1, &camera, 0.01).unwrap().value;
        assert!(v.abs() < 1e-12, "{v}");
    }

    #[test]
    fn pixelated_is_below_continuous() {
        let sg = DensityFamily::new(DensityKind::SignumFiltered, gaussian_psf(1.0).unwrap());
        let camera = CameraConfig::experiment();
        for &s in &[0.05, 0.1, 0.2] {
            let c = fisher_continuous(&sg, s, s / 100.0).unwrap().value;
            let p = fisher_pixelated(&sg, s, &camera, s / 100.0).unwrap().value;
            assert!(p > 0.0 && p < c, "s={s}: {p} vs {c}");
        }
    }
}
