//! Dawson's integral `D(z) = exp(-z²) ∫₀^z exp(t²) dt` for real arguments.
//!
//! Below the series cutoff the integral is expanded as the all-positive
//! series `∫₀^z exp(t²) dt = Σ z^(2n+1) / (n! (2n+1))` and multiplied by
//! `exp(-z²)`; there is no cancellation, so the relative error stays at a
//! few ulps times the term count. Above the cutoff the asymptotic series
//! `D(z) ~ 1/(2z) Σ (2n-1)!! / (2z²)^n` is summed up to its smallest term,
//! whose size is of order `exp(-z²)`.

use crate::error::{Error, Result};

/// Evaluation policy for [`dawson_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DawsonEvalConfig {
    /// `|z|` at or below which the power series is used.
    pub series_cutoff: f64,
    /// Relative truncation tolerance for both expansions.
    pub series_tol: f64,
}

impl Default for DawsonEvalConfig {
    fn default() -> Self {
        Self {
            series_cutoff: 6.0,
            series_tol: 1e-17,
        }
    }
}

impl DawsonEvalConfig {
    pub fn new(series_cutoff: f64, series_tol: f64) -> Result<Self> {
        let cfg = Self {
            series_cutoff,
            series_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.series_cutoff > 0.0 && self.series_cutoff.is_finite()) {
            return Err(Error::Config(format!(
                "series_cutoff must be positive, got {}",
                self.series_cutoff
            )));
        }
        if !(self.series_tol > 0.0 && self.series_tol < 1e-10) {
            return Err(Error::Config(format!(
                "series_tol must lie in (0, 1e-10), got {}",
                self.series_tol
            )));
        }
        Ok(())
    }
}

/// Dawson's integral with the default evaluation policy.
pub fn dawson(z: f64) -> Result<f64> {
    dawson_with(z, &DawsonEvalConfig::default())
}

pub fn dawson_with(z: f64, cfg: &DawsonEvalConfig) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("dawson: non-finite argument {z}")));
    }
    cfg.validate()?;
    Ok(dawson_finite(z, cfg))
}

/// Unchecked evaluation for finite `z` and a validated config.
pub(crate) fn dawson_finite(z: f64, cfg: &DawsonEvalConfig) -> f64 {
    let a = z.abs();
    let v = if a <= cfg.series_cutoff {
        series(a, cfg.series_tol)
    } else {
        asymptotic(a, cfg.series_tol)
    };
    // Exact oddness: evaluate on |z| and copy the sign.
    if z.is_sign_negative() {
        -v
    } else {
        v
    }
}

/// Default-policy evaluation for internal hot loops (argument known finite).
#[inline]
pub(crate) fn dawson_fast(z: f64) -> f64 {
    const CFG: DawsonEvalConfig = DawsonEvalConfig {
        series_cutoff: 6.0,
        series_tol: 1e-17,
    };
    dawson_finite(z, &CFG)
}

/// Derivative `D'(z) = 1 - 2 z D(z)`.
pub fn dawson_derivative(z: f64) -> Result<f64> {
    let d = dawson(z)?;
    Ok(1.0 - 2.0 * z * d)
}

fn series(a: f64, tol: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let z2 = a * a;
    let mut term = a; // z^(2n+1) / n!
    let mut sum = a;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= z2 / n;
        let contrib = term / (2.0 * n + 1.0);
        sum += contrib;
        if n > z2 && contrib <= tol * sum {
            break;
        }
    }
    // exp(-z²) with the rounding error of z² folded back in.
    let lo = a.mul_add(a, -z2);
    (-z2).exp() * (1.0 - lo) * sum
}

fn asymptotic(a: f64, tol: f64) -> f64 {
    let x = 1.0 / (2.0 * a * a);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let next = term * (2.0 * k - 1.0) * x;
        if next >= term || next <= tol * sum {
            if next < term {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum / (2.0 * a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_zero() {
        assert_eq!(dawson(0.0).unwrap(), 0.0);
    }

    #[test]
    fn known_values() {
        // Values from the alternating Maclaurin series, see tests/specfun_oracle.rs.
        let d1 = dawson(1.0).unwrap();
        assert!((d1 - 0.538_079_506_912_768_4).abs() < 1e-15 * 0.54, "{d1}");
        let small = dawson(0.01).unwrap();
        assert!((small - 0.01 * (1.0 - 2.0 * 1e-4 / 3.0)).abs() < 1e-10);
        let big = dawson(20.0).unwrap();
        let asym = 1.0 / 40.0 + 1.0 / (4.0 * 8000.0) + 3.0 / (8.0 * 20f64.powi(5));
        assert!((big - asym).abs() < 1e-9, "{big} vs {asym}");
    }

    #[test]
    fn oddness_is_bitwise() {
        for &z in &[1e-8, 0.3, 0.92, 2.5, 5.99, 6.0, 6.01, 13.0, 49.0] {
            assert_eq!(dawson(-z).unwrap().to_bits(), (-dawson(z).unwrap()).to_bits());
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(dawson(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(dawson(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn config_invariants() {
        assert!(DawsonEvalConfig::new(0.0, 1e-16).is_err());
        assert!(DawsonEvalConfig::new(5.0, 1e-10).is_err());
        assert!(DawsonEvalConfig::new(5.0, 0.0).is_err());
        assert!(DawsonEvalConfig::new(5.0, 1e-16).is_ok());
    }

    #[test]
    fn branches_agree_at_cutoff() {
        for &z in &[6.0, 6.5, 7.0] {
            let s = series(z, 1e-17);
            let a = asymptotic(z, 1e-17);
            assert!(((s - a) / s).abs() < 1e-13, "z={z}: {s} vs {a}");
        }
    }

    #[test]
    fn derivative_identity() {
        let h = 1e-5;
        let mut z = -5.0;
        while z <= 5.0 {
            let fd = (dawson(z + h).unwrap() - dawson(z - h).unwrap()) / (2.0 * h);
            assert!((fd - dawson_derivative(z).unwrap()).abs() < 1e-6, "z={z}");
            z += 0.01;
        }
    }
}
