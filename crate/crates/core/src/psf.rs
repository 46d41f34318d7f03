//! Amplitude point-spread functions and the two-source detection densities.
//!
//! All lengths are in units of the PSF width σ unless a PSF is built with a
//! different `sigma`, in which case every position is in the same (arbitrary)
//! length unit as that `sigma`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::processor::NumericSignum;
use crate::quad::{integrate_pieces, QuadConfig};
use crate::specfun::dawson_fast;

/// Half-width of the working domain in units of σ.
pub const DOMAIN_HALF_WIDTH: f64 = 12.0;

/// A real, even, unit-energy amplitude PSF `Ψ(x)`.
pub trait AmplitudePsf: Send + Sync + fmt::Debug {
    /// Effective width σ.
    fn sigma(&self) -> f64;

    fn amplitude(&self, x: f64) -> f64;

    /// `Ψ'(x)`. The default is a fourth-order central difference with
    /// step `1e-4 σ`.
    fn derivative(&self, x: f64) -> f64 {
        let h = 1e-4 * self.sigma();
        (self.amplitude(x - 2.0 * h) - 8.0 * self.amplitude(x - h) + 8.0 * self.amplitude(x + h)
            - self.amplitude(x + 2.0 * h))
            / (12.0 * h)
    }

    /// `Ψ''(0)`, the limit of `Ψ'(ξ)/ξ` at the origin.
    fn curvature_at_origin(&self) -> f64 {
        let h = 1e-3 * self.sigma();
        (-self.amplitude(-2.0 * h) + 16.0 * self.amplitude(-h) - 30.0 * self.amplitude(0.0) + 16.0 * self.amplitude(h)
            - self.amplitude(2.0 * h))
            / (12.0 * h * h)
    }

    /// `Some(σ)` when this PSF is the built-in Gaussian, enabling closed forms.
    fn gaussian_sigma(&self) -> Option<f64> {
        None
    }

    fn intensity(&self, x: f64) -> f64 {
        let a = self.amplitude(x);
        a * a
    }
}

/// `Ψ(x) = (2πσ²)^(-1/4) exp(-x²/(4σ²))`; the intensity has standard deviation σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPsf {
    sigma: f64,
    norm: f64,
}

impl GaussianPsf {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self {
            sigma,
            norm: (2.0 * PI * sigma * sigma).powf(-0.25),
        })
    }
}

impl AmplitudePsf for GaussianPsf {
    fn sigma(&self) -> f64 {
        self.sigma
    }

    fn amplitude(&self, x: f64) -> f64 {
        let u = x / self.sigma;
        self.norm * (-0.25 * u * u).exp()
    }

    fn derivative(&self, x: f64) -> f64 {
        -x / (2.0 * self.sigma * self.sigma) * self.amplitude(x)
    }

    fn curvature_at_origin(&self) -> f64 {
        -self.norm / (2.0 * self.sigma * self.sigma)
    }

    fn gaussian_sigma(&self) -> Option<f64> {
        Some(self.sigma)
    }
}

/// Shorthand for a shared Gaussian PSF.
pub fn gaussian_psf(sigma: f64) -> Result<Arc<dyn AmplitudePsf>> {
    Ok(Arc::new(GaussianPsf::new(sigma)?))
}

/// Whether the detection density follows direct imaging or the signum-filtered
/// 4f processor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityKind {
    Direct,
    SignumFiltered,
}

impl DensityKind {
    pub fn label(self) -> &'static str {
        match self {
            DensityKind::Direct => "direct",
            DensityKind::SignumFiltered => "sgn",
        }
    }
}

#[derive(Debug, Clone)]
enum Model {
    Direct,
    SignumGaussian { sigma: f64 },
    SignumNumeric(Arc<NumericSignum>),
}

/// Probability density `p(x|s)` of a photon arrival position for two equally
/// bright incoherent sources at `±s/2`.
#[derive(Debug, Clone)]
pub struct DetectionDensity {
    kind: DensityKind,
    psf: Arc<dyn AmplitudePsf>,
    separation: f64,
    model: Model,
}

impl DetectionDensity {
    pub(crate) fn signum_gaussian(psf: Arc<dyn AmplitudePsf>, sigma: f64, s: f64) -> Self {
        Self {
            kind: DensityKind::SignumFiltered,
            psf,
            separation: s,
            model: Model::SignumGaussian { sigma },
        }
    }

    pub(crate) fn signum_numeric(psf: Arc<dyn AmplitudePsf>, s: f64, numeric: NumericSignum) -> Self {
        Self {
            kind: DensityKind::SignumFiltered,
            psf,
            separation: s,
            model: Model::SignumNumeric(Arc::new(numeric)),
        }
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn psf(&self) -> &Arc<dyn AmplitudePsf> {
        &self.psf
    }

    pub fn sigma(&self) -> f64 {
        self.psf.sigma()
    }

    /// True when the signum density was built by the numeric Fourier-plane path.
    pub fn is_numeric(&self) -> bool {
        matches!(self.model, Model::SignumNumeric(_))
    }

    /// `p(x|s)`.
    pub fn value(&self, x: f64) -> f64 {
        let h = 0.5 * self.separation;
        match &self.model {
            Model::Direct => 0.5 * (self.psf.intensity(x - h) + self.psf.intensity(x + h)),
            Model::SignumGaussian { sigma } => filtered_mixture(x, self.separation, *sigma),
            Model::SignumNumeric(n) => n.density(x),
        }
    }

    /// Analytic `∂p/∂s` when the model provides one.
    pub fn ds(&self, x: f64) -> Option<f64> {
        let h = 0.5 * self.separation;
        match &self.model {
            Model::Direct => self.psf.gaussian_sigma().map(|sigma| direct_gaussian_ds(x, h, sigma)),
            Model::SignumGaussian { sigma } => Some(filtered_mixture_ds(x, self.separation, *sigma)),
            Model::SignumNumeric(_) => None,
        }
    }

    /// Total mass over the real line (should be 1).
    pub fn total_mass(&self) -> Result<f64> {
        let sig = self.sigma();
        let l = DOMAIN_HALF_WIDTH * sig;
        let h = 0.5 * self.separation;
        let mut pts = vec![f64::NEG_INFINITY, -l - h, -h, 0.0, h, l + h, f64::INFINITY];
        pts.dedup();
        let cfg = QuadConfig::with_tolerances(1e-15, 1e-13);
        Ok(integrate_pieces(|x| self.value(x), &pts, &cfg)?.value)
    }
}

/// A one-parameter family `s ↦ p(·|s)` for a fixed PSF and kind.
#[derive(Debug, Clone)]
pub struct DensityFamily {
    pub kind: DensityKind,
    pub psf: Arc<dyn AmplitudePsf>,
}

impl DensityFamily {
    pub fn new(kind: DensityKind, psf: Arc<dyn AmplitudePsf>) -> Self {
        Self { kind, psf }
    }

    pub fn gaussian(kind: DensityKind, sigma: f64) -> Result<Self> {
        Ok(Self::new(kind, gaussian_psf(sigma)?))
    }

    pub fn sigma(&self) -> f64 {
        self.psf.sigma()
    }

    pub fn at(&self, s: f64) -> Result<DetectionDensity> {
        match self.kind {
            DensityKind::Direct => direct_density(self.psf.clone(), s),
            DensityKind::SignumFiltered => crate::processor::sgn_density(self.psf.clone(), s),
        }
    }
}

/// `p(x|s) = ½[I(x - s/2) + I(x + s/2)]`.
pub fn direct_density(psf: Arc<dyn AmplitudePsf>, s: f64) -> Result<DetectionDensity> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("separation must be non-negative, got {s}")));
    }
    Ok(DetectionDensity {
        kind: DensityKind::Direct,
        psf,
        separation: s,
        model: Model::Direct,
    })
}

/// Coefficient `α = [∫ Ψ'(ξ)/ξ dξ]² / π²` of the parabolic signum-filtered
/// density near the origin. Closed form for the Gaussian, quadrature otherwise.
pub fn parabolic_alpha(psf: &dyn AmplitudePsf) -> Result<f64> {
    match psf.gaussian_sigma() {
        Some(sigma) => Ok((2.0 * PI.powi(3)).powf(-0.5) / sigma.powi(3)),
        None => parabolic_alpha_quadrature(psf),
    }
}

/// `α` by adaptive quadrature of `Ψ'(ξ)/ξ`, with `Ψ''(0)` substituted at `ξ = 0`.
pub fn parabolic_alpha_quadrature(psf: &dyn AmplitudePsf) -> Result<f64> {
    let sig = psf.sigma();
    let integrand = |xi: f64| {
        if xi == 0.0 {
            psf.curvature_at_origin()
        } else {
            psf.derivative(xi) / xi
        }
    };
    let l = DOMAIN_HALF_WIDTH * sig;
    let cfg = QuadConfig::with_tolerances(1e-15 / sig, 1e-12);
    let r = integrate_pieces(
        integrand,
        &[f64::NEG_INFINITY, -l, -sig, 0.0, sig, l, f64::INFINITY],
        &cfg,
    )
    .map_err(|e| match e {
        Error::Numerical { message, diagnostic } => Error::numerical(format!("parabolic_alpha: {message}"), diagnostic),
        other => other,
    })?;
    let alpha = r.value * r.value / (PI * PI);
    if !(alpha > 0.0) {
        return Err(Error::numerical(
            "parabolic_alpha: vanishing coefficient",
            format!("integral {}", r.value),
        ));
    }
    Ok(alpha)
}

/// `∂/∂s ½[I(x - h) + I(x + h)]` with `h = s/2` for the Gaussian intensity,
/// arranged as `I(x)e^{-h²/2σ²}[x sinh(xh/σ²) - h cosh(xh/σ²)] / (2σ²)` so
/// that small separations do not cancel.
fn direct_gaussian_ds(x: f64, h: f64, sigma: f64) -> f64 {
    let v = sigma * sigma;
    let c = 1.0 / (2.0 * PI * v).sqrt();
    let a = x * h / v;
    if a.abs() < 1.0 {
        c * (-(x * x + h * h) / (2.0 * v)).exp() * (x * a.sinh() - h * a.cosh()) / (2.0 * v)
    } else {
        let em = (-(x - h) * (x - h) / (2.0 * v)).exp();
        let ep = (-(x + h) * (x + h) / (2.0 * v)).exp();
        c * (x * 0.5 * (em - ep) - h * 0.5 * (em + ep)) / (2.0 * v)
    }
}

/// Prefactor `2√2 / (π^{3/2} σ)` of the Dawson-form intensity.
#[inline]
fn dawson_prefactor(sigma: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 / (PI.powf(1.5) * sigma)
}

/// `½[|Ψ₋|² + |Ψ₊|²]` for the Gaussian with `|Ψ±|² = 2√2 D((x ± s/2)/(2σ))² / (π^{3/2} σ)`.
pub(crate) fn filtered_mixture(x: f64, s: f64, sigma: f64) -> f64 {
    let c = dawson_prefactor(sigma);
    let dm = dawson_fast((x - 0.5 * s) / (2.0 * sigma));
    let dp = dawson_fast((x + 0.5 * s) / (2.0 * sigma));
    0.5 * c * (dm * dm + dp * dp)
}

/// `∂/∂s` of [`filtered_mixture`] via `D'(z) = 1 - 2zD(z)`.
pub(crate) fn filtered_mixture_ds(x: f64, s: f64, sigma: f64) -> f64 {
    let c = dawson_prefactor(sigma);
    let zm = (x - 0.5 * s) / (2.0 * sigma);
    let zp = (x + 0.5 * s) / (2.0 * sigma);
    let delta = s / (4.0 * sigma);
    // d z± / ds = ±1/(4σ); d(D²)/dz = 2DD' =: 2g.
    let diff = if delta < 1e-3 {
        // g(z+δ) - g(z-δ) by Taylor series about the midpoint, avoiding the
        // cancellation of the direct difference.
        let z = x / (2.0 * sigma);
        let d0 = dawson_fast(z);
        let d1 = 1.0 - 2.0 * z * d0;
        let d2 = -2.0 * d0 - 2.0 * z * d1;
        let d3 = -4.0 * d1 - 2.0 * z * d2;
        let d4 = -6.0 * d2 - 2.0 * z * d3;
        let d5 = -8.0 * d3 - 2.0 * z * d4;
        let g1 = d1 * d1 + d0 * d2;
        let g3 = 3.0 * d2 * d2 + 4.0 * d1 * d3 + d0 * d4;
        let g5 = 10.0 * d3 * d3 + 15.0 * d2 * d4 + 6.0 * d1 * d5 + d0 * (-10.0 * d4 - 2.0 * z * d5);
        2.0 * delta * (g1 + delta * delta * (g3 / 6.0 + delta * delta * g5 / 120.0))
    } else {
        let dm = dawson_fast(zm);
        let dp = dawson_fast(zp);
        dp * (1.0 - 2.0 * zp * dp) - dm * (1.0 - 2.0 * zm * dm)
    };
    c * diff / (4.0 * sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss1() -> Arc<dyn AmplitudePsf> {
        gaussian_psf(1.0).unwrap()
    }

    #[test]
    fn gaussian_value_at_origin() {
        let psf = GaussianPsf::new(1.0).unwrap();
        assert!((psf.amplitude(0.0) - (2.0 * PI).powf(-0.25)).abs() < 1e-15);
        assert!((psf.amplitude(0.0) - 0.631_618_78).abs() < 1e-8);
        assert_eq!(psf.amplitude(2.0), psf.amplitude(-2.0));
    }

    #[test]
    fn gaussian_rejects_bad_sigma() {
        assert!(GaussianPsf::new(0.0).is_err());
        assert!(GaussianPsf::new(-1.0).is_err());
        assert!(GaussianPsf::new(f64::NAN).is_err());
    }

    #[test]
    fn gaussian_unit_energy() {
        for &sig in &[0.5, 1.0, 3.0] {
            let psf = GaussianPsf::new(sig).unwrap();
            let cfg = QuadConfig::with_tolerances(1e-15, 1e-13);
            let e = crate::quad::integrate(|x| psf.intensity(x), f64::NEG_INFINITY, f64::INFINITY, &cfg)
                .unwrap()
                .value;
            assert!((e - 1.0).abs() < 1e-10, "sigma {sig}: {e}");
        }
    }

    #[test]
    fn default_derivative_matches_analytic() {
        #[derive(Debug)]
        struct Wrapped(GaussianPsf);
        impl AmplitudePsf for Wrapped {
            fn sigma(&self) -> f64 {
                self.0.sigma()
            }
            fn amplitude(&self, x: f64) -> f64 {
                self.0.amplitude(x)
            }
        }
        let g = GaussianPsf::new(1.3).unwrap();
        let w = Wrapped(g);
        for i in -40..=40 {
            let x = i as f64 * 0.1;
            assert!((w.derivative(x) - g.derivative(x)).abs() < 1e-12);
        }
        assert!((w.curvature_at_origin() - g.curvature_at_origin()).abs() < 1e-8);
    }

    #[test]
    fn direct_density_examples() {
        let psf = gauss1();
        let p0 = direct_density(psf.clone(), 0.0).unwrap();
        for i in -50..=50 {
            let x = i as f64 * 0.2;
            assert_eq!(p0.value(x), psf.intensity(x));
        }
        let p1 = direct_density(psf.clone(), 1.0).unwrap();
        let expect = (2.0 * PI).powf(-0.5) * (-0.125f64).exp();
        assert!((p1.value(0.0) - expect).abs() < 1e-15);
        assert!((p1.value(0.0) - 0.352_065).abs() < 1e-6);
        assert!(direct_density(psf, -0.1).is_err());
    }

    #[test]
    fn densities_have_unit_mass_and_parity() {
        let psf = gauss1();
        for &s in &[0.0, 0.05, 0.4, 2.0] {
            for kind in [DensityKind::Direct, DensityKind::SignumFiltered] {
                let d = DensityFamily::new(kind, psf.clone()).at(s).unwrap();
                let m = d.total_mass().unwrap();
                assert!((m - 1.0).abs() < 1e-8, "{kind:?} s={s}: mass {m}");
                for i in 0..200 {
                    let x = i as f64 * 0.06;
                    let (a, b) = (d.value(x), d.value(-x));
                    assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{kind:?} s={s} x={x}");
                    assert!(a >= 0.0);
                }
            }
        }
    }

    #[test]
    fn direct_mass_within_working_domain() {
        let psf = gauss1();
        for &s in &[0.0, 0.1, 1.0] {
            let d = direct_density(psf.clone(), s).unwrap();
            let cfg = QuadConfig::with_tolerances(1e-15, 1e-13);
            let m = crate::quad::integrate(|x| d.value(x), -12.0, 12.0, &cfg).unwrap().value;
            assert!((m - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn small_separation_expansion_is_fourth_order() {
        // p(x|s) - [I(x) + I''(x) s²/8] = O(s⁴)
        let psf = gauss1();
        let ipp = |x: f64| (x * x - 1.0) * psf.intensity(x);
        let resid = |s: f64, x: f64| {
            let d = direct_density(psf.clone(), s).unwrap();
            d.value(x) - (psf.intensity(x) + ipp(x) * s * s / 8.0)
        };
        for &x in &[0.0, 0.7, 1.5] {
            let ratio = resid(1e-2, x) / resid(1e-3, x);
            assert!((5e3..2e4).contains(&ratio), "x={x}: ratio {ratio}");
        }
    }

    #[test]
    fn alpha_gaussian_closed_form_and_scaling() {
        let a1 = parabolic_alpha(&GaussianPsf::new(1.0).unwrap()).unwrap();
        assert!((a1 - 0.126_987_27).abs() < 1e-8);
        let a2 = parabolic_alpha(&GaussianPsf::new(2.0).unwrap()).unwrap();
        assert!((a2 - a1 / 8.0).abs() < 1e-16);
    }

    #[test]
    fn alpha_quadrature_matches_closed_form() {
        for &sig in &[0.5, 1.0, 2.0] {
            let g = GaussianPsf::new(sig).unwrap();
            let q = parabolic_alpha_quadrature(&g).unwrap();
            let a = parabolic_alpha(&g).unwrap();
            assert!(((q - a) / a).abs() < 1e-8, "sigma {sig}: {q} vs {a}");
        }
    }

    #[test]
    fn signum_ds_matches_finite_difference() {
        let sig = 1.0;
        for &s in &[0.01, 0.2, 1.5] {
            let h = 1e-6;
            for i in -20..=20 {
                let x = i as f64 * 0.15;
                let fd = (filtered_mixture(x, s + h, sig) - filtered_mixture(x, s - h, sig)) / (2.0 * h);
                let an = filtered_mixture_ds(x, s, sig);
                assert!((fd - an).abs() < 1e-8, "s={s} x={x}: {fd} vs {an}");
            }
        }
    }
}
