//! The 4f coherent processor with a signum mask in the Fourier plane.
//!
//! A sampled field is treated as its band-limited (sinc) interpolant. The
//! processor multiplies the continuous spectrum of that interpolant by
//! `-i·sgn(f)`, which is the Hilbert transform
//! `(Hψ)(x) = (1/π) p.v.∫ ψ(x')/(x - x') dx'`. On the sample grid this is the
//! discrete kernel `2/(π k)` for odd `k` (zero for even `k`), applied as a
//! linear convolution through a 2×-zero-padded FFT so that nothing wraps
//! around. The same kernel evaluated off-grid gives the filtered field at any
//! position, and a multipole expansion of the input gives its `1/x` far field.
//!
//! Phase convention: outputs are `Hψ`, so a real even input gives a real odd
//! output and applying the mask twice yields `-ψ`. The experiment only sees
//! intensities, which do not depend on the global phase.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::psf::{AmplitudePsf, DetectionDensity};
use crate::specfun::dawson_fast;

/// Smallest supported number of samples.
pub const MIN_SAMPLES: usize = 1024;

/// Number of input moments kept for the far-field expansion.
const FAR_FIELD_ORDER: usize = 10;

/// Largest renormalization accepted by the numeric signum density.
pub const MAX_MASS_CORRECTION: f64 = 1e-4;

/// Uniform sampling grid: `M` points, step `h`, first point at `-(M/2)·h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub samples: usize,
    pub step: f64,
}

impl GridSpec {
    /// 4096 samples at `σ/64`.
    pub fn default_for(sigma: f64) -> Self {
        Self {
            samples: 4096,
            step: sigma / 64.0,
        }
    }

    pub fn grid_min(&self) -> f64 {
        -((self.samples / 2) as f64) * self.step
    }

    fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES || !self.samples.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid needs a power-of-two sample count >= {MIN_SAMPLES}, got {}",
                self.samples
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("grid step must be positive, got {}", self.step)));
        }
        Ok(())
    }
}

/// Complex amplitudes on a symmetric uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid_min: f64,
    grid_step: f64,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid_min: f64, grid_step: f64, values: Vec<Complex64>) -> Result<Self> {
        let spec = GridSpec {
            samples: values.len(),
            step: grid_step,
        };
        spec.validate()?;
        let expect = spec.grid_min();
        if (grid_min - expect).abs() > 1e-12 * expect.abs() {
            return Err(Error::Config(format!(
                "grid must be symmetric: grid_min {grid_min} != -(M/2)·step = {expect}"
            )));
        }
        Ok(Self {
            grid_min: expect,
            grid_step,
            values,
        })
    }

    /// Sample a real function on `grid`.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        grid.validate()?;
        let x0 = grid.grid_min();
        let values = (0..grid.samples)
            .map(|n| Complex64::new(f(x0 + n as f64 * grid.step), 0.0))
            .collect();
        Self::new(x0, grid.step, values)
    }

    pub fn zeros(grid: GridSpec) -> Result<Self> {
        Self::from_fn(grid, |_| 0.0)
    }

    pub fn grid_min(&self) -> f64 {
        self.grid_min
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn position(&self, n: usize) -> f64 {
        self.grid_min + n as f64 * self.grid_step
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|n| self.position(n))
    }

    /// `Σ |ψ_n|² h`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid_step
    }

    pub fn intensities(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    fn same_grid(&self, values: Vec<Complex64>) -> Self {
        Self {
            grid_min: self.grid_min,
            grid_step: self.grid_step,
            values,
        }
    }
}

/// The Fourier-plane rule `sgn(f)`, with `sgn(0) = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SignumMask;

impl SignumMask {
    pub fn response(&self, freq: f64) -> f64 {
        if freq > 0.0 {
            1.0
        } else if freq < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    /// Mask value on DFT bin `k` of an `n`-point transform. The DC bin and,
    /// for even `n`, the Nyquist bin (its own mirror image) are zero.
    pub fn bin_response(&self, k: usize, n: usize) -> f64 {
        if k == 0 || 2 * k == n {
            0.0
        } else if k < n.div_ceil(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Apply `-i·sgn` bin by bin on the periodic DFT of the field, without
    /// padding. This is the discrete periodic Hilbert transform: it conserves
    /// energy exactly except for the DC and Nyquist content and is an
    /// anti-involution on the remaining bins.
    pub fn apply_periodic(&self, field: &SampledField) -> SampledField {
        let n = field.len();
        let mut planner = FftPlanner::<f64>::new();
        let mut buf = field.values.clone();
        planner.plan_fft_forward(n).process(&mut buf);
        for (k, v) in buf.iter_mut().enumerate() {
            *v *= Complex64::new(0.0, -self.bin_response(k, n));
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
        field.same_grid(buf)
    }
}

/// Signum-mask processor for fields that resolve features of width `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignumProcessor {
    sigma: f64,
}

impl SignumProcessor {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { sigma })
    }

    fn check_grid(&self, field: &SampledField) -> Result<()> {
        if field.grid_step > self.sigma / 8.0 {
            return Err(Error::Config(format!(
                "grid step {} exceeds sigma/8 = {} (aliasing guard)",
                field.grid_step,
                self.sigma / 8.0
            )));
        }
        Ok(())
    }

    /// Filtered field on the input grid.
    pub fn apply(&self, field: &SampledField) -> Result<SampledField> {
        self.check_grid(field)?;
        let m = field.len();
        let l = 2 * m;
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(l);
        let inv = planner.plan_fft_inverse(l);

        let mut kernel = vec![Complex64::new(0.0, 0.0); l];
        for k in (1..m).step_by(2) {
            let v = 2.0 / (PI * k as f64);
            kernel[k] = Complex64::new(v, 0.0);
            kernel[l - k] = Complex64::new(-v, 0.0);
        }
        fwd.process(&mut kernel);

        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        buf[..m].copy_from_slice(&field.values);
        fwd.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&kernel) {
            *b *= *k;
        }
        inv.process(&mut buf);
        let scale = 1.0 / l as f64;
        let out = buf[..m].iter().map(|v| v * scale).collect();
        Ok(field.same_grid(out))
    }

    /// Filtered field on the grid plus an evaluator valid on the whole line.
    pub fn filter(&self, field: &SampledField) -> Result<FilteredField> {
        let window = self.apply(field)?;
        Ok(FilteredField::new(field, window))
    }
}

/// `H ψ` for a sampled `ψ`: grid values plus off-grid and far-field evaluation.
#[derive(Debug, Clone)]
pub struct FilteredField {
    window: SampledField,
    // Non-negligible input samples as (grid offset j = n - M/2, value).
    support: Vec<(f64, Complex64)>,
    moments: Vec<Complex64>,
    far_radius: f64,
}

impl FilteredField {
    fn new(input: &SampledField, window: SampledField) -> Self {
        let h = input.grid_step;
        let half = (input.len() / 2) as f64;
        let peak = input.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let support: Vec<(f64, Complex64)> = input
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > 1e-20 * peak)
            .map(|(n, v)| (n as f64 - half, *v))
            .collect();
        let moments = (0..FAR_FIELD_ORDER)
            .map(|k| {
                support
                    .iter()
                    .map(|(j, v)| v * (j * h).powi(k as i32))
                    .sum::<Complex64>()
                    * h
            })
            .collect();
        Self {
            window,
            support,
            moments,
            far_radius: 2.0 * half * h,
        }
    }

    pub fn window(&self) -> &SampledField {
        &self.window
    }

    /// `(Hψ)(x)` for any real `x`.
    pub fn value_at(&self, x: f64) -> Complex64 {
        if x.abs() > self.far_radius {
            return self.far_field(x);
        }
        let h = self.window.grid_step;
        let t = x / h;
        let c = (PI * t).cos();
        let mut acc = Complex64::new(0.0, 0.0);
        for &(j, v) in &self.support {
            let u = t - j;
            if u == 0.0 {
                continue;
            }
            // cos(π(t - j)) = (-1)^j cos(πt)
            let cj = if (j as i64) & 1 == 0 { c } else { -c };
            acc += v * ((1.0 - cj) / (PI * u));
        }
        acc
    }

    /// Multipole expansion `(1/π) Σ μ_k / x^(k+1)`, valid far outside the input support.
    pub fn far_field(&self, x: f64) -> Complex64 {
        let inv = 1.0 / x;
        let mut p = inv;
        let mut acc = Complex64::new(0.0, 0.0);
        for mu in &self.moments {
            acc += mu * p;
            p *= inv;
        }
        acc / PI
    }

    /// `∫ |Hψ|² dx` over the whole line: grid sum plus analytic far-field tails.
    pub fn total_energy(&self) -> f64 {
        let w = &self.window;
        let h = w.grid_step;
        let inner = w.energy();
        let left = -(w.position(0) - 0.5 * h); // tail is (-∞, -left]
        let right = w.position(w.len() - 1) + 0.5 * h;
        let mut tails = 0.0;
        for (j, mj) in self.moments.iter().enumerate() {
            for (k, mk) in self.moments.iter().enumerate() {
                let c = (mj * mk.conj()).re;
                let p = (j + k + 1) as f64;
                let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
                tails += c / p * (right.powf(-p) + sign * left.powf(-p));
            }
        }
        inner + tails / (PI * PI)
    }
}

/// Filtered field on the input grid with the default processor for width `sigma`.
pub fn apply_signum(field: &SampledField, sigma: f64) -> Result<SampledField> {
    SignumProcessor::new(sigma)?.apply(field)
}

/// `½[|Ψ₋|² + |Ψ₊|²]` for the Gaussian PSF, with
/// `|Ψ±(x, s)|² = 2√2 D((x ± s/2)/(2σ))² / (π^{3/2} σ)`.
pub fn filtered_intensity_gaussian(x: f64, s: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    if !x.is_finite() || !s.is_finite() {
        return Err(Error::Domain(format!("non-finite argument x={x}, s={s}")));
    }
    Ok(crate::psf::filtered_mixture(x, s, sigma))
}

/// Intensity `|Hψ|²` of a single centred Gaussian component.
pub fn gaussian_component_intensity(x: f64, sigma: f64) -> f64 {
    let d = dawson_fast(x / (2.0 * sigma));
    2.0 * SQRT_2 * d * d / (PI.powf(1.5) * sigma)
}

/// Numeric signum-filtered density: two filtered, displaced PSF copies.
#[derive(Debug, Clone)]
pub struct NumericSignum {
    minus: FilteredField,
    plus: FilteredField,
    norm: f64,
    mass_correction: f64,
}

impl NumericSignum {
    pub(crate) fn density(&self, x: f64) -> f64 {
        0.5 * self.norm * (self.minus.value_at(x).norm_sqr() + self.plus.value_at(x).norm_sqr())
    }

    pub fn mass_correction(&self) -> f64 {
        self.mass_correction
    }
}

/// Signum-filtered detection density. Gaussian PSFs use the closed Dawson
/// form; any other PSF goes through the numeric processor on the default grid.
pub fn sgn_density(psf: Arc<dyn AmplitudePsf>, s: f64) -> Result<DetectionDensity> {
    check_separation(s)?;
    match psf.gaussian_sigma() {
        Some(sigma) => Ok(DetectionDensity::signum_gaussian(psf, sigma, s)),
        None => {
            let grid = GridSpec::default_for(psf.sigma());
            sgn_density_numeric(psf, s, grid)
        }
    }
}

/// Signum-filtered density built by filtering `Ψ(x ∓ s/2)` on `grid`,
/// renormalized by its whole-line mass.
pub fn sgn_density_numeric(psf: Arc<dyn AmplitudePsf>, s: f64, grid: GridSpec) -> Result<DetectionDensity> {
    check_separation(s)?;
    let proc = SignumProcessor::new(psf.sigma())?;
    let h = 0.5 * s;
    let minus = proc.filter(&SampledField::from_fn(grid, |x| psf.amplitude(x - h))?)?;
    let plus = proc.filter(&SampledField::from_fn(grid, |x| psf.amplitude(x + h))?)?;
    let mass = 0.5 * (minus.total_energy() + plus.total_energy());
    let correction = (mass - 1.0).abs();
    if !(correction <= MAX_MASS_CORRECTION) {
        return Err(Error::numerical(
            "signum density needs a mass correction beyond tolerance (grid inadequate)",
            format!("mass {mass}, correction {correction:e} > {MAX_MASS_CORRECTION:e}"),
        ));
    }
    let numeric = NumericSignum {
        minus,
        plus,
        norm: 1.0 / mass,
        mass_correction: correction,
    };
    Ok(DetectionDensity::signum_numeric(psf, s, numeric))
}

fn check_separation(s: f64) -> Result<()> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("separation must be non-negative, got {s}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psf::{gaussian_psf, GaussianPsf};

    fn gaussian_field(grid: GridSpec, center: f64) -> SampledField {
        let g = GaussianPsf::new(1.0).unwrap();
        SampledField::from_fn(grid, |x| g.amplitude(x - center)).unwrap()
    }

    #[test]
    fn mask_rule() {
        let m = SignumMask;
        assert_eq!(m.response(0.0), 0.0);
        for &f in &[1e-9, 0.3, 7.0] {
            assert_eq!(m.response(f), 1.0);
            assert_eq!(m.response(-f), -1.0);
        }
        for n in [8usize, 9] {
            assert_eq!(m.bin_response(0, n), 0.0);
            for k in 1..n {
                assert_eq!(m.bin_response(k, n), -m.bin_response(n - k, n), "n={n} k={k}");
            }
        }
        assert_eq!(m.bin_response(4, 8), 0.0);
    }

    #[test]
    fn field_invariants() {
        let bad = GridSpec {
            samples: 1000,
            step: 0.01,
        };
        assert!(SampledField::zeros(bad).is_err());
        let small = GridSpec {
            samples: 512,
            step: 0.01,
        };
        assert!(SampledField::zeros(small).is_err());
        let vals = vec![Complex64::new(0.0, 0.0); 1024];
        assert!(SampledField::new(-5.0, 0.01, vals.clone()).is_err());
        assert!(SampledField::new(-5.12, 0.01, vals).is_ok());
    }

    #[test]
    fn zero_in_zero_out() {
        let f = SampledField::zeros(GridSpec::default_for(1.0)).unwrap();
        let out = apply_signum(&f, 1.0).unwrap();
        assert!(out.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn coarse_grid_rejected() {
        let f = SampledField::zeros(GridSpec {
            samples: 1024,
            step: 0.2,
        })
        .unwrap();
        assert!(matches!(apply_signum(&f, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn gaussian_matches_dawson_form() {
        let grid = GridSpec::default_for(1.0);
        let out = apply_signum(&gaussian_field(grid, 0.0), 1.0).unwrap();
        let mut worst = 0.0f64;
        for (n, x) in out.positions().enumerate() {
            if x.abs() <= 4.0 {
                let err = (out.values()[n].norm_sqr() - gaussian_component_intensity(x, 1.0)).abs();
                worst = worst.max(err);
            }
        }
        assert!(worst < 1e-6, "max intensity error {worst:e}");
        // Real odd output; dark at the component centre.
        let mid = grid.samples / 2;
        assert!(out.values()[mid].norm() < 1e-14);
        assert!(out.values().iter().all(|v| v.im.abs() < 1e-14));
    }

    #[test]
    fn periodic_mask_twice_is_negative_identity() {
        let f = gaussian_field(
            GridSpec {
                samples: 1024,
                step: 1.0 / 32.0,
            },
            0.3,
        );
        let twice = SignumMask.apply_periodic(&SignumMask.apply_periodic(&f));
        let n = f.len() as f64;
        let mean: Complex64 = f.values().iter().sum::<Complex64>() / n;
        let nyq: Complex64 = f
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| if k % 2 == 0 { *v } else { -v })
            .sum::<Complex64>()
            / n;
        for (k, (a, b)) in twice.values().iter().zip(f.values()).enumerate() {
            let alt = if k % 2 == 0 { nyq } else { -nyq };
            let expect = -(b - mean - alt);
            assert!((a - expect).norm() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn periodic_mask_energy_loss_is_dc_and_nyquist() {
        let f = gaussian_field(
            GridSpec {
                samples: 2048,
                step: 1.0 / 32.0,
            },
            -0.7,
        );
        let out = SignumMask.apply_periodic(&f);
        let n = f.len() as f64;
        let h = f.grid_step();
        let dc = f.values().iter().sum::<Complex64>().norm_sqr() / n * h;
        let nyq = f
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| if k % 2 == 0 { *v } else { -v })
            .sum::<Complex64>()
            .norm_sqr()
            / n
            * h;
        let change = f.energy() - out.energy();
        assert!((change - dc - nyq).abs() < 1e-13, "{change} vs {dc}+{nyq}");
    }

    #[test]
    fn off_grid_evaluator_agrees_with_fft() {
        let grid = GridSpec::default_for(1.0);
        let ff = SignumProcessor::new(1.0)
            .unwrap()
            .filter(&gaussian_field(grid, 0.2))
            .unwrap();
        let w = ff.window();
        for n in (0..w.len()).step_by(97) {
            let x = w.position(n);
            assert!((ff.value_at(x) - w.values()[n]).norm() < 1e-13, "x={x}");
        }
        // Off-grid against the closed form of the shifted Gaussian.
        let g = |x: f64| {
            let d = dawson_fast((x - 0.2) / 2.0);
            (2.0 / PI.sqrt()) * (2.0 * PI).powf(-0.25) * d
        };
        for i in 0..400 {
            let x = -10.0 + i as f64 * 0.0513;
            assert!((ff.value_at(x).re - g(x)).abs() < 1e-12, "x={x}");
        }
        for &x in &[70.0, -150.0, 1e4] {
            assert!(((ff.value_at(x).re - g(x)) / g(x)).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn energy_is_conserved_on_the_whole_line() {
        for &c in &[0.0, 0.05, -0.2, 1.0] {
            let f = gaussian_field(GridSpec::default_for(1.0), c);
            let ff = SignumProcessor::new(1.0).unwrap().filter(&f).unwrap();
            let rel = (ff.total_energy() - f.energy()).abs() / f.energy();
            assert!(rel < 1e-6, "centre {c}: {rel:e}");
        }
    }

    #[test]
    fn numeric_density_matches_closed_form() {
        #[derive(Debug)]
        struct Opaque(GaussianPsf);
        impl AmplitudePsf for Opaque {
            fn sigma(&self) -> f64 {
                self.0.sigma()
            }
            fn amplitude(&self, x: f64) -> f64 {
                self.0.amplitude(x)
            }
        }
        let opaque: Arc<dyn AmplitudePsf> = Arc::new(Opaque(GaussianPsf::new(1.0).unwrap()));
        let numeric = sgn_density(opaque, 0.4).unwrap();
        assert!(numeric.is_numeric());
        let analytic = sgn_density(gaussian_psf(1.0).unwrap(), 0.4).unwrap();
        assert!(!analytic.is_numeric());
        let mut worst = 0.0f64;
        for i in 0..=800 {
            let x = -8.0 + i as f64 * 0.02;
            worst = worst.max((numeric.value(x) - analytic.value(x)).abs());
        }
        assert!(worst < 1e-6, "{worst:e}");
    }

    #[test]
    fn filtered_intensity_examples() {
        assert_eq!(filtered_intensity_gaussian(0.0, 0.0, 1.0).unwrap(), 0.0);
        let v = filtered_intensity_gaussian(0.0, 0.2, 1.0).unwrap();
        let d = dawson_fast(0.05);
        assert!((v - 2.0 * SQRT_2 / PI.powf(1.5) * d * d).abs() < 1e-18);
        // 2√2/π^{3/2} · D(0.05)², D(0.05) = 0.04991674994...
        assert!((v - 1.265_647_56e-3).abs() < 1e-11, "{v}");
        assert!(filtered_intensity_gaussian(0.0, 0.2, 0.0).is_err());
    }

    #[test]
    fn parabolic_shape_near_origin() {
        let alpha = crate::psf::parabolic_alpha(&GaussianPsf::new(1.0).unwrap()).unwrap();
        let d = sgn_density(gaussian_psf(1.0).unwrap(), 0.05).unwrap();
        for i in 0..=10 {
            let x = i as f64 * 0.005;
            let approx = alpha * (x * x + 0.05 * 0.05 / 4.0);
            let rel = (d.value(x) - approx).abs() / d.value(x);
            assert!(rel < 0.01, "x={x}: {rel}");
        }
    }
}
