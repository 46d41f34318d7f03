//! A non-Gaussian amplitude PSF goes through the numeric Hilbert transform
//! instead of the closed form. Here a hyperbolic-secant profile.

use std::sync::Arc;

use superres::fisher::fisher_continuous;
use superres::fisher::linear_law_slope;
use superres::psf::{parabolic_alpha, AmplitudePsf, DensityFamily, DensityKind};

#[derive(Debug)]
struct SechPsf {
    width: f64,
}

impl AmplitudePsf for SechPsf {
    fn sigma(&self) -> f64 {
        self.width
    }

    fn amplitude(&self, x: f64) -> f64 {
        // ∫ sech²(x/w) dx = 2w.
        1.0 / ((x / self.width).cosh() * (2.0 * self.width).sqrt())
    }
}

fn main() -> superres::Result<()> {
    let psf: Arc<dyn AmplitudePsf> = Arc::new(SechPsf { width: 0.8 });
    let alpha = parabolic_alpha(psf.as_ref())?;
    println!("α = {alpha:.8}, linear-law slope λ = {:.8}", linear_law_slope(alpha));

    let direct = DensityFamily::new(DensityKind::Direct, psf.clone());
    let sgn = DensityFamily::new(DensityKind::SignumFiltered, psf);
    println!("{:>6} {:>12} {:>12} {:>10}", "s", "F_direct", "F_sgn", "F_sgn/λs");
    for s in [0.02, 0.05, 0.1, 0.3] {
        let fd = fisher_continuous(&direct, s, s * 1e-2)?.value;
        let fs = fisher_continuous(&sgn, s, s * 1e-2)?.value;
        println!(
            "{s:>6} {fd:>12.5e} {fs:>12.5e} {:>10.4}",
            fs / (linear_law_slope(alpha) * s)
        );
    }
    Ok(())
}
