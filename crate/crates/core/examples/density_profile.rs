//! Where the information lives: detection density and Fisher integrand
//! across the image plane for both imaging modes.

use superres::fisher::{information_fraction_within, FisherDensity};
use superres::psf::{DensityFamily, DensityKind};

fn main() -> superres::Result<()> {
    let s = 0.2;
    for kind in [DensityKind::Direct, DensityKind::SignumFiltered] {
        let fam = DensityFamily::gaussian(kind, 1.0)?;
        let fd = FisherDensity::new(&fam, s, s * 1e-3)?;
        println!("{} imaging, s = {s}σ", kind.label());
        println!("{:>6} {:>14} {:>14}", "x", "p(x|s)", "fisher dens.");
        for i in -8..=8 {
            let x = 0.25 * i as f64;
            println!("{x:>6} {:>14.6e} {:>14.6e}", fd.density().value(x), fd.at(x));
        }
        for r in [s, 0.5, 1.0] {
            println!(
                "  share of information within |x| <= {r}: {:.3}",
                information_fraction_within(&fam, s, r)?
            );
        }
        println!();
    }
    Ok(())
}
