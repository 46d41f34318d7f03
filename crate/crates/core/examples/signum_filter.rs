//! Pass two mutually incoherent Gaussian spots through the signum-mask 4f
//! processor and compare with the Dawson closed form.

use superres::processor::{filtered_intensity_gaussian, GridSpec, SampledField, SignumProcessor};
use superres::psf::{AmplitudePsf, GaussianPsf};

fn main() -> superres::Result<()> {
    let s = 0.2;
    let psf = GaussianPsf::new(1.0)?;
    let grid = GridSpec::default_for(1.0);
    let processor = SignumProcessor::new(1.0)?;

    // The sources are incoherent, so each component is filtered on its own
    // and the intensities add.
    let mut filtered = Vec::new();
    let mut energy_in = 0.0;
    let mut energy_out = 0.0;
    for c in [-s / 2.0, s / 2.0] {
        let field = SampledField::from_fn(grid, |x| psf.amplitude(x - c))?;
        let out = processor.filter(&field)?;
        energy_in += field.energy();
        energy_out += out.total_energy();
        filtered.push(out);
    }

    println!("s = {s}σ; intensity per source (mean of both components)");
    println!("{:>6} {:>16} {:>16} {:>10}", "x", "numeric", "closed form", "abs err");
    for x in [-3.0, -1.0, -0.3, -0.05, 0.0, 0.05, 0.3, 1.0, 3.0, 25.0] {
        let numeric = 0.5 * filtered.iter().map(|f| f.value_at(x).norm_sqr()).sum::<f64>();
        let exact = filtered_intensity_gaussian(x, s, 1.0)?;
        println!(
            "{x:>6} {numeric:>16.10e} {exact:>16.10e} {:>10.1e}",
            (numeric - exact).abs()
        );
    }
    println!(
        "\nenergy before {energy_in:.12}, after {energy_out:.12} (relative change {:.1e})",
        energy_out / energy_in - 1.0
    );
    Ok(())
}
