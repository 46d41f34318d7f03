//! The calibration-curve estimator against the Cramér-Rao bounds over a
//! Monte Carlo campaign with the experiment's parameters.

use superres::camera::{scan_seed, simulate_batch, CameraConfig};
use superres::estimator::{evaluate_estimator, model_calibration};
use superres::fisher::{crlb, fisher_continuous, fisher_pixelated};
use superres::psf::{DensityFamily, DensityKind};

fn main() -> superres::Result<()> {
    let sgn = DensityFamily::gaussian(DensityKind::SignumFiltered, 1.0)?;
    let direct = DensityFamily::gaussian(DensityKind::Direct, 1.0)?;
    let camera = CameraConfig::experiment();
    let n = camera.mean_detections as u64;
    let grid = [0.042, 0.06, 0.1, 0.14, 0.18];

    let cal = model_calibration(&sgn, &camera, &grid)?;
    println!(
        "calibration: n = {:.3} + {:.2}·s²  (rms residual {:.2e})\n",
        cal.a, cal.b, cal.residual_rms
    );
    println!(
        "{:>6} {:>9} {:>9} {:>11} {:>11} {:>11} {:>7}",
        "s", "mean ŝ", "bias/SE", "variance", "CRLB pix", "CRLB dir", "gain"
    );
    for (i, &s) in grid.iter().enumerate() {
        let seeds: Vec<u64> = (0..200).map(|k| scan_seed(1, i as u64, k)).collect();
        let scans = simulate_batch(&sgn.at(s)?, &camera, &seeds)?;
        let st = evaluate_estimator(&scans, &cal, 1)?;
        let pix = crlb(&fisher_pixelated(&sgn, s, &camera, s * 1e-3)?, n)?.variance_bound;
        let dir = crlb(&fisher_continuous(&direct, s, s * 1e-3)?, n)?.variance_bound;
        println!(
            "{s:>6} {:>9.5} {:>9.2} {:>11.3e} {pix:>11.3e} {dir:>11.3e} {:>7.2}",
            st.mean_estimate,
            st.bias / st.standard_error(),
            st.variance,
            dir / st.variance
        );
    }
    Ok(())
}
