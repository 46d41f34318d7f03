//! Dawson's integral, the Hilbert transform of a Gaussian.
//!
//! Run with `cargo run --example dawson`.

use superres::specfun::{dawson, dawson_derivative};

fn main() -> superres::Result<()> {
    println!("{:>6} {:>20} {:>20}", "z", "D(z)", "D'(z)");
    for z in [0.0, 0.25, 0.5, 0.924_138_873, 1.5, 2.0, 4.0, 6.0, 10.0, 100.0] {
        println!("{z:>6} {:>20.15} {:>20.15}", dawson(z)?, dawson_derivative(z)?);
    }

    // D peaks where its derivative 1 - 2zD vanishes.
    let (mut lo, mut hi) = (0.5, 1.5);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dawson_derivative(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    println!("\nmaximum D({lo:.12}) = {:.12}", dawson(lo)?);
    println!("large z: 2z·D(z) at z = 1e6 is {:.12}", 2e6 * dawson(1e6)?);
    Ok(())
}
