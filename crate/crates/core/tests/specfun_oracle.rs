use proptest::prelude::*;
use superres::quad::{integrate, QuadConfig};
use superres::specfun::{dawson, dawson_derivative};

/// `D(z) = ∫₀^z exp((t - z)(t + z)) dt`, integrated directly.
fn dawson_by_definition(z: f64) -> f64 {
    let cfg = QuadConfig::with_tolerances(1e-17, 1e-13);
    integrate(|t| ((t - z) * (t + z)).exp(), 0.0, z, &cfg).unwrap().value
}

/// Alternating Maclaurin series `Σ (-2)ⁿ z^{2n+1} / (2n+1)!!`.
fn dawson_maclaurin(z: f64) -> f64 {
    let mut term = z;
    let mut sum = z;
    for n in 1..60 {
        term *= -2.0 * z * z / (2 * n + 1) as f64;
        sum += term;
    }
    sum
}

#[test]
fn small_argument_series() {
    for i in 0..=50 {
        let z = -0.5 + i as f64 * 0.02;
        let d = dawson(z).unwrap();
        assert!((d - dawson_maclaurin(z)).abs() <= 1e-15, "z={z}");
    }
}

#[test]
fn quadrature_oracle_on_half_to_ten() {
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let z = 0.5 + 9.5 * i as f64 / 999.0;
        let exact = dawson_by_definition(z);
        worst = worst.max((dawson(z).unwrap() - exact).abs() / exact);
    }
    assert!(worst < 1e-12, "worst relative error {worst:e}");
}

#[test]
fn large_argument_expansion() {
    for z in [30.0, 100.0, 1e4, 1e8] {
        let u = 1.0 / (2.0 * z * z);
        let asym = (1.0 + u * (1.0 + 3.0 * u * (1.0 + 5.0 * u * (1.0 + 7.0 * u)))) / (2.0 * z);
        let d = dawson(z).unwrap();
        assert!((d / asym - 1.0).abs() < 1e-13, "z={z}");
    }
}

#[test]
fn maximum_location_and_height() {
    let (mut a, mut b) = (0.5f64, 1.5f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-10 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if dawson(c).unwrap() > dawson(d).unwrap() {
            b = d;
        } else {
            a = c;
        }
    }
    let z = 0.5 * (a + b);
    assert!((0.92..=0.93).contains(&z), "{z}");
    let peak = dawson(z).unwrap();
    assert!((0.54..=0.55).contains(&peak));
    assert!((peak - 0.541_044_224_635_181_7).abs() < 1e-15);

    // The flat top limits golden section to about √ε; the root of D' pins it down.
    let (mut lo, mut hi) = (0.9f64, 0.95f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dawson_derivative(mid).unwrap() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lo - 0.924_138_873_004_591_8).abs() < 1e-13, "{lo}");
    assert!((z - lo).abs() < 1e-6);
}

proptest! {
    #[test]
    fn odd_symmetry(z in -50.0f64..50.0) {
        prop_assert_eq!(dawson(-z).unwrap(), -dawson(z).unwrap());
    }

    #[test]
    fn derivative_identity_matches_differences(z in -8.0f64..8.0) {
        let h = 1e-4;
        let fd = (dawson(z + h).unwrap() - dawson(z - h).unwrap()) / (2.0 * h);
        prop_assert!((dawson_derivative(z).unwrap() - fd).abs() < 1e-8);
    }

    #[test]
    fn bounded_by_peak(z in -1e6f64..1e6) {
        prop_assert!(dawson(z).unwrap().abs() <= 0.5410442247);
    }
}

#[test]
fn non_finite_rejected() {
    assert!(dawson(f64::NAN).is_err());
    assert!(dawson(f64::INFINITY).is_err());
}
