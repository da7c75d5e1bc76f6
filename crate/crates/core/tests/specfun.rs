use edgedist::quadrature::GaussLegendre;
use edgedist::specfun::{airy, airy_kernel, airy_tail_integral, kernel_diagonal};
use proptest::prelude::*;

/// `∫_0^∞ Ai(x + z) Ai(y + z) dz`, the integral form of the Airy kernel.
fn kernel_by_quadrature(x: f64, y: f64) -> f64 {
    let rule = GaussLegendre::new(40);
    (0..30)
        .map(|k| {
            let a = k as f64;
            rule.integrate(a, a + 1.0, |z| airy(x + z).unwrap().ai * airy(y + z).unwrap().ai)
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn kernel_matches_its_integral_form(x in -6.0f64..6.0, y in -6.0f64..6.0) {
        let closed = airy_kernel(x, y).unwrap();
        let quad = kernel_by_quadrature(x, y);
        prop_assert!((closed - quad).abs() <= 1e-10, "K({x}, {y}) = {closed:e} vs {quad:e}");
    }

    #[test]
    fn kernel_is_symmetric(x in -10.0f64..10.0, y in -10.0f64..10.0) {
        prop_assert_eq!(airy_kernel(x, y).unwrap(), airy_kernel(y, x).unwrap());
    }
}

#[test]
fn diagonal_matches_integral_form() {
    for x in [-4.0, -1.0, 0.0, 2.5] {
        let d = kernel_diagonal(x, airy(x).unwrap());
        assert!((d - kernel_by_quadrature(x, x)).abs() <= 1e-10, "x = {x}");
    }
    // K(0, 0) = Ai'(0)².
    let k00 = airy_kernel(0.0, 0.0).unwrap();
    assert!((k00 - 0.066987483779664).abs() <= 1e-12, "{k00}");
}

#[test]
fn tail_integral_at_zero() {
    assert!((airy_tail_integral(0.0).unwrap() - 1.0 / 3.0).abs() <= 1e-13);
}
