use std::sync::OnceLock;

use edgedist::dist::{cdf_value, d2_jet, Beta};
use edgedist::oracle::{nystrom_d2, nystrom_d4, nystrom_d4_lambda, QuadratureRule, DEFAULT_MAP_SCALE};
use edgedist::painleve::{solve, solve_at_lambda, PainleveSolution, SolverConfig};
use edgedist::Error;
use proptest::prelude::*;

fn sol() -> &'static PainleveSolution {
    static SOL: OnceLock<PainleveSolution> = OnceLock::new();
    SOL.get_or_init(|| solve(&SolverConfig::default()).expect("default solve"))
}

#[test]
fn fredholm_and_painleve_agree_at_lambda_one() {
    for s in [-6.0, -4.0, -2.0, 0.0, 2.0, 4.0] {
        let a = nystrom_d2(s, 1.0, 200).unwrap();
        let b = d2_jet(s, sol()).unwrap().value();
        assert!((a - b).abs() <= 1e-8, "s = {s}: {a:e} vs {b:e}");
    }
}

#[test]
fn fredholm_and_painleve_agree_at_half_lambda() {
    for s in [-6.0, -4.0, -2.0, 0.0, 2.0, 4.0] {
        let a = nystrom_d2(s, 0.5, 200).unwrap();
        let b = solve_at_lambda(0.5, sol().config()).unwrap().d2(s).unwrap();
        assert!((a - b).abs() <= 1e-6, "s = {s}: {a:e} vs {b:e}");
    }
}

#[test]
fn gse_determinant_agrees_with_painleve() {
    for s in [-2.0, 0.0] {
        let a = nystrom_d4(s, 200).unwrap();
        let ints = sol().integrals_at(s).unwrap();
        let b = (-ints.i.value()).exp() * (0.5 * ints.j.value()).cosh().powi(2);
        assert!((a - b).abs() <= 1e-6, "s = {s}");
        let f4 = cdf_value(Beta::Four, 1, s, sol()).unwrap();
        assert!((a.sqrt() - f4).abs() <= 1e-6, "s = {s}");
    }
    assert!((nystrom_d4(6.0, 200).unwrap() - 1.0).abs() <= 1e-6);
}

#[test]
fn gse_lambda_family_reduces_at_the_ends() {
    assert_eq!(nystrom_d4_lambda(-1.0, 0.0, 50).unwrap(), 1.0);
    let a = nystrom_d4_lambda(-1.0, 1.0, 200).unwrap();
    let b = nystrom_d4(-1.0, 200).unwrap();
    assert!((a - b).abs() <= 1e-14);
}

#[test]
fn doubling_the_nodes_changes_nothing() {
    for s in [-8.0, -5.0, -2.0, 1.0, 4.0] {
        for lambda in [0.3, 1.0] {
            let a = nystrom_d2(s, lambda, 200).unwrap();
            let b = nystrom_d2(s, lambda, 400).unwrap();
            assert!((a - b).abs() <= 1e-9, "s = {s}, λ = {lambda}");
        }
    }
}

#[test]
fn monotone_on_a_lattice() {
    let ss = [-6.0, -3.0, -1.0, 1.0, 3.0];
    let ls = [0.2, 0.4, 0.6, 0.8, 1.0];
    let d: Vec<Vec<f64>> = ss
        .iter()
        .map(|&s| ls.iter().map(|&l| nystrom_d2(s, l, 200).unwrap()).collect())
        .collect();
    for i in 0..ss.len() {
        for j in 0..ls.len() {
            assert!(d[i][j] > 0.0 && d[i][j] <= 1.0);
            if j > 0 {
                assert!(d[i][j] <= d[i][j - 1], "not nonincreasing in λ at s = {}", ss[i]);
            }
            if i > 0 {
                assert!(d[i][j] >= d[i - 1][j], "not nondecreasing in s at λ = {}", ls[j]);
            }
        }
    }
}

#[test]
fn mapped_rule_integrates_an_exponential() {
    let rule = QuadratureRule::half_line(-1.0, 200, DEFAULT_MAP_SCALE);
    let sum: f64 = rule.nodes().iter().zip(rule.weights()).map(|(x, w)| w * (-(x + 1.0)).exp()).sum();
    assert!((sum - 1.0).abs() <= 1e-12);
}

#[test]
fn domain_is_enforced() {
    assert!(matches!(nystrom_d2(-11.0, 1.0, 200), Err(Error::Range { .. })));
    assert!(matches!(nystrom_d2(0.0, 1.5, 200), Err(Error::Range { .. })));
    assert!(nystrom_d2(0.0, 1.0, 2001).is_err());
    assert!(matches!(nystrom_d4(7.0, 200), Err(Error::Range { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn determinant_is_a_probability(s in -8.0f64..6.0, lambda in 0.01f64..=1.0) {
        let d = nystrom_d2(s, lambda, 120).unwrap();
        prop_assert!(d > 0.0 && d <= 1.0 + 1e-14);
    }
}
