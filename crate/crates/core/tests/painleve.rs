use std::sync::OnceLock;

use edgedist::dist::d2_jet;
use edgedist::painleve::{q0_asymptotic, q1_asymptotic, solve, PainleveSolution, SolverConfig};
use edgedist::quadrature::GaussLegendre;
use edgedist::specfun::airy;
use edgedist::Error;

fn default_solution() -> &'static PainleveSolution {
    static SOL: OnceLock<PainleveSolution> = OnceLock::new();
    SOL.get_or_init(|| solve(&SolverConfig::default()).expect("default solve"))
}

fn second_difference(v: &[f64], i: usize, h: f64) -> f64 {
    (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]) / (12.0 * h * h)
}

fn subsample(sol: &PainleveSolution) -> impl Iterator<Item = usize> {
    let n = sol.grid().len();
    (0..100).map(move |k| 2 + k * (n - 5) / 99)
}

#[test]
fn order_zero_satisfies_painleve_ii() {
    let sol = default_solution();
    let h = sol.config().grid_step;
    let q: Vec<f64> = sol.q().iter().map(|j| j.coeff(0)).collect();
    for i in subsample(sol) {
        let x = sol.grid()[i];
        let r = second_difference(&q, i, h) - x * q[i] - 2.0 * q[i].powi(3);
        assert!(r.abs() <= 1e-8, "residual {r:e} at x = {x}");
    }
}

#[test]
fn order_one_satisfies_variational_equation() {
    // q₁ reaches ~1e8 at the left end, so the residual is measured relative
    // to the size of the terms.
    let sol = default_solution();
    let h = sol.config().grid_step;
    let q0: Vec<f64> = sol.q().iter().map(|j| j.coeff(0)).collect();
    let q1: Vec<f64> = sol.q().iter().map(|j| j.coeff(1)).collect();
    for i in subsample(sol) {
        let x = sol.grid()[i];
        let rhs = x * q1[i] + 6.0 * q0[i] * q0[i] * q1[i];
        let r = second_difference(&q1, i, h) - rhs;
        let scale = q1[i].abs().max(rhs.abs()).max(1e-300);
        assert!((r / scale).abs() <= 1e-7, "relative residual {:e} at x = {x}", r / scale);
    }
}

#[test]
fn hastings_mcleod_is_positive() {
    assert!(default_solution().q().iter().all(|j| j.coeff(0) > 0.0));
}

#[test]
fn mu_is_positive_and_decreasing() {
    let j: Vec<f64> = default_solution().j().iter().map(|j| j.coeff(0)).collect();
    assert!(j.iter().all(|v| *v > 0.0));
    assert!(j.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn i_second_derivative_is_q_squared() {
    // Orders k >= 2 grow like exp(k |x|^{3/2}) on the left, where the
    // five-point stencil itself is no better than 1e-6; they are checked
    // right of the patch point.
    let sol = default_solution();
    let h = sol.config().grid_step;
    for k in 0..=sol.order() {
        let i: Vec<f64> = sol.i().iter().map(|j| j.coeff(k)).collect();
        for idx in subsample(sol) {
            if k >= 2 && sol.grid()[idx] < sol.config().patch_point {
                continue;
            }
            let q2 = (&sol.q()[idx] * &sol.q()[idx]).coeff(k);
            let d2 = second_difference(&i, idx, h);
            let scale = q2.abs().max(1.0);
            assert!((d2 - q2).abs() <= 1e-6 * scale, "order {k} at x = {}", sol.grid()[idx]);
        }
    }
}

#[test]
fn right_boundary_matches_airy_data() {
    let sol = default_solution();
    let last = sol.grid().len() - 1;
    let ai = airy(6.0).unwrap().ai;
    assert!((sol.q()[last].coeff(0) - ai).abs() <= 1e-10);
    assert!((sol.q()[last].coeff(1) - 0.5 * ai).abs() <= 1e-10);
}

#[test]
fn mu_at_right_boundary_matches_quadrature() {
    let rule = GaussLegendre::new(30);
    let mut tail = 0.0;
    for k in 0..34 {
        let a = 6.0 + k as f64;
        tail += rule.integrate(a, a + 1.0, |u| airy(u).unwrap().ai);
    }
    let sol = default_solution();
    let j0 = sol.j().last().unwrap().coeff(0);
    assert!((j0 - tail).abs() <= 1e-8, "{j0:e} vs {tail:e}");
}

#[test]
fn patch_point_matches_expansions() {
    let sol = default_solution();
    let k = sol.index_of(-8.0).unwrap();
    let q0 = q0_asymptotic(16.0).unwrap();
    let q1 = q1_asymptotic(16.0).unwrap();
    assert!(((sol.q()[k].coeff(0) - q0) / q0).abs() <= 1e-6);
    assert!(((sol.q()[k].coeff(1) - q1) / q1).abs() <= 1e-4);
}

#[test]
fn lower_jet_orders_do_not_depend_on_truncation() {
    let low = solve(&SolverConfig {
        jet_order: 2,
        ..SolverConfig::default()
    })
    .unwrap();
    let high = default_solution();
    for (a, b) in low.q().iter().zip(high.q()) {
        for k in 0..=2 {
            let scale = b.coeff(k).abs().max(1.0);
            assert!((a.coeff(k) - b.coeff(k)).abs() <= 1e-10 * scale);
        }
    }
}

#[test]
fn halving_the_grid_step_leaves_f2_unchanged() {
    let fine = solve(&SolverConfig {
        grid_step: 0.0025,
        ..SolverConfig::default()
    })
    .unwrap();
    let a = d2_jet(-2.0, default_solution()).unwrap().value();
    let b = d2_jet(-2.0, &fine).unwrap().value();
    assert!((a - b).abs() <= 1e-9, "{:e}", a - b);
}

#[test]
fn interpolated_integrals_match_a_finer_grid() {
    // Dominated by the step-size error of the coarse solve, not the interpolant.
    let fine = solve(&SolverConfig {
        grid_step: 0.0025,
        ..SolverConfig::default()
    })
    .unwrap();
    let sol = default_solution();
    for x in [-9.0025, -2.0025, 0.5025, 3.0025] {
        let k = fine.index_of(x).unwrap();
        let got = sol.integrals_at(x).unwrap();
        for m in 0..=sol.order() {
            let (gi, wi) = (got.i.coeff(m), fine.i()[k].coeff(m));
            let (gj, wj) = (got.j.coeff(m), fine.j()[k].coeff(m));
            assert!((gi - wi).abs() <= 1e-7 * wi.abs().max(1.0), "I{m} at {x}: {gi} vs {wi}");
            assert!((gj - wj).abs() <= 1e-7 * wj.abs().max(1.0), "J{m} at {x}: {gj} vs {wj}");
        }
    }
    assert!(sol.integrals_at(-20.0).is_err());
}

#[test]
fn beyond_the_grid_the_airy_regime_is_used() {
    let sol = default_solution();
    let inside = sol.integrals_at(6.0).unwrap();
    let outside = sol.integrals_at(6.0 + 1e-9).unwrap();
    for k in 0..=sol.order() {
        assert!((inside.i.coeff(k) - outside.i.coeff(k)).abs() < 1e-15);
        assert!((inside.j.coeff(k) - outside.j.coeff(k)).abs() < 1e-13);
    }
}

#[test]
fn csv_dump_has_expected_columns() {
    let sol = default_solution();
    let mut buf = Vec::new();
    sol.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,q0,q1,q2,q3,q4,I0,I1,I2,I3,I4,J0,J1,J2,J3,J4"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), sol.grid().len());
    assert_eq!(rows[0].split(',').count(), 16);
}

#[test]
fn invalid_configs_are_rejected() {
    let cfg = SolverConfig {
        grid_step: -1.0,
        ..SolverConfig::default()
    };
    assert!(matches!(solve(&cfg), Err(Error::InvalidConfig(_))));
    let cfg = SolverConfig {
        x_right: -1.0,
        ..SolverConfig::default()
    };
    assert!(matches!(solve(&cfg), Err(Error::InvalidConfig(_))));
}

#[test]
fn report_shows_converged_refinement() {
    let r = default_solution().bvp_report();
    assert!(r.newton_iterations < 20);
    assert!(r.max_residual < 1e-12);
    assert!(r.richardson_gap < 1e-10);
}
