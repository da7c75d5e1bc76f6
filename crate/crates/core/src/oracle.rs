//! Fredholm determinants by Nyström discretization, an independent check on
//! the Painlevé route for `D₂(s, λ)` and `D₄(s, 1)`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::specfun::{airy_or_zero, airy_tail_integral, kernel_dy_from_pairs, kernel_from_pairs, AiryPair, AIRY_RANGE};

pub const DEFAULT_NODES: usize = 200;
pub const MAX_NODES: usize = 2000;
/// Scale of the map `u ↦ s + L u / (1 - u)` from `(0, 1)` onto `(s, ∞)`.
pub const DEFAULT_MAP_SCALE: f64 = 10.0;

/// Gauss–Legendre on `(0, 1)` pushed forward to `(s, ∞)`; weights include the
/// Jacobian.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn half_line(s: f64, n: usize, scale: f64) -> Self {
        let gl = GaussLegendre::new(n);
        let (nodes, weights) = gl
            .mapped(0.0, 1.0)
            .map(|(u, w)| (s + scale * u / (1.0 - u), w * scale / ((1.0 - u) * (1.0 - u))))
            .unzip();
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(-10.0..=6.0).contains(&s) {
        return Err(Error::Range {
            what: "Nyström determinant",
            value: s,
            lo: -10.0,
            hi: 6.0,
        });
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::InvalidConfig(format!("node count must lie in 1..={MAX_NODES}, got {n}")));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Range {
            what: "Nyström lambda",
            value: lambda,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

fn determinant(m: DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalRange {
            context: "assembling a Nyström matrix",
        });
    }
    let d = m.determinant();
    if !d.is_finite() {
        return Err(Error::NumericalRange {
            context: "factorizing a Nyström matrix",
        });
    }
    Ok(d)
}

fn airy_at(xs: &[f64]) -> Result<Vec<AiryPair>> {
    xs.iter().map(|&x| airy_or_zero(x)).collect()
}

/// `det(I - λ K_Airy)` on `L²(s, ∞)` with `n` nodes.
pub fn nystrom_d2(s: f64, lambda: f64, n: usize) -> Result<f64> {
    check_s(s)?;
    check_n(n)?;
    check_lambda(lambda)?;
    let rule = QuadratureRule::half_line(s, n, DEFAULT_MAP_SCALE);
    let x = rule.nodes();
    let a = airy_at(x)?;
    let sw: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
    let entries: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (x, a, sw) = (&x, &a, &sw);
            (0..n).map(move |j| {
                let k = kernel_from_pairs(x[i], a[i], x[j], a[j]);
                let delta = if i == j { 1.0 } else { 0.0 };
                delta - lambda * sw[i] * k * sw[j]
            })
        })
        .collect();
    determinant(DMatrix::from_row_slice(n, n, &entries))
}

/// `∫_p^∞ Ai` for many points at once: sort, then accumulate panel integrals
/// between neighbours from the right.
fn tail_integrals(points: &[f64]) -> Result<Vec<f64>> {
    let rule = GaussLegendre::new(20);
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[j].total_cmp(&points[i]));
    let mut out = vec![0.0; points.len()];
    let mut acc = 0.0;
    let mut prev = f64::INFINITY;
    for &idx in &order {
        let p = points[idx];
        if p >= AIRY_RANGE {
            out[idx] = 0.0;
            continue;
        }
        if prev == f64::INFINITY {
            acc = airy_tail_integral(p)?;
        } else if prev > p {
            let panels = ((prev - p) / 0.5).ceil().max(1.0) as usize;
            let width = (prev - p) / panels as f64;
            for k in 0..panels {
                let a = p + k as f64 * width;
                acc += rule.integrate_fallible(a, a + width, |u| Ok(airy_or_zero(u)?.ai))?;
            }
        }
        prev = p;
        out[idx] = acc;
    }
    Ok(out)
}

/// `det(I - K₄) = D₄(s, 1)` with `n` nodes per component.
pub fn nystrom_d4(s: f64, n: usize) -> Result<f64> {
    nystrom_d4_lambda(s, 1.0, n)
}

/// `det(I - λK₄)` on `L²(s, ∞) ⊕ L²(s, ∞)` with `n` nodes per component.
///
/// The 2×2 matrix kernel is `½ [[S, SD], [IS, Sᵀ]]` with
/// `S(x, y) = K(x, y) - ½ Ai(x) A(y)`,
/// `SD(x, y) = -∂_y K(x, y) - ½ Ai(x) Ai(y)`,
/// `IS(x, y) = -∫_0^∞ A(x + w) Ai(y + w) dw + ½ A(x) A(y)`,
/// where `A(u) = ∫_u^∞ Ai`.
pub fn nystrom_d4_lambda(s: f64, lambda: f64, n: usize) -> Result<f64> {
    check_s(s)?;
    check_n(n)?;
    check_lambda(lambda)?;
    let rule = QuadratureRule::half_line(s, n, DEFAULT_MAP_SCALE);
    let x = rule.nodes();
    let a = airy_at(x)?;
    let big_a = tail_integrals(x)?;

    // Shifts w for the IS integral.
    let shifts = QuadratureRule::half_line(0.0, 120, 8.0);
    let nw = shifts.len();
    let shifted: Vec<f64> = x.iter().flat_map(|xi| shifts.nodes().iter().map(move |w| xi + w)).collect();
    let shifted_tail = tail_integrals(&shifted)?;
    let shifted_ai: Vec<f64> = shifted
        .iter()
        .map(|&p| airy_or_zero(p).map(|v| v.ai))
        .collect::<Result<_>>()?;
    let weighted_tail = DMatrix::from_fn(n, nw, |i, k| shifted_tail[i * nw + k] * shifts.weights()[k]);
    let ai_shift = DMatrix::from_fn(n, nw, |j, k| shifted_ai[j * nw + k]);
    let convolved = &weighted_tail * ai_shift.transpose();

    let sw: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
    let mut m = DMatrix::<f64>::identity(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let k = kernel_from_pairs(x[i], a[i], x[j], a[j]);
            let s_ij = k - 0.5 * a[i].ai * big_a[j];
            let s_ji = kernel_from_pairs(x[j], a[j], x[i], a[i]) - 0.5 * a[j].ai * big_a[i];
            let sd = -kernel_dy_from_pairs(x[i], a[i], x[j], a[j]) - 0.5 * a[i].ai * a[j].ai;
            let is = -convolved[(i, j)] + 0.5 * big_a[i] * big_a[j];
            let wij = 0.5 * lambda * sw[i] * sw[j];
            m[(i, j)] -= wij * s_ij;
            m[(i, n + j)] -= wij * sd;
            m[(n + i, j)] -= wij * is;
            m[(n + i, n + j)] -= wij * s_ji;
        }
    }
    determinant(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_increasing_with_positive_weights() {
        let r = QuadratureRule::half_line(-3.0, 50, DEFAULT_MAP_SCALE);
        assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(r.weights().iter().all(|w| *w > 0.0));
        // ∫_s^∞ e^{-(x-s)} dx = 1.
        let got: f64 = r
            .nodes()
            .iter()
            .zip(r.weights())
            .map(|(x, w)| w * (-(x + 3.0)).exp())
            .sum();
        assert!((got - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lambda_zero_is_identity() {
        assert_eq!(nystrom_d2(-2.0, 0.0, 40).unwrap(), 1.0);
    }

    #[test]
    fn far_right_is_one() {
        assert!((nystrom_d2(6.0, 1.0, 200).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn tail_integrals_match_direct() {
        let pts = [2.0, -1.5, 0.3, 75.0, 0.3, -4.0];
        let got = tail_integrals(&pts).unwrap();
        for (p, g) in pts.iter().zip(got) {
            let want = if *p >= AIRY_RANGE { 0.0 } else { airy_tail_integral(*p).unwrap() };
            assert!((g - want).abs() < 1e-14, "{p}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(nystrom_d2(-11.0, 1.0, 10).is_err());
        assert!(nystrom_d2(0.0, 1.5, 10).is_err());
        assert!(nystrom_d2(0.0, 1.0, 2001).is_err());
        assert!(nystrom_d4(7.0, 10).is_err());
    }
}
