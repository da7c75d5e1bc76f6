//! Airy function of the first kind and the Airy kernel.
//!
//! Two evaluation regimes are used:
//!
//! * `|x| <= 8`: the Maclaurin series, summed in double-double arithmetic.
//!   For positive `x` the two series cancel by up to thirteen decimal
//!   digits, so plain `f64` summation would be useless near the seam.
//! * `|x| > 8`: the standard asymptotic expansions, exponentially decaying
//!   for `x > 8` and oscillatory for `x < -8`. At the seam the smallest
//!   asymptotic term is about `exp(-2ζ) ≈ 1e-13`.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Largest `|x|` accepted by [`airy`].
pub const AIRY_RANGE: f64 = 60.0;

/// Below this separation the kernel is evaluated in confluent form.
pub const KERNEL_DIAGONAL_THRESHOLD: f64 = 1e-6;

const SERIES_LIMIT: f64 = 8.0;

// Ai(0) and -Ai'(0) as unevaluated sums hi + lo.
const AI0: Dd = Dd {
    hi: 0.355_028_053_887_817_2,
    lo: 2.052_336_324_362_12e-17,
};
const MINUS_AIP0: Dd = Dd {
    hi: 0.258_819_403_792_806_8,
    lo: -2.522_243_111_610_832e-17,
};

/// Values of `Ai(x)` and `Ai'(x)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryPair {
    pub ai: f64,
    pub aip: f64,
}

impl AiryPair {
    /// `Ai''(x) = x Ai(x)`.
    pub fn second_derivative(&self, x: f64) -> f64 {
        x * self.ai
    }
}

/// Evaluates `Ai(x)` and `Ai'(x)` for `x` in `[-60, 60]`.
pub fn airy(x: f64) -> Result<AiryPair> {
    if !(-AIRY_RANGE..=AIRY_RANGE).contains(&x) {
        return Err(Error::Range {
            what: "airy",
            value: x,
            lo: -AIRY_RANGE,
            hi: AIRY_RANGE,
        });
    }
    Ok(if x.abs() <= SERIES_LIMIT {
        airy_series(x)
    } else if x > 0.0 {
        airy_decaying(x)
    } else {
        airy_oscillatory(-x)
    })
}

/// Like [`airy`] but returns zero beyond the right end of the range, where
/// `Ai` is below `1e-135` and contributes nothing to any integral we form.
pub fn airy_or_zero(x: f64) -> Result<AiryPair> {
    if x > AIRY_RANGE {
        Ok(AiryPair { ai: 0.0, aip: 0.0 })
    } else {
        airy(x)
    }
}

/// The Airy kernel `(Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y)`.
pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    if (x - y).abs() < KERNEL_DIAGONAL_THRESHOLD {
        let mid = 0.5 * (x + y);
        return Ok(kernel_diagonal(mid, airy(mid)?));
    }
    Ok(kernel_from_pairs(x, airy(x)?, y, airy(y)?))
}

/// Kernel value from precomputed Airy pairs. Callers holding node values
/// (the Nyström assembly) use this to avoid re-evaluating `Ai`.
pub fn kernel_from_pairs(x: f64, ax: AiryPair, y: f64, ay: AiryPair) -> f64 {
    if (x - y).abs() < KERNEL_DIAGONAL_THRESHOLD {
        // Both pairs describe (nearly) the same point; the caller only has
        // values at x, which is within the threshold of the midpoint.
        return kernel_diagonal(x, ax);
    }
    (ax.ai * ay.aip - ax.aip * ay.ai) / (x - y)
}

/// `K(x, x) = Ai'(x)^2 - x Ai(x)^2 = ∫_x^∞ Ai(u)^2 du`.
pub fn kernel_diagonal(x: f64, a: AiryPair) -> f64 {
    a.aip * a.aip - x * a.ai * a.ai
}

/// `∂K(x, y)/∂y`, using `Ai'' = x Ai`. On the diagonal this is `-Ai(x)^2 / 2`.
pub fn kernel_dy_from_pairs(x: f64, ax: AiryPair, y: f64, ay: AiryPair) -> f64 {
    let d = x - y;
    if d.abs() < KERNEL_DIAGONAL_THRESHOLD {
        return -0.5 * ax.ai * ax.ai;
    }
    let num = ax.ai * ay.aip - ax.aip * ay.ai;
    let dnum = ax.ai * y * ay.ai - ax.aip * ay.aip;
    dnum / d + num / (d * d)
}

/// `∫_x^∞ Ai(u) du` for `x` in `[-60, 60]`.
pub fn airy_tail_integral(x: f64) -> Result<f64> {
    if !(-AIRY_RANGE..=AIRY_RANGE).contains(&x) {
        return Err(Error::Range {
            what: "airy_tail_integral",
            value: x,
            lo: -AIRY_RANGE,
            hi: AIRY_RANGE,
        });
    }
    let rule = GaussLegendre::new(20);
    if x >= 0.0 {
        integrate_right_tail(&rule, x, |u| Ok(airy(u)?.ai))
    } else {
        // ∫_0^∞ Ai = 1/3.
        let panels = (-x / 0.5).ceil().max(1.0) as usize;
        let width = -x / panels as f64;
        let mut acc = 1.0 / 3.0;
        for p in 0..panels {
            let a = x + p as f64 * width;
            acc += rule.integrate_fallible(a, a + width, |u| Ok(airy(u)?.ai))?;
        }
        Ok(acc)
    }
}

/// `∫_x^∞ (u - x) Ai(u)^2 du`, the empty-interior limit of the `I` integral.
pub fn airy_weighted_square_tail(x: f64) -> Result<f64> {
    let rule = GaussLegendre::new(20);
    if x >= 0.0 {
        integrate_right_tail(&rule, x, |u| Ok((u - x) * airy(u)?.ai.powi(2)))
    } else {
        // Split at zero and reuse the decaying tail on the right.
        let left = {
            let panels = (-x / 0.5).ceil().max(1.0) as usize;
            let width = -x / panels as f64;
            let mut acc = 0.0;
            for p in 0..panels {
                let a = x + p as f64 * width;
                acc += rule.integrate_fallible(a, a + width, |u| Ok((u - x) * airy(u)?.ai.powi(2)))?;
            }
            acc
        };
        let right = integrate_right_tail(&rule, 0.0, |u| Ok((u - x) * airy(u)?.ai.powi(2)))?;
        Ok(left + right)
    }
}

fn integrate_right_tail<F>(rule: &GaussLegendre, x: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut acc = 0.0;
    let mut a = x;
    while a < AIRY_RANGE {
        let b = (a + 1.0).min(AIRY_RANGE);
        let piece = rule.integrate_fallible(a, b, &f)?;
        acc += piece;
        if piece.abs() <= 1e-18 * acc.abs() {
            break;
        }
        a = b;
    }
    Ok(acc)
}

fn airy_series(x: f64) -> AiryPair {
    let x3 = Dd::from(x).mul_f64(x).mul_f64(x);
    let xd = Dd::from(x);

    // f(x) = Σ f_k with f_{k+1} = f_k x^3 / ((3k+2)(3k+3)),
    // g(x) = Σ g_k with g_0 = x, g_{k+1} = g_k x^3 / ((3k+3)(3k+4)).
    // Their derivatives follow analogous two-term recurrences.
    let mut f = Dd::from(1.0);
    let mut fk = Dd::from(1.0);
    let mut g = xd;
    let mut gk = xd;
    let mut fp = xd.mul_f64(x).mul_f64(0.5);
    let mut fpk = fp;
    let mut gp = Dd::from(1.0);
    let mut gpk = Dd::from(1.0);

    for k in 0..200u32 {
        let k3 = 3.0 * f64::from(k);
        fk = fk.mul(x3).div_f64((k3 + 2.0) * (k3 + 3.0));
        gk = gk.mul(x3).div_f64((k3 + 3.0) * (k3 + 4.0));
        gpk = gpk.mul(x3).div_f64((k3 + 1.0) * (k3 + 3.0));
        if k >= 1 {
            fpk = fpk.mul(x3).div_f64(k3 * (k3 + 2.0));
            fp = fp.add(fpk);
        }
        f = f.add(fk);
        g = g.add(gk);
        gp = gp.add(gpk);

        let tiny = 1e-34;
        if k > 4
            && fk.hi.abs() <= tiny * f.hi.abs().max(1.0)
            && gk.hi.abs() <= tiny * g.hi.abs().max(1.0)
            && fpk.hi.abs() <= tiny * fp.hi.abs().max(1.0)
            && gpk.hi.abs() <= tiny * gp.hi.abs().max(1.0)
        {
            break;
        }
    }

    let ai = AI0.mul(f).sub(MINUS_AIP0.mul(g));
    let aip = AI0.mul(fp).sub(MINUS_AIP0.mul(gp));
    AiryPair {
        ai: ai.to_f64(),
        aip: aip.to_f64(),
    }
}

/// Terms `(u_k ζ^{-k}, v_k ζ^{-k})` of the Airy asymptotic expansions,
/// truncated where they stop shrinking (optimal truncation). The `v_k`
/// follow from `v_k = -(6k+1)/(6k-1) u_k`.
fn asymptotic_terms(zeta: f64) -> Vec<(f64, f64)> {
    let mut terms = Vec::with_capacity(64);
    let mut u = 1.0;
    let mut zpow = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..80usize {
        let kf = k as f64;
        if k > 0 {
            u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
            zpow /= zeta;
        }
        let v = if k == 0 { 1.0 } else { -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u };
        let (tu, tv) = (u * zpow, v * zpow);
        let size = tu.abs().max(tv.abs());
        if size > prev {
            break;
        }
        prev = size;
        terms.push((tu, tv));
        if size < 1e-18 {
            break;
        }
    }
    terms
}

fn airy_decaying(x: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let (mut su, mut sv) = (0.0, 0.0);
    for (k, (tu, tv)) in asymptotic_terms(zeta).into_iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        su += sign * tu;
        sv += sign * tv;
    }
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.sqrt().sqrt();
    AiryPair {
        ai: e / q * su,
        aip: -e * q * sv,
    }
}

fn airy_oscillatory(z: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    // Even and odd sub-series, each alternating in its own index:
    // Σ_j (-1)^j u_{2j} ζ^{-2j} and Σ_j (-1)^j u_{2j+1} ζ^{-2j-1}.
    let (mut ue, mut uo, mut ve, mut vo) = (0.0, 0.0, 0.0, 0.0);
    for (k, (tu, tv)) in asymptotic_terms(zeta).into_iter().enumerate() {
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            ue += sign * tu;
            ve += sign * tv;
        } else {
            uo += sign * tu;
            vo += sign * tv;
        }
    }
    let (s, c) = (zeta - FRAC_PI_4).sin_cos();
    let scale = 1.0 / PI.sqrt();
    let q = z.sqrt().sqrt();
    AiryPair {
        ai: scale / q * (c * ue + s * uo),
        aip: scale * q * (s * ve - c * vo),
    }
}

/// Double-double number `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self.sub(Dd::from(b).mul_f64(q1));
        let q2 = r.hi / b;
        let r = r.sub(Dd::from(b).mul_f64(q2));
        let q3 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from(q3))
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}
