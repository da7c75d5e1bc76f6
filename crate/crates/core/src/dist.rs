//! Edge distributions `F_β(s, m)` for `β = 1, 2, 4` from the Painlevé jets.
//!
//! With `ε = λ - 1`, every generating function is carried as a jet in `ε`.
//! If `G(s, λ)` is `D₂` (β = 2) or `√D_β` (β = 1, 4) and `c_k` its Taylor
//! coefficients at `λ = 1`, then
//!
//! `F(s, m+1) - F(s, m) = (-1)^m / m! · ∂_λ^m G = (-1)^m c_m`,
//!
//! so `F(s, m) = Σ_{k<m} (-1)^k c_k`, starting from `F(s, 0) = 0`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::painleve::{format_sci, Integrals, PainleveSolution};

/// Below this the generating function has underflowed and `F` is reported as 0.
pub const UNDERFLOW_FLOOR: f64 = 1e-280;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Beta {
    One,
    Two,
    Four,
}

impl Beta {
    pub fn from_int(b: u32) -> Result<Self> {
        match b {
            1 => Ok(Beta::One),
            2 => Ok(Beta::Two),
            4 => Ok(Beta::Four),
            other => Err(Error::InvalidConfig(format!("beta must be 1, 2 or 4, got {other}"))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Beta::One => 1,
            Beta::Two => 2,
            Beta::Four => 4,
        }
    }
}

impl std::fmt::Display for Beta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_int())
    }
}

/// Relative perturbation applied to the order ≥ 1 integrals when probing the
/// conditioning of `F(s, m)`; about the accuracy of the solver's jets.
pub const JET_PERTURBATION: f64 = 1e-10;

/// Largest change in `F(s, m)` under that perturbation before the value is
/// rejected as ill-conditioned.
pub const SENSITIVITY_LIMIT: f64 = 1e-7;

/// Largest decrease between adjacent table values attributed to rounding.
pub const MONOTONE_SLACK: f64 = 64.0 * f64::EPSILON;

/// Jet of `D₂(s, λ) = exp(-I(s, λ))`.
pub fn d2_jet(s: f64, sol: &PainleveSolution) -> Result<Jet> {
    Ok(d2_from(&sol.integrals_at(s)?))
}

fn d2_from(ints: &Integrals) -> Jet {
    (-&ints.i).exp()
}

/// Jet of `D₁(s, λ)`.
///
/// `D₁ = D₂(s, λ̃) (λ - 1 - cosh μ(s, λ̃) + √λ̃ sinh μ(s, λ̃)) / (λ - 2)`
/// with `λ̃ = 2λ - λ²`, so `λ̃ - 1 = -ε²` and every `λ̃`-jet is composed
/// with `-ε²`.
pub fn d1_jet(s: f64, sol: &PainleveSolution) -> Result<Jet> {
    let order = sol.order();
    let ints = sol.integrals_at(s)?;
    let shift = Jet::lambda_tilde_offset(order);
    let d2_tilde = (-&ints.i).exp().compose(&shift)?;
    let mu_tilde = ints.j.compose(&shift)?;
    let (ch, sh) = mu_tilde.cosh_sinh();
    let sqrt_tilde = shift.add_constant(1.0).sqrt()?;
    let numerator = &(&Jet::epsilon(order) - &ch) + &(&sqrt_tilde * &sh);
    let denominator = Jet::lambda(order).add_constant(-2.0);
    (&d2_tilde * &numerator).try_div(&denominator)
}

/// Jet of `√D₁(s, λ)` in a form free of cancellation.
///
/// With `-ε = sin φ` and `t = tan(φ/2)` the numerator of [`d1_jet`] is
/// `-e^μ̃ (t + e^{-μ̃})² / (1 + t²)`, which gives
/// `√D₁ = e^{-Ĩ/2} (e^{-μ̃/2} + t e^{μ̃/2}) / (1 + t)`.
pub fn sqrt_d1_jet(s: f64, sol: &PainleveSolution) -> Result<Jet> {
    sqrt_d1_from(&sol.integrals_at(s)?)
}

fn sqrt_d1_from(ints: &Integrals) -> Result<Jet> {
    let order = ints.i.order();
    let shift = Jet::lambda_tilde_offset(order);
    let half_i = ints.i.scale(-0.5).compose(&shift)?.exp();
    let half_mu = ints.j.scale(0.5).compose(&shift)?;
    let sqrt_tilde = shift.add_constant(1.0).sqrt()?;
    let t = (-&Jet::epsilon(order)).try_div(&sqrt_tilde.add_constant(1.0))?;
    let numerator = &(-&half_mu).exp() + &(&t * &half_mu.exp());
    (&half_i * &numerator).try_div(&t.add_constant(1.0))
}

/// Jet of `D₄(s, λ) = D₂(s, λ) cosh²(μ(s, λ) / 2)`.
pub fn d4_jet(s: f64, sol: &PainleveSolution) -> Result<Jet> {
    let c = sqrt_d4_jet(s, sol)?;
    Ok(&c * &c)
}

/// Jet of `√D₄(s, λ) = e^{-I/2} cosh(μ / 2)`.
pub fn sqrt_d4_jet(s: f64, sol: &PainleveSolution) -> Result<Jet> {
    Ok(sqrt_d4_from(&sol.integrals_at(s)?))
}

fn sqrt_d4_from(ints: &Integrals) -> Jet {
    &ints.i.scale(-0.5).exp() * &ints.j.scale(0.5).cosh()
}

/// Jet of the generating function whose telescoped coefficients give
/// `F_β(s, ·)`. `None` means it has underflowed.
pub fn generating_jet(beta: Beta, s: f64, sol: &PainleveSolution) -> Result<Option<Jet>> {
    generating_from(beta, &sol.integrals_at(s)?)
}

fn generating_from(beta: Beta, ints: &Integrals) -> Result<Option<Jet>> {
    let d = match beta {
        Beta::Two => d2_from(ints),
        Beta::One => sqrt_d1_from(ints)?,
        Beta::Four => sqrt_d4_from(ints),
    };
    if !d.is_finite() {
        return Err(Error::NumericalRange {
            context: "evaluating a determinant jet",
        });
    }
    let floor = match beta {
        Beta::Two => UNDERFLOW_FLOOR,
        _ => UNDERFLOW_FLOOR.sqrt(),
    };
    if d.value() < floor {
        return Ok(None);
    }
    Ok(Some(d))
}

/// Largest `m` the solution's jet order supports.
pub fn max_index(sol: &PainleveSolution) -> usize {
    sol.order() + 1
}

fn check_index(m: usize, sol: &PainleveSolution) -> Result<()> {
    if m == 0 || m > max_index(sol) {
        return Err(Error::Capability {
            m,
            needed: m.saturating_sub(1),
            available: sol.order(),
        });
    }
    Ok(())
}

fn telescope(g: Option<Jet>, m: usize) -> f64 {
    let Some(g) = g else {
        return 0.0;
    };
    g.coeffs()
        .iter()
        .take(m)
        .enumerate()
        .map(|(k, c)| if k % 2 == 0 { *c } else { -c })
        .sum()
}

fn perturbed(jet: &Jet) -> Jet {
    let mut c = jet.coeffs().to_vec();
    for v in c.iter_mut().skip(1) {
        *v *= 1.0 + JET_PERTURBATION;
    }
    Jet::new(c)
}

/// `F_β(s, m)`: distribution of the `m`-th largest edge-scaled eigenvalue.
///
/// Far left, rebuilding the determinant from the jets of its logarithm
/// cancels catastrophically once `m` exceeds two or three; such values are
/// reported as [`Error::IllConditioned`] rather than returned.
pub fn cdf_value(beta: Beta, m: usize, s: f64, sol: &PainleveSolution) -> Result<f64> {
    check_index(m, sol)?;
    let ints = sol.integrals_at(s)?;
    let f = telescope(generating_from(beta, &ints)?, m);
    if m > 1 {
        let shifted = Integrals {
            i: perturbed(&ints.i),
            j: perturbed(&ints.j),
        };
        let g = telescope(generating_from(beta, &shifted)?, m);
        let sensitivity = (g - f).abs();
        if !(sensitivity <= SENSITIVITY_LIMIT) {
            return Err(Error::IllConditioned { m, s, sensitivity });
        }
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Uniform grid from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && hi > lo) {
        return Err(Error::InvalidConfig(format!("bad grid {lo}..{hi} step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistRequest {
    pub beta: Beta,
    pub m: usize,
    /// Ascending and uniformly spaced.
    pub s_grid: Vec<f64>,
    /// Report `F₄` in the Tracy–Widom (Mehta) normalization. Ignored for
    /// `β ≠ 4`.
    pub tw_convention: bool,
}

impl DistRequest {
    pub fn new(beta: Beta, m: usize) -> Self {
        Self {
            beta,
            m,
            s_grid: uniform_grid(-13.0, 6.0, 0.01).expect("static grid"),
            tw_convention: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistRow {
    pub s: f64,
    #[serde(rename = "F")]
    pub cdf: f64,
    #[serde(rename = "f")]
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistTable {
    pub beta: Beta,
    pub m: usize,
    pub rows: Vec<DistRow>,
}

impl DistTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "s,F,f")?;
        for r in &self.rows {
            writeln!(out, "{},{},{}", format_sci(r.s), format_sci(r.cdf), format_sci(r.density))?;
        }
        Ok(())
    }
}

/// Scale between the internal `F₄` argument and the Tracy–Widom one:
/// `F₄^TW(s) = F₄(√2 s)`.
pub const TW_SCALE: f64 = std::f64::consts::SQRT_2;

pub fn cdf(req: &DistRequest, sol: &PainleveSolution) -> Result<DistTable> {
    check_index(req.m, sol)?;
    let grid = &req.s_grid;
    if grid.len() < 5 {
        return Err(Error::InsufficientData {
            needed: 5,
            got: grid.len(),
        });
    }
    let step = grid[1] - grid[0];
    if !(step > 0.0)
        || grid
            .windows(2)
            .any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0))
    {
        return Err(Error::InvalidConfig("s_grid must be ascending and uniform".into()));
    }
    let scale = if req.tw_convention && req.beta == Beta::Four {
        TW_SCALE
    } else {
        1.0
    };
    // The rescaled argument can leave the solution grid on the left; there
    // the distribution is zero to working precision, which is checked once.
    let floor_ok = cdf_value(req.beta, req.m, sol.x_min(), sol)? < 1e-20;
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&s| {
            let x = scale * s;
            if x < sol.x_min() && scale != 1.0 && floor_ok {
                Ok(0.0)
            } else {
                cdf_value(req.beta, req.m, x, sol)
            }
        })
        .collect::<Result<_>>()?;
    let values = monotone(values, grid)?;
    let density = five_point_derivative(&values, step);
    Ok(DistTable {
        beta: req.beta,
        m: req.m,
        rows: grid
            .iter()
            .zip(values.iter().zip(density))
            .map(|(&s, (&cdf, density))| DistRow { s, cdf, density })
            .collect(),
    })
}

/// Where `F` is flat to working precision the alternating jet sum can put
/// neighbours a few ulp out of order; those are levelled. A larger drop is
/// an error.
fn monotone(mut values: Vec<f64>, grid: &[f64]) -> Result<Vec<f64>> {
    for i in 1..values.len() {
        let drop = values[i - 1] - values[i];
        if drop > MONOTONE_SLACK {
            return Err(Error::NonMonotone { s: grid[i], drop });
        }
        if drop > 0.0 {
            values[i] = values[i - 1];
        }
    }
    Ok(values)
}

/// Fourth-order finite-difference derivative on a uniform grid; one-sided
/// stencils at the two ends.
pub fn five_point_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    assert!(n >= 5, "need at least five points");
    (0..n)
        .map(|i| {
            let d = if i >= 2 && i + 2 < n {
                v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]
            } else if i < 2 {
                let o = i;
                let w = &v[0..5];
                // Forward stencils at offsets 0 and 1.
                if o == 0 {
                    -25.0 * w[0] + 48.0 * w[1] - 36.0 * w[2] + 16.0 * w[3] - 3.0 * w[4]
                } else {
                    -3.0 * w[0] - 10.0 * w[1] + 18.0 * w[2] - 6.0 * w[3] + w[4]
                }
            } else {
                let w = &v[n - 5..n];
                if i == n - 1 {
                    25.0 * w[4] - 48.0 * w[3] + 36.0 * w[2] - 16.0 * w[1] + 3.0 * w[0]
                } else {
                    3.0 * w[4] + 10.0 * w[3] - 18.0 * w[2] + 6.0 * w[1] - w[0]
                }
            };
            d / (12.0 * h)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub sd: f64,
    /// Third central moment over `σ³`.
    pub skewness: f64,
    /// Excess kurtosis.
    pub kurtosis: f64,
}

/// Composite Simpson weights on a uniform grid; the last interval falls back
/// to the trapezoid rule when the count is odd.
fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    for i in 0..=even {
        w[i] = if i == 0 || i == even {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        } * h
            / 3.0;
    }
    if even < intervals {
        w[even] += 0.5 * h;
        w[intervals] += 0.5 * h;
    }
    w
}

pub fn moments(table: &DistTable) -> Result<SummaryStats> {
    let rows = &table.rows;
    if rows.len() < 5 {
        return Err(Error::InsufficientData {
            needed: 5,
            got: rows.len(),
        });
    }
    let lower = rows[0].cdf;
    let upper = rows[rows.len() - 1].cdf;
    if lower >= 1e-8 || upper <= 1.0 - 1e-8 {
        return Err(Error::Truncation { lower, upper });
    }
    let h = rows[1].s - rows[0].s;
    let w = simpson_weights(rows.len(), h);
    let raw = |p: i32| -> f64 { rows.iter().zip(&w).map(|(r, w)| w * r.density * r.s.powi(p)).sum() };
    let mass = raw(0);
    let mean = raw(1) / mass;
    let central = |p: i32| -> f64 {
        rows.iter()
            .zip(&w)
            .map(|(r, w)| w * r.density * (r.s - mean).powi(p))
            .sum::<f64>()
            / mass
    };
    let var = central(2);
    let sd = var.sqrt();
    let stats = SummaryStats {
        mean,
        sd,
        skewness: central(3) / (var * sd),
        kurtosis: central(4) / (var * var) - 3.0,
    };
    if !(sd > 0.0) || ![stats.mean, stats.skewness, stats.kurtosis].iter().all(|v| v.is_finite()) {
        return Err(Error::NumericalRange {
            context: "computing moments",
        });
    }
    Ok(stats)
}

/// Grid on which moments are computed: wide enough that every supported
/// distribution has `F < 1e-8` at the left end and `F > 1 - 1e-8` at the right.
pub fn moment_grid() -> Vec<f64> {
    uniform_grid(-13.0, 10.0, 0.01).expect("static grid")
}

/// `sup_s |F₄(s, m) - F₁(s, 2m)|` over `s ∈ [-13, 6]` in steps of 0.01.
pub fn interlacing_residual(m: usize, sol: &PainleveSolution) -> Result<f64> {
    check_index(2 * m, sol)?;
    let grid = uniform_grid(-13.0, 6.0, 0.01)?;
    let gaps: Vec<f64> = grid
        .par_iter()
        .map(|&s| Ok((cdf_value(Beta::Four, m, s, sol)? - cdf_value(Beta::One, 2 * m, s, sol)?).abs()))
        .collect::<Result<_>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_table(h: f64) -> DistTable {
        let grid = uniform_grid(-9.0, 9.0, h).unwrap();
        let rows = grid
            .iter()
            .map(|&s| DistRow {
                s,
                cdf: 0.5 * (1.0 + erf(s / std::f64::consts::SQRT_2)),
                density: (-0.5 * s * s).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            })
            .collect();
        DistTable {
            beta: Beta::Two,
            m: 1,
            rows,
        }
    }

    // Series erf(x) = 2/√π e^{-x²} Σ 2ⁿ x^{2n+1} / (2n+1)!!.
    fn erf(x: f64) -> f64 {
        let t = x.abs();
        let mut sum = t;
        let mut term = t;
        for n in 1..200 {
            term *= 2.0 * t * t / (2 * n + 1) as f64;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        let v = 2.0 / std::f64::consts::PI.sqrt() * (-t * t).exp() * sum;
        v.min(1.0).copysign(x)
    }

    #[test]
    fn normal_moments() {
        let m = moments(&normal_table(0.01)).unwrap();
        assert!(m.mean.abs() < 1e-12);
        assert!((m.sd - 1.0).abs() < 1e-9);
        assert!(m.skewness.abs() < 1e-6);
        assert!(m.kurtosis.abs() < 1e-6);
    }

    #[test]
    fn moments_reject_truncated_tables() {
        let mut t = normal_table(0.01);
        t.rows.truncate(t.rows.len() / 2);
        assert!(matches!(moments(&t), Err(Error::Truncation { .. })));
    }

    #[test]
    fn rounding_level_drops_are_levelled() {
        let grid = [0.0, 1.0, 2.0, 3.0];
        let one_ulp_down = 1.0 - f64::EPSILON / 2.0;
        let v = monotone(vec![0.5, 1.0, one_ulp_down, 1.0], &grid).unwrap();
        assert_eq!(v, [0.5, 1.0, 1.0, 1.0]);
        assert!(matches!(
            monotone(vec![0.5, 0.4, 0.6, 0.7], &grid),
            Err(Error::NonMonotone { s, .. }) if s == 1.0
        ));
    }

    #[test]
    fn five_point_derivative_is_exact_on_quartics() {
        let h = 0.1;
        let xs: Vec<f64> = (0..12).map(|i| i as f64 * h).collect();
        let v: Vec<f64> = xs.iter().map(|x| x.powi(4) - 2.0 * x * x + x).collect();
        let d = five_point_derivative(&v, h);
        for (x, dv) in xs.iter().zip(d) {
            assert!((dv - (4.0 * x.powi(3) - 4.0 * x + 1.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn simpson_weights_sum_to_length() {
        for n in [5, 6, 101, 102] {
            let w = simpson_weights(n, 0.5);
            assert!((w.iter().sum::<f64>() - 0.5 * (n - 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_parsing() {
        assert_eq!(Beta::from_int(4).unwrap(), Beta::Four);
        assert!(Beta::from_int(3).is_err());
    }
}
