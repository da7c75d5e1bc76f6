//! The Hastings–McLeod solution of Painlevé II, `q'' = x q + 2 q³`, and its
//! Taylor jet in `λ` about `λ = 1` for the family `q(x, λ) ~ √λ Ai(x)`.
//!
//! The order-0 profile is unstable to integrate leftward (it is a separatrix),
//! so it is computed as a boundary-value problem:
//!
//! 1. an adaptive Runge–Kutta pass from `x_right` down to `patch_point`,
//!    continued by the `x → -∞` expansion, gives a trial profile;
//! 2. Newton iteration on a Numerov discretization of `[x_min, x_right]`,
//!    with the expansion as left boundary value and `Ai(x_right)` on the
//!    right, refines it; two resolutions are combined by Richardson
//!    extrapolation (the Numerov error expands in even powers from `h⁴`).
//!
//! The whole stored grid is covered by the solve, so `q₀` has no seam where
//! the expansion takes over. Orders `k >= 1` satisfy
//! linear variational equations whose wanted solution is the one that grows
//! leftward, so they are integrated as initial-value problems from
//! `x_right`, together with the running integrals
//! `I(x) = ∫_x^∞ (u - x) q² du` (carried as `I` and `I' = -∫_x^∞ q²`) and
//! `J(x) = ∫_x^∞ q du`, one jet coefficient at a time.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::ode::{dopri5, Tolerances};
use crate::specfun::{airy, airy_tail_integral, airy_weighted_square_tail, kernel_diagonal, AIRY_RANGE};

/// Highest jet order the solver will carry.
pub const MAX_JET_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Right boundary, where `q(x, λ) = √λ Ai(x)` is imposed.
    pub x_right: f64,
    /// Rightmost admissible left end for the boundary-value solve; the
    /// expansion must be accurate here.
    pub x_left: f64,
    /// Where the trial integration hands over to the asymptotic expansion.
    pub patch_point: f64,
    /// Left end of the stored grid and of the boundary-value solve.
    pub x_min: f64,
    pub grid_step: f64,
    pub jet_order: usize,
    pub ode_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            x_right: 6.0,
            x_left: -10.0,
            patch_point: -8.0,
            x_min: -14.0,
            grid_step: 0.005,
            jet_order: 4,
            ode_tolerance: 1e-12,
        }
    }
}

fn steps_between(a: f64, b: f64, h: f64) -> Option<usize> {
    let r = (b - a) / h;
    let n = r.round();
    ((r - n).abs() < 1e-6 && n >= 1.0).then_some(n as usize)
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.grid_step > 0.0 && self.grid_step <= 0.1) {
            return bad(format!("grid_step must lie in (0, 0.1], got {}", self.grid_step));
        }
        if !(self.x_min <= self.x_left
            && self.x_left < self.patch_point
            && self.patch_point < 0.0
            && 0.0 < self.x_right)
        {
            return bad(format!(
                "need x_min <= x_left < patch_point < 0 < x_right, got {} {} {} {}",
                self.x_min, self.x_left, self.patch_point, self.x_right
            ));
        }
        if self.x_left > -5.0 {
            return bad(format!("x_left must be <= -5 for the asymptotic boundary value, got {}", self.x_left));
        }
        if self.x_right < 4.0 || self.x_right > 12.0 {
            return bad(format!("x_right must lie in [4, 12], got {}", self.x_right));
        }
        if self.x_min < -30.0 {
            return bad(format!("x_min must be >= -30, got {}", self.x_min));
        }
        if self.jet_order > MAX_JET_ORDER {
            return bad(format!("jet_order must be <= {MAX_JET_ORDER}, got {}", self.jet_order));
        }
        if !(self.ode_tolerance > 0.0 && self.ode_tolerance < 1e-3) {
            return bad(format!("ode_tolerance must lie in (0, 1e-3), got {}", self.ode_tolerance));
        }
        for (name, x) in [("x_left", self.x_left), ("patch_point", self.patch_point), ("x_min", self.x_min)] {
            if x != self.x_right && steps_between(x, self.x_right, self.grid_step / 4.0).is_none() {
                return bad(format!("{name} = {x} is not on the grid of step {}", self.grid_step));
            }
            if steps_between(x, self.x_right, self.grid_step).is_none() {
                return bad(format!("{name} = {x} is not on the grid of step {}", self.grid_step));
            }
        }
        Ok(())
    }
}

/// Taylor coefficients of `√λ` about `λ = 1`: `∏_{i<k} (1/2 - i) / k!`.
pub fn sqrt_lambda_coefficients(order: usize) -> Vec<f64> {
    let mut b = Vec::with_capacity(order + 1);
    let mut c = 1.0;
    b.push(c);
    for k in 1..=order {
        c *= (0.5 - (k - 1) as f64) / k as f64;
        b.push(c);
    }
    b
}

/// Jets of `q(x, λ)` and `q'(x, λ)` from the decaying boundary condition
/// `q ~ √λ Ai(x)`.
pub fn boundary_jet(x: f64, order: usize) -> Result<(Jet, Jet)> {
    if x < 4.0 {
        return Err(Error::Range {
            what: "boundary_jet",
            value: x,
            lo: 4.0,
            hi: AIRY_RANGE,
        });
    }
    let a = airy(x)?;
    let b = sqrt_lambda_coefficients(order);
    Ok((
        Jet::new(b.iter().map(|c| c * a.ai).collect()),
        Jet::new(b.iter().map(|c| c * a.aip).collect()),
    ))
}

/// Terms of the `t → ∞` expansion of `q₀(-t/2) / (√t / 2)`.
pub fn q0_asymptotic_terms(t: f64) -> [f64; 5] {
    let t3 = t.powi(3);
    [
        1.0,
        -1.0 / t3,
        -73.0 / (2.0 * t3 * t3),
        -10657.0 / (2.0 * t3 * t3 * t3),
        -13_912_277.0 / (8.0 * t3 * t3 * t3 * t3),
    ]
}

/// `q₀(-t/2)` from its large-`t` expansion.
pub fn q0_asymptotic(t: f64) -> Result<f64> {
    if !(t >= 10.0) || !t.is_finite() {
        return Err(Error::Range {
            what: "q0_asymptotic",
            value: t,
            lo: 10.0,
            hi: f64::INFINITY,
        });
    }
    Ok(0.5 * t.sqrt() * q0_asymptotic_terms(t).iter().sum::<f64>())
}

/// `d/dx q₀(x)` at `x = -t/2`, differentiating the expansion termwise.
fn q0_asymptotic_derivative(t: f64) -> f64 {
    // q₀ = ½ Σ c_k t^{1/2 - 3k}; dq/dx = -2 dq/dt.
    let c = [1.0, -1.0, -73.0 / 2.0, -10657.0 / 2.0, -13_912_277.0 / 8.0];
    let dqdt: f64 = c
        .iter()
        .enumerate()
        .map(|(k, ck)| {
            let p = 0.5 - 3.0 * k as f64;
            0.5 * ck * p * t.powf(p - 1.0)
        })
        .sum();
    -2.0 * dqdt
}

/// Prefactor and bracket of the `t → ∞` expansion of `q₁(-t/2)`.
pub fn q1_asymptotic_parts(t: f64) -> (f64, f64) {
    let r = t.powf(1.5);
    let prefactor = (t.powf(1.5) / 3.0).exp() / (2.0 * (2.0 * std::f64::consts::PI).sqrt() * t.powf(0.25));
    let bracket = 1.0 + 17.0 / (24.0 * r)
        + 1513.0 / (128.0 * 9.0 * r * r)
        + 850_193.0 / (1024.0 * 81.0 * r * r * r)
        - 407_117_521.0 / (32768.0 * 243.0 * r * r * r * r);
    (prefactor, bracket)
}

/// `q₁(-t/2) = ∂_λ q(-t/2, λ)|_{λ=1}` from its large-`t` expansion.
pub fn q1_asymptotic(t: f64) -> Result<f64> {
    let range = Error::Range {
        what: "q1_asymptotic",
        value: t,
        lo: 10.0,
        hi: 400.0,
    };
    if !(10.0..=400.0).contains(&t) {
        return Err(range);
    }
    let (p, b) = q1_asymptotic_parts(t);
    let v = p * b;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(range)
    }
}

/// Diagnostics of the boundary-value refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BvpReport {
    pub newton_iterations: usize,
    /// Max Numerov residual at the final iterate (fine grid).
    pub max_residual: f64,
    /// Max difference between the two Numerov resolutions.
    pub richardson_gap: f64,
}

/// Gridded jets of `q`, `q'`, `I`, `I'` and `J` on an ascending uniform grid.
#[derive(Debug, Clone)]
pub struct PainleveSolution {
    config: SolverConfig,
    grid: Vec<f64>,
    q: Vec<Jet>,
    qprime: Vec<Jet>,
    i: Vec<Jet>,
    iprime: Vec<Jet>,
    j: Vec<Jet>,
    report: BvpReport,
}

/// Jets of `I(s, λ)` and `J(s, λ) = μ(s, λ)` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrals {
    pub i: Jet,
    pub j: Jet,
}

impl PainleveSolution {
    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn order(&self) -> usize {
        self.config.jet_order
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn q(&self) -> &[Jet] {
        &self.q
    }

    pub fn qprime(&self) -> &[Jet] {
        &self.qprime
    }

    /// Jets of `I(x) = ∫_x^∞ (u - x) q(u, λ)² du`.
    pub fn i(&self) -> &[Jet] {
        &self.i
    }

    /// Jets of `I'(x) = -∫_x^∞ q(u, λ)² du`.
    pub fn iprime(&self) -> &[Jet] {
        &self.iprime
    }

    /// Jets of `J(x) = ∫_x^∞ q(u, λ) du`.
    pub fn j(&self) -> &[Jet] {
        &self.j
    }

    pub fn bvp_report(&self) -> BvpReport {
        self.report
    }

    pub fn x_min(&self) -> f64 {
        self.grid[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.grid.last().expect("grid is never empty")
    }

    /// Index of the grid point at `x`, if `x` is (numerically) on the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let h = self.config.grid_step;
        let r = (x - self.grid[0]) / h;
        let i = r.round();
        ((r - i).abs() < 1e-7 && i >= 0.0 && (i as usize) < self.grid.len()).then_some(i as usize)
    }

    /// `I` and `J` jets at any `s` from the left end of the grid up to the
    /// Airy range. Between grid points a quintic Hermite interpolant uses the
    /// exact first and second derivatives (`I'' = q²`, `J' = -q`, `J'' = -q'`);
    /// right of `x_right` the linear regime `q = √λ Ai` is integrated directly.
    pub fn integrals_at(&self, s: f64) -> Result<Integrals> {
        let order = self.order();
        if !(s >= self.x_min()) || s > AIRY_RANGE {
            return Err(Error::Range {
                what: "integrals_at",
                value: s,
                lo: self.x_min(),
                hi: AIRY_RANGE,
            });
        }
        if s > self.x_max() {
            let a2 = airy_weighted_square_tail(s)?;
            let a1 = airy_tail_integral(s)?;
            let mut i = Jet::zero(order);
            let mut coeffs = i.coeffs().to_vec();
            coeffs[0] = a2;
            if order >= 1 {
                coeffs[1] = a2;
            }
            i = Jet::new(coeffs);
            let j = Jet::new(sqrt_lambda_coefficients(order).iter().map(|b| b * a1).collect());
            return Ok(Integrals { i, j });
        }
        if let Some(k) = self.index_of(s) {
            return Ok(Integrals {
                i: self.i[k].clone(),
                j: self.j[k].clone(),
            });
        }
        let h = self.config.grid_step;
        let k = (((s - self.grid[0]) / h).floor() as usize).min(self.grid.len() - 2);
        let t = (s - self.grid[k]) / h;
        let q2a = &self.q[k] * &self.q[k];
        let q2b = &self.q[k + 1] * &self.q[k + 1];
        let mut ic = vec![0.0; order + 1];
        let mut jc = vec![0.0; order + 1];
        for m in 0..=order {
            ic[m] = hermite5(
                t,
                h,
                [self.i[k].coeff(m), self.iprime[k].coeff(m), q2a.coeff(m)],
                [self.i[k + 1].coeff(m), self.iprime[k + 1].coeff(m), q2b.coeff(m)],
            );
            jc[m] = hermite5(
                t,
                h,
                [self.j[k].coeff(m), -self.q[k].coeff(m), -self.qprime[k].coeff(m)],
                [self.j[k + 1].coeff(m), -self.q[k + 1].coeff(m), -self.qprime[k + 1].coeff(m)],
            );
        }
        Ok(Integrals {
            i: Jet::new(ic),
            j: Jet::new(jc),
        })
    }

    /// Writes the grid as CSV with columns `x, q0..qM, I0..IM, J0..JM`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let m = self.order();
        let mut header = vec!["x".to_string()];
        for prefix in ["q", "I", "J"] {
            header.extend((0..=m).map(|k| format!("{prefix}{k}")));
        }
        writeln!(out, "{}", header.join(","))?;
        for (idx, x) in self.grid.iter().enumerate() {
            let mut row = vec![format_sci(*x)];
            for jets in [&self.q, &self.i, &self.j] {
                row.extend(jets[idx].coeffs().iter().map(|c| format_sci(*c)));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Fixed 15-significant-digit scientific notation.
pub fn format_sci(v: f64) -> String {
    format!("{v:.14e}")
}

/// Quintic Hermite interpolation on `[x_k, x_k + h]` at fraction `t` from
/// value, first and second derivative at both ends.
pub fn hermite5(t: f64, h: f64, left: [f64; 3], right: [f64; 3]) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h01 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h02 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h10 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h12 = 0.5 * (t3 - 2.0 * t4 + t5);
    left[0] * h00 + h * left[1] * h01 + h * h * left[2] * h02 + right[0] * h10 + h * right[1] * h11 + h * h * right[2] * h12
}

/// Solves the jet system on the configured grid.
pub fn solve(config: &SolverConfig) -> Result<PainleveSolution> {
    config.validate()?;
    let profile = solve_order_zero(config)?;
    integrate_jets(config, &profile)
}

/// `q₀` on the half-step grid of `[x_min, x_right]`, ascending.
struct OrderZeroProfile {
    /// Ascending on the `h/2` grid over `[x_min, x_right]`.
    q: Vec<f64>,
    /// Ascending on the `h/4` grid.
    quarter: Vec<f64>,
    report: BvpReport,
}

impl OrderZeroProfile {
    /// `q₀` at `x = x_right - j·h/2` (`fine = false`) or `x_right - j·h/4`.
    fn at_index_from_right(&self, fine: bool, j: usize, x: f64) -> f64 {
        let v = if fine { &self.quarter } else { &self.q };
        let n = v.len() - 1;
        if j <= n {
            v[n - j]
        } else {
            // Below x_min (RK4 midpoints only): the expansion.
            0.5 * (-2.0 * x).sqrt() * q0_asymptotic_terms(-2.0 * x).iter().sum::<f64>()
        }
    }
}

fn solve_order_zero(config: &SolverConfig) -> Result<OrderZeroProfile> {
    let coarse = config.grid_step / 2.0;
    let fine = config.grid_step / 4.0;
    let left_value = q0_asymptotic(-2.0 * config.x_min)?;
    let right_value = airy(config.x_right)?.ai;

    let trial = trial_profile(config, coarse)?;
    let (q_coarse, _, _) = numerov_bvp(config.x_min, config.x_right, coarse, &trial, left_value, right_value)?;

    // Seed the fine solve by cubic interpolation of the coarse solution.
    let n_fine = steps_between(config.x_min, config.x_right, fine).expect("validated grid");
    let seed: Vec<f64> = (0..=n_fine)
        .map(|i| {
            if i % 2 == 0 {
                q_coarse[i / 2]
            } else {
                let c = i / 2;
                let lo = c.saturating_sub(1);
                let hi = (c + 2).min(q_coarse.len() - 1);
                if lo + 3 == hi {
                    (-q_coarse[lo] + 9.0 * q_coarse[c] + 9.0 * q_coarse[c + 1] - q_coarse[hi]) / 16.0
                } else {
                    0.5 * (q_coarse[c] + q_coarse[c + 1])
                }
            }
        })
        .collect();
    let (q_fine, iterations, residual) =
        numerov_bvp(config.x_min, config.x_right, fine, &seed, left_value, right_value)?;

    let mut gap: f64 = 0.0;
    let q: Vec<f64> = q_coarse
        .iter()
        .enumerate()
        .map(|(i, &qc)| {
            let qf = q_fine[2 * i];
            gap = gap.max((qf - qc).abs());
            (16.0 * qf - qc) / 15.0
        })
        .collect();
    let quarter = q_fine
        .iter()
        .enumerate()
        .map(|(i, &qf)| if i % 2 == 0 { q[i / 2] } else { qf })
        .collect();
    Ok(OrderZeroProfile {
        q,
        quarter,
        report: BvpReport {
            newton_iterations: iterations,
            max_residual: residual,
            richardson_gap: gap,
        },
    })
}

/// Trial `q₀` on the grid of step `h` over `[x_min, x_right]`, ascending:
/// adaptive integration from the Airy data down to the patch point, then
/// the asymptotic expansion.
fn trial_profile(config: &SolverConfig, h: f64) -> Result<Vec<f64>> {
    let n = steps_between(config.x_min, config.x_right, h).expect("validated grid");
    let a = airy(config.x_right)?;
    let mut y = [a.ai, a.aip];
    let mut out = vec![0.0; n + 1];
    out[n] = y[0];
    let tol = Tolerances {
        rtol: config.ode_tolerance,
        atol: config.ode_tolerance * 1e-3,
        min_step: 1e-10,
    };
    let mut integrating = true;
    for r in 1..=n {
        let x_from = config.x_right - (r - 1) as f64 * h;
        let x_to = config.x_right - r as f64 * h;
        if integrating && x_to >= config.patch_point - 1e-12 {
            dopri5(
                |x, y, dy| {
                    dy[0] = y[1];
                    dy[1] = x * y[0] + 2.0 * y[0].powi(3);
                },
                x_from,
                x_to,
                &mut y,
                tol,
                h,
            )?;
            out[n - r] = y[0];
        } else {
            integrating = false;
            out[n - r] = q0_asymptotic(-2.0 * x_to)?;
        }
    }
    Ok(out)
}

/// Newton iteration for the Numerov discretization of `q'' = x q + 2q³` with
/// Dirichlet data. Returns the ascending profile, the iteration count and
/// the final max residual.
fn numerov_bvp(
    x_left: f64,
    x_right: f64,
    h: f64,
    guess: &[f64],
    left: f64,
    right: f64,
) -> Result<(Vec<f64>, usize, f64)> {
    const MAX_ITERATIONS: usize = 60;
    let n = steps_between(x_left, x_right, h).expect("validated grid");
    assert_eq!(guess.len(), n + 1);
    let xs: Vec<f64> = (0..=n).map(|i| x_left + i as f64 * h).collect();
    let mut q = guess.to_vec();
    q[0] = left;
    q[n] = right;
    let c = h * h / 12.0;

    let residual = |q: &[f64], r: &mut [f64]| {
        let f = |i: usize| xs[i] * q[i] + 2.0 * q[i].powi(3);
        for i in 1..n {
            r[i] = q[i + 1] - 2.0 * q[i] + q[i - 1] - c * (f(i + 1) + 10.0 * f(i) + f(i - 1));
        }
    };

    let mut r = vec![0.0; n + 1];
    let mut sub = vec![0.0; n + 1];
    let mut diag = vec![0.0; n + 1];
    let mut sup = vec![0.0; n + 1];
    let mut last_step = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        residual(&q, &mut r);
        let g = |i: usize| xs[i] + 6.0 * q[i] * q[i];
        for i in 1..n {
            sub[i] = 1.0 - c * g(i - 1);
            diag[i] = -2.0 - 10.0 * c * g(i);
            sup[i] = 1.0 - c * g(i + 1);
        }
        let delta = thomas(&sub[1..n], &diag[1..n], &sup[1..n], &r[1..n].iter().map(|v| -v).collect::<Vec<_>>())?;
        let mut step: f64 = 0.0;
        for (i, d) in delta.iter().enumerate() {
            q[i + 1] += d;
            step = step.max(d.abs());
        }
        if !step.is_finite() {
            return Err(Error::NumericalRange {
                context: "refining the Painlevé boundary-value problem",
            });
        }
        if step <= 1e-15 || (step <= 1e-13 && step >= last_step) {
            residual(&q, &mut r);
            let max_res = r[1..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            return Ok((q, iteration, max_res));
        }
        last_step = step;
    }
    residual(&q, &mut r);
    let max_residual = r[1..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Err(Error::Convergence {
        iterations: MAX_ITERATIONS,
        max_residual,
    })
}

/// Tridiagonal solve; `sub[0]` and `sup[last]` are ignored.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::NumericalRange {
            context: "solving the Newton system",
        });
    }
    c[0] = sup[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        if beta == 0.0 {
            return Err(Error::NumericalRange {
                context: "solving the Newton system",
            });
        }
        c[i] = if i + 1 < n { sup[i] / beta } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

// State layout for the leftward sweep: order 0 carries [q', K, I, J] with
// K = ∫_x^∞ q², higher orders carry [q, q', K, I, J].
const ZERO_WIDTH: usize = 4;
const ORDER_WIDTH: usize = 5;

fn base(k: usize) -> usize {
    ZERO_WIDTH + (k - 1) * ORDER_WIDTH
}

fn convolve(a: &[f64], b: &[f64], out: &mut [f64]) {
    for k in 0..out.len() {
        out[k] = (0..=k).map(|j| a[j] * b[k - j]).sum();
    }
}

struct JetRhs {
    order: usize,
    q: Vec<f64>,
    q2: Vec<f64>,
    q3: Vec<f64>,
}

impl JetRhs {
    fn new(order: usize) -> Self {
        Self {
            order,
            q: vec![0.0; order + 1],
            q2: vec![0.0; order + 1],
            q3: vec![0.0; order + 1],
        }
    }

    fn load(&mut self, q0: f64, state: &[f64]) {
        self.q[0] = q0;
        for k in 1..=self.order {
            self.q[k] = state[base(k)];
        }
        convolve(&self.q, &self.q, &mut self.q2);
        convolve(&self.q2, &self.q, &mut self.q3);
    }

    fn eval(&mut self, x: f64, q0: f64, state: &[f64], out: &mut [f64]) {
        self.load(q0, state);
        out[0] = x * q0 + 2.0 * self.q3[0];
        out[1] = -self.q2[0];
        out[2] = -state[1];
        out[3] = -q0;
        for k in 1..=self.order {
            let b = base(k);
            out[b] = state[b + 1];
            out[b + 1] = x * self.q[k] + 2.0 * self.q3[k];
            out[b + 2] = -self.q2[k];
            out[b + 3] = -state[b + 2];
            out[b + 4] = -self.q[k];
        }
    }
}

fn integrate_jets(config: &SolverConfig, profile: &OrderZeroProfile) -> Result<PainleveSolution> {
    let order = config.jet_order;
    let h = config.grid_step;
    let n = steps_between(config.x_min, config.x_right, h).expect("validated grid");

    // RK4 at h and h/2, combined by Richardson extrapolation.
    let coarse = sweep(config, profile, false)?;
    let fine = sweep(config, profile, true)?;
    let mut records: Vec<(Vec<f64>, f64)> = coarse
        .into_iter()
        .enumerate()
        .map(|(r, (c, q0))| {
            let f = &fine[2 * r].0;
            let st = c.iter().zip(f).map(|(c, f)| (16.0 * f - c) / 15.0).collect();
            (st, q0)
        })
        .collect();

    // Unpack into ascending order.
    records.reverse();
    let mut grid = Vec::with_capacity(n + 1);
    let (mut qs, mut qps, mut is, mut ips, mut js) = (vec![], vec![], vec![], vec![], vec![]);
    for (idx, (st, q0)) in records.into_iter().enumerate() {
        grid.push(config.x_right - (n - idx) as f64 * h);
        let mut q = vec![q0];
        let mut qp = vec![st[0]];
        let mut i = vec![st[2]];
        let mut ip = vec![-st[1]];
        let mut j = vec![st[3]];
        for k in 1..=order {
            let s = base(k);
            q.push(st[s]);
            qp.push(st[s + 1]);
            ip.push(-st[s + 2]);
            i.push(st[s + 3]);
            j.push(st[s + 4]);
        }
        qs.push(Jet::new(q));
        qps.push(Jet::new(qp));
        is.push(Jet::new(i));
        ips.push(Jet::new(ip));
        js.push(Jet::new(j));
    }
    Ok(PainleveSolution {
        config: *config,
        grid,
        q: qs,
        qprime: qps,
        i: is,
        iprime: ips,
        j: js,
        report: profile.report,
    })
}

/// One RK4 pass from `x_right` to `x_min`, at step `h` or `h/2`. Returns the
/// state and `q₀` at each step, right to left.
fn sweep(config: &SolverConfig, profile: &OrderZeroProfile, half: bool) -> Result<Vec<(Vec<f64>, f64)>> {
    let order = config.jet_order;
    let h = if half { config.grid_step / 2.0 } else { config.grid_step };
    let n = steps_between(config.x_min, config.x_right, config.grid_step).expect("validated grid")
        * if half { 2 } else { 1 };
    let width = ZERO_WIDTH + order * ORDER_WIDTH;

    let a = airy(config.x_right)?;
    let tail_ai = airy_tail_integral(config.x_right)?;
    let tail_sq = kernel_diagonal(config.x_right, a);
    let tail_weighted = airy_weighted_square_tail(config.x_right)?;
    let b = sqrt_lambda_coefficients(order);

    let mut state = vec![0.0; width];
    state[0] = a.aip;
    state[1] = tail_sq;
    state[2] = tail_weighted;
    state[3] = tail_ai;
    for k in 1..=order {
        let s = base(k);
        state[s] = b[k] * a.ai;
        state[s + 1] = b[k] * a.aip;
        // q² = λ Ai² in the linear regime: only orders 0 and 1 survive.
        state[s + 2] = if k == 1 { tail_sq } else { 0.0 };
        state[s + 3] = if k == 1 { tail_weighted } else { 0.0 };
        state[s + 4] = b[k] * tail_ai;
    }

    let mut rhs = JetRhs::new(order);
    let mut records: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    records.push((state.clone(), profile.at_index_from_right(half, 0, config.x_right)));

    let mut k1 = vec![0.0; width];
    let mut k2 = vec![0.0; width];
    let mut k3 = vec![0.0; width];
    let mut k4 = vec![0.0; width];
    let mut tmp = vec![0.0; width];
    let step = -h;
    for r in 0..n {
        let x = config.x_right - r as f64 * h;
        let xm = x - 0.5 * h;
        let xe = x - h;
        let q_a = profile.at_index_from_right(half, 2 * r, x);
        let q_m = profile.at_index_from_right(half, 2 * r + 1, xm);
        let q_e = profile.at_index_from_right(half, 2 * r + 2, xe);

        rhs.eval(x, q_a, &state, &mut k1);
        for i in 0..width {
            tmp[i] = state[i] + 0.5 * step * k1[i];
        }
        rhs.eval(xm, q_m, &tmp, &mut k2);
        for i in 0..width {
            tmp[i] = state[i] + 0.5 * step * k2[i];
        }
        rhs.eval(xm, q_m, &tmp, &mut k3);
        for i in 0..width {
            tmp[i] = state[i] + step * k3[i];
        }
        rhs.eval(xe, q_e, &tmp, &mut k4);
        for i in 0..width {
            state[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalRange {
                context: "integrating the λ-jet equations",
            });
        }
        records.push((state.clone(), q_e));
    }
    Ok(records)
}

/// `q(x, λ)` and its integrals for one fixed `λ ∈ (0, 1)`, obtained by direct
/// leftward integration. For `λ < 1` the solution is of Ablowitz–Segur type
/// and the leftward problem is well conditioned; as `λ → 1` it degenerates
/// into the separatrix handled by [`solve`].
#[derive(Debug, Clone)]
pub struct LambdaProfile {
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub q: Vec<f64>,
    pub qprime: Vec<f64>,
    pub i: Vec<f64>,
    pub iprime: Vec<f64>,
    pub j: Vec<f64>,
    grid_step: f64,
}

impl LambdaProfile {
    /// `D₂(s, λ) = exp(-I(s))`.
    pub fn d2(&self, s: f64) -> Result<f64> {
        Ok((-self.i_at(s)?).exp())
    }

    pub fn i_at(&self, s: f64) -> Result<f64> {
        let x0 = self.grid[0];
        let last = *self.grid.last().expect("grid is never empty");
        if !(s >= x0 && s <= last) {
            return Err(Error::Range {
                what: "LambdaProfile::i_at",
                value: s,
                lo: x0,
                hi: last,
            });
        }
        let h = self.grid_step;
        let k = (((s - x0) / h).floor() as usize).min(self.grid.len() - 2);
        let t = (s - self.grid[k]) / h;
        Ok(hermite5(
            t,
            h,
            [self.i[k], self.iprime[k], self.q[k] * self.q[k]],
            [self.i[k + 1], self.iprime[k + 1], self.q[k + 1] * self.q[k + 1]],
        ))
    }
}

pub fn solve_at_lambda(lambda: f64, config: &SolverConfig) -> Result<LambdaProfile> {
    config.validate()?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Range {
            what: "solve_at_lambda",
            value: lambda,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let h = config.grid_step;
    let n = steps_between(config.x_min, config.x_right, h).expect("validated grid");
    let a = airy(config.x_right)?;
    let r = lambda.sqrt();
    // [q, q', K = ∫q², I, J]
    let mut y = [
        r * a.ai,
        r * a.aip,
        lambda * kernel_diagonal(config.x_right, a),
        lambda * airy_weighted_square_tail(config.x_right)?,
        r * airy_tail_integral(config.x_right)?,
    ];
    let tol = Tolerances {
        rtol: config.ode_tolerance,
        atol: config.ode_tolerance * 1e-4,
        min_step: 1e-10,
    };
    let mut rows = Vec::with_capacity(n + 1);
    rows.push(y);
    for step in 1..=n {
        let x_from = config.x_right - (step - 1) as f64 * h;
        let x_to = config.x_right - step as f64 * h;
        dopri5(
            |x, y, dy| {
                dy[0] = y[1];
                dy[1] = x * y[0] + 2.0 * y[0].powi(3);
                dy[2] = -y[0] * y[0];
                dy[3] = -y[2];
                dy[4] = -y[0];
            },
            x_from,
            x_to,
            &mut y,
            tol,
            h,
        )?;
        rows.push(y);
    }
    rows.reverse();
    let grid = (0..=n).map(|i| config.x_right - (n - i) as f64 * h).collect();
    Ok(LambdaProfile {
        lambda,
        grid,
        q: rows.iter().map(|r| r[0]).collect(),
        qprime: rows.iter().map(|r| r[1]).collect(),
        i: rows.iter().map(|r| r[3]).collect(),
        iprime: rows.iter().map(|r| -r[2]).collect(),
        j: rows.iter().map(|r| r[4]).collect(),
        grid_step: h,
    })
}

/// Exposed for diagnostics: `q₀'` from the expansion at `x = -t/2`.
pub fn q0_asymptotic_slope(t: f64) -> Result<f64> {
    q0_asymptotic(t)?;
    Ok(q0_asymptotic_derivative(t))
}
