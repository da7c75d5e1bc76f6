//! Truncated Taylor series ("jets") in `ε = λ - 1`.
//!
//! A jet of order `M` holds `c_0..c_M` with `c_k = f^{(k)}(1) / k!`. Every
//! operation closes at order `M`: coefficient `k` of a result only reads
//! coefficients `<= k` of its operands.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation order; enough for `m <= 4` and the interlacing check.
pub const DEFAULT_ORDER: usize = 4;

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 30;

const SINGULAR_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    coeffs: Vec<f64>,
}

/// The operations accepted by [`jet_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Mul,
    Recip,
    Sqrt,
    Exp,
    Cosh,
    Sinh,
}

impl Jet {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least the constant term");
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![0.0; order + 1])
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = value;
        j
    }

    /// The jet of `ε` itself, `[0, 1, 0, ...]`.
    pub fn epsilon(order: usize) -> Self {
        let mut j = Self::zero(order);
        if order >= 1 {
            j.coeffs[1] = 1.0;
        }
        j
    }

    /// The jet of `λ = 1 + ε`.
    pub fn lambda(order: usize) -> Self {
        let mut j = Self::epsilon(order);
        j.coeffs[0] = 1.0;
        j
    }

    /// The jet of `λ̃ - 1 = (2λ - λ²) - 1 = -ε²`.
    pub fn lambda_tilde_offset(order: usize) -> Self {
        let mut j = Self::zero(order);
        if order >= 2 {
            j.coeffs[2] = -1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// The `k`-th derivative at `λ = 1`, i.e. `k! c_k`.
    pub fn derivative(&self, k: usize) -> f64 {
        self.coeffs[k] * factorial(k)
    }

    /// Evaluates the truncated series at `ε`.
    pub fn eval(&self, eps: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * eps + c)
    }

    /// Copy truncated (or zero-extended) to `order`.
    pub fn with_order(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, 0.0);
        Self { coeffs }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add_constant(&self, v: f64) -> Self {
        let mut j = self.clone();
        j.coeffs[0] += v;
        j
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn check_order(&self, other: &Jet) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.check_order(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_order(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn add_unchecked(&self, other: &Jet) -> Jet {
        Jet::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect())
    }

    fn mul_unchecked(&self, other: &Jet) -> Jet {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (0..=k).map(|j| self.coeffs[j] * other.coeffs[k - j]).sum();
        }
        Jet::new(out)
    }

    pub fn recip(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0.abs() <= SINGULAR_THRESHOLD {
            return Err(Error::SingularJet { constant: a0 });
        }
        let n = self.coeffs.len();
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.coeffs[j] * b[k - j]).sum();
            b[k] = -s / a0;
        }
        Ok(Jet::new(b))
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet> {
        self.try_mul(&other.recip()?)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0 <= SINGULAR_THRESHOLD {
            return Err(Error::SingularJet { constant: a0 });
        }
        let n = self.coeffs.len();
        let mut b = vec![0.0; n];
        b[0] = a0.sqrt();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| b[j] * b[k - j]).sum();
            b[k] = (self.coeffs[k] - s) / (2.0 * b[0]);
        }
        Ok(Jet::new(b))
    }

    /// `exp` via `b' = a' b`: `k b_k = Σ_{j=1}^{k} j a_j b_{k-j}`.
    pub fn exp(&self) -> Jet {
        let n = self.coeffs.len();
        let mut b = vec![0.0; n];
        b[0] = self.coeffs[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.coeffs[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Jet::new(b)
    }

    /// `(cosh a, sinh a)` from the coupled recurrences `c' = a' s`, `s' = a' c`.
    pub fn cosh_sinh(&self) -> (Jet, Jet) {
        let n = self.coeffs.len();
        let mut c = vec![0.0; n];
        let mut s = vec![0.0; n];
        c[0] = self.coeffs[0].cosh();
        s[0] = self.coeffs[0].sinh();
        for k in 1..n {
            let mut sc = 0.0;
            let mut ss = 0.0;
            for j in 1..=k {
                let ja = j as f64 * self.coeffs[j];
                sc += ja * s[k - j];
                ss += ja * c[k - j];
            }
            c[k] = sc / k as f64;
            s[k] = ss / k as f64;
        }
        (Jet::new(c), Jet::new(s))
    }

    pub fn cosh(&self) -> Jet {
        self.cosh_sinh().0
    }

    pub fn sinh(&self) -> Jet {
        self.cosh_sinh().1
    }

    /// `self ∘ inner`, where `inner` is a perturbation (`c_0 = 0`) about the
    /// same base point. Horner evaluation in jet arithmetic.
    pub fn compose(&self, inner: &Jet) -> Result<Jet> {
        self.check_order(inner)?;
        if inner.coeffs[0] != 0.0 {
            return Err(Error::CompositionBase {
                constant: inner.coeffs[0],
            });
        }
        let order = self.order();
        let mut acc = Jet::constant(self.coeffs[order], order);
        for k in (0..order).rev() {
            acc = acc.mul_unchecked(inner).add_constant(self.coeffs[k]);
        }
        Ok(acc)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.try_add(rhs).expect("jet orders must match")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.try_add(&-rhs).expect("jet orders must match")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.try_mul(rhs).expect("jet orders must match")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Single entry point over the jet operations; `b` is used by binary ops only.
pub fn jet_arith(op: JetOp, a: &Jet, b: Option<&Jet>) -> Result<Jet> {
    let need_b = || {
        b.ok_or_else(|| Error::InvalidConfig(format!("{op:?} needs a second operand")))
    };
    match op {
        JetOp::Add => a.try_add(need_b()?),
        JetOp::Mul => a.try_mul(need_b()?),
        JetOp::Recip => a.recip(),
        JetOp::Sqrt => a.sqrt(),
        JetOp::Exp => Ok(a.exp()),
        JetOp::Cosh => Ok(a.cosh()),
        JetOp::Sinh => Ok(a.sinh()),
    }
}

pub fn jet_compose(outer: &Jet, inner: &Jet) -> Result<Jet> {
    outer.compose(inner)
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

/// Derivatives `a_j = d^j/dλ^j √(λ/(2-λ))` at `λ = 1`, computed twice:
/// through jet arithmetic and through the two-term recursion
/// `a_j = (j-1) a_{j-1}` (j even), `a_j = j a_{j-1}` (j odd).
#[derive(Debug, Clone, PartialEq)]
pub struct AjSequence {
    pub via_jets: Vec<f64>,
    pub via_recursion: Vec<f64>,
}

impl AjSequence {
    /// Largest relative disagreement between the two routes.
    pub fn max_relative_gap(&self) -> f64 {
        self.via_jets
            .iter()
            .zip(&self.via_recursion)
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn aj_sequence(n_max: usize) -> Result<AjSequence> {
    if n_max > MAX_ORDER {
        return Err(Error::Range {
            what: "aj_sequence order",
            value: n_max as f64,
            lo: 0.0,
            hi: MAX_ORDER as f64,
        });
    }
    let lambda = Jet::lambda(n_max);
    let two_minus_lambda = Jet::constant(2.0, n_max).try_add(&-&lambda)?;
    let ratio = lambda.try_mul(&two_minus_lambda.recip()?)?;
    let f = ratio.sqrt()?;
    let via_jets = (0..=n_max).map(|j| f.derivative(j)).collect();

    let mut via_recursion = Vec::with_capacity(n_max + 1);
    via_recursion.push(1.0);
    for j in 1..=n_max {
        let prev = via_recursion[j - 1];
        let factor = if j % 2 == 0 { j - 1 } else { j };
        via_recursion.push(factor as f64 * prev);
    }
    Ok(AjSequence {
        via_jets,
        via_recursion,
    })
}
