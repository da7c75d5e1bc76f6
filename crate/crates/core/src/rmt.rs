//! Monte-Carlo spectra of the Gaussian ensembles and of real Wishart
//! matrices, with soft-edge rescaling and empirical summaries.
//!
//! Every replicate draws from its own ChaCha stream keyed by
//! `(seed, rep_index)`, so results do not depend on scheduling.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{DistTable, SummaryStats};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ensemble {
    Goe,
    Gue,
    /// Quaternion self-dual; `size` counts quaternion rows.
    Gse,
    /// `A = XᵀX` with `X` an `n × p` standard normal matrix; `size` must be `p`.
    Wishart { n: usize, p: usize },
}

impl Ensemble {
    pub fn name(&self) -> &'static str {
        match self {
            Ensemble::Goe => "goe",
            Ensemble::Gue => "gue",
            Ensemble::Gse => "gse",
            Ensemble::Wishart { .. } => "wishart",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub ensemble: Ensemble,
    /// Number of eigenvalues per matrix.
    pub size: usize,
    pub reps: u64,
    pub seed: u64,
    pub top_k: usize,
}

impl EnsembleConfig {
    pub fn new(ensemble: Ensemble, size: usize, reps: u64, seed: u64, top_k: usize) -> Self {
        Self {
            ensemble,
            size,
            reps,
            seed,
            top_k,
        }
    }

    pub fn wishart(n: usize, p: usize, reps: u64, seed: u64, top_k: usize) -> Self {
        Self::new(Ensemble::Wishart { n, p }, p, reps, seed, top_k)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.top_k == 0 || self.top_k > self.size {
            return bad(format!("need 1 <= top_k <= N, got top_k = {} and N = {}", self.top_k, self.size));
        }
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if let Ensemble::Wishart { n, p } = self.ensemble {
            if p == 0 || n < p {
                return bad(format!("Wishart needs n >= p >= 1, got n = {n}, p = {p}"));
            }
            if self.size != p {
                return bad(format!("Wishart size must equal p = {p}, got {}", self.size));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    /// Edge-rescaled, descending.
    pub scaled_top: Vec<f64>,
    /// Unscaled, descending.
    pub raw_top: Vec<f64>,
}

/// Generator for one replicate.
pub fn rng_for(seed: u64, rep_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep_index);
    rng
}

fn normal(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sd * z
}

/// Real symmetric, diagonal variance 1 and off-diagonal variance 1/2.
pub fn draw_goe(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let off = 0.5f64.sqrt();
    for i in 0..n {
        m[(i, i)] = normal(rng, 1.0);
        for j in i + 1..n {
            let v = normal(rng, off);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Complex Hermitian, diagonal variance 1/2, real and imaginary parts of
/// off-diagonal entries each with variance 1/4.
pub fn draw_gue(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let diag = 0.5f64.sqrt();
    for i in 0..n {
        m[(i, i)] = Complex64::new(normal(rng, diag), 0.0);
        for j in i + 1..n {
            let v = Complex64::new(normal(rng, 0.5), normal(rng, 0.5));
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    m
}

/// Quaternion self-dual Hermitian as a `2N × 2N` complex matrix. Diagonal
/// quaternions are real with variance 1/2; each of the four components of an
/// off-diagonal quaternion has variance 1/4. The quaternion `a + bi + cj + dk`
/// is the block `[[a + ib, c + id], [-c + id, a - ib]]`.
pub fn draw_gse(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(2 * n, 2 * n, Complex64::new(0.0, 0.0));
    let diag = 0.5f64.sqrt();
    for i in 0..n {
        let a = normal(rng, diag);
        m[(2 * i, 2 * i)] = Complex64::new(a, 0.0);
        m[(2 * i + 1, 2 * i + 1)] = Complex64::new(a, 0.0);
        for j in i + 1..n {
            let (a, b, c, d) = (normal(rng, 0.5), normal(rng, 0.5), normal(rng, 0.5), normal(rng, 0.5));
            let block = [
                [Complex64::new(a, b), Complex64::new(c, d)],
                [Complex64::new(-c, d), Complex64::new(a, -b)],
            ];
            for (r, row) in block.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    m[(2 * i + r, 2 * j + c)] = *v;
                    m[(2 * j + c, 2 * i + r)] = v.conj();
                }
            }
        }
    }
    m
}

/// `n × p` matrix of independent standard normals.
pub fn draw_wishart_factor(n: usize, p: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, p);
    // Fill row by row so the draw order is independent of storage layout.
    for i in 0..n {
        for j in 0..p {
            x[(i, j)] = normal(rng, 1.0);
        }
    }
    x
}

/// `ℓ̂ = (ℓ - √(2N)) √2 N^{1/6}`.
pub fn edge_scale(raw_top: &[f64], n: usize) -> Vec<f64> {
    let nf = n as f64;
    let centre = (2.0 * nf).sqrt();
    let scale = std::f64::consts::SQRT_2 * nf.powf(1.0 / 6.0);
    raw_top.iter().map(|l| (l - centre) * scale).collect()
}

/// Centering and scaling constants `(μ_np, σ_np)` for the largest
/// eigenvalues of a real Wishart matrix.
pub fn wishart_centering(n: usize, p: usize) -> (f64, f64) {
    let a = ((n - 1) as f64).sqrt();
    let b = (p as f64).sqrt();
    let mu = (a + b).powi(2);
    let sigma = (a + b) * (1.0 / a + 1.0 / b).powf(1.0 / 3.0);
    (mu, sigma)
}

fn descending_top(values: impl Iterator<Item = f64>, k: usize, rep: u64) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = values.collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::SampleFailure {
            rep,
            reason: "eigensolver returned a non-finite value".into(),
        });
    }
    v.sort_by(|a, b| b.total_cmp(a));
    v.truncate(k);
    Ok(v)
}

/// Collapses the doubly degenerate spectrum of a quaternion self-dual matrix.
fn deduplicate_pairs(sorted_desc: &[f64], rep: u64) -> Result<Vec<f64>> {
    let scale = sorted_desc.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    sorted_desc
        .chunks(2)
        .map(|pair| {
            if pair.len() != 2 || (pair[0] - pair[1]).abs() > 1e-8 * scale {
                return Err(Error::SampleFailure {
                    rep,
                    reason: "quaternion spectrum is not paired".into(),
                });
            }
            Ok(0.5 * (pair[0] + pair[1]))
        })
        .collect()
}

pub fn sample_spectrum(config: &EnsembleConfig, rep_index: u64) -> Result<SpectrumSample> {
    config.validate()?;
    if rep_index >= config.reps {
        return Err(Error::Range {
            what: "rep_index",
            value: rep_index as f64,
            lo: 0.0,
            hi: config.reps as f64 - 1.0,
        });
    }
    let mut rng = rng_for(config.seed, rep_index);
    let n = config.size;
    let k = config.top_k;
    let (raw_top, scaled_top) = match config.ensemble {
        Ensemble::Goe => {
            let raw = descending_top(draw_goe(n, &mut rng).symmetric_eigenvalues().iter().copied(), k, rep_index)?;
            let scaled = edge_scale(&raw, n);
            (raw, scaled)
        }
        Ensemble::Gue => {
            let raw = descending_top(draw_gue(n, &mut rng).symmetric_eigenvalues().iter().copied(), k, rep_index)?;
            let scaled = edge_scale(&raw, n);
            (raw, scaled)
        }
        Ensemble::Gse => {
            let all = descending_top(
                draw_gse(n, &mut rng).symmetric_eigenvalues().iter().copied(),
                2 * n,
                rep_index,
            )?;
            let mut raw = deduplicate_pairs(&all, rep_index)?;
            raw.truncate(k);
            // The complex representation has dimension 2N, which sets the edge.
            let scaled = edge_scale(&raw, 2 * n);
            (raw, scaled)
        }
        Ensemble::Wishart { n: rows, p } => {
            let x = draw_wishart_factor(rows, p, &mut rng);
            let a = x.tr_mul(&x);
            let raw = descending_top(a.symmetric_eigenvalues().iter().copied(), k, rep_index)?;
            let (mu, sigma) = wishart_centering(rows, p);
            let scaled = raw.iter().map(|l| (l - mu) / sigma).collect();
            (raw, scaled)
        }
    };
    Ok(SpectrumSample { scaled_top, raw_top })
}

/// Scaled top eigenvalues of one Wishart replicate.
pub fn wishart_spectrum(n: usize, p: usize, seed: u64, rep_index: u64, top_k: usize) -> Result<Vec<f64>> {
    if p < 2 && top_k > 1 {
        return Err(Error::InvalidConfig(format!("top_k = {top_k} exceeds p = {p}")));
    }
    let cfg = EnsembleConfig::wishart(n, p, rep_index + 1, seed, top_k);
    Ok(sample_spectrum(&cfg, rep_index)?.scaled_top)
}

/// All replicates in index order. Failures are collected rather than
/// aborting the run; callers decide how many they tolerate.
pub fn simulate(config: &EnsembleConfig) -> Result<SimulationRun> {
    config.validate()?;
    let results: Vec<Result<SpectrumSample>> = (0..config.reps)
        .into_par_iter()
        .map(|rep| sample_spectrum(config, rep))
        .collect();
    let mut samples = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (rep, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => samples.push((rep as u64, s)),
            Err(e) => failures.push((rep as u64, e.to_string())),
        }
    }
    Ok(SimulationRun { samples, failures })
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub samples: Vec<(u64, SpectrumSample)>,
    pub failures: Vec<(u64, String)>,
}

impl SimulationRun {
    /// Scaled values of the `k`-th largest eigenvalue (0-based) across reps.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|(_, s)| s.scaled_top[k]).collect()
    }

    pub fn failure_fraction(&self) -> f64 {
        let total = self.samples.len() + self.failures.len();
        self.failures.len() as f64 / total.max(1) as f64
    }
}

/// Sample mean, unbiased standard deviation, skewness and excess kurtosis
/// (the last two from the moment ratios `m₃/m₂^{3/2}` and `m₄/m₂² - 3`).
pub fn summarize(samples: &[f64]) -> Result<SummaryStats> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let central = |p: i32| samples.iter().map(|x| (x - mean).powi(p)).sum::<f64>() / n;
    let m2 = central(2);
    if !(m2 > 0.0) {
        return Err(Error::NumericalRange {
            context: "summarizing a sample with zero spread",
        });
    }
    Ok(SummaryStats {
        mean,
        sd: (m2 * n / (n - 1.0)).sqrt(),
        skewness: central(3) / m2.powf(1.5),
        kurtosis: central(4) / (m2 * m2) - 3.0,
    })
}

/// Kolmogorov–Smirnov distance between an empirical sample and a CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Linear interpolation of a tabulated CDF; `s` outside the table clamps.
pub fn table_cdf(table: &DistTable, s: f64) -> f64 {
    let rows = &table.rows;
    if s <= rows[0].s {
        return rows[0].cdf;
    }
    let last = rows.len() - 1;
    if s >= rows[last].s {
        return rows[last].cdf;
    }
    let k = rows.partition_point(|r| r.s <= s) - 1;
    let t = (s - rows[k].s) / (rows[k + 1].s - rows[k].s);
    rows[k].cdf + t * (rows[k + 1].cdf - rows[k].cdf)
}

/// Smallest `s` with `F(s) = p`, by linear interpolation on the table.
pub fn invert_cdf(table: &DistTable, p: f64) -> Result<f64> {
    let rows = &table.rows;
    let (lo, hi) = (rows[0].cdf, rows[rows.len() - 1].cdf);
    if !(p > lo && p < hi) {
        return Err(Error::Range {
            what: "percentile",
            value: p,
            lo,
            hi,
        });
    }
    let k = rows.partition_point(|r| r.cdf < p);
    let (a, b) = (&rows[k - 1], &rows[k]);
    let t = if b.cdf > a.cdf { (p - a.cdf) / (b.cdf - a.cdf) } else { 0.0 };
    Ok(a.s + t * (b.s - a.s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileRow {
    pub percentile: f64,
    /// One ordinate per column, from that column's theoretical table.
    pub ordinates: Vec<f64>,
    pub proportions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileReport {
    pub rows: Vec<PercentileRow>,
}

/// For each percentile `p` and each column `j`, the fraction of
/// `columns[j]` lying at or below the `p`-ordinate of `tables[j]`.
pub fn percentile_report(columns: &[Vec<f64>], tables: &[DistTable], percentiles: &[f64]) -> Result<PercentileReport> {
    if columns.len() != tables.len() {
        return Err(Error::InvalidConfig(format!(
            "{} sample columns but {} tables",
            columns.len(),
            tables.len()
        )));
    }
    let sorted: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| {
            let mut v = c.clone();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let rows = percentiles
        .iter()
        .map(|&p| {
            let ordinates = tables.iter().map(|t| invert_cdf(t, p)).collect::<Result<Vec<_>>>()?;
            let proportions = sorted
                .iter()
                .zip(&ordinates)
                .map(|(c, &s)| {
                    if c.is_empty() {
                        0.0
                    } else {
                        c.partition_point(|x| *x <= s) as f64 / c.len() as f64
                    }
                })
                .collect();
            Ok(PercentileRow {
                percentile: p,
                ordinates,
                proportions,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PercentileReport { rows })
}
