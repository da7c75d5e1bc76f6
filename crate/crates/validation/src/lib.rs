//! Bookkeeping for the acceptance run: each criterion produces one verdict
//! line, and the run fails if any criterion does.

use std::fmt;
use std::time::Duration;

#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} [{}] {} ({:.1} s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Collects individual comparisons for one criterion.
#[derive(Debug, Default)]
pub struct Checks {
    failures: Vec<String>,
    worst: Option<(f64, f64, String)>,
    count: usize,
}

impl Checks {
    pub fn new() -> Self {
        Self::default()
    }

    /// `|got - want| <= tol`.
    pub fn close(&mut self, label: impl Into<String>, got: f64, want: f64, tol: f64) {
        self.bound(label, (got - want).abs(), tol);
    }

    /// `|got - want| <= tol |want|`.
    pub fn close_relative(&mut self, label: impl Into<String>, got: f64, want: f64, tol: f64) {
        self.bound(label, ((got - want) / want).abs(), tol);
    }

    /// `value <= limit`.
    pub fn bound(&mut self, label: impl Into<String>, value: f64, limit: f64) {
        let label = label.into();
        self.count += 1;
        let ratio = value / limit;
        if !(value <= limit) {
            self.failures.push(format!("{label}: {value:.3e} > {limit:.0e}"));
        }
        if self.worst.as_ref().is_none_or(|w| !(ratio <= w.0 / w.1)) {
            self.worst = Some((value, limit, label));
        }
    }

    pub fn require(&mut self, label: impl Into<String>, ok: bool) {
        self.count += 1;
        if !ok {
            self.failures.push(label.into());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        if !self.failures.is_empty() {
            return format!("{} of {} checks failed; {}", self.failures.len(), self.count, self.failures.join("; "));
        }
        match &self.worst {
            Some((v, l, label)) => format!("{} checks, tightest {label}: {v:.3e} vs {l:.0e}", self.count),
            None => format!("{} checks", self.count),
        }
    }
}
