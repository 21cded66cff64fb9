use serde::{Deserialize, Serialize};

/// One grid point of a bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    /// Sample size `n` (or the start `N` of a maximal inequality).
    pub n: u64,
    /// Grid parameter: threshold `u`, level `x` or slack `ε`.
    pub param: f64,
    pub empirical: f64,
    pub bound: f64,
    /// `bound − empirical`.
    pub margin: f64,
    pub stderr: f64,
    pub violation: bool,
}

/// Empirical side of an inequality against its stated bound, point by point.
///
/// A point is a violation iff `empirical > bound + 3·stderr`. For frequencies
/// the standard error is the binomial one at `p = min(bound, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckReport {
    pub bound_name: String,
    /// Law or instance the check was run on.
    pub subject: String,
    pub runs: u64,
    pub note: String,
    pub points: Vec<BoundPoint>,
}

pub const SIGMA_ALLOWANCE: f64 = 3.0;

impl BoundCheckReport {
    pub fn new(bound_name: impl Into<String>, subject: impl Into<String>, runs: u64) -> Self {
        Self {
            bound_name: bound_name.into(),
            subject: subject.into(),
            runs,
            note: String::new(),
            points: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Adds a frequency `hits / runs` checked against a probability bound.
    pub fn push_frequency(&mut self, n: u64, param: f64, hits: u64, bound: f64) {
        let runs = self.runs.max(1) as f64;
        let p = bound.clamp(0.0, 1.0);
        let stderr = (p * (1.0 - p) / runs).sqrt();
        self.push(n, param, hits as f64 / runs, stderr, bound);
    }

    /// Adds a sample mean with its own standard error.
    pub fn push_mean(&mut self, n: u64, param: f64, mean: f64, stderr: f64, bound: f64) {
        self.push(n, param, mean, stderr, bound);
    }

    /// Adds a deterministic measurement (no Monte-Carlo allowance).
    pub fn push_exact(&mut self, n: u64, param: f64, value: f64, bound: f64) {
        self.push(n, param, value, 0.0, bound);
    }

    fn push(&mut self, n: u64, param: f64, empirical: f64, stderr: f64, bound: f64) {
        let violation = !(empirical <= bound + SIGMA_ALLOWANCE * stderr);
        self.points.push(BoundPoint {
            n,
            param,
            empirical,
            bound,
            margin: bound - empirical,
            stderr,
            violation,
        });
    }

    pub fn violations(&self) -> usize {
        self.points.iter().filter(|p| p.violation).count()
    }

    pub fn is_clean(&self) -> bool {
        self.violations() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_allowance_is_three_binomial_sigmas() {
        let mut r = BoundCheckReport::new("b", "s", 10_000);
        // p = 0.25: σ = sqrt(0.1875 / 10^4) ≈ 0.00433
        r.push_frequency(1, 0.0, 2_629, 0.25);
        r.push_frequency(1, 0.0, 2_631, 0.25);
        assert!(!r.points[0].violation);
        assert!(r.points[1].violation);
        assert_eq!(r.violations(), 1);
    }

    #[test]
    fn bounds_above_one_are_never_violated() {
        let mut r = BoundCheckReport::new("b", "s", 100);
        r.push_frequency(1, 0.0, 100, 3.0);
        assert!(r.is_clean());
        assert_eq!(r.points[0].margin, 2.0);
    }

    #[test]
    fn nan_measurements_count_as_violations() {
        let mut r = BoundCheckReport::new("b", "s", 1);
        r.push_exact(1, 0.0, f64::NAN, 1.0);
        assert!(!r.is_clean());
    }
}
