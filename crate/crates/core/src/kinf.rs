//! Minimal KL divergence `K_inf(ν, μ)` between an empirical distribution on
//! `[0, 1]` and the set of laws with mean above `μ`, computed through its
//! one-dimensional dual
//!
//! ```text
//! K_inf(ν, μ) = max_{λ ∈ [0,1]} H(λ),   H(λ) = E_ν[ ln(1 − λ (X − μ) / (1 − μ)) ]
//! ```
//!
//! `H` is strictly concave, so the maximizer is found by a safeguarded Newton
//! iteration on `H'` with a bisection fallback. The KL-UCB index inverts
//! `μ ↦ K_inf(ν, μ)`, using the envelope identity `dK_inf/dμ = λ*/(1 − μ)`.

use serde::{Deserialize, Serialize};

use crate::distributions::{EmpiricalDistribution, FiniteLaw};
use crate::error::{domain, Error, Result};

/// A finitely supported law on `[0, 1]` that `K_inf` can be evaluated on.
pub trait Support {
    /// `(value, probability)` pairs in increasing value order.
    fn weighted_atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_;
    fn mean(&self) -> f64;
    fn is_empty(&self) -> bool;

    fn has_atom_at_one(&self) -> bool {
        self.weighted_atoms().last().is_some_and(|(x, _)| x == 1.0)
    }
}

impl Support for EmpiricalDistribution {
    fn weighted_atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights()
    }

    fn mean(&self) -> f64 {
        EmpiricalDistribution::mean(self)
    }

    fn is_empty(&self) -> bool {
        EmpiricalDistribution::is_empty(self)
    }

    fn has_atom_at_one(&self) -> bool {
        EmpiricalDistribution::has_atom_at_one(self)
    }
}

impl Support for FiniteLaw {
    fn weighted_atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms().iter().copied()
    }

    fn mean(&self) -> f64 {
        FiniteLaw::mean(self)
    }

    fn is_empty(&self) -> bool {
        false
    }
}

/// Upper end of the λ search when `ν` has an atom at 1 (where `H(1) = −∞`).
pub const LAMBDA_CAP_WITH_ATOM_AT_ONE: f64 = 1.0 - 1e-12;
pub const MAX_ITERATIONS: u32 = 100;
const BRACKET_TOL: f64 = 1e-12;
const DERIVATIVE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinfResult {
    /// `K_inf(ν, μ)` in nats.
    pub value: f64,
    pub lambda_star: f64,
    pub iterations: u32,
    pub converged: bool,
}

impl KinfResult {
    fn zero() -> Self {
        Self {
            value: 0.0,
            lambda_star: 0.0,
            iterations: 0,
            converged: true,
        }
    }
}

/// Law attaining the infimum: `ν` reweighted by `1 / (1 − λ*(x − μ)/(1 − μ))`
/// plus the leftover mass placed at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinfWitness {
    /// `(value, probability)` pairs sharing the support of `ν`.
    pub base_atoms: Vec<(f64, f64)>,
    pub mass_at_one: f64,
}

impl KinfWitness {
    pub fn total_mass(&self) -> f64 {
        self.base_atoms.iter().map(|&(_, p)| p).sum::<f64>() + self.mass_at_one
    }

    pub fn expectation(&self) -> f64 {
        self.base_atoms.iter().map(|&(x, p)| x * p).sum::<f64>() + self.mass_at_one
    }

    /// `KL(ν, witness)` evaluated atom by atom.
    pub fn kl_from<S: Support + ?Sized>(&self, nu: &S) -> f64 {
        nu.weighted_atoms()
            .zip(&self.base_atoms)
            .map(|((x, w), &(_, q))| {
                let q = if x == 1.0 { q + self.mass_at_one } else { q };
                xlog_ratio(w, q)
            })
            .sum()
    }
}

/// `p ln(p / q)` with `0 ln(0 / q) = 0` and `p ln(p / 0) = +∞` for `p > 0`.
///
/// Every KL expression in the crate goes through this helper.
pub fn xlog_ratio(p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else if q <= 0.0 {
        f64::INFINITY
    } else {
        p * (p / q).ln()
    }
}

/// `kl(p, q)` between Bernoulli laws.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    (xlog_ratio(p, q) + xlog_ratio(1.0 - p, 1.0 - q)).max(0.0)
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu < 1.0 {
        Ok(())
    } else {
        Err(domain("mu", mu, "(0, 1)"))
    }
}

fn check_nonempty<S: Support + ?Sized>(nu: &S) -> Result<()> {
    if nu.is_empty() {
        Err(Error::InconsistentResult(
            "empty empirical distribution".into(),
        ))
    } else {
        Ok(())
    }
}

/// Rescaled centred atom `z = (x − μ)/(1 − μ)`.
#[inline]
fn centred(x: f64, mu: f64) -> f64 {
    (x - mu) / (1.0 - mu)
}

/// `(H'(λ), H''(λ))` for `λ < 1` (or `λ = 1` without an atom at 1).
#[inline]
fn derivatives<S: Support + ?Sized>(nu: &S, mu: f64, lambda: f64) -> (f64, f64) {
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for (x, w) in nu.weighted_atoms() {
        let z = centred(x, mu);
        let r = z / (1.0 - lambda * z);
        d1 += w * r;
        d2 += w * r * r;
    }
    (-d1, -d2)
}

pub(crate) fn objective<S: Support + ?Sized>(nu: &S, mu: f64, lambda: f64) -> f64 {
    nu.weighted_atoms()
        .map(|(x, w)| {
            let arg = -lambda * centred(x, mu);
            if arg <= -1.0 {
                f64::NEG_INFINITY
            } else {
                w * arg.ln_1p()
            }
        })
        .sum()
}

/// `H(λ) = E_ν[ln(1 − λ(X − μ)/(1 − μ))]`; `−∞` exactly when `λ = 1` and `ν{1} > 0`.
pub fn h_value<S: Support + ?Sized>(nu: &S, mu: f64, lambda: f64) -> Result<f64> {
    check_mu(mu)?;
    check_nonempty(nu)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(domain("lambda", lambda, "[0, 1]"));
    }
    Ok(objective(nu, mu, lambda))
}

/// `H'(λ) = −E[z / (1 − λ z)]`; `−∞` at `λ = 1` when `ν{1} > 0`.
pub fn h_derivative<S: Support + ?Sized>(nu: &S, mu: f64, lambda: f64) -> Result<f64> {
    check_mu(mu)?;
    check_nonempty(nu)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(domain("lambda", lambda, "[0, 1]"));
    }
    if lambda == 1.0 && nu.has_atom_at_one() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(derivatives(nu, mu, lambda).0)
}

/// Computes `K_inf(ν, μ)` and its dual maximizer.
///
/// Non-convergence never panics: the best iterate is returned with
/// `converged = false`.
pub fn kinf<S: Support + ?Sized>(nu: &S, mu: f64) -> Result<KinfResult> {
    check_mu(mu)?;
    check_nonempty(nu)?;
    Ok(solve(nu, mu, None))
}

pub(crate) fn solve<S: Support + ?Sized>(nu: &S, mu: f64, guess: Option<f64>) -> KinfResult {
    if nu.mean() >= mu {
        return KinfResult::zero();
    }
    let atom_at_one = nu.has_atom_at_one();
    let mut hi = if atom_at_one {
        LAMBDA_CAP_WITH_ATOM_AT_ONE
    } else {
        1.0
    };
    let (d_hi, _) = derivatives(nu, mu, hi);
    if d_hi >= 0.0 {
        // maximum on the boundary of the search range
        return KinfResult {
            value: objective(nu, mu, hi).max(0.0),
            lambda_star: hi,
            iterations: 0,
            converged: true,
        };
    }

    let mut lo = 0.0;
    let (d0, dd0) = derivatives(nu, mu, 0.0);
    let mut lambda = match guess {
        Some(g) if g > lo && g < hi => g,
        _ => {
            let newton = -d0 / dd0;
            if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            }
        }
    };

    let mut converged = false;
    let mut iterations = 0;
    let mut last_step = hi - lo;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (g, gp) = derivatives(nu, mu, lambda);
        if g.abs() < DERIVATIVE_TOL {
            converged = true;
            break;
        }
        if g > 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        if hi - lo < BRACKET_TOL {
            // lo keeps H' ≥ 0, so E[1/(1 − λz)] ≤ 1 there
            lambda = lo;
            converged = true;
            break;
        }
        let step = g / gp;
        let newton = lambda - step;
        // bisect when Newton leaves the bracket or stalls
        if newton > lo && newton < hi && 2.0 * step.abs() <= last_step {
            last_step = step.abs();
            lambda = newton;
        } else {
            last_step = hi - lo;
            lambda = 0.5 * (lo + hi);
        }
    }

    KinfResult {
        value: objective(nu, mu, lambda).max(0.0),
        lambda_star: lambda,
        iterations,
        converged,
    }
}

/// Builds the law attaining `K_inf(ν, μ)` from a converged solver result.
pub fn kinf_witness<S: Support + ?Sized>(
    nu: &S,
    mu: f64,
    result: &KinfResult,
) -> Result<KinfWitness> {
    check_mu(mu)?;
    check_nonempty(nu)?;
    if !result.converged {
        return Err(Error::InconsistentResult("solver did not converge".into()));
    }
    let lambda = result.lambda_star;
    if lambda == 1.0 && nu.has_atom_at_one() {
        return Err(Error::InconsistentResult(
            "lambda* = 1 is impossible with an atom at 1".into(),
        ));
    }
    if lambda == 0.0 {
        return Ok(KinfWitness {
            base_atoms: nu.weighted_atoms().collect(),
            mass_at_one: 0.0,
        });
    }
    let base_atoms: Vec<(f64, f64)> = nu
        .weighted_atoms()
        .map(|(x, w)| (x, w / (1.0 - lambda * centred(x, mu))))
        .collect();
    let used: f64 = base_atoms.iter().map(|&(_, p)| p).sum();
    Ok(KinfWitness {
        base_atoms,
        mass_at_one: (1.0 - used).max(0.0),
    })
}

/// Safeguarded Newton search for the root of an increasing function on
/// `[lo, hi]`, with `f(lo) ≤ 0 < f(hi)`. `eval` returns `(f(x), f'(x))`.
fn invert_increasing<F>(mut lo: f64, mut hi: f64, start: f64, mut eval: F) -> f64
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut x = start;
    for _ in 0..MAX_ITERATIONS {
        let (f, df) = eval(x);
        if f == 0.0 {
            return x;
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            return lo;
        }
        let newton = x - f / df;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-14 * x.abs().max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

/// `sup { μ ∈ [0, 1] : K_inf(ν, μ) ≤ threshold }`.
///
/// An empty accumulator carries no information and gets index 1.
pub fn klucb_index(nu: &EmpiricalDistribution, threshold: f64) -> f64 {
    if nu.is_binary() && !nu.is_empty() {
        bernoulli_klucb_index(nu.mean(), threshold)
    } else {
        klucb_index_general(nu, threshold)
    }
}

/// Same as [`klucb_index`] but always goes through the dual solver, even for
/// distributions supported on `{0, 1}`.
pub fn klucb_index_general(nu: &EmpiricalDistribution, threshold: f64) -> f64 {
    if nu.is_empty() || nu.is_dirac_at_one() {
        return 1.0;
    }
    let mean = nu.mean();
    if !(threshold > 0.0) {
        return mean;
    }
    let cap = mean + (threshold / 2.0).sqrt();
    let mut lambda_guess = None;
    let mut eval = |mu: f64| {
        let r = solve(nu, mu, lambda_guess);
        lambda_guess = Some(r.lambda_star);
        (r.value - threshold, r.lambda_star / (1.0 - mu))
    };
    if cap < 1.0 {
        // K_inf ≥ 2(μ − mean)², so the root lies at or below the Pinsker cap
        let (f_cap, _) = eval(cap);
        if f_cap <= 0.0 {
            return cap;
        }
        invert_increasing(mean, cap, cap, eval)
    } else {
        invert_increasing(mean, 1.0, 0.5 * (mean + 1.0), eval)
    }
}

/// `sup { q ∈ [0, 1] : kl(p, q) ≤ threshold }`.
pub fn bernoulli_klucb_index(p: f64, threshold: f64) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    if !(threshold > 0.0) {
        return p;
    }
    let cap = p + (threshold / 2.0).sqrt();
    let eval = |q: f64| (bernoulli_kl(p, q) - threshold, (q - p) / (q * (1.0 - q)));
    if cap < 1.0 {
        if bernoulli_kl(p, cap) <= threshold {
            return cap;
        }
        invert_increasing(p, cap, cap, eval)
    } else {
        invert_increasing(p, 1.0, 0.5 * (p + 1.0), eval)
    }
}

/// KL divergence between exponential laws with means `mean_hat` and `m`.
pub fn exp_kl(mean_hat: f64, m: f64) -> f64 {
    let r = mean_hat / m;
    r - 1.0 - r.ln()
}

/// Largest `m ≥ mean_hat` with `exp_kl(mean_hat, m) ≤ threshold`, clamped to `[0, 1]`.
///
/// A non-positive empirical mean gives index 0.
pub fn exp_kl_index(mean_hat: f64, threshold: f64) -> f64 {
    if !(mean_hat > 0.0) {
        return 0.0;
    }
    if mean_hat >= 1.0 {
        return 1.0;
    }
    if !(threshold > 0.0) {
        return mean_hat;
    }
    if exp_kl(mean_hat, 1.0) <= threshold {
        return 1.0;
    }
    invert_increasing(mean_hat, 1.0, 0.5 * (mean_hat + 1.0), |m| {
        (exp_kl(mean_hat, m) - threshold, (m - mean_hat) / (m * m))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn two_point(p_one: u64, p_zero: u64) -> EmpiricalDistribution {
        EmpiricalDistribution::from_counts([(0.0, p_zero), (1.0, p_one)]).unwrap()
    }

    fn dirac(x: f64) -> EmpiricalDistribution {
        EmpiricalDistribution::from_counts([(x, 1)]).unwrap()
    }

    // Dense λ-grid maximum of H; slow but independent of the Newton path.
    fn grid_max(nu: &EmpiricalDistribution, mu: f64, points: usize) -> f64 {
        (0..points)
            .map(|i| objective(nu, mu, i as f64 / (points - 1) as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn h_at_zero_and_endpoints() {
        let nu = EmpiricalDistribution::from_counts([(0.2, 2), (0.9, 1)]).unwrap();
        assert_eq!(h_value(&nu, 0.4, 0.0).unwrap(), 0.0);
        assert!((h_value(&dirac(0.0), 0.5, 1.0).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(h_value(&dirac(1.0), 0.5, 1.0).unwrap(), f64::NEG_INFINITY);
        assert!(h_value(&nu, 0.4, 0.999_999).unwrap().is_finite());
    }

    #[test]
    fn h_rejects_bad_mu() {
        let nu = dirac(0.3);
        assert!(h_value(&nu, 0.0, 0.5).is_err());
        assert!(h_value(&nu, 1.0, 0.5).is_err());
        assert!(h_derivative(&nu, 1.2, 0.5).is_err());
        assert!(kinf(&nu, -0.1).is_err());
    }

    #[test]
    fn derivative_closed_forms() {
        let nu = EmpiricalDistribution::from_counts([(0.1, 3), (0.6, 1), (1.0, 1)]).unwrap();
        let mu = 0.55;
        let at_zero = h_derivative(&nu, mu, 0.0).unwrap();
        assert!((at_zero + (nu.mean() - mu) / (1.0 - mu)).abs() < 1e-15);
        // ν = δ_0: H'(λ) = μ / (1 − μ + λμ)
        for &lambda in &[0.0, 0.3, 0.8, 1.0] {
            let d = h_derivative(&dirac(0.0), 0.4, lambda).unwrap();
            assert!((d - 0.4 / (0.6 + lambda * 0.4)).abs() < 1e-15);
        }
        assert_eq!(h_derivative(&nu, mu, 1.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn kinf_zero_when_mean_above_mu() {
        let nu = two_point(7, 3);
        let r = kinf(&nu, 0.6).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.lambda_star, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn kinf_bernoulli_half_vs_grid() {
        let nu = two_point(1, 1);
        let r = kinf(&nu, 0.7).unwrap();
        // kl(0.5, 0.7) = 0.5 ln(0.5/0.7) + 0.5 ln(0.5/0.3)
        let expected = 0.5 * (0.5f64 / 0.7).ln() + 0.5 * (0.5f64 / 0.3).ln();
        assert!((expected - 0.087_176).abs() < 1e-6);
        assert!((r.value - expected).abs() < 1e-12);
        assert!((grid_max(&nu, 0.7, 1_000_001) - expected).abs() < 1e-9);
    }

    #[test]
    fn kinf_dirac_zero_hits_boundary() {
        let r = kinf(&dirac(0.0), 0.5).unwrap();
        assert_eq!(r.lambda_star, 1.0);
        assert!((r.value - LN_2).abs() < 1e-15);
    }

    #[test]
    fn kinf_with_atom_at_one_stays_inside() {
        let nu = EmpiricalDistribution::from_counts([(0.0, 50), (1.0, 1)]).unwrap();
        let r = kinf(&nu, 0.5).unwrap();
        assert!(r.converged);
        assert!(r.lambda_star < 1.0);
        assert!((r.value - bernoulli_kl(1.0 / 51.0, 0.5)).abs() < 1e-9);
    }

    #[test]
    fn witness_trivial_and_dirac() {
        let nu = two_point(3, 1);
        let r = kinf(&nu, 0.5).unwrap();
        let w = kinf_witness(&nu, 0.5, &r).unwrap();
        assert_eq!(w.mass_at_one, 0.0);
        assert_eq!(w.base_atoms, nu.weights().collect::<Vec<_>>());

        let d0 = dirac(0.0);
        let r = kinf(&d0, 0.5).unwrap();
        let w = kinf_witness(&d0, 0.5, &r).unwrap();
        assert_eq!(w.base_atoms, vec![(0.0, 0.5)]);
        assert!((w.mass_at_one - 0.5).abs() < 1e-15);
        assert!((w.expectation() - 0.5).abs() < 1e-15);
        assert!((w.kl_from(&d0) - r.value).abs() < 1e-12);
    }

    #[test]
    fn witness_rejects_inconsistent_results() {
        let nu = EmpiricalDistribution::from_counts([(0.2, 1), (1.0, 1)]).unwrap();
        let bogus = KinfResult {
            value: 1.0,
            lambda_star: 1.0,
            iterations: 1,
            converged: true,
        };
        assert!(matches!(
            kinf_witness(&nu, 0.8, &bogus),
            Err(Error::InconsistentResult(_))
        ));
        let unconverged = KinfResult {
            converged: false,
            ..bogus
        };
        assert!(kinf_witness(&nu, 0.8, &unconverged).is_err());
    }

    #[test]
    fn bernoulli_kl_values() {
        assert_eq!(bernoulli_kl(0.3, 0.3), 0.0);
        // 0.5 ln(2/3) + 0.5 ln 2
        assert!((bernoulli_kl(0.5, 0.75) - 0.143_841).abs() < 1e-6);
        assert!((bernoulli_kl(0.0, 0.4) + (0.6f64).ln()).abs() < 1e-15);
        assert_eq!(bernoulli_kl(0.5, 1.0), f64::INFINITY);
        assert_eq!(bernoulli_kl(0.5, 0.0), f64::INFINITY);
        assert_eq!(bernoulli_kl(1.0, 1.0), 0.0);
    }

    #[test]
    fn klucb_index_closed_forms() {
        let nu = EmpiricalDistribution::from_counts([(0.2, 2), (0.7, 1)]).unwrap();
        assert_eq!(klucb_index(&nu, 0.0), nu.mean());
        for d in [0.01f64, 0.3, 2.0] {
            let expected = -(-d).exp_m1();
            assert!((klucb_index_general(&dirac(0.0), d) - expected).abs() < 1e-9);
            assert!((klucb_index(&dirac(0.0), d) - expected).abs() < 1e-9);
        }
        let d = bernoulli_kl(0.5, 0.7);
        assert!((klucb_index_general(&two_point(1, 1), d) - 0.7).abs() < 1e-6);
        assert!((klucb_index(&two_point(1, 1), d) - 0.7).abs() < 1e-6);
        assert_eq!(klucb_index(&dirac(1.0), 5.0), 1.0);
        assert_eq!(klucb_index(&EmpiricalDistribution::new(), 1.0), 1.0);
    }

    #[test]
    fn klucb_index_within_pinsker_cap() {
        let nu = EmpiricalDistribution::from_counts([(0.05, 1), (0.4, 4), (0.95, 2)]).unwrap();
        for &d in &[1e-4, 0.01, 0.1, 1.0, 10.0] {
            let idx = klucb_index(&nu, d);
            assert!(idx >= nu.mean());
            assert!(idx <= (nu.mean() + (d / 2.0).sqrt()).min(1.0) + 1e-15);
            assert!(kinf(&nu, idx - 1e-7).unwrap().value <= d + 1e-6);
        }
    }

    #[test]
    fn exp_kl_index_against_grid() {
        assert_eq!(exp_kl_index(0.1, 0.0), 0.1);
        let idx = exp_kl_index(0.1, 0.5);
        // largest grid point of (0.1, 1] still inside the constraint set
        let grid = (0..=1_000_000)
            .map(|i| 0.1 + 0.9 * i as f64 / 1e6)
            .filter(|&m| exp_kl(0.1, m) <= 0.5)
            .fold(0.0, f64::max);
        assert!((idx - grid).abs() < 1e-6, "{idx} vs {grid}");
        assert!(exp_kl_index(0.1, 0.6) > idx);
        assert_eq!(exp_kl_index(0.5, 50.0), 1.0);
        assert_eq!(exp_kl_index(0.0, 1.0), 0.0);
    }
}
