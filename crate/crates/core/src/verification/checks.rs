use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distributions::{ArmModel, EmpiricalDistribution};
use crate::error::{domain, Error, Result};
use crate::kinf::{kinf, klucb_index};
use crate::simulator::{derive_seed, split_seed};

use super::bounds::{
    concentration_bound, concentration_gamma, deviation_bound, hoeffding_integrated_bound,
    hoeffding_max_bound, integrated_deviation_bound,
};
use super::report::BoundCheckReport;

/// Last sample size inspected by the maximal inequalities, as a multiple of `N`.
pub const MAXIMAL_HORIZON_FACTOR: u64 = 50;

const TAG_DEVIATION: u64 = 1;
const TAG_HOEFFDING: u64 = 2;
const TAG_CONCENTRATION: u64 = 3;
const TAG_INTEGRATED: u64 = 4;
const TAG_HOEFFDING_INTEGRATED: u64 = 5;

/// Runs `f` once per resample with its own seeded stream; results come back
/// in run order whatever the thread count.
fn resample<T, F>(runs: u64, seed: u64, tag: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..runs)
        .into_par_iter()
        .map(|r| f(&mut ChaCha8Rng::seed_from_u64(split_seed(seed, tag, r))))
        .collect()
}

fn sample_empirical(arm: &ArmModel, n: u64, rng: &mut ChaCha8Rng) -> Result<EmpiricalDistribution> {
    let mut nu = EmpiricalDistribution::new();
    for _ in 0..n {
        nu.observe(arm.sample(rng))?;
    }
    Ok(nu)
}

fn interior_mean(arm: &ArmModel) -> Result<f64> {
    let mu = arm.true_mean();
    if mu > 0.0 && mu < 1.0 {
        Ok(mu)
    } else {
        Err(domain("arm mean", mu, "(0, 1)"))
    }
}

fn check_positive(what: &'static str, v: u64) -> Result<()> {
    if v == 0 {
        Err(domain(what, 0.0, "a positive integer"))
    } else {
        Ok(())
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Frequency of `K_inf(ν̂_n, E(ν)) ≥ u` against `e(2n + 1)e^{−nu}`.
pub fn kinf_deviation_check(
    arm: &ArmModel,
    n: u64,
    u_grid: &[f64],
    runs: u64,
    seed: u64,
) -> Result<BoundCheckReport> {
    let mu = interior_mean(arm)?;
    check_positive("n", n)?;
    check_positive("runs", runs)?;
    let stats = resample(runs, seed, TAG_DEVIATION, |rng| {
        Ok(kinf(&sample_empirical(arm, n, rng)?, mu)?.value)
    })?;
    let mut report = BoundCheckReport::new("kinf-deviation", arm.label(), runs);
    for &u in u_grid {
        let hits = stats.iter().filter(|&&k| k >= u).count() as u64;
        report.push_frequency(n, u, hits, deviation_bound(n, u));
    }
    Ok(report)
}

/// Frequency of `max_{N ≤ n ≤ 50N} (μ̂_n − μ) ≥ u` against `e^{−2Nu²}`.
///
/// Truncating the maximum shrinks the event, so the check stays valid.
pub fn hoeffding_max_check(
    arm: &ArmModel,
    big_n: u64,
    u_grid: &[f64],
    runs: u64,
    seed: u64,
) -> Result<BoundCheckReport> {
    check_positive("N", big_n)?;
    check_positive("runs", runs)?;
    let mu = arm.true_mean();
    let cap = MAXIMAL_HORIZON_FACTOR * big_n;
    let stats = resample(runs, seed, TAG_HOEFFDING, |rng| {
        Ok(running_means(arm, big_n, cap, rng)
            .map(|m| m - mu)
            .fold(f64::NEG_INFINITY, f64::max))
    })?;
    let mut report = BoundCheckReport::new("hoeffding-maximal", arm.label(), runs)
        .with_note(format!("maximum over n in [N, {MAXIMAL_HORIZON_FACTOR}N]"));
    for &u in u_grid {
        let hits = stats.iter().filter(|&&d| d >= u).count() as u64;
        report.push_frequency(big_n, u, hits, hoeffding_max_bound(big_n, u));
    }
    Ok(report)
}

/// `μ̂_n` for `n = N..=cap` along one sample path.
fn running_means<'a>(
    arm: &'a ArmModel,
    big_n: u64,
    cap: u64,
    rng: &'a mut ChaCha8Rng,
) -> impl Iterator<Item = f64> + 'a {
    let mut sum = 0.0;
    (1..=cap).filter_map(move |n| {
        sum += arm.sample(rng);
        (n >= big_n).then(|| sum / n as f64)
    })
}

/// Frequency of `K_inf(ν̂_n, μ) ≤ x` against the two-regime bound, for `x`
/// on the 10-point grid `K_inf(ν, μ)·i/10`, `i = 0..10`.
///
/// `arm` must be finitely supported so that `K_inf(ν, μ)` is exact.
pub fn kinf_concentration_check(
    arm: &ArmModel,
    mu: f64,
    n_grid: &[u64],
    runs: u64,
    seed: u64,
) -> Result<BoundCheckReport> {
    check_positive("runs", runs)?;
    let law = arm.finite_law().ok_or_else(|| {
        Error::Config(format!(
            "concentration check needs a finitely supported arm, got {}",
            arm.label()
        ))
    })?;
    if !(mu > law.mean() && mu < 1.0) {
        return Err(domain("mu", mu, "(E(arm), 1)"));
    }
    let target = kinf(&law, mu)?.value;
    let gamma = concentration_gamma(mu)?;
    let mut report = BoundCheckReport::new("kinf-concentration", arm.label(), runs)
        .with_note(format!("mu = {mu}, K_inf = {target}, gamma = {gamma}"));
    for (j, &n) in n_grid.iter().enumerate() {
        check_positive("n", n)?;
        let stats = resample(
            runs,
            derive_seed(seed, j as u64),
            TAG_CONCENTRATION,
            |rng| Ok(kinf(&sample_empirical(arm, n, rng)?, mu)?.value),
        )?;
        for i in 0..10 {
            let x = target * i as f64 / 10.0;
            let hits = stats.iter().filter(|&&k| k <= x).count() as u64;
            report.push_frequency(n, x, hits, concentration_bound(n, target, gamma, x));
        }
    }
    Ok(report)
}

/// Mean of `(E(ν) − U_{ε,n})⁺`, with `U_{ε,n}` the KL-UCB index of `ν̂_n` at
/// level `ε`, against `(2n + 1)e^{−nε}√(π/n)`.
pub fn integrated_deviation_check(
    arm: &ArmModel,
    n: u64,
    eps_grid: &[f64],
    runs: u64,
    seed: u64,
) -> Result<BoundCheckReport> {
    let mu = interior_mean(arm)?;
    check_positive("n", n)?;
    check_positive("runs", runs)?;
    let samples = resample(runs, seed, TAG_INTEGRATED, |rng| {
        sample_empirical(arm, n, rng)
    })?;
    let mut report = BoundCheckReport::new("kinf-integrated-deviation", arm.label(), runs);
    for &eps in eps_grid {
        let shortfalls: Vec<f64> = samples
            .par_iter()
            .map(|nu| (mu - klucb_index(nu, eps)).max(0.0))
            .collect();
        let (mean, se) = mean_and_stderr(&shortfalls);
        report.push_mean(n, eps, mean, se, integrated_deviation_bound(n, eps));
    }
    Ok(report)
}

/// Mean of `(max_{N ≤ n ≤ 50N} (μ − μ̂_n) − ε)⁺` against
/// `√(π/8)·√(1/N)·e^{−2Nε²}`.
pub fn hoeffding_integrated_check(
    arm: &ArmModel,
    big_n: u64,
    eps_grid: &[f64],
    runs: u64,
    seed: u64,
) -> Result<BoundCheckReport> {
    check_positive("N", big_n)?;
    check_positive("runs", runs)?;
    let mu = arm.true_mean();
    let cap = MAXIMAL_HORIZON_FACTOR * big_n;
    let stats = resample(runs, seed, TAG_HOEFFDING_INTEGRATED, |rng| {
        Ok(running_means(arm, big_n, cap, rng)
            .map(|m| mu - m)
            .fold(f64::NEG_INFINITY, f64::max))
    })?;
    let mut report = BoundCheckReport::new("hoeffding-integrated", arm.label(), runs)
        .with_note(format!("maximum over n in [N, {MAXIMAL_HORIZON_FACTOR}N]"));
    for &eps in eps_grid {
        let excess: Vec<f64> = stats.iter().map(|d| (d - eps).max(0.0)).collect();
        let (mean, se) = mean_and_stderr(&excess);
        report.push_mean(big_n, eps, mean, se, hoeffding_integrated_bound(big_n, eps));
    }
    Ok(report)
}
