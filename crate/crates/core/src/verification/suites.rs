//! Acceptance suites: numbered criteria plus supporting checks, each with
//! its measured values and pass/fail verdict.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{ArmModel, BanditInstance, EmpiricalDistribution};
use crate::error::{Error, Result};
use crate::kinf::{bernoulli_kl, kinf, kinf_witness};
use crate::policies::{Exploration, Family, PolicySpec, SwitchFunction};
use crate::simulator::{
    derive_seed, monte_carlo, normalized_regret, run_episode_with, split_seed, Scenario,
};

use super::bounds::{concentration_gamma, theoretical_bounds, BoundId};
use super::checks::{
    hoeffding_integrated_check, hoeffding_max_check, integrated_deviation_check,
    kinf_concentration_check, kinf_deviation_check,
};
use super::lambert::{lambert_w, lambert_w_bracket};
use super::oracle::{grid_kinf, random_empirical};
use super::report::BoundCheckReport;

pub const DEFAULT_VERIFY_SEED: u64 = 20_180_522;

/// Horizon of the `K`-sweep regret check.
pub const SWEEP_HORIZON: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    KinfOracle,
    Deviation,
    Concentration,
    Hoeffding,
    IndexOrdering,
    RegretBounds,
    LambertW,
    All,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Self::KinfOracle,
        Self::Deviation,
        Self::Concentration,
        Self::Hoeffding,
        Self::IndexOrdering,
        Self::RegretBounds,
        Self::LambertW,
        Self::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::KinfOracle => "kinf-oracle",
            Self::Deviation => "deviation",
            Self::Concentration => "concentration",
            Self::Hoeffding => "hoeffding",
            Self::IndexOrdering => "index-ordering",
            Self::RegretBounds => "regret-bounds",
            Self::LambertW => "lambert-w",
            Self::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Self::All => Self::ALL[..7].to_vec(),
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "suite",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Caps every repetition count (resamples, runs, random instances).
    pub runs: Option<u64>,
    pub seed: u64,
    pub parallelism: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            runs: None,
            seed: DEFAULT_VERIFY_SEED,
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl VerifyOptions {
    fn scale(&self, full: u64) -> u64 {
        self.runs.map_or(full, |r| r.clamp(1, full))
    }

    fn reduced(&self) -> bool {
        self.runs.is_some()
    }

    fn seed_for(&self, stream: u64) -> u64 {
        derive_seed(self.seed, stream)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    /// `"1"`..`"10"` for the numbered acceptance criteria, a slug otherwise.
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    /// Named scalar results worth tracking across runs.
    pub metrics: Vec<(String, f64)>,
    pub reports: Vec<BoundCheckReport>,
}

impl CriterionOutcome {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }

    /// One human-readable line.
    pub fn summary(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let id = if self.id.chars().all(|c| c.is_ascii_digit()) {
            format!("criterion {:>2}", self.id)
        } else {
            format!("check {}", self.id)
        };
        format!(
            "{verdict} {id}: {} ({}; {:.1}s)",
            self.title, self.detail, self.elapsed_secs
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub criteria: Vec<CriterionOutcome>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.criteria.iter().filter(|c| !c.passed).count()
    }

    pub fn criterion(&self, id: &str) -> Option<&CriterionOutcome> {
        self.criteria.iter().find(|c| c.id == id)
    }
}

struct Draft {
    id: &'static str,
    title: &'static str,
    passed: bool,
    detail: String,
    metrics: Vec<(String, f64)>,
    reports: Vec<BoundCheckReport>,
}

impl Draft {
    fn new(id: &'static str, title: &'static str) -> Self {
        Self {
            id,
            title,
            passed: true,
            detail: String::new(),
            metrics: Vec::new(),
            reports: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool) {
        self.passed &= ok;
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push((name.to_string(), value));
    }

    fn report(&mut self, r: BoundCheckReport) {
        self.passed &= r.is_clean();
        self.reports.push(r);
    }

    fn violations(&self) -> usize {
        self.reports.iter().map(BoundCheckReport::violations).sum()
    }

    fn points(&self) -> usize {
        self.reports.iter().map(|r| r.points.len()).sum()
    }
}

fn timed<F>(f: F) -> Result<CriterionOutcome>
where
    F: FnOnce() -> Result<Draft>,
{
    let start = Instant::now();
    let d = f()?;
    Ok(CriterionOutcome {
        id: d.id.to_string(),
        title: d.title.to_string(),
        passed: d.passed,
        detail: d.detail,
        elapsed_secs: start.elapsed().as_secs_f64(),
        metrics: d.metrics,
        reports: d.reports,
    })
}

fn within_budget(mut c: CriterionOutcome, budget_secs: f64) -> CriterionOutcome {
    if c.elapsed_secs >= budget_secs {
        c.passed = false;
        c.detail
            .push_str(&format!("; over the {budget_secs:.0}s budget"));
    }
    c
}

/// Runs every check of `suite`.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.parallelism.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut criteria = Vec::new();
    for member in suite.members() {
        pool.install(|| -> Result<()> {
            match member {
                Suite::KinfOracle => {
                    criteria.push(within_budget(timed(|| oracle_equivalence(opts))?, 60.0));
                    criteria.push(timed(bernoulli_identity)?);
                    criteria.push(timed(|| regularity(opts))?);
                    criteria.push(timed(|| witness(opts))?);
                }
                Suite::Deviation => {
                    criteria.push(within_budget(timed(|| deviation(opts))?, 300.0));
                    criteria.push(timed(|| integrated_deviation(opts))?);
                }
                Suite::Concentration => criteria.push(timed(|| concentration(opts))?),
                Suite::Hoeffding => criteria.push(timed(|| hoeffding(opts))?),
                Suite::IndexOrdering => criteria.push(timed(|| index_ordering(opts))?),
                Suite::RegretBounds => {
                    criteria.push(timed(|| distribution_free(opts))?);
                    criteria.push(timed(|| distribution_dependent(opts))?);
                    criteria.push(within_budget(timed(|| sweep_in_k(opts))?, 1800.0));
                }
                Suite::LambertW => criteria.push(timed(lambert)?),
                Suite::All => unreachable!("expanded by members()"),
            }
            Ok(())
        })?;
    }
    Ok(SuiteOutcome { suite, criteria })
}

fn random_nontrivial(rng: &mut ChaCha8Rng, below: f64) -> EmpiricalDistribution {
    loop {
        let nu = random_empirical(rng, 20);
        if nu.mean() < below {
            return nu;
        }
    }
}

const ORACLE_GRID: usize = 1_000_001;

fn oracle_equivalence(opts: &VerifyOptions) -> Result<Draft> {
    let mut d = Draft::new(
        "1",
        "K_inf solver matches a 10^6-point lambda grid within 1e-6",
    );
    let count = opts.scale(500);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed_for(1));
    let cases: Vec<(EmpiricalDistribution, f64)> = (0..count)
        .map(|i| {
            let nu = random_nontrivial(&mut rng, 1.0 - 1e-6);
            let mu = nu.mean() + (1.0 - nu.mean()) * ((i % 19) + 1) as f64 / 20.0;
            (nu, mu)
        })
        .collect();
    let results: Vec<(f64, bool)> = cases
        .par_iter()
        .map(|(nu, mu)| {
            let exact = kinf(nu, *mu)?;
            Ok((
                (exact.value - grid_kinf(nu, *mu, ORACLE_GRID)).abs(),
                exact.converged,
            ))
        })
        .collect::<Result<_>>()?;
    let mut report = BoundCheckReport::new("kinf-grid-oracle", "random empirical", 1);
    for ((nu, mu), (err, converged)) in cases.iter().zip(&results) {
        report.push_exact(nu.atoms().len() as u64, *mu, *err, 1e-6);
        d.require(*converged);
    }
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    d.metric("max_abs_error", worst);
    d.detail = format!("{count} distributions, max |error| = {worst:.2e}");
    d.report(report);
    Ok(d)
}

fn bernoulli_identity() -> Result<Draft> {
    let mut d = Draft::new("2", "K_inf on {0,1} atoms equals kl(p, mu) within 1e-8");
    let mut report = BoundCheckReport::new("bernoulli-identity", "{0,1} atoms", 1);
    let mut worst: f64 = 0.0;
    for i in 1..=9u64 {
        let nu = EmpiricalDistribution::from_counts([(0.0, 10 - i), (1.0, i)])?;
        let p = nu.mean();
        for j in 1..=50 {
            let mu = p + (0.99 - p) * j as f64 / 50.0;
            let err = (kinf(&nu, mu)?.value - bernoulli_kl(p, mu)).abs();
            worst = worst.max(err);
            report.push_exact(i, mu, err, 1e-8);
        }
    }
    d.metric("max_abs_error", worst);
    d.detail = format!("450 (p, mu) pairs, max |error| = {worst:.2e}");
    d.report(report);
    Ok(d)
}

fn regularity(opts: &VerifyOptions) -> Result<Draft> {
    let mut d = Draft::new("3", "K_inf regularity sandwich holds within 1e-7");
    let count = opts.scale(10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed_for(3));
    let mut upper = BoundCheckReport::new("regularity-upper", "random empirical", 1)
        .with_note("K(mu) - K(mu - eps) - eps/(1 - mu), eps in [0, mu)");
    let mut lower = BoundCheckReport::new("regularity-lower", "random empirical", 1)
        .with_note("K(mu - eps) + 2 eps^2 - K(mu), eps in [0, mu - E(nu)]");
    for _ in 0..count {
        let nu = random_nontrivial(&mut rng, 0.98);
        let mu = rng.random_range(1e-3..0.99);
        let k_mu = kinf(&nu, mu)?.value;
        let eps = mu * rng.random::<f64>();
        let left = mu - eps;
        let k_left = if left > 0.0 {
            kinf(&nu, left)?.value
        } else {
            0.0
        };
        upper.push_exact(
            nu.atoms().len() as u64,
            mu,
            k_mu - k_left - eps / (1.0 - mu),
            1e-7,
        );
        if mu > nu.mean() {
            let eps = (mu - nu.mean()) * rng.random::<f64>();
            let k_left = kinf(&nu, mu - eps)?.value;
            lower.push_exact(
                nu.atoms().len() as u64,
                mu,
                k_left + 2.0 * eps * eps - k_mu,
                1e-7,
            );
        }
    }
    d.detail = format!(
        "{count} triples, {} upper and {} lower violations",
        upper.violations(),
        lower.violations()
    );
    d.report(upper);
    d.report(lower);
    Ok(d)
}

fn witness(opts: &VerifyOptions) -> Result<Draft> {
    let mut d = Draft::new(
        "witness",
        "optimal law is a probability with mean mu and KL equal to K_inf",
    );
    let count = opts.scale(2_000);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed_for(4));
    let mut report = BoundCheckReport::new("kinf-witness", "random empirical", 1)
        .with_note("max of |mass - 1|, mu - mean, |KL - K_inf|");
    for _ in 0..count {
        let nu = random_nontrivial(&mut rng, 0.95);
        let mu = rng.random_range(nu.mean()..0.99).max(1e-3);
        let res = kinf(&nu, mu)?;
        if res.lambda_star >= 1.0 && nu.has_atom_at_one() {
            continue;
        }
        let w = kinf_witness(&nu, mu, &res)?;
        let err = (w.total_mass() - 1.0)
            .abs()
            .max(mu - w.expectation())
            .max((w.kl_from(&nu) - res.value).abs());
        report.push_exact(nu.atoms().len() as u64, mu, err, 1e-8);
    }
    d.detail = format!(
        "{} witnesses, {} violations",
        report.points.len(),
        report.violations()
    );
    d.report(report);
    Ok(d)
}

fn ber(p: f64) -> ArmModel {
    ArmModel::bernoulli(p).expect("valid Bernoulli parameter")
}

fn deviation(opts: &VerifyOptions) -> Result<Draft> {
    let mut d = Draft::new("4", "P[K_inf(nu_n, E nu) >= u] <= e(2n+1)exp(-nu)");
    let runs = opts.scale(100_000);
    let u_grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
    for (i, p) in [0.3, 0.5].into_iter().enumerate() {
        for (j, n) in [10, 50].into_iter().enumerate() {
            let seed = opts.seed_for(40 + 2 * i as u64 + j as u64);
            d.report(kinf_deviation_check(&ber(p), n, &u_grid, runs, seed)?);
        }
    }
    d.detail = format!(
        "{} points x {runs} resamples, {} violations",
        d.points(),
        d.violations()
    );
    Ok(d)
}

fn integrated_deviation(opts: &VerifyOptions) -> Result<Draft> {
    let mut d = Draft::new(
        "integrated-deviation",
        "E[(E nu - U_eps,n)+] <= (2n+1)exp(-n eps)sqrt(pi/n)",
    );
    let runs = opts.scale(10_000);
    for (j, n) in [5, 20].into_iter().enumerate() {
        let seed = opts.seed_for(50 + j as u64);
        d.report(integrated_deviation_check(
            &ber(0.5),
            n,
            &[0.05, 0.2],
            runs,
            seed,
        )?);
    }
    d.detail = format!(
        "{} points x {runs} resamples, {} violations",
        d.points(),
        d.violations()
    );
    Ok(d)
}

fn concentration(opts: &VerifyOptions) -> Result<Draft> {
    let mut d = Draft::new("5", "P[K_inf(nu_n, mu) <= x] two-regime bound; gamma >= 2");
    let runs = opts.scale(100_000);
    d.report(kinf_concentration_check(
        &ber(0.2),
        0.5,
        &[20, 100],
        runs,
        opts.seed_for(5),
    )?);
    let mut gamma = BoundCheckReport::new("gamma-at-least-two", "mu grid", 1)
        .with_note("empirical = 2, bound = gamma(mu)");
    for i in 1..1000 {
        let mu = i as f64 / 1000.0;
        gamma.push_exact(0, mu, 2.0, concentration_gamma(mu)?);
    }
    d.report(gamma);
    d.detail = format!("{} points, {} violations", d.points(), d.violations());
    Ok(d)
}

fn hoeffding(opts: &VerifyOptions) -> Result<Draft> {
    let mut d = Draft::new(
        "hoeffding",
        "maximal Hoeffding inequality and its integrated form",
    );
    let u_grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.05).collect();
    let eps_grid = [0.0, 0.05, 0.1, 0.2];
    for (j, big_n) in [20, 100].into_iter().enumerate() {
        let seed = opts.seed_for(60 + j as u64);
        d.report(hoeffding_max_check(
            &ber(0.5),
            big_n,
            &u_grid,
            opts.scale(100_000),
            seed,
        )?);
        let seed = opts.seed_for(62 + j as u64);
        d.report(hoeffding_integrated_check(
            &ber(0.5),
            big_n,
            &eps_grid,
            opts.scale(10_000),
            seed,
        )?);
    }
    d.detail = format!("{} points, {} violations", d.points(), d.violations());
    Ok(d)
}

fn ordering_instance() -> Result<BanditInstance> {
    let support = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    BanditInstance::new(vec![
        ArmModel::discrete(support.clone(), vec![0.05, 0.1, 0.2, 0.3, 0.35])?,
        ArmModel::discrete(support.clone(), vec![0.1, 0.15, 0.25, 0.3, 0.2])?,
        ArmModel::discrete(support, vec![0.2; 5])?,
    ])
}

const ORDERING_TOL: f64 = 1e-9;

fn index_ordering(opts: &VerifyOptions) -> Result<Draft> {
    let mut d = Draft::new("6", "U^KL <= U^switch <= U^M at sampled rounds");
    let runs = opts.scale(100);
    let horizon = 2_000;
    let bandit = ordering_instance()?;
    let k = bandit.k() as u64;
    let policies = [
        PolicySpec::new(Family::KlucbSwitch).with_horizon(horizon),
        PolicySpec::new(Family::KlucbSwitchAnytime),
        PolicySpec::new(Family::KlucbSwitchAnytime)
            .with_exploration(Exploration::LogPlus)
            .with_switch(SwitchFunction::empirical()),
    ];
    let mut checked = 0u64;
    let mut worst = f64::NEG_INFINITY;
    for run in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(opts.seed_for(6), 0, run));
        let mut steps: Vec<u64> = rand::seq::index::sample(&mut rng, (horizon - k) as usize, 10)
            .into_iter()
            .map(|i| k + i as u64)
            .collect();
        steps.sort_unstable();
        let spec = &policies[run as usize % policies.len()];
        let mut failure = None;
        run_episode_with(
            &bandit,
            spec,
            horizon,
            split_seed(opts.seed_for(6), 1, run),
            None,
            |t, policy, _| {
                if failure.is_some() || steps.binary_search(&t).is_err() {
                    return;
                }
                let state = policy.state();
                for a in 0..state.k() {
                    let indices = (
                        spec.kl_subindex(state, a),
                        spec.compute_index(state, a),
                        spec.moss_subindex(state, a),
                    );
                    match indices {
                        (Ok(kl), Ok(u), Ok(m)) => {
                            checked += 1;
                            worst = worst.max(kl - u).max(u - m);
                        }
                        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => failure = Some(e),
                    }
                }
            },
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
    }
    let mut report = BoundCheckReport::new("index-ordering", bandit_label(&bandit), runs)
        .with_note("largest of U^KL - U and U - U^M over all checked (round, arm) pairs");
    report.push_exact(checked, horizon as f64, worst, ORDERING_TOL);
    d.metric("worst_excess", worst);
    d.detail = format!("{checked} (round, arm) checks over {runs} runs, worst excess {worst:.2e}");
    d.report(report);
    Ok(d)
}

fn bandit_label(b: &BanditInstance) -> String {
    b.arms()
        .iter()
        .map(ArmModel::label)
        .collect::<Vec<_>>()
        .join(" ")
}

fn distribution_free(opts: &VerifyOptions) -> Result<Draft> {
    let mut d = Draft::new("7", "distribution-free regret bounds at K=2, T=10^4");
    let (k, horizon) = (2usize, 10_000u64);
    let runs = opts.scale(1_000);
    let bandit = BanditInstance::bernoulli_gap(0.8, (k as f64 / horizon as f64).sqrt(), k)?;
    let specs = [
        (PolicySpec::new(Family::KlucbSwitch), BoundId::KlucbSwitch),
        (PolicySpec::new(Family::Moss), BoundId::Moss),
        (
            PolicySpec::new(Family::KlucbSwitchAnytime),
            BoundId::KlucbSwitchAnytime,
        ),
    ];
    let scenario = Scenario::new(
        bandit.clone(),
        horizon,
        specs.iter().map(|(s, _)| s.clone()).collect(),
        runs,
        opts.seed_for(7),
        vec![horizon],
    )?;
    let curve = monte_carlo(&scenario, opts.parallelism)?;
    let mut report = BoundCheckReport::new("distribution-free-regret", bandit_label(&bandit), runs);
    let mut parts = Vec::new();
    for (spec, id) in &specs {
        let name = spec.clone().with_horizon(horizon).name();
        let (mean, se) = curve.final_regret(&name)?;
        report.push_mean(
            horizon,
            k as f64,
            mean,
            se,
            theoretical_bounds(k, horizon, *id)?,
        );
        parts.push(format!("{name} {mean:.1}"));
    }
    let switch_name = specs[0].0.clone().with_horizon(horizon).name();
    let normalized = curve.normalized_regret(&switch_name)?;
    let se = curve.final_regret(&switch_name)?.1 / ((k as u64 * horizon) as f64).sqrt();
    d.metric("normalized_regret", normalized);
    d.metric("normalized_regret_stderr", se);
    report.push_exact(horizon, k as f64, normalized, 5.0);
    d.detail = format!("R_T: {}; R_T/sqrt(KT) = {normalized:.4}", parts.join(", "));
    d.report(report);
    Ok(d)
}

/// Anytime policies as run in the experiments: `ln_+` exploration and, for
/// the switch, `f(t, K) = ⌊t/K⌋^{8/9}`.
fn experiment_specs() -> [PolicySpec; 3] {
    [
        PolicySpec::new(Family::KlucbAnytime).with_exploration(Exploration::LogPlus),
        PolicySpec::new(Family::KlucbSwitchAnytime)
            .with_exploration(Exploration::LogPlus)
            .with_switch(SwitchFunction::empirical()),
        PolicySpec::new(Family::MossAnytime).with_exploration(Exploration::LogPlus),
    ]
}

fn distribution_dependent(opts: &VerifyOptions) -> Result<Draft> {
    let mut d = Draft::new(
        "8",
        "logarithmic regret on Ber(0.9), Ber(0.8) and KL-UCB <= switch <= MOSS",
    );
    let horizon = 10_000u64;
    let runs = opts.scale(2_000);
    let bandit = BanditInstance::new(vec![ber(0.9), ber(0.8)])?;
    let specs = experiment_specs();
    let scenario = Scenario::new(
        bandit.clone(),
        horizon,
        specs.to_vec(),
        runs,
        opts.seed_for(8),
        vec![horizon],
    )?;
    let curve = monte_carlo(&scenario, opts.parallelism)?;
    let [kl, sw, moss] = specs.map(|s| curve.final_regret(&s.name()));
    let (kl, sw, moss) = (kl?, sw?, moss?);
    let rate = 0.1 / bernoulli_kl(0.8, 0.9) * (horizon as f64).ln();
    let mut report =
        BoundCheckReport::new("distribution-dependent-regret", bandit_label(&bandit), runs)
            .with_note(format!("reference (gap / kl(0.8, 0.9)) ln T = {rate}"));
    report.push_mean(horizon, 3.0, sw.0, sw.1, 3.0 * rate);
    report.push_mean(horizon, 0.5, -sw.0, sw.1, -0.5 * rate);
    let pooled = |a: (f64, f64), b: (f64, f64)| (a.1 * a.1 + b.1 * b.1).sqrt();
    report.push_mean(horizon, 0.0, kl.0 - sw.0, pooled(kl, sw), 0.0);
    report.push_mean(horizon, 1.0, sw.0 - moss.0, pooled(sw, moss), 0.0);
    d.metric("reference_rate", rate);
    d.metric("regret_klucb", kl.0);
    d.metric("regret_switch", sw.0);
    d.metric("regret_moss", moss.0);
    d.metric("regret_klucb_stderr", kl.1);
    d.metric("regret_switch_stderr", sw.1);
    d.metric("regret_moss_stderr", moss.1);
    d.detail = format!(
        "R_T: KL-UCB {:.2}, switch {:.2}, MOSS {:.2}; switch / reference = {:.2}",
        kl.0,
        sw.0,
        moss.0,
        sw.0 / rate
    );
    d.report(report);
    Ok(d)
}

fn sweep_in_k(opts: &VerifyOptions) -> Result<Draft> {
    let mut d = Draft::new(
        "9",
        "normalized regret flat in K for the switch, growing for UCB",
    );
    let horizon = SWEEP_HORIZON;
    let runs = opts.scale(5_000);
    let switch = experiment_specs()[1].clone();
    let ucb = PolicySpec::new(Family::Ucb);
    let mut switch_norm = Vec::new();
    let mut ucb_norm = Vec::new();
    for (i, k) in [2usize, 10, 50].into_iter().enumerate() {
        let bandit = BanditInstance::bernoulli_gap(0.8, (k as f64 / horizon as f64).sqrt(), k)?;
        let scenario = Scenario::new(
            bandit,
            horizon,
            vec![switch.clone(), ucb.clone()],
            runs,
            opts.seed_for(90 + i as u64),
            vec![horizon],
        )?;
        let curve = monte_carlo(&scenario, opts.parallelism)?;
        let s = curve.normalized_regret(&switch.name())?;
        let u = curve.normalized_regret(&ucb.name())?;
        let scale = normalized_regret(1.0, k, horizon);
        d.metric(&format!("switch_k{k}"), s);
        d.metric(&format!("ucb_k{k}"), u);
        d.metric(
            &format!("switch_k{k}_stderr"),
            curve.final_regret(&switch.name())?.1 * scale,
        );
        d.metric(
            &format!("ucb_k{k}_stderr"),
            curve.final_regret(&ucb.name())?.1 * scale,
        );
        switch_norm.push(s);
        ucb_norm.push(u);
    }
    let max = switch_norm
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let min = switch_norm.iter().copied().fold(f64::INFINITY, f64::min);
    let mut report =
        BoundCheckReport::new("k-sweep-normalized-regret", "Bernoulli gap x = 1", runs).with_note(
            "row 1: switch max/min ratio vs 2; rows 2-3: UCB increments must be positive",
        );
    report.push_exact(horizon, 1.0, max / min, 2.0);
    for w in ucb_norm.windows(2) {
        report.push_exact(horizon, 1.0, w[0] - w[1], 0.0);
    }
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join("/")
    };
    d.detail = format!(
        "K = 2/10/50: switch {} (ratio {:.2}), UCB {}",
        fmt(&switch_norm),
        max / min,
        fmt(&ucb_norm)
    );
    d.require(ucb_norm.windows(2).all(|w| w[1] > w[0]));
    d.report(report);
    if opts.reduced() {
        d.detail.push_str(" [reduced fidelity]");
    }
    Ok(d)
}

fn lambert() -> Result<Draft> {
    let mut d = Draft::new(
        "10",
        "Lambert W residual <= 1e-10 and bracket for x in (e, 1e9]",
    );
    let mut residual = BoundCheckReport::new("lambert-w-residual", "log grid [1e-3, 1e9]", 1);
    let mut bracket = BoundCheckReport::new("lambert-w-bracket", "log grid (e, 1e9]", 1)
        .with_note("max(lower - W, W - upper)");
    let mut worst: f64 = 0.0;
    for i in 0..=1200 {
        let x = 10f64.powf(-3.0 + i as f64 / 100.0);
        let w = lambert_w(x)?;
        let rel = (w * w.exp() - x).abs() / x;
        worst = worst.max(rel);
        residual.push_exact(0, x, rel, 1e-10);
        if x > std::f64::consts::E {
            let (lo, hi) = lambert_w_bracket(x)?;
            bracket.push_exact(0, x, (lo - w).max(w - hi), 0.0);
        }
    }
    d.metric("max_relative_residual", worst);
    d.detail = format!("1201 grid points, max relative residual {worst:.2e}");
    d.report(residual);
    d.report(bracket);
    Ok(d)
}
