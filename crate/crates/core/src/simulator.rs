//! Episode execution and Monte-Carlo aggregation of pseudo-regret curves.
//!
//! Every run draws its seed from `(base_seed, policy ordinal, run ordinal)`
//! and runs are reduced in run order, so a curve does not depend on the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{BanditInstance, EmpiricalDistribution};
use crate::error::{Error, Result};
use crate::policies::{IndexPolicy, PolicySpec, PolicyState};

const BATCH: u64 = 64;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a parent seed and a stream id.
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    mix64(mix64(parent) ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Seed of run `run` of policy `policy` under `base_seed`.
pub fn split_seed(base_seed: u64, policy: u64, run: u64) -> u64 {
    derive_seed(derive_seed(base_seed, policy), run)
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    /// Pseudo-regret `Σ_a Δ_a N_a(t)` at each recorded round.
    pub regret: Vec<f64>,
    /// `N_a(T)`.
    pub pulls: Vec<u64>,
}

/// Runs `spec` for `horizon` rounds, calling `observe` after every round
/// with the round number and the policy (state included).
pub fn run_episode_with<F>(
    bandit: &BanditInstance,
    spec: &PolicySpec,
    horizon: u64,
    seed: u64,
    bins: Option<u32>,
    mut observe: F,
) -> Result<Vec<u64>>
where
    F: FnMut(u64, &IndexPolicy, usize),
{
    let k = bandit.k();
    if horizon < k as u64 {
        return Err(Error::Config(format!(
            "horizon {horizon} is shorter than the number of arms {k}"
        )));
    }
    let mut spec = spec.clone();
    spec.bind_horizon(horizon);
    let template = match bins {
        Some(b) => EmpiricalDistribution::with_bins(b)?,
        None => EmpiricalDistribution::new(),
    };
    let state = PolicyState::with_template(k, derive_seed(seed, 0), template);
    let mut policy = IndexPolicy::with_state(spec, state)?;
    let mut arm_rngs: Vec<ChaCha8Rng> = (0..k)
        .map(|a| ChaCha8Rng::seed_from_u64(derive_seed(seed, 1 + a as u64)))
        .collect();
    for t in 1..=horizon {
        let arm = policy.select_arm();
        let reward = bandit.arms()[arm].sample(&mut arm_rngs[arm]);
        policy.update(arm, reward)?;
        observe(t, &policy, arm);
    }
    Ok(policy.state().counts().to_vec())
}

/// Runs one episode recording the pseudo-regret at every round `1..=horizon`.
pub fn run_episode(
    bandit: &BanditInstance,
    spec: &PolicySpec,
    horizon: u64,
    seed: u64,
) -> Result<Episode> {
    let grid: Vec<u64> = (1..=horizon).collect();
    run_episode_on_grid(bandit, spec, horizon, seed, &grid, None)
}

/// Runs one episode recording the pseudo-regret at the rounds of `grid`
/// (sorted, within `[1, horizon]`).
pub fn run_episode_on_grid(
    bandit: &BanditInstance,
    spec: &PolicySpec,
    horizon: u64,
    seed: u64,
    grid: &[u64],
    bins: Option<u32>,
) -> Result<Episode> {
    let gaps = bandit.gaps();
    let mut regret = Vec::with_capacity(grid.len());
    let mut next = 0;
    let mut current = 0.0;
    let pulls = run_episode_with(bandit, spec, horizon, seed, bins, |t, _, arm| {
        current += gaps[arm];
        while next < grid.len() && grid[next] == t {
            regret.push(current);
            next += 1;
        }
    })?;
    Ok(Episode { regret, pulls })
}

/// Geometric grid of `points` rounds from `k` to `horizon`, plus `horizon`.
pub fn geometric_grid(k: u64, horizon: u64, points: usize) -> Vec<u64> {
    let start = k.clamp(1, horizon) as f64;
    let ratio = (horizon as f64 / start).powf(1.0 / (points.max(2) - 1) as f64);
    let mut grid: Vec<u64> = (0..points)
        .map(|i| (start * ratio.powi(i as i32)).round() as u64)
        .map(|t| t.clamp(1, horizon))
        .collect();
    grid.push(horizon);
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// A Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub bandit: BanditInstance,
    pub horizon: u64,
    pub policies: Vec<PolicySpec>,
    pub runs: u64,
    pub base_seed: u64,
    pub record_grid: Vec<u64>,
    /// Bin count for the empirical accumulators; exact atoms when `None`.
    pub bins: Option<u32>,
}

impl Scenario {
    /// Validates the pieces and binds the horizon of known-horizon policies.
    /// An empty `record_grid` selects the default geometric grid.
    pub fn new(
        bandit: BanditInstance,
        horizon: u64,
        mut policies: Vec<PolicySpec>,
        runs: u64,
        base_seed: u64,
        record_grid: Vec<u64>,
    ) -> Result<Self> {
        let k = bandit.k() as u64;
        if horizon < k {
            return Err(Error::Config(format!(
                "horizon {horizon} is shorter than the number of arms {k}"
            )));
        }
        if runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if policies.is_empty() {
            return Err(Error::Config("at least one policy is required".into()));
        }
        let mut names = Vec::new();
        for p in &mut policies {
            p.bind_horizon(horizon);
            p.validate()?;
            let name = p.name();
            if names.contains(&name) {
                return Err(Error::Config(format!(
                    "duplicate policy name `{name}`; set a label"
                )));
            }
            names.push(name);
        }
        let record_grid = if record_grid.is_empty() {
            geometric_grid(k, horizon, 50)
        } else {
            record_grid
        };
        if record_grid.windows(2).any(|w| w[0] >= w[1])
            || record_grid.first().is_some_and(|&t| t < 1)
            || record_grid.last().is_some_and(|&t| t > horizon)
        {
            return Err(Error::Config(format!(
                "record_grid must be strictly increasing within [1, {horizon}]"
            )));
        }
        Ok(Self {
            bandit,
            horizon,
            policies,
            runs,
            base_seed,
            record_grid,
            bins: None,
        })
    }

    pub fn with_bins(mut self, bins: Option<u32>) -> Self {
        self.bins = bins;
        self
    }

    /// Records every round instead of the sparse grid.
    pub fn with_full_trajectory(mut self) -> Self {
        self.record_grid = (1..=self.horizon).collect();
        self
    }
}

/// Aggregated regret of one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCurve {
    pub name: String,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub runs: u64,
    /// Average `N_a(T)` per arm.
    pub mean_pulls: Vec<f64>,
}

/// Mean pseudo-regret with standard error at each recorded round, per policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretCurve {
    pub k: usize,
    pub horizon: u64,
    pub grid: Vec<u64>,
    pub policies: Vec<PolicyCurve>,
}

/// One row of a regret table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow<'a> {
    pub policy: &'a str,
    pub t: u64,
    pub mean_regret: f64,
    pub stderr: f64,
    pub runs: u64,
}

impl RegretCurve {
    pub fn policy(&self, name: &str) -> Option<&PolicyCurve> {
        self.policies.iter().find(|p| p.name == name)
    }

    pub fn rows(&self) -> impl Iterator<Item = CurveRow<'_>> {
        self.policies.iter().flat_map(move |p| {
            self.grid.iter().enumerate().map(move |(i, &t)| CurveRow {
                policy: &p.name,
                t,
                mean_regret: p.mean[i],
                stderr: p.stderr[i],
                runs: p.runs,
            })
        })
    }

    /// `(mean, stderr)` of the regret at the horizon.
    pub fn final_regret(&self, policy: &str) -> Result<(f64, f64)> {
        let curve = self.policy(policy).ok_or_else(|| Error::Unknown {
            kind: "policy",
            name: policy.to_string(),
        })?;
        let i = self
            .grid
            .iter()
            .position(|&t| t == self.horizon)
            .ok_or_else(|| Error::Config("the horizon is not on the record grid".into()))?;
        Ok((curve.mean[i], curve.stderr[i]))
    }

    /// `R_T / √(KT)` for one policy.
    pub fn normalized_regret(&self, policy: &str) -> Result<f64> {
        let (mean, _) = self.final_regret(policy)?;
        Ok(normalized_regret(mean, self.k, self.horizon))
    }
}

/// `regret / √(K T)`.
pub fn normalized_regret(regret: f64, k: usize, horizon: u64) -> f64 {
    regret / (k as f64 * horizon as f64).sqrt()
}

// Welford accumulator fed in run order.
#[derive(Clone)]
struct Moments {
    n: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, xs: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(xs) {
            let delta = x - *m;
            *m += delta / n;
            *s += delta * (x - *m);
        }
    }

    fn stderr(&self) -> Vec<f64> {
        if self.n < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.n as f64;
        self.m2
            .iter()
            .map(|s| (s.max(0.0) / (n - 1.0) / n).sqrt())
            .collect()
    }
}

/// Runs every policy of `scenario` `runs` times on up to `parallelism` threads.
pub fn monte_carlo(scenario: &Scenario, parallelism: usize) -> Result<RegretCurve> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let k = scenario.bandit.k();
    let mut policies = Vec::with_capacity(scenario.policies.len());
    for (ordinal, spec) in scenario.policies.iter().enumerate() {
        let mut regret = Moments::new(scenario.record_grid.len());
        let mut pulls = Moments::new(k);
        let mut start = 0;
        while start < scenario.runs {
            let end = (start + BATCH).min(scenario.runs);
            let batch: Vec<Episode> = pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|run| {
                        run_episode_on_grid(
                            &scenario.bandit,
                            spec,
                            scenario.horizon,
                            split_seed(scenario.base_seed, ordinal as u64, run),
                            &scenario.record_grid,
                            scenario.bins,
                        )
                    })
                    .collect::<Result<_>>()
            })?;
            for ep in &batch {
                regret.push(&ep.regret);
                let counts: Vec<f64> = ep.pulls.iter().map(|&c| c as f64).collect();
                pulls.push(&counts);
            }
            start = end;
        }
        policies.push(PolicyCurve {
            name: spec.name(),
            stderr: regret.stderr(),
            mean: regret.mean,
            runs: scenario.runs,
            mean_pulls: pulls.mean,
        });
    }
    Ok(RegretCurve {
        k,
        horizon: scenario.horizon,
        grid: scenario.record_grid.clone(),
        policies,
    })
}
