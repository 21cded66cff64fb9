//! Index policies: UCB, MOSS, KL-UCB, KL-UCB-switch (known horizon and
//! anytime), IMED and the parametric kl-UCB comparators.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::EmpiricalDistribution;
use crate::error::{domain, Error, Result};
use crate::kinf::{self, bernoulli_kl, exp_kl_index, klucb_index};

/// `ln_+(x) = max(ln x, 0)`.
pub fn log_plus(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("log_plus argument", x, "a positive real"));
    }
    Ok(x.ln().max(0.0))
}

/// Augmented exploration `φ(x) = ln_+(x (1 + ln_+²(x)))`.
pub fn phi(x: f64) -> Result<f64> {
    let l = log_plus(x)?;
    log_plus(x * (1.0 + l * l))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Ucb,
    Moss,
    MossAnytime,
    Klucb,
    KlucbAnytime,
    KlucbSwitch,
    KlucbSwitchAnytime,
    Imed,
    KlucbExp,
    KlucbGauss,
}

impl Family {
    /// Families whose index uses the horizon `T` rather than the current round.
    pub fn needs_horizon(self) -> bool {
        matches!(self, Self::Moss | Self::Klucb | Self::KlucbSwitch)
    }

    pub fn is_switch(self) -> bool {
        matches!(self, Self::KlucbSwitch | Self::KlucbSwitchAnytime)
    }

    pub fn default_exploration(self) -> Exploration {
        match self {
            Self::Ucb => Exploration::LogT,
            Self::MossAnytime | Self::KlucbAnytime | Self::KlucbSwitchAnytime => {
                Exploration::AugmentedPhi
            }
            _ => Exploration::LogPlus,
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Self::Ucb => "UCB",
            Self::Moss => "MOSS",
            Self::MossAnytime => "MOSS-anytime",
            Self::Klucb => "KL-UCB",
            Self::KlucbAnytime => "KL-UCB-anytime",
            Self::KlucbSwitch => "KL-UCB-switch",
            Self::KlucbSwitchAnytime => "KL-UCB-switch-anytime",
            Self::Imed => "IMED",
            Self::KlucbExp => "kl-UCB-exp",
            Self::KlucbGauss => "kl-UCB-Gauss",
        }
    }
}

/// Exploration function applied to `τ / (K N_a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exploration {
    LogPlus,
    AugmentedPhi,
    /// `ln t`, independent of the pull count (UCB).
    LogT,
}

impl Exploration {
    /// Exploration level for an arm pulled `n` times, with time scale `tau`
    /// (the horizon or the current round) and current round `t`.
    pub fn value(self, tau: f64, k: usize, n: u64, t: u64) -> f64 {
        let arg = tau / (k as f64 * n as f64);
        match self {
            Self::LogPlus => arg.ln().max(0.0),
            Self::AugmentedPhi => {
                let l = arg.ln().max(0.0);
                (arg * (1.0 + l * l)).ln().max(0.0)
            }
            Self::LogT => (t.max(1) as f64).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchFloor {
    /// `⌊(τ/K)^e⌋`
    #[default]
    Outer,
    /// `⌊τ/K⌋^e`, left real-valued
    Inner,
}

/// Pull-count threshold `f(τ, K)` above which the switch policies use MOSS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchFunction {
    pub exponent: f64,
    pub floor: SwitchFloor,
}

impl Default for SwitchFunction {
    fn default() -> Self {
        Self::theoretical()
    }
}

impl SwitchFunction {
    /// `⌊(τ/K)^{1/5}⌋`
    pub fn theoretical() -> Self {
        Self {
            exponent: 0.2,
            floor: SwitchFloor::Outer,
        }
    }

    /// `⌊τ/K⌋^{8/9}`
    pub fn empirical() -> Self {
        Self {
            exponent: 8.0 / 9.0,
            floor: SwitchFloor::Inner,
        }
    }

    /// Value compared against `N_a`; real-valued for [`SwitchFloor::Inner`].
    pub fn value(&self, tau: u64, k: usize) -> f64 {
        match self.floor {
            SwitchFloor::Outer => snapped_floor((tau as f64 / k as f64).powf(self.exponent)),
            SwitchFloor::Inner => ((tau / k as u64) as f64).powf(self.exponent),
        }
    }

    /// Integer threshold `⌊value⌋`.
    pub fn threshold(&self, tau: u64, k: usize) -> u64 {
        snapped_floor(self.value(tau, k)) as u64
    }
}

// floor that treats values within rounding noise of an integer as that integer
fn snapped_floor(r: f64) -> f64 {
    let nearest = r.round();
    if (r - nearest).abs() <= 1e-9 * r.abs().max(1.0) {
        nearest
    } else {
        r.floor()
    }
}

/// Integer switch threshold for exponent `exponent`: `⌊(τ/K)^{1/5}⌋` style
/// for the theoretical exponent 1/5, `⌊⌊τ/K⌋^e⌋` otherwise.
pub fn switch_threshold(tau: u64, k: usize, exponent: f64) -> u64 {
    let floor = if (exponent - 0.2).abs() < 1e-15 {
        SwitchFloor::Outer
    } else {
        SwitchFloor::Inner
    };
    SwitchFunction { exponent, floor }.threshold(tau, k)
}

/// `mean + √(explo / (2n))`
pub fn moss_index(mean: f64, n: u64, tau_over_k: f64, exploration: Exploration) -> f64 {
    let explo = exploration.value(tau_over_k, 1, n, tau_over_k as u64);
    sqrt_bonus(mean, 0.5, explo, n)
}

#[inline]
fn sqrt_bonus(mean: f64, scale: f64, explo: f64, n: u64) -> f64 {
    mean + (scale * explo / n as f64).sqrt()
}

/// A policy: index family plus its tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolicyConfig", into = "PolicyConfig")]
pub struct PolicySpec {
    pub family: Family,
    pub exploration: Exploration,
    /// Known horizon; `None` means "bind to the scenario horizon" for
    /// families that need one.
    pub horizon: Option<u64>,
    pub switch: SwitchFunction,
    /// Noise level of kl-UCB-Gauss.
    pub sigma: Option<f64>,
    /// UCB with `√(2 ln t / N)` instead of `√(ln t / (2N))`.
    pub ucb_classic: bool,
    pub label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyConfig {
    family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exploration: Option<Exploration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    switch_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    switch_floor: Option<SwitchFloor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ucb_classic: Option<bool>,
}

impl TryFrom<PolicyConfig> for PolicySpec {
    type Error = Error;

    fn try_from(c: PolicyConfig) -> Result<Self> {
        let family = c.family;
        let name = family.display_name();
        if !family.is_switch() && (c.switch_exponent.is_some() || c.switch_floor.is_some()) {
            return Err(Error::Config(format!(
                "{name}: switch settings only apply to switch families"
            )));
        }
        if family != Family::KlucbGauss && c.sigma.is_some() {
            return Err(Error::Config(format!(
                "{name}: sigma only applies to klucb-gauss"
            )));
        }
        if family != Family::Ucb && c.ucb_classic.is_some() {
            return Err(Error::Config(format!(
                "{name}: ucb_classic only applies to ucb"
            )));
        }
        let mut switch = SwitchFunction::default();
        if let Some(e) = c.switch_exponent {
            switch.exponent = e;
        }
        if let Some(f) = c.switch_floor {
            switch.floor = f;
        }
        let spec = PolicySpec {
            family,
            exploration: c.exploration.unwrap_or(family.default_exploration()),
            horizon: c.horizon,
            switch,
            sigma: c.sigma,
            ucb_classic: c.ucb_classic.unwrap_or(false),
            label: c.label,
        };
        spec.check()?;
        Ok(spec)
    }
}

impl From<PolicySpec> for PolicyConfig {
    fn from(s: PolicySpec) -> Self {
        let switch = s.family.is_switch();
        PolicyConfig {
            family: s.family,
            label: s.label,
            exploration: Some(s.exploration),
            horizon: s.horizon,
            switch_exponent: switch.then_some(s.switch.exponent),
            switch_floor: switch.then_some(s.switch.floor),
            sigma: s.sigma,
            ucb_classic: (s.family == Family::Ucb).then_some(s.ucb_classic),
        }
    }
}

impl PolicySpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            exploration: family.default_exploration(),
            horizon: None,
            switch: SwitchFunction::default(),
            sigma: None,
            ucb_classic: false,
            label: None,
        }
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn with_exploration(mut self, exploration: Exploration) -> Self {
        self.exploration = exploration;
        self
    }

    pub fn with_switch(mut self, switch: SwitchFunction) -> Self {
        self.switch = switch;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Fills in the horizon for families that need one and have none yet.
    pub fn bind_horizon(&mut self, horizon: u64) {
        if self.family.needs_horizon() && self.horizon.is_none() {
            self.horizon = Some(horizon);
        }
    }

    pub fn name(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => self.family.display_name().to_string(),
        }
    }

    fn check(&self) -> Result<()> {
        let name = self.name();
        if !(self.switch.exponent > 0.0 && self.switch.exponent < 1.0) {
            return Err(Error::Config(format!(
                "{name}: switch_exponent {} must lie in (0, 1)",
                self.switch.exponent
            )));
        }
        if self.horizon == Some(0) {
            return Err(Error::Config(format!("{name}: horizon must be positive")));
        }
        if self.family == Family::KlucbGauss {
            match self.sigma {
                Some(s) if s > 0.0 && s.is_finite() => {}
                _ => {
                    return Err(Error::Config(format!(
                        "{name}: sigma must be a positive real"
                    )))
                }
            }
        }
        if self.label.as_deref() == Some("") {
            return Err(Error::Config("policy label must not be empty".into()));
        }
        Ok(())
    }

    /// Full validation, including the presence of a horizon where required.
    pub fn validate(&self) -> Result<()> {
        self.check()?;
        if self.family.needs_horizon() && self.horizon.is_none() {
            return Err(Error::Config(format!(
                "{}: a horizon is required",
                self.name()
            )));
        }
        Ok(())
    }

    /// Time scale `τ`: the horizon for known-horizon families, else the round.
    fn tau(&self, t: u64) -> u64 {
        match (self.family.needs_horizon(), self.horizon) {
            (true, Some(h)) => h,
            _ => t,
        }
    }

    /// Whether an arm's index only changes when that arm is pulled.
    pub fn index_is_static(&self) -> bool {
        self.family.needs_horizon() && self.exploration != Exploration::LogT
    }

    /// IMED picks the smallest index; every other family the largest.
    pub fn minimizes(&self) -> bool {
        self.family == Family::Imed
    }

    /// Exploration level `explo(τ / (K N_a))` of `arm`.
    fn explo(&self, state: &PolicyState, arm: usize) -> f64 {
        let t = state.t;
        self.exploration
            .value(self.tau(t) as f64, state.k(), state.counts[arm], t)
    }

    fn threshold(&self, state: &PolicyState, arm: usize) -> f64 {
        self.explo(state, arm) / state.counts[arm] as f64
    }

    /// KL-type sub-index of a switch family (also the KL-UCB index).
    pub fn kl_subindex(&self, state: &PolicyState, arm: usize) -> Result<f64> {
        state.require_pulled(arm)?;
        Ok(klucb_index(&state.dists[arm], self.threshold(state, arm)))
    }

    /// MOSS-type sub-index of a switch family (also the MOSS index).
    pub fn moss_subindex(&self, state: &PolicyState, arm: usize) -> Result<f64> {
        state.require_pulled(arm)?;
        let n = state.counts[arm];
        Ok(sqrt_bonus(state.mean(arm), 0.5, self.explo(state, arm), n))
    }

    /// Whether a switch family currently uses its KL branch for `arm`.
    pub fn in_kl_branch(&self, state: &PolicyState, arm: usize) -> bool {
        state.counts[arm] as f64 <= self.switch.value(self.tau(state.t), state.k())
    }

    /// Index of `arm` at the current state.
    pub fn compute_index(&self, state: &PolicyState, arm: usize) -> Result<f64> {
        state.require_pulled(arm)?;
        let n = state.counts[arm];
        let mean = state.mean(arm);
        let index = match self.family {
            Family::Ucb => {
                let explo = self
                    .exploration
                    .value(state.t as f64, state.k(), n, state.t);
                let scale = if self.ucb_classic { 2.0 } else { 0.5 };
                sqrt_bonus(mean, scale, explo, n)
            }
            Family::Moss | Family::MossAnytime => self.moss_subindex(state, arm)?,
            Family::Klucb | Family::KlucbAnytime => self.kl_subindex(state, arm)?,
            Family::KlucbSwitch | Family::KlucbSwitchAnytime => {
                if self.in_kl_branch(state, arm) {
                    self.kl_subindex(state, arm)?
                } else {
                    self.moss_subindex(state, arm)?
                }
            }
            Family::Imed => {
                let best = state.best_mean();
                n as f64 * imed_divergence(&state.dists[arm], best) + (n as f64).ln()
            }
            Family::KlucbExp => exp_kl_index(mean, self.threshold(state, arm)),
            Family::KlucbGauss => {
                let sigma = self.sigma.unwrap_or(0.0);
                sqrt_bonus(mean, 2.0 * sigma * sigma, self.explo(state, arm), n)
            }
        };
        Ok(index)
    }
}

fn imed_divergence(nu: &EmpiricalDistribution, best: f64) -> f64 {
    if best <= 0.0 || nu.mean() >= best {
        return 0.0;
    }
    let mu = best.min(1.0 - 1e-9);
    if nu.is_binary() {
        bernoulli_kl(nu.mean(), mu)
    } else {
        kinf::solve(nu, mu, None).value
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Per-arm sufficient statistics of a run, plus the tie-breaking stream.
#[derive(Debug, Clone)]
pub struct PolicyState {
    counts: Vec<u64>,
    sums: Vec<f64>,
    dists: Vec<EmpiricalDistribution>,
    t: u64,
    rng: ChaCha8Rng,
}

impl PolicyState {
    pub fn new(k: usize, seed: u64) -> Self {
        Self::with_template(k, seed, EmpiricalDistribution::new())
    }

    /// State whose per-arm accumulators start as clones of `template`
    /// (e.g. a binned accumulator).
    pub fn with_template(k: usize, seed: u64, template: EmpiricalDistribution) -> Self {
        Self {
            counts: vec![0; k],
            sums: vec![0.0; k],
            dists: vec![template; k],
            t: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    /// Rounds played so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn reward_sum(&self, arm: usize) -> f64 {
        self.sums[arm]
    }

    pub fn distribution(&self, arm: usize) -> &EmpiricalDistribution {
        &self.dists[arm]
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.dists[arm].mean()
    }

    fn best_mean(&self) -> f64 {
        self.dists
            .iter()
            .map(EmpiricalDistribution::mean)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn require_pulled(&self, arm: usize) -> Result<()> {
        if arm >= self.k() {
            return Err(Error::Config(format!(
                "arm {arm} out of range for K = {}",
                self.k()
            )));
        }
        if self.counts[arm] == 0 {
            return Err(Error::UnpulledArm { arm });
        }
        Ok(())
    }

    pub fn first_unpulled(&self) -> Option<usize> {
        self.counts.iter().position(|&c| c == 0)
    }

    /// Records `reward` for `arm` and advances the round counter.
    pub fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        if arm >= self.k() {
            return Err(Error::Config(format!(
                "arm {arm} out of range for K = {}",
                self.k()
            )));
        }
        self.dists[arm].observe(reward)?;
        self.counts[arm] += 1;
        self.sums[arm] += reward;
        self.t += 1;
        Ok(())
    }
}

/// Position of the best entry (largest, or smallest if `minimize`), ties
/// broken uniformly at random.
pub fn pick_best<R: Rng + ?Sized>(indices: &[f64], minimize: bool, rng: &mut R) -> usize {
    let mut best = 0;
    let mut ties = 0u32;
    for (i, &v) in indices.iter().enumerate() {
        let better = if ties == 0 {
            true
        } else if minimize {
            v < indices[best]
        } else {
            v > indices[best]
        };
        if better {
            best = i;
            ties = 1;
        } else if v == indices[best] {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                best = i;
            }
        }
    }
    best
}

/// Arm to pull next: each arm once in order, then the best index.
pub fn select_arm(spec: &PolicySpec, state: &mut PolicyState) -> Result<usize> {
    if let Some(arm) = state.first_unpulled() {
        return Ok(arm);
    }
    let indices = (0..state.k())
        .map(|a| spec.compute_index(state, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(pick_best(&indices, spec.minimizes(), &mut state.rng))
}

/// A policy bound to its run state, caching indices that only move when
/// their own arm is pulled.
#[derive(Debug, Clone)]
pub struct IndexPolicy {
    spec: PolicySpec,
    state: PolicyState,
    cache: Vec<f64>,
    fresh: Vec<bool>,
}

impl IndexPolicy {
    pub fn new(spec: PolicySpec, k: usize, seed: u64) -> Result<Self> {
        Self::with_state(spec, PolicyState::new(k, seed))
    }

    pub fn with_state(spec: PolicySpec, state: PolicyState) -> Result<Self> {
        spec.validate()?;
        let k = state.k();
        Ok(Self {
            spec,
            state,
            cache: vec![0.0; k],
            fresh: vec![false; k],
        })
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    pub fn select_arm(&mut self) -> usize {
        if let Some(arm) = self.state.first_unpulled() {
            return arm;
        }
        let static_index = self.spec.index_is_static();
        for a in 0..self.state.k() {
            if !(static_index && self.fresh[a]) {
                self.cache[a] = self
                    .spec
                    .compute_index(&self.state, a)
                    .expect("every arm pulled after initialization");
                self.fresh[a] = true;
            }
        }
        pick_best(&self.cache, self.spec.minimizes(), &mut self.state.rng)
    }

    pub fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.state.update(arm, reward)?;
        self.fresh[arm] = false;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_with(k: usize, pulls: &[(usize, f64)]) -> PolicyState {
        let mut s = PolicyState::new(k, 3);
        for &(a, r) in pulls {
            s.update(a, r).unwrap();
        }
        s
    }

    #[test]
    fn log_plus_values() {
        assert_eq!(log_plus(0.5).unwrap(), 0.0);
        assert_eq!(log_plus(1.0).unwrap(), 0.0);
        assert!((log_plus(std::f64::consts::E.powi(2)).unwrap() - 2.0).abs() < 1e-15);
        assert!(log_plus(0.0).is_err());
        assert!(log_plus(-1.0).is_err());
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.3).unwrap(), 0.0);
        assert_eq!(phi(1.0).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((phi(e).unwrap() - (1.0 + std::f64::consts::LN_2)).abs() < 1e-15);
        assert!(phi(0.0).is_err());
        let mut prev = 0.0;
        for i in 1..2000 {
            let x = i as f64 * 0.05;
            let v = phi(x).unwrap();
            assert!(v >= log_plus(x).unwrap());
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn exploration_matches_free_functions() {
        for &(tau, k, n) in &[(100.0, 2, 4), (7.0, 3, 5), (1e4, 10, 1)] {
            let arg = tau / (k as f64 * n as f64);
            assert_eq!(
                Exploration::LogPlus.value(tau, k, n, 9),
                log_plus(arg).unwrap()
            );
            assert_eq!(
                Exploration::AugmentedPhi.value(tau, k, n, 9),
                phi(arg).unwrap()
            );
        }
        assert_eq!(Exploration::LogT.value(1.0, 2, 3, 1), 0.0);
    }

    #[test]
    fn moss_index_examples() {
        let e2 = std::f64::consts::E.powi(2);
        assert!((moss_index(0.5, 1, e2, Exploration::LogPlus) - 1.5).abs() < 1e-12);
        // 0.9 + √(ln(12.5) / 8)
        assert!(
            (moss_index(0.9, 4, 50.0, Exploration::LogPlus) - 1.461_886_181_124_373).abs() < 1e-12
        );
        assert_eq!(moss_index(0.4, 60, 50.0, Exploration::LogPlus), 0.4);
    }

    #[test]
    fn switch_threshold_examples() {
        assert_eq!(switch_threshold(32, 1, 0.2), 2);
        assert_eq!(switch_threshold(3, 4, 0.2), 0);
        assert_eq!(switch_threshold(512, 2, 8.0 / 9.0), 138);
        for m in 1..=6u64 {
            assert_eq!(switch_threshold(m.pow(5), 1, 0.2), m);
            assert_eq!(switch_threshold(m.pow(5) - 1, 1, 0.2), m - 1);
        }
        let emp = SwitchFunction::empirical();
        assert!((emp.value(512, 2) - 256f64.powf(8.0 / 9.0)).abs() < 1e-12);
        assert!(emp.value(512, 2) > 138.0);
    }

    #[test]
    fn update_counts() {
        let mut s = PolicyState::new(2, 0);
        s.update(0, 1.0).unwrap();
        assert_eq!(s.count(0), 1);
        assert_eq!(s.mean(0), 1.0);
        let s = state_with(2, &[(0, 0.2), (0, 0.4)]);
        assert!((s.mean(0) - 0.3).abs() < 1e-15);
        assert_eq!(s.t(), 2);
        let mut s = PolicyState::new(2, 0);
        assert!(s.update(0, 1.2).is_err());
        assert!(s.update(5, 0.2).is_err());
        assert_eq!(s.t(), 0);
    }

    #[test]
    fn unpulled_arm_is_an_error() {
        let s = state_with(2, &[(0, 0.5)]);
        let spec = PolicySpec::new(Family::Moss).with_horizon(100);
        assert!(matches!(
            spec.compute_index(&s, 1),
            Err(Error::UnpulledArm { arm: 1 })
        ));
    }

    #[test]
    fn switch_uses_moss_above_threshold() {
        // f(100, 2) = ⌊50^{1/5}⌋ = 2
        let s = state_with(2, &[(0, 1.0), (0, 0.0), (0, 1.0), (1, 0.0)]);
        let spec = PolicySpec::new(Family::KlucbSwitch).with_horizon(100);
        assert!(!spec.in_kl_branch(&s, 0));
        assert_eq!(
            spec.compute_index(&s, 0).unwrap(),
            PolicySpec::new(Family::Moss)
                .with_horizon(100)
                .compute_index(&s, 0)
                .unwrap()
        );
        assert!(spec.in_kl_branch(&s, 1));
        assert_eq!(
            spec.compute_index(&s, 1).unwrap(),
            PolicySpec::new(Family::Klucb)
                .with_horizon(100)
                .compute_index(&s, 1)
                .unwrap()
        );
    }

    #[test]
    fn klucb_index_is_mean_without_exploration() {
        // N = 60 ≥ T/K = 50 makes the threshold vanish
        let pulls: Vec<_> = (0..60)
            .map(|i| (0, if i % 3 == 0 { 1.0 } else { 0.0 }))
            .collect();
        let s = state_with(2, &pulls);
        let spec = PolicySpec::new(Family::Klucb).with_horizon(100);
        assert_eq!(spec.compute_index(&s, 0).unwrap(), s.mean(0));
    }

    #[test]
    fn gauss_matches_moss_with_scaled_constant() {
        let s = state_with(2, &[(0, 0.3), (0, 0.9), (1, 0.4)]);
        let moss = PolicySpec::new(Family::MossAnytime).with_exploration(Exploration::LogPlus);
        let gauss = PolicySpec::new(Family::KlucbGauss).with_sigma(0.5);
        for a in 0..2 {
            assert_eq!(
                moss.compute_index(&s, a).unwrap(),
                gauss.compute_index(&s, a).unwrap()
            );
        }
    }

    #[test]
    fn imed_index_and_argmin() {
        let mut s = state_with(2, &[(0, 1.0), (1, 0.0), (0, 1.0), (1, 1.0)]);
        let spec = PolicySpec::new(Family::Imed);
        // best arm: K_inf term vanishes, index ln 2
        assert!((spec.compute_index(&s, 0).unwrap() - 2f64.ln()).abs() < 1e-15);
        let expected = 2.0 * bernoulli_kl(0.5, 1.0 - 1e-9) + 2f64.ln();
        assert!((spec.compute_index(&s, 1).unwrap() - expected).abs() < 1e-9);
        assert_eq!(select_arm(&spec, &mut s).unwrap(), 0);
    }

    #[test]
    fn initialization_order() {
        let spec = PolicySpec::new(Family::Ucb);
        let mut s = PolicyState::new(3, 1);
        for expected in 0..3 {
            let a = select_arm(&spec, &mut s).unwrap();
            assert_eq!(a, expected);
            s.update(a, 0.5).unwrap();
        }
    }

    #[test]
    fn strict_argmax_and_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(pick_best(&[1.2, 0.7], false, &mut rng), 0);
        assert_eq!(pick_best(&[1.2, 0.7], true, &mut rng), 1);
        let k = 4;
        let trials = 10_000;
        let mut freq = vec![0u32; k];
        for _ in 0..trials {
            freq[pick_best(&[0.5; 4], false, &mut rng)] += 1;
        }
        let p = 1.0 / k as f64;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for f in freq {
            assert!((f as f64 - trials as f64 * p).abs() <= 3.0 * sigma, "{f}");
        }
    }

    #[test]
    fn policy_json() {
        let spec: PolicySpec = serde_json::from_str(
            r#"{"family":"klucb-switch-anytime","switch_exponent":0.2,"exploration":"log_plus"}"#,
        )
        .unwrap();
        assert_eq!(spec.family, Family::KlucbSwitchAnytime);
        assert_eq!(spec.exploration, Exploration::LogPlus);
        let back: PolicySpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);

        for bad in [
            r#"{"family":"moss","sigma":0.1}"#,
            r#"{"family":"klucb-gauss"}"#,
            r#"{"family":"klucb-switch","switch_exponent":1.5}"#,
            r#"{"family":"ucb","bogus":1}"#,
            r#"{"family":"thompson"}"#,
        ] {
            assert!(serde_json::from_str::<PolicySpec>(bad).is_err(), "{bad}");
        }
        let unbound = PolicySpec::new(Family::KlucbSwitch);
        assert!(unbound.validate().is_err());
        assert!(unbound.with_horizon(10).validate().is_ok());
    }
}
