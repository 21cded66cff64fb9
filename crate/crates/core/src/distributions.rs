//! Reward models for arms and the empirical distribution of observed rewards.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{domain, Error, Result};

/// One support point of an [`EmpiricalDistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub count: u64,
}

/// Weighted atoms on `[0, 1]`, kept sorted by value.
///
/// Observations are stored exactly unless a bin count was requested, in which
/// case each observation is rounded to the nearest point of the uniform grid
/// `{0, 1/B, ..., 1}` before insertion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmpiricalDistribution {
    atoms: Vec<Atom>,
    total: u64,
    mean: f64,
    bins: Option<u32>,
}

impl EmpiricalDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accumulator that snaps observations to a `bins`-cell grid.
    pub fn with_bins(bins: u32) -> Result<Self> {
        if bins == 0 {
            return Err(domain("bins", 0.0, "a positive integer"));
        }
        Ok(Self {
            bins: Some(bins),
            ..Self::default()
        })
    }

    /// Builds a distribution from `(value, count)` pairs in any order.
    /// Duplicate values are merged; zero counts are ignored.
    pub fn from_counts<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, u64)>,
    {
        let mut dist = Self::new();
        for (value, count) in pairs {
            if count > 0 {
                dist.insert(value, count)?;
            }
        }
        Ok(dist)
    }

    /// Builds a distribution holding one atom per sample.
    pub fn from_samples<I>(samples: I) -> Result<Self>
    where
        I: IntoIterator<Item = f64>,
    {
        let mut dist = Self::new();
        for x in samples {
            dist.observe(x)?;
        }
        Ok(dist)
    }

    /// Records one observation in `[0, 1]`.
    pub fn observe(&mut self, x: f64) -> Result<()> {
        self.insert(x, 1)
    }

    fn insert(&mut self, x: f64, count: u64) -> Result<()> {
        if !(0.0..=1.0).contains(&x) {
            return Err(domain("observation", x, "[0, 1]"));
        }
        let x = match self.bins {
            Some(b) => (x * f64::from(b)).round() / f64::from(b),
            None => x,
        };
        match self.atoms.binary_search_by(|a| a.value.total_cmp(&x)) {
            Ok(i) => self.atoms[i].count += count,
            Err(i) => self.atoms.insert(i, Atom { value: x, count }),
        }
        self.total += count;
        self.mean = self.weighted_sum() / self.total as f64;
        Ok(())
    }

    // Summed in atom order so the result does not depend on insertion order.
    fn weighted_sum(&self) -> f64 {
        self.atoms.iter().map(|a| a.value * a.count as f64).sum()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_count(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Cached mean; `0` for an empty accumulator.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn bins(&self) -> Option<u32> {
        self.bins
    }

    /// Iterates over `(value, probability)` pairs.
    pub fn weights(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.total as f64;
        self.atoms
            .iter()
            .map(move |a| (a.value, a.count as f64 / n))
    }

    pub fn has_atom_at_one(&self) -> bool {
        self.atoms.last().is_some_and(|a| a.value == 1.0)
    }

    /// True when every atom sits on `{0, 1}`.
    pub fn is_binary(&self) -> bool {
        self.atoms.iter().all(|a| a.value == 0.0 || a.value == 1.0)
    }

    /// True for a point mass at 1.
    pub fn is_dirac_at_one(&self) -> bool {
        self.atoms.len() == 1 && self.atoms[0].value == 1.0
    }
}

/// How a continuous law is brought onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Push mass outside `[0, 1]` onto the nearest endpoint.
    #[default]
    Clamp,
    /// Condition on landing in `[0, 1]`.
    Condition,
}

/// Finitely supported law with normalized probabilities. Two arms are equal
/// when their laws are, whatever the supplied weights summed to.
#[derive(Debug, Clone)]
pub struct DiscreteArm {
    values: Vec<f64>,
    /// Weights as supplied, kept so the arm serializes back verbatim.
    weights: Vec<f64>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
    adjustment: f64,
}

impl PartialEq for DiscreteArm {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && self.probs == other.probs
    }
}

impl DiscreteArm {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::Config(format!(
                "discrete arm needs matching non-empty values/probs (got {} and {})",
                values.len(),
                probs.len()
            )));
        }
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(domain("discrete atom", v, "[0, 1]"));
            }
        }
        for &p in &probs {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(domain(
                    "discrete probability",
                    p,
                    "a finite non-negative real",
                ));
            }
        }
        let sum: f64 = probs.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(domain(
                "discrete probability sum",
                sum,
                "a finite positive real",
            ));
        }
        let weights = probs;
        let probs: Vec<f64> = weights.iter().map(|p| p / sum).collect();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Ok(Self {
            values,
            weights,
            probs,
            cdf,
            adjustment: sum - 1.0,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Amount by which the supplied probabilities missed summing to one.
    pub fn normalization_adjustment(&self) -> f64 {
        self.adjustment
    }
}

/// Reward distribution of a single arm. Every sample lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArmConfig", into = "ArmConfig")]
pub enum ArmModel {
    Bernoulli {
        p: f64,
    },
    /// Exponential law with the given pre-truncation mean.
    TruncExp {
        mean: f64,
        truncation: Truncation,
    },
    TruncGauss {
        mean: f64,
        sigma: f64,
        truncation: Truncation,
    },
    Dirac {
        x: f64,
    },
    Discrete(DiscreteArm),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ArmConfig {
    Bernoulli {
        p: f64,
    },
    TruncExp {
        mean: f64,
        #[serde(default)]
        truncation: Truncation,
    },
    TruncGauss {
        mean: f64,
        sigma: f64,
        #[serde(default)]
        truncation: Truncation,
    },
    Dirac {
        x: f64,
    },
    Discrete {
        values: Vec<f64>,
        probs: Vec<f64>,
    },
}

impl TryFrom<ArmConfig> for ArmModel {
    type Error = Error;

    fn try_from(cfg: ArmConfig) -> Result<Self> {
        match cfg {
            ArmConfig::Bernoulli { p } => Self::bernoulli(p),
            ArmConfig::TruncExp { mean, truncation } => Self::trunc_exp(mean, truncation),
            ArmConfig::TruncGauss {
                mean,
                sigma,
                truncation,
            } => Self::trunc_gauss(mean, sigma, truncation),
            ArmConfig::Dirac { x } => Self::dirac(x),
            ArmConfig::Discrete { values, probs } => {
                Ok(Self::Discrete(DiscreteArm::new(values, probs)?))
            }
        }
    }
}

impl From<ArmModel> for ArmConfig {
    fn from(arm: ArmModel) -> Self {
        match arm {
            ArmModel::Bernoulli { p } => ArmConfig::Bernoulli { p },
            ArmModel::TruncExp { mean, truncation } => ArmConfig::TruncExp { mean, truncation },
            ArmModel::TruncGauss {
                mean,
                sigma,
                truncation,
            } => ArmConfig::TruncGauss {
                mean,
                sigma,
                truncation,
            },
            ArmModel::Dirac { x } => ArmConfig::Dirac { x },
            ArmModel::Discrete(d) => ArmConfig::Discrete {
                values: d.values,
                probs: d.weights,
            },
        }
    }
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

impl ArmModel {
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain("bernoulli p", p, "[0, 1]"));
        }
        Ok(Self::Bernoulli { p })
    }

    pub fn dirac(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(domain("dirac x", x, "[0, 1]"));
        }
        Ok(Self::Dirac { x })
    }

    pub fn trunc_exp(mean: f64, truncation: Truncation) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(domain("exponential mean", mean, "a finite positive real"));
        }
        Ok(Self::TruncExp { mean, truncation })
    }

    pub fn trunc_gauss(mean: f64, sigma: f64, truncation: Truncation) -> Result<Self> {
        if !mean.is_finite() {
            return Err(domain("gaussian mean", mean, "a finite real"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain("gaussian sigma", sigma, "a finite positive real"));
        }
        if truncation == Truncation::Condition {
            let (a, b) = (-mean / sigma, (1.0 - mean) / sigma);
            let mass = std_normal_cdf(b) - std_normal_cdf(a);
            if !(mass > 1e-12) {
                return Err(domain(
                    "gaussian mass on [0, 1]",
                    mass,
                    "above 1e-12 for conditioning",
                ));
            }
        }
        Ok(Self::TruncGauss {
            mean,
            sigma,
            truncation,
        })
    }

    pub fn discrete(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        Ok(Self::Discrete(DiscreteArm::new(values, probs)?))
    }

    /// Draws one reward.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Bernoulli { p } => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Dirac { x } => *x,
            Self::TruncExp { mean, truncation } => match truncation {
                Truncation::Clamp => {
                    let x: f64 = Exp::new(1.0 / mean).expect("validated rate").sample(rng);
                    x.min(1.0)
                }
                Truncation::Condition => {
                    // inverse cdf of the law restricted to [0, 1]
                    let mass = -(-1.0 / mean).exp_m1();
                    let u: f64 = rng.random();
                    (-mean * (-u * mass).ln_1p()).clamp(0.0, 1.0)
                }
            },
            Self::TruncGauss {
                mean,
                sigma,
                truncation,
            } => match truncation {
                Truncation::Clamp => {
                    let x = Normal::new(*mean, *sigma)
                        .expect("validated sigma")
                        .sample(rng);
                    x.clamp(0.0, 1.0)
                }
                Truncation::Condition => {
                    let lo = std_normal_cdf(-mean / sigma);
                    let hi = std_normal_cdf((1.0 - mean) / sigma);
                    let u: f64 = rng.random();
                    let p = (lo + u * (hi - lo)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
                    (mean + sigma * std_normal_quantile(p)).clamp(0.0, 1.0)
                }
            },
            Self::Discrete(d) => {
                let u: f64 = rng.random();
                let i = d.cdf.partition_point(|&c| c <= u).min(d.values.len() - 1);
                d.values[i]
            }
        }
    }

    /// Expectation of the law actually sampled (after truncation).
    pub fn true_mean(&self) -> f64 {
        match self {
            Self::Bernoulli { p } => *p,
            Self::Dirac { x } => *x,
            Self::TruncExp { mean, truncation } => match truncation {
                // E[min(X, 1)] = θ (1 − e^{−1/θ})
                Truncation::Clamp => -mean * (-1.0 / mean).exp_m1(),
                // E[X | X ≤ 1] = θ − 1 / (e^{1/θ} − 1)
                Truncation::Condition => mean - 1.0 / (1.0 / mean).exp_m1(),
            },
            Self::TruncGauss {
                mean,
                sigma,
                truncation,
            } => {
                let a = -mean / sigma;
                let b = (1.0 - mean) / sigma;
                let mass = std_normal_cdf(b) - std_normal_cdf(a);
                let tilt = sigma * (std_normal_pdf(a) - std_normal_pdf(b));
                let value = match truncation {
                    Truncation::Clamp => (1.0 - std_normal_cdf(b)) + mean * mass + tilt,
                    Truncation::Condition => mean + tilt / mass,
                };
                value.clamp(0.0, 1.0)
            }
            Self::Discrete(d) => d.values.iter().zip(&d.probs).map(|(v, p)| v * p).sum(),
        }
    }

    /// The law itself when it is finitely supported.
    pub fn finite_law(&self) -> Option<FiniteLaw> {
        let atoms = match self {
            Self::Bernoulli { p } => vec![(0.0, 1.0 - p), (1.0, *p)],
            Self::Dirac { x } => vec![(*x, 1.0)],
            Self::Discrete(d) => d
                .values
                .iter()
                .copied()
                .zip(d.probs.iter().copied())
                .collect(),
            _ => return None,
        };
        FiniteLaw::new(atoms).ok()
    }

    pub fn label(&self) -> String {
        match self {
            Self::Bernoulli { p } => format!("Ber({p})"),
            Self::Dirac { x } => format!("Dirac({x})"),
            Self::TruncExp { mean, .. } => format!("TruncExp({mean})"),
            Self::TruncGauss { mean, sigma, .. } => format!("TruncGauss({mean},{sigma})"),
            Self::Discrete(d) => format!("Discrete({} atoms)", d.values.len()),
        }
    }
}

/// Finitely supported law with real-valued probabilities, sorted by value.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLaw {
    atoms: Vec<(f64, f64)>,
    mean: f64,
}

impl FiniteLaw {
    /// Merges duplicate values, drops zero weights and normalizes.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        for &(x, p) in &atoms {
            if !(0.0..=1.0).contains(&x) {
                return Err(domain("atom", x, "[0, 1]"));
            }
            if !(p >= 0.0 && p.is_finite()) {
                return Err(domain("probability", p, "a finite non-negative real"));
            }
        }
        atoms.retain(|&(_, p)| p > 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        atoms.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let total: f64 = atoms.iter().map(|&(_, p)| p).sum();
        if !(total > 0.0) {
            return Err(domain("total probability", total, "a positive real"));
        }
        for a in &mut atoms {
            a.1 /= total;
        }
        let mean = atoms.iter().map(|&(x, p)| x * p).sum();
        Ok(Self { atoms, mean })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }
}

/// A bandit problem: `K ≥ 1` arms with their true means and gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ArmModel>", into = "Vec<ArmModel>")]
pub struct BanditInstance {
    arms: Vec<ArmModel>,
    means: Vec<f64>,
    mu_star: f64,
    gaps: Vec<f64>,
}

impl TryFrom<Vec<ArmModel>> for BanditInstance {
    type Error = Error;

    fn try_from(arms: Vec<ArmModel>) -> Result<Self> {
        Self::new(arms)
    }
}

impl From<BanditInstance> for Vec<ArmModel> {
    fn from(b: BanditInstance) -> Self {
        b.arms
    }
}

impl BanditInstance {
    pub fn new(arms: Vec<ArmModel>) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::Config("a bandit needs at least one arm".into()));
        }
        let means: Vec<f64> = arms.iter().map(ArmModel::true_mean).collect();
        let mu_star = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gaps = means.iter().map(|m| mu_star - m).collect();
        Ok(Self {
            arms,
            means,
            mu_star,
            gaps,
        })
    }

    /// Bernoulli problem `(best, best − gap, ..., best − gap)` with `k` arms.
    pub fn bernoulli_gap(best: f64, gap: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("a bandit needs at least one arm".into()));
        }
        let mut arms = vec![ArmModel::bernoulli(best)?];
        for _ in 1..k {
            arms.push(ArmModel::bernoulli(best - gap)?);
        }
        Self::new(arms)
    }

    pub fn arms(&self) -> &[ArmModel] {
        &self.arms
    }

    pub fn k(&self) -> usize {
        self.arms.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mu_star(&self) -> f64 {
        self.mu_star
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max)
    }
}
