//! JSON scenario files and the experiment presets.
//!
//! A config either names a preset, spells everything out, or both (explicit
//! fields override the preset). [`ScenarioConfig::expand`] resolves it to a
//! fully explicit config, which is what gets echoed next to the results and
//! parses back to the same experiment.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{ArmModel, BanditInstance, Truncation};
use crate::error::{Error, Result};
use crate::policies::{Exploration, Family, PolicySpec, SwitchFunction};
use crate::simulator::{monte_carlo, normalized_regret, RegretCurve, Scenario};

pub const DEFAULT_RUNS: u64 = 1_000;
pub const DEFAULT_SEED: u64 = 0;
/// Largest arm count a gap instance may ask for.
pub const MAX_GAP_ARMS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig1Left,
    Fig1Middle,
    Fig1Right,
    Fig2Left,
    Fig2Right,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Self::Fig1Left,
        Self::Fig1Middle,
        Self::Fig1Right,
        Self::Fig2Left,
        Self::Fig2Right,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig1Left => "fig1-left",
            Self::Fig1Middle => "fig1-middle",
            Self::Fig1Right => "fig1-right",
            Self::Fig2Left => "fig2-left",
            Self::Fig2Right => "fig2-right",
        }
    }

    /// The preset as an explicit config.
    pub fn config(self) -> ScenarioConfig {
        let mut c = ScenarioConfig {
            horizon: Some(10_000),
            ..ScenarioConfig::default()
        };
        match self {
            Self::Fig1Left => {
                c.arms = Some(vec![bernoulli(0.9), bernoulli(0.8)]);
                c.policies = Some(comparison_policies());
                c.runs = Some(10_000);
            }
            Self::Fig1Middle => {
                c.arms = Some(
                    [0.15, 0.12, 0.10, 0.05]
                        .map(|m| ArmModel::trunc_exp(m, Truncation::Clamp).expect("valid mean"))
                        .to_vec(),
                );
                let mut p = comparison_policies();
                p.push(PolicySpec::new(Family::KlucbExp).with_exploration(Exploration::LogPlus));
                c.policies = Some(p);
                c.runs = Some(10_000);
            }
            Self::Fig1Right => {
                c.arms = Some(
                    [0.7, 0.5, 0.3, 0.2]
                        .map(|m| {
                            ArmModel::trunc_gauss(m, 0.1, Truncation::Clamp).expect("valid law")
                        })
                        .to_vec(),
                );
                let mut p = comparison_policies();
                p.push(
                    PolicySpec::new(Family::KlucbGauss)
                        .with_exploration(Exploration::LogPlus)
                        .with_sigma(0.1),
                );
                c.policies = Some(p);
                c.runs = Some(10_000);
            }
            Self::Fig2Left | Self::Fig2Right => {
                let right = self == Self::Fig2Right;
                c.gap_instance = Some(GapInstance {
                    best: 0.8,
                    x: 1.0,
                    k: if right { 10 } else { 2 },
                });
                c.policies = Some(comparison_policies());
                c.runs = Some(5_000);
                c.sweep = Some(if right {
                    Sweep {
                        param: SweepParam::K,
                        values: vec![2.0, 10.0, 50.0],
                    }
                } else {
                    Sweep {
                        param: SweepParam::X,
                        values: default_x_grid(),
                    }
                });
            }
        }
        c
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "preset",
                name: s.to_string(),
            })
    }
}

fn pick<T: Clone>(a: &Option<T>, b: &Option<T>) -> Option<T> {
    a.clone().or_else(|| b.clone())
}

fn bernoulli(p: f64) -> ArmModel {
    ArmModel::bernoulli(p).expect("valid Bernoulli parameter")
}

/// `x ∈ {0.1, 0.2, ..., 3.0}`.
pub fn default_x_grid() -> Vec<f64> {
    (1..=30).map(|i| i as f64 / 10.0).collect()
}

/// UCB, MOSS, KL-UCB, KL-UCB-switch and IMED, the anytime ones with `ln_+`
/// exploration and the switch at `⌊t/K⌋^{8/9}`.
pub fn comparison_policies() -> Vec<PolicySpec> {
    vec![
        PolicySpec::new(Family::Ucb),
        PolicySpec::new(Family::MossAnytime).with_exploration(Exploration::LogPlus),
        PolicySpec::new(Family::KlucbAnytime).with_exploration(Exploration::LogPlus),
        PolicySpec::new(Family::KlucbSwitchAnytime)
            .with_exploration(Exploration::LogPlus)
            .with_switch(SwitchFunction::empirical()),
        PolicySpec::new(Family::Imed),
    ]
}

/// Bernoulli problem `(best, best − x√(K/T), ..., best − x√(K/T))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapInstance {
    pub best: f64,
    pub x: f64,
    pub k: usize,
}

impl GapInstance {
    pub fn gap(&self, horizon: u64) -> f64 {
        self.x * (self.k as f64 / horizon as f64).sqrt()
    }

    pub fn bandit(&self, horizon: u64) -> Result<BanditInstance> {
        if self.k > MAX_GAP_ARMS {
            return Err(Error::Config(format!(
                "gap_instance.k = {} exceeds the limit of {MAX_GAP_ARMS} arms",
                self.k
            )));
        }
        BanditInstance::bernoulli_gap(self.best, self.gap(horizon), self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    X,
    K,
    T,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            Self::X => "x",
            Self::K => "k",
            Self::T => "t",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// A scenario file. Every field is optional in the file; [`expand`](Self::expand)
/// fills in preset values and defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<Vec<ArmModel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_instance: Option<GapInstance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<Vec<PolicySpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Rounds at which regret is recorded; default geometric grid if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_grid: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_trajectory: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    /// Provenance stamp written into echoed configs; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_by: Option<String>,
}

impl FromStr for ScenarioConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_named(s, "<input>")
    }
}

impl ScenarioConfig {
    /// Parses JSON, reporting the offending field path and position.
    pub fn parse_named(text: &str, source: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::ConfigParse {
                path: source.to_string(),
                message: format!("at `{path}`: {inner}"),
            }
        })?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_named(&text, &path.display().to_string())
    }

    /// Resolves the preset and defaults into an explicit config, then
    /// validates it by building its scenario.
    pub fn expand(&self) -> Result<Self> {
        let base = self.preset.map(Preset::config).unwrap_or_default();
        let mut out = Self {
            preset: None,
            arms: pick(&self.arms, &base.arms),
            gap_instance: pick(&self.gap_instance, &base.gap_instance),
            horizon: self.horizon.or(base.horizon),
            policies: pick(&self.policies, &base.policies),
            runs: Some(self.runs.or(base.runs).unwrap_or(DEFAULT_RUNS)),
            seed: Some(self.seed.or(base.seed).unwrap_or(DEFAULT_SEED)),
            record_grid: pick(&self.record_grid, &base.record_grid),
            full_trajectory: self.full_trajectory.or(base.full_trajectory),
            bins: self.bins.or(base.bins),
            parallelism: self.parallelism,
            output_dir: self.output_dir.clone(),
            sweep: pick(&self.sweep, &base.sweep),
            generated_by: None,
        };
        // explicit arms replace a preset's gap instance and vice versa
        if self.arms.is_some() && self.gap_instance.is_none() {
            out.gap_instance = None;
        }
        if self.gap_instance.is_some() && self.arms.is_none() {
            out.arms = None;
        }
        if out.arms.is_some() == out.gap_instance.is_some() {
            return Err(Error::Config(
                "exactly one of `arms` and `gap_instance` must be given".into(),
            ));
        }
        if out.horizon.is_none() {
            return Err(Error::Config("`horizon` is required".into()));
        }
        if out.policies.as_ref().is_none_or(Vec::is_empty) {
            return Err(Error::Config(
                "`policies` must list at least one policy".into(),
            ));
        }
        if out.parallelism == Some(0) {
            return Err(Error::Config("`parallelism` must be at least 1".into()));
        }
        if let Some(p) = out.policies.as_mut() {
            for spec in p.iter_mut() {
                if spec.label.is_none() {
                    spec.label = Some(spec.name());
                }
            }
        }
        out.build(false)?;
        if let Some(s) = &out.sweep {
            out.check_sweep(s)?;
        }
        Ok(out)
    }

    fn check_sweep(&self, sweep: &Sweep) -> Result<()> {
        if sweep.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if sweep.param != SweepParam::T && self.gap_instance.is_none() {
            return Err(Error::Config(format!(
                "a `{}` sweep needs a gap_instance",
                sweep.param.name()
            )));
        }
        for &v in &sweep.values {
            self.at(sweep.param, v)?.build(false)?;
        }
        Ok(())
    }

    /// This config with one sweep coordinate replaced.
    pub fn at(&self, param: SweepParam, value: f64) -> Result<Self> {
        let mut c = self.clone();
        c.sweep = None;
        let integer = |what: &str| -> Result<u64> {
            if value >= 1.0 && value.fract() == 0.0 && value < 2f64.powi(53) {
                Ok(value as u64)
            } else {
                Err(Error::Config(format!(
                    "{what} sweep value {value} must be a positive integer"
                )))
            }
        };
        match param {
            SweepParam::X => {
                let g = c
                    .gap_instance
                    .as_mut()
                    .ok_or_else(|| Error::Config("x sweep needs a gap_instance".into()))?;
                g.x = value;
            }
            SweepParam::K => {
                let k = integer("k")? as usize;
                let g = c
                    .gap_instance
                    .as_mut()
                    .ok_or_else(|| Error::Config("k sweep needs a gap_instance".into()))?;
                g.k = k;
            }
            SweepParam::T => {
                let t = integer("t")?;
                c.horizon = Some(t);
                c.record_grid = Some(vec![t]);
                c.full_trajectory = None;
            }
        }
        Ok(c)
    }

    /// Builds the simulator scenario (defaults applied, nothing else resolved).
    pub fn scenario(&self) -> Result<Scenario> {
        self.build(true)
    }

    // Validation skips materializing a per-round grid.
    fn build(&self, full_grid: bool) -> Result<Scenario> {
        let horizon = self
            .horizon
            .ok_or_else(|| Error::Config("`horizon` is required".into()))?;
        let bandit = match (&self.arms, &self.gap_instance) {
            (Some(arms), None) => BanditInstance::new(arms.clone())?,
            (None, Some(g)) => g.bandit(horizon)?,
            _ => {
                return Err(Error::Config(
                    "exactly one of `arms` and `gap_instance` must be given".into(),
                ))
            }
        };
        let policies = self.policies.clone().unwrap_or_default();
        let grid = self.record_grid.clone().unwrap_or_default();
        let scenario = Scenario::new(
            bandit,
            horizon,
            policies,
            self.runs.unwrap_or(DEFAULT_RUNS),
            self.seed.unwrap_or(DEFAULT_SEED),
            grid,
        )?
        .with_bins(self.bins);
        Ok(if full_grid && self.full_trajectory == Some(true) {
            scenario.with_full_trajectory()
        } else {
            scenario
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}

/// One normalized-regret value of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep_param: SweepParam,
    pub sweep_value: f64,
    pub policy: String,
    pub normalized_regret: f64,
}

/// Runs every point of the config's sweep; rows come out grouped by point,
/// policies in config order.
pub fn run_sweep(config: &ScenarioConfig, parallelism: usize) -> Result<Vec<SweepRow>> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("the config has no `sweep`".into()))?;
    let mut rows = Vec::new();
    for &value in &sweep.values {
        let mut point = config.at(sweep.param, value)?;
        let horizon = point.horizon.unwrap_or_default();
        point.record_grid = Some(vec![horizon]);
        point.full_trajectory = None;
        let curve = monte_carlo(&point.scenario()?, parallelism)?;
        rows.extend(sweep_rows(&curve, sweep.param, value));
    }
    Ok(rows)
}

fn sweep_rows(curve: &RegretCurve, param: SweepParam, value: f64) -> Vec<SweepRow> {
    let last = curve.grid.len() - 1;
    curve
        .policies
        .iter()
        .map(|p| SweepRow {
            sweep_param: param,
            sweep_value: value,
            policy: p.name.clone(),
            normalized_regret: normalized_regret(p.mean[last], curve.k, curve.horizon),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_expand() {
        for p in Preset::ALL {
            let c = ScenarioConfig {
                preset: Some(p),
                ..Default::default()
            }
            .expand()
            .unwrap();
            assert!(c.preset.is_none());
            assert_eq!(c.to_json().parse::<ScenarioConfig>().unwrap(), c);
        }
    }

    #[test]
    fn fig1_left_matches_caption() {
        let c = Preset::Fig1Left.config().expand().unwrap();
        let s = c.scenario().unwrap();
        assert_eq!(s.bandit.means(), &[0.9, 0.8]);
        assert_eq!(s.runs, 10_000);
        let names: Vec<String> = s.policies.iter().map(PolicySpec::name).collect();
        assert_eq!(
            names,
            [
                "UCB",
                "MOSS-anytime",
                "KL-UCB-anytime",
                "KL-UCB-switch-anytime",
                "IMED"
            ]
        );
    }

    #[test]
    fn fig1_right_adds_gaussian_index() {
        let c = Preset::Fig1Right.config();
        let p = c.policies.unwrap();
        assert_eq!(p.last().unwrap().family, Family::KlucbGauss);
        assert_eq!(p.last().unwrap().sigma, Some(0.1));
    }

    #[test]
    fn fig2_right_sweeps_k() {
        let c = Preset::Fig2Right.config().expand().unwrap();
        assert_eq!(c.runs, Some(5_000));
        let s = c.sweep.clone().unwrap();
        assert_eq!(s.param, SweepParam::K);
        assert_eq!(s.values, [2.0, 10.0, 50.0]);
        let b = c
            .at(SweepParam::K, 50.0)
            .unwrap()
            .scenario()
            .unwrap()
            .bandit;
        assert_eq!(b.k(), 50);
        assert!((b.gaps()[1] - (50.0f64 / 10_000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn explicit_fields_override_preset() {
        let c: ScenarioConfig = r#"{"preset": "fig1-left", "runs": 7, "horizon": 50}"#
            .parse()
            .unwrap();
        let e = c.expand().unwrap();
        assert_eq!((e.runs, e.horizon), (Some(7), Some(50)));
        let c: ScenarioConfig =
            r#"{"preset": "fig2-left", "arms": [{"kind": "bernoulli", "p": 0.5}]}"#
                .parse()
                .unwrap();
        assert!(c.expand().is_err(), "an x sweep needs a gap instance");
        let c: ScenarioConfig =
            r#"{"preset": "fig2-left", "arms": [{"kind": "bernoulli", "p": 0.5}],
            "sweep": {"param": "t", "values": [10, 20]}}"#
                .parse()
                .unwrap();
        let e = c.expand().unwrap();
        assert!(e.gap_instance.is_none());
    }

    #[test]
    fn unknown_fields_are_rejected_with_their_path() {
        let err = r#"{"preset": "fig1-left", "horizn": 5}"#.parse::<ScenarioConfig>().unwrap_err();
        assert!(err.to_string().contains("horizn"), "{err}");
        let err = r#"{"arms": [{"kind": "bernoulli", "q": 0.5}]}"#
            .parse::<ScenarioConfig>()
            .unwrap_err()
            .to_string();
        assert!(err.contains("arms[0]"), "{err}");
        assert!(err.contains("line 1"), "{err}");
        let err = r#"{"policies": [{"family": "moss", "sigma": 1}]}"#.parse::<ScenarioConfig>();
        assert!(err.is_err());
    }

    #[test]
    fn incomplete_configs_are_rejected() {
        let bad = [
            r#"{"horizon": 10, "policies": [{"family": "ucb"}]}"#,
            r#"{"arms": [{"kind": "dirac", "x": 0.5}], "policies": [{"family": "ucb"}]}"#,
            r#"{"arms": [{"kind": "dirac", "x": 0.5}], "horizon": 10}"#,
            r#"{"arms": [{"kind": "dirac", "x": 0.5}], "horizon": 10, "policies": [{"family": "ucb"}], "runs": 0}"#,
            r#"{"preset": "fig1-left", "sweep": {"param": "x", "values": [1]}}"#,
            r#"{"preset": "fig2-right", "sweep": {"param": "k", "values": [2.5]}}"#,
            r#"{"preset": "fig2-right", "sweep": {"param": "k", "values": [1e15]}}"#,
            r#"{"gap_instance": {"best": 0.8, "x": 1, "k": 1000000000000}, "horizon": 1000000000000000000, "policies": [{"family": "ucb"}]}"#,
        ];
        for text in bad {
            let c: ScenarioConfig = text.parse().unwrap();
            assert!(c.expand().is_err(), "{text}");
        }
    }

    #[test]
    fn validation_does_not_materialize_long_trajectories() {
        let c: ScenarioConfig =
            r#"{"arms": [{"kind": "dirac", "x": 0.5}], "horizon": 1000000000000000000,
            "full_trajectory": true, "policies": [{"family": "ucb"}]}"#
                .parse()
                .unwrap();
        assert!(c.expand().is_ok());
    }

    #[test]
    fn tiny_sweep_runs() {
        let c: ScenarioConfig = r#"{
            "gap_instance": {"best": 0.8, "x": 1, "k": 2},
            "horizon": 100,
            "runs": 3,
            "policies": [{"family": "ucb"}, {"family": "moss"}],
            "sweep": {"param": "x", "values": [0.5, 1.0]}
        }"#
        .parse()
        .unwrap();
        let rows = run_sweep(&c.expand().unwrap(), 1).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].policy, "MOSS");
        assert_eq!(rows[2].sweep_value, 1.0);
        assert!(rows.iter().all(|r| r.normalized_regret >= 0.0));
    }
}
