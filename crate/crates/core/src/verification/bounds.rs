use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Closed-form regret bounds available for overlays and acceptance checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundId {
    /// KL-UCB-switch with known horizon: `(K − 1) + 23√(KT)`.
    KlucbSwitch,
    /// Anytime KL-UCB-switch: `(K − 1) + 44√(KT)`.
    KlucbSwitchAnytime,
    /// MOSS with known horizon: `(K − 1) + 17√(KT)`.
    Moss,
    /// Anytime MOSS with `ln_+` exploration: `(K − 1) + 30√(KT)`.
    MossAnytime,
    /// Anytime MOSS with `φ` exploration: `(K − 1) + 33√(KT)`.
    MossAnytimePhi,
    /// Minimax lower bound `min(√(KT), T) / 20`.
    LowerBound,
}

impl BoundId {
    pub const ALL: [BoundId; 6] = [
        Self::KlucbSwitch,
        Self::KlucbSwitchAnytime,
        Self::Moss,
        Self::MossAnytime,
        Self::MossAnytimePhi,
        Self::LowerBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::KlucbSwitch => "klucb-switch",
            Self::KlucbSwitchAnytime => "klucb-switch-anytime",
            Self::Moss => "moss",
            Self::MossAnytime => "moss-anytime",
            Self::MossAnytimePhi => "moss-anytime-phi",
            Self::LowerBound => "lower-bound",
        }
    }

    /// Multiplier of `√(KT)` for the upper bounds.
    pub fn constant(self) -> Option<f64> {
        match self {
            Self::KlucbSwitch => Some(23.0),
            Self::KlucbSwitchAnytime => Some(44.0),
            Self::Moss => Some(17.0),
            Self::MossAnytime => Some(30.0),
            Self::MossAnytimePhi => Some(33.0),
            Self::LowerBound => None,
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "bound",
                name: s.to_string(),
            })
    }
}

/// Value of the bound `id` for `k` arms and horizon `horizon`.
pub fn theoretical_bounds(k: usize, horizon: u64, id: BoundId) -> Result<f64> {
    if k == 0 {
        return Err(domain("K", 0.0, "a positive integer"));
    }
    if horizon == 0 {
        return Err(domain("T", 0.0, "a positive integer"));
    }
    let (k, t) = (k as f64, horizon as f64);
    let root = (k * t).sqrt();
    Ok(match id.constant() {
        Some(c) => (k - 1.0) + c * root,
        None => root.min(t) / 20.0,
    })
}

/// `γ(μ) = (16e^{−2} + ln²(1/(1 − μ))) / √(1 − μ)`.
pub fn concentration_gamma(mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(domain("mu", mu, "(0, 1)"));
    }
    let l = -(-mu).ln_1p();
    Ok((16.0 * (-2.0f64).exp() + l * l) / (1.0 - mu).sqrt())
}

/// `P[K_inf(ν̂_n, E(ν)) ≥ u] ≤ e(2n + 1)e^{−nu}`.
pub fn deviation_bound(n: u64, u: f64) -> f64 {
    let n = n as f64;
    std::f64::consts::E * (2.0 * n + 1.0) * (-n * u).exp()
}

/// `P[max_{n ≥ N} (μ̂_n − μ) ≥ u] ≤ e^{−2Nu²}`.
pub fn hoeffding_max_bound(big_n: u64, u: f64) -> f64 {
    (-2.0 * big_n as f64 * u * u).exp()
}

/// `P[K_inf(ν̂_n, μ) ≤ x]` bound in its two regimes.
pub fn concentration_bound(n: u64, kinf: f64, gamma: f64, x: f64) -> f64 {
    let n = n as f64;
    if x <= kinf - gamma / 2.0 {
        (-n * gamma / 8.0).exp()
    } else {
        let d = (kinf - x).max(0.0);
        (-n * d * d / (2.0 * gamma)).exp()
    }
}

/// `E[(E(ν) − U_{ε,n})⁺] ≤ (2n + 1)e^{−nε}√(π/n)`.
pub fn integrated_deviation_bound(n: u64, eps: f64) -> f64 {
    let n = n as f64;
    (2.0 * n + 1.0) * (-n * eps).exp() * (std::f64::consts::PI / n).sqrt()
}

/// `E[(max_{n ≥ N} (μ − μ̂_n − ε))⁺] ≤ √(π/8)·√(1/N)·e^{−2Nε²}`.
pub fn hoeffding_integrated_bound(big_n: u64, eps: f64) -> f64 {
    let n = big_n as f64;
    (std::f64::consts::PI / 8.0).sqrt() / n.sqrt() * (-2.0 * n * eps * eps).exp()
}
