//! KL-UCB-switch and related index policies for stochastic bandits with
//! rewards in `[0, 1]`.
//!
//! - [`distributions`]: arm reward models and empirical distributions.
//! - [`kinf`]: the `K_inf` solver, its witness and the KL-UCB index.
//! - [`policies`]: UCB, MOSS, KL-UCB, KL-UCB-switch, IMED and friends.
//! - [`simulator`]: episodes and Monte-Carlo regret curves.
//! - [`verification`]: empirical checks of the concentration inequalities
//!   behind the regret guarantees, and the acceptance suites.
//! - [`config`]: JSON scenario files, presets and sweeps.
//! - [`output`]: CSV and JSON writers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod distributions;
pub mod error;
pub mod kinf;
pub mod output;
pub mod policies;
pub mod simulator;
pub mod verification;

pub use distributions::{ArmModel, BanditInstance, EmpiricalDistribution, FiniteLaw, Truncation};
pub use error::{Error, Result};
pub use kinf::{kinf, klucb_index, KinfResult, KinfWitness};
pub use policies::{Exploration, Family, PolicySpec, PolicyState, SwitchFunction};
pub use simulator::{monte_carlo, RegretCurve, Scenario};
