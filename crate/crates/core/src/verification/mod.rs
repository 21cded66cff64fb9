//! Empirical and analytic checks of the inequalities behind the regret
//! guarantees, and the acceptance suites built from them.

mod bounds;
mod checks;
mod lambert;
mod oracle;
mod report;
pub mod suites;

pub use bounds::{
    concentration_bound, concentration_gamma, deviation_bound, hoeffding_integrated_bound,
    hoeffding_max_bound, integrated_deviation_bound, theoretical_bounds, BoundId,
};
pub use checks::{
    hoeffding_integrated_check, hoeffding_max_check, integrated_deviation_check,
    kinf_concentration_check, kinf_deviation_check, MAXIMAL_HORIZON_FACTOR,
};
pub use lambert::{lambert_w, lambert_w_bracket};
pub use oracle::{grid_kinf, random_empirical};
pub use report::{BoundCheckReport, BoundPoint, SIGMA_ALLOWANCE};
pub use suites::{run_suite, CriterionOutcome, Suite, SuiteOutcome, VerifyOptions};
