//! Forecast comparison: Murphy diagrams, Wald-type equal-accuracy tests and
//! rank-based multiple comparisons.

mod hac;
mod mcb;
mod murphy;
mod wald;

pub use hac::{long_run_covariance, newey_west_var, nw_bandwidth, Kernel};
pub use mcb::{average_ranks, critical_distance, mcb, nemenyi_q, McbResult};
pub use murphy::{extremal_score, murphy_diff, normal_critical, theta_grid, MurphyCurve};
pub use wald::{
    chi2_sf, dm_multivariate, gw_bandwidth, gw_unconditional, loss_differentials, DmOptions, Pairing, WaldTestResult,
};
