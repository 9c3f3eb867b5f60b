//! Heterogeneous-population SIS epidemics near the epidemic threshold.
//!
//! The crate is split along the lines of the analysis pipeline:
//!
//! - [`hetspace`]: discretized heterogeneity spaces (nodes and weights on
//!   `[0, 1]`), per-node parameter fields and the truncated normal density
//!   family used for the population distribution `f`.
//! - [`detdyn`]: deterministic structure of the integro-differential model:
//!   basic reproduction number, steady states, leading eigenvalue and RK4
//!   trajectories.
//! - [`stochsim`]: Euler-Maruyama simulation of the fast-slow model with
//!   additive noise and ensemble mean/variance of the aggregated prevalence.
//! - [`warnsign`]: least-squares fit of `A / (t_crit - t)^alpha` to variance
//!   series and sweep summaries.
//! - [`expctl`]: experiment definitions, config parsing and CSV/JSON output
//!   backing the `hetsis` command line tool.

pub mod detdyn;
pub mod error;
pub mod expctl;
pub mod hetspace;
mod roots;
pub mod stochsim;
pub mod warnsign;

pub use error::{HetsisError, Result};
