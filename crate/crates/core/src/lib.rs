//! Strategic M/M/1 queue with a lounge: customers choose between waiting in
//! line or detouring through a more comfortable lounge, their cost
//! comparison collapses to a two-threshold rule, and the resulting
//! two-dimensional Markov chain admits closed forms in the tractable cases.
//!
//! The crate is organized as:
//!
//! - [`params`]: primitive rates/costs, validation, derived thresholds;
//! - [`policy`]: the per-customer cost comparison and threshold rules;
//! - [`dist`]: sparse stationary distributions and comparison helpers;
//! - [`analytic`]: the M/M/1 baseline and the two closed-form regimes;
//! - [`ctmc`]: a brute-force generator/solver used as numerical oracle;
//! - [`sim`]: an event-driven simulator and the closed-form-vs-system sweep;
//! - [`design`]: congestion costs and the lounge-design optimizer.

pub mod analytic;
pub mod ctmc;
pub mod design;
pub mod dist;
pub mod error;
pub mod params;
pub mod policy;
pub mod sim;

pub use analytic::{
    approx_stationary, b1_stationary, b1_stationary_with_threshold, mm1_pmf, mm1_second_moment,
    truncation_point, MSequence, DEFAULT_TAIL_TOL,
};
pub use ctmc::{
    build_generator, build_generator_approx, build_generator_with_thresholds, solve_stationary,
    solve_stationary_with, Generator, SolveMethod, StateSpace, DIRECT_TOL, ITERATIVE_TOL,
};
pub use design::{
    congestion_cost, design_sweep, g_of_a, optimize_design, regime_decision, DesignResult, GPoint,
    RegimeDecision, Verdict,
};
pub use dist::{sup_distance, SourceTag, StationaryDistribution, TruncationAxis};
pub use error::{Error, Result};
pub use params::{
    derive_thresholds, parse_config_str, DerivedThresholds, SystemParams, ValidationReport,
};
pub use policy::{
    cost_join_lounge, cost_join_queue, decide, decide_approximating, decide_threshold, Action,
    ObservedState,
};
pub use sim::{
    conjecture_sweep, simulate, PolicyVariant, ReplicationStats, SimConfig, SimResult, SweepMethod,
    SweepRow,
};
