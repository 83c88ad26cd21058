//! Anticipated waiting costs and the join-queue/join-lounge decision.
//!
//! An arriving customer sees `(q, l)` and compares two fluid cost estimates:
//! joining the queue costs `alpha * q / mu`, while detouring through the
//! lounge costs `beta/nu` plus the anticipated cost of rejoining a residual
//! queue of `max(0, q + l - (mu-lambda)/nu)` customers. The comparison
//! collapses to a two-dimensional threshold rule; see
//! [`derive_thresholds`](crate::params::derive_thresholds).

use serde::Serialize;

use crate::params::{DerivedThresholds, SystemParams};

/// Queue length and lounge occupancy observed by an arriving customer.
///
/// `(0, l>0)` never occurs in the running system (an empty queue is refilled
/// from the lounge instantly) but is accepted here: the policy is a pure
/// function of its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ObservedState {
    pub q: u32,
    pub l: u32,
}

impl ObservedState {
    pub fn new(q: u32, l: u32) -> Self {
        ObservedState { q, l }
    }
}

/// The arriving customer's choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    JoinQueue,
    JoinLounge,
}

/// Anticipated cost of joining the queue directly: `alpha * q / mu`.
pub fn cost_join_queue(state: ObservedState, params: &SystemParams) -> f64 {
    params.alpha * state.q as f64 / params.mu
}

/// Anticipated cost of the lounge detour:
/// `beta/nu + (alpha/mu) * max(0, q + l - (mu-lambda)/nu)`.
pub fn cost_join_lounge(state: ObservedState, params: &SystemParams) -> f64 {
    let residual = (state.q + state.l) as f64 - (params.mu - params.lambda) / params.nu;
    params.beta / params.nu + params.alpha / params.mu * residual.max(0.0)
}

/// The exact cost-comparison rule: lounge iff it is strictly cheaper
/// (ties go to the queue).
pub fn decide(state: ObservedState, params: &SystemParams) -> Action {
    if cost_join_queue(state, params) > cost_join_lounge(state, params) {
        Action::JoinLounge
    } else {
        Action::JoinQueue
    }
}

/// The equivalent integer-threshold form: lounge iff `q > a_int` and
/// `l < b_int`.
pub fn decide_threshold(state: ObservedState, thresholds: &DerivedThresholds) -> Action {
    if state.q > thresholds.a_int && state.l < thresholds.b_int {
        Action::JoinLounge
    } else {
        Action::JoinQueue
    }
}

/// The vanishing-`nu` limit rule: lounge occupancy no longer matters, so the
/// decision depends on the queue alone.
pub fn decide_approximating(state: ObservedState, a_int: u32) -> Action {
    if state.q > a_int {
        Action::JoinLounge
    } else {
        Action::JoinQueue
    }
}
