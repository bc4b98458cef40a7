//! Radio link model.
//!
//! Link quality is distance-driven: success probability falls off as
//! `base * (1 - (d / max_range)^gamma)`, clamped to `[0, 1]`, and is 0
//! beyond `max_range`. Congestion enters as multiplicative factors that
//! the routing layer supplies per hop (cell load at the base station,
//! relay saturation at UAVs, admission drops).
//!
//! Per-flow randomness uses a single uniform draw per flow: a path of
//! hop probabilities `p1, p2, ...` is sampled against the running
//! product, which reproduces the sequential per-hop Bernoulli law
//! exactly (first-failure index has the same distribution) while letting
//! different schemes share the draw for matched comparisons.

use crate::config::LinkBudgetConfig;
use crate::entity::{Position, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    /// Mobile node <-> UAV.
    N2d,
    /// Mobile node <-> base station.
    N2b,
    /// UAV <-> UAV.
    D2d,
    /// UAV <-> base station.
    D2b,
}

impl LinkKind {
    /// The link kind joining two endpoint roles, if such a radio exists.
    /// Direct node-to-node and station-to-station links do not.
    pub fn between(a: Role, b: Role) -> Option<LinkKind> {
        use Role::*;
        match (a, b) {
            (MobileNode, Uav) | (Uav, MobileNode) => Some(LinkKind::N2d),
            (MobileNode, BaseStation) | (BaseStation, MobileNode) => Some(LinkKind::N2b),
            (Uav, Uav) => Some(LinkKind::D2d),
            (Uav, BaseStation) | (BaseStation, Uav) => Some(LinkKind::D2b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub kind: LinkKind,
    pub max_range_m: f64,
    pub base_success: f64,
    pub path_loss_exponent: f64,
}

impl LinkBudget {
    pub fn from_config(kind: LinkKind, cfg: &LinkBudgetConfig) -> Self {
        LinkBudget {
            kind,
            max_range_m: cfg.max_range_m,
            base_success: cfg.base_success,
            path_loss_exponent: cfg.path_loss_exponent,
        }
    }
}

/// Success probability of one transmission over distance `d_m`.
pub fn link_success_probability(d_m: f64, budget: &LinkBudget) -> f64 {
    debug_assert!(d_m >= 0.0);
    if d_m > budget.max_range_m {
        return 0.0;
    }
    let falloff = 1.0 - (d_m / budget.max_range_m).powf(budget.path_loss_exponent);
    budget.base_success * falloff.clamp(0.0, 1.0)
}

/// Probability that the base station drops an arriving packet because
/// offered load exceeds its admission capacity.
pub fn bs_admission_drop(offered_pps: f64, capacity_pps: f64) -> f64 {
    debug_assert!(offered_pps >= 0.0 && capacity_pps > 0.0);
    if offered_pps <= capacity_pps {
        0.0
    } else {
        (offered_pps - capacity_pps) / offered_pps
    }
}

/// Soft contention under load: fraction of transmissions that survive a
/// shared resource loaded at `offered_pps` against its saturation point.
pub fn load_factor(offered_pps: f64, saturation_pps: f64, exponent: f64) -> f64 {
    debug_assert!(offered_pps >= 0.0 && saturation_pps > 0.0);
    (1.0 - (offered_pps / saturation_pps).powf(exponent)).clamp(0.0, 1.0)
}

/// Samples one flow's end-to-end trajectory from a single uniform.
#[derive(Debug, Clone)]
pub struct FlowSampler {
    u: f64,
    acc: f64,
}

impl FlowSampler {
    pub fn new(u: f64) -> Self {
        debug_assert!((0.0..1.0).contains(&u));
        FlowSampler { u, acc: 1.0 }
    }

    fn pass(&mut self, p: f64) -> bool {
        self.acc *= p.clamp(0.0, 1.0);
        self.u < self.acc
    }
}

/// Attempts one transmission between two positions.
///
/// `factor` folds in the hop's congestion multipliers. Every call counts
/// exactly one message against `transmit_calls`, delivered or not.
pub fn transmit(
    src: &Position,
    dst: &Position,
    budget: &LinkBudget,
    factor: f64,
    sampler: &mut FlowSampler,
    transmit_calls: &mut u64,
) -> bool {
    *transmit_calls += 1;
    let p = link_success_probability(src.distance(dst), budget) * factor;
    sampler.pass(p)
}
