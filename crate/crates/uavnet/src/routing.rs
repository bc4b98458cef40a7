//! Path construction for the three delivery schemes.
//!
//! The cellular scheme crosses the base station in two hops. The relay
//! schemes climb to the nearest UAV, forward greedily across the fleet
//! toward the destination, and descend once the destination is in
//! ground range; a greedy dead end hands the packet down through the
//! base station instead. Relay admission is pluggable: the ledger
//! scheme rejects unauthenticated relays before they join a path.

use crate::channel::{transmit, FlowSampler, LinkBudget, LinkKind};
use crate::config::RadioConfig;
use crate::entity::{EntityId, EntityState, Position};

#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub n2d: LinkBudget,
    pub d2d: LinkBudget,
    pub n2b: LinkBudget,
    pub d2b: LinkBudget,
}

impl LinkModel {
    pub fn from_radio(radio: &RadioConfig) -> LinkModel {
        LinkModel {
            n2d: LinkBudget::from_config(LinkKind::N2d, &radio.n2d),
            d2d: LinkBudget::from_config(LinkKind::D2d, &radio.d2d),
            n2b: LinkBudget::from_config(LinkKind::N2b, &radio.n2b),
            d2b: LinkBudget::from_config(LinkKind::D2b, &radio.d2b),
        }
    }

    pub fn budget(&self, kind: LinkKind) -> &LinkBudget {
        match kind {
            LinkKind::N2d => &self.n2d,
            LinkKind::D2d => &self.d2d,
            LinkKind::N2b => &self.n2b,
            LinkKind::D2b => &self.d2b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowOutcome {
    /// Reached the destination untouched.
    Delivered,
    /// Reached the destination but crossed a rogue relay on the way.
    DeliveredCompromised,
    Dropped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteOutcome {
    pub outcome: FlowOutcome,
    pub data_transmissions: u64,
    pub control_messages: u64,
    /// Attempted receivers in order, starting at the source.
    pub trace: Vec<EntityId>,
}

impl RouteOutcome {
    fn start(src: EntityId) -> RouteOutcome {
        RouteOutcome {
            outcome: FlowOutcome::Dropped,
            data_transmissions: 0,
            control_messages: 0,
            trace: vec![src],
        }
    }

    /// Path length in hops; equals transmissions by construction.
    pub fn hops(&self) -> u32 {
        (self.trace.len() - 1) as u32
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Endpoint {
    pub id: EntityId,
    pub pos: Position,
}

pub struct RouteParams<'a> {
    pub links: &'a LinkModel,
    pub bs: Endpoint,
    /// Multiplier applied on every base-station hop.
    pub bs_hop_factor: f64,
    /// Survival share of the admission filter on base-station ingress.
    pub bs_admission_keep: f64,
    /// Multiplier applied whenever a relay is the receiver.
    pub relay_factor: f64,
}

/// Neighbor-discovery broadcast a source pays once per relayed flow.
pub const FLOW_SETUP_MESSAGES: u64 = 1;

/// Decides whether a relay may carry traffic and reports the control
/// messages the decision cost.
pub type RelayAdmission<'a> = dyn FnMut(usize) -> (bool, u64) + 'a;

/// Admits every relay for free; the ledgerless schemes use this.
pub fn admit_all(_uav: usize) -> (bool, u64) {
    (true, 0)
}

/// Relays within ground range of `pos` that are advertising relay
/// service, nearest first; ties break toward the lower index (fleet
/// slices are ordered by id).
pub fn uav_candidates(
    pos: &Position,
    uavs: &[EntityState],
    available: &[bool],
    n2d: &LinkBudget,
) -> Vec<usize> {
    let mut found: Vec<(f64, usize)> = uavs
        .iter()
        .enumerate()
        .filter_map(|(i, u)| {
            if !available[i] {
                return None;
            }
            let d = pos.distance(&u.pos);
            (d < n2d.max_range_m).then_some((d, i))
        })
        .collect();
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    found.into_iter().map(|(_, i)| i).collect()
}

pub fn nearest_uav(
    pos: &Position,
    uavs: &[EntityState],
    available: &[bool],
    n2d: &LinkBudget,
) -> Option<usize> {
    uav_candidates(pos, uavs, available, n2d).first().copied()
}

/// Unvisited advertising relays reachable from `current` that make
/// strict progress toward the destination, best progress first, ties
/// toward the lower index.
pub fn fanet_candidates(
    current: usize,
    dst: &Position,
    uavs: &[EntityState],
    visited: &[bool],
    available: &[bool],
    d2d: &LinkBudget,
) -> Vec<usize> {
    let here = &uavs[current].pos;
    let remaining = here.distance(dst);
    let mut found: Vec<(f64, usize)> = uavs
        .iter()
        .enumerate()
        .filter_map(|(i, u)| {
            if i == current || visited[i] || !available[i] {
                return None;
            }
            if here.distance(&u.pos) >= d2d.max_range_m {
                return None;
            }
            let progress = u.pos.distance(dst);
            (progress < remaining).then_some((progress, i))
        })
        .collect();
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    found.into_iter().map(|(_, i)| i).collect()
}

pub fn fanet_next_hop(
    current: usize,
    dst: &Position,
    uavs: &[EntityState],
    visited: &[bool],
    available: &[bool],
    d2d: &LinkBudget,
) -> Option<usize> {
    fanet_candidates(current, dst, uavs, visited, available, d2d).first().copied()
}

#[allow(clippy::too_many_arguments)]
fn hop(
    out: &mut RouteOutcome,
    from: &Position,
    to: &Position,
    to_id: EntityId,
    budget: &LinkBudget,
    factor: f64,
    sampler: &mut FlowSampler,
    transmit_calls: &mut u64,
) -> bool {
    out.trace.push(to_id);
    out.data_transmissions += 1;
    transmit(from, to, budget, factor, sampler, transmit_calls)
}

fn first_admitted(
    candidates: Vec<usize>,
    admit: &mut RelayAdmission,
    control_messages: &mut u64,
) -> Option<usize> {
    for i in candidates {
        let (ok, msgs) = admit(i);
        *control_messages += msgs;
        if ok {
            return Some(i);
        }
    }
    None
}

/// Two hops through the cell: source up to the base station, base
/// station down to the destination.
pub fn route_n2n_bs(
    src: Endpoint,
    dst: Endpoint,
    params: &RouteParams,
    sampler: &mut FlowSampler,
    transmit_calls: &mut u64,
) -> RouteOutcome {
    let mut out = RouteOutcome::start(src.id);
    let n2b = &params.links.n2b;
    let up = params.bs_hop_factor * params.bs_admission_keep;
    let alive = hop(&mut out, &src.pos, &params.bs.pos, params.bs.id, n2b, up, sampler, transmit_calls)
        && hop(&mut out, &params.bs.pos, &dst.pos, dst.id, n2b, params.bs_hop_factor, sampler, transmit_calls);
    if alive {
        out.outcome = FlowOutcome::Delivered;
    }
    out
}

/// Relay route: up to the nearest admitted UAV, greedy forwarding across
/// the fleet, down to the destination once it is in ground range. A
/// source with no reachable relay, or a greedy dead end, goes through
/// the base station instead. `rogue` marks relays that compromise any
/// packet they carry; `available` marks relays currently advertising
/// relay service, and silent ones are invisible to route discovery.
#[allow(clippy::too_many_arguments)]
pub fn route_n2n_uav(
    src: Endpoint,
    dst: Endpoint,
    uavs: &[EntityState],
    rogue: &[bool],
    available: &[bool],
    admit: &mut RelayAdmission,
    params: &RouteParams,
    sampler: &mut FlowSampler,
    transmit_calls: &mut u64,
) -> RouteOutcome {
    debug_assert_eq!(uavs.len(), rogue.len());
    debug_assert_eq!(uavs.len(), available.len());
    let mut out = RouteOutcome::start(src.id);
    out.control_messages += FLOW_SETUP_MESSAGES;
    let links = params.links;
    let up_keep = params.bs_hop_factor * params.bs_admission_keep;

    let entry = first_admitted(
        uav_candidates(&src.pos, uavs, available, &links.n2d),
        admit,
        &mut out.control_messages,
    );
    let Some(entry) = entry else {
        let alive = hop(&mut out, &src.pos, &params.bs.pos, params.bs.id, &links.n2b, up_keep, sampler, transmit_calls)
            && hop(&mut out, &params.bs.pos, &dst.pos, dst.id, &links.n2b, params.bs_hop_factor, sampler, transmit_calls);
        if alive {
            out.outcome = FlowOutcome::Delivered;
        }
        return out;
    };

    let mut visited = vec![false; uavs.len()];
    visited[entry] = true;
    let mut compromised = rogue[entry];
    if !hop(&mut out, &src.pos, &uavs[entry].pos, uavs[entry].id, &links.n2d, params.relay_factor, sampler, transmit_calls) {
        return out;
    }

    let delivered = |compromised: bool| {
        if compromised {
            FlowOutcome::DeliveredCompromised
        } else {
            FlowOutcome::Delivered
        }
    };

    let mut current = entry;
    loop {
        if uavs[current].pos.distance(&dst.pos) < links.n2d.max_range_m {
            if hop(&mut out, &uavs[current].pos, &dst.pos, dst.id, &links.n2d, 1.0, sampler, transmit_calls) {
                out.outcome = delivered(compromised);
            }
            return out;
        }
        let next = first_admitted(
            fanet_candidates(current, &dst.pos, uavs, &visited, available, &links.d2d),
            admit,
            &mut out.control_messages,
        );
        match next {
            Some(next) => {
                visited[next] = true;
                compromised |= rogue[next];
                if !hop(&mut out, &uavs[current].pos, &uavs[next].pos, uavs[next].id, &links.d2d, params.relay_factor, sampler, transmit_calls) {
                    return out;
                }
                current = next;
            }
            None => {
                let alive = hop(&mut out, &uavs[current].pos, &params.bs.pos, params.bs.id, &links.d2b, up_keep, sampler, transmit_calls)
                    && hop(&mut out, &params.bs.pos, &dst.pos, dst.id, &links.n2b, params.bs_hop_factor, sampler, transmit_calls);
                if alive {
                    out.outcome = delivered(compromised);
                }
                return out;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;

    fn uav(i: u32, x: f64, y: f64) -> EntityState {
        EntityState {
            id: EntityId::Uav(i),
            pos: Position { x, y, z: 50.0 },
            waypoint: None,
            speed_mps: 0.0,
        }
    }

    fn node(i: u32, x: f64, y: f64) -> Endpoint {
        Endpoint { id: EntityId::Node(i), pos: Position { x, y, z: 0.0 } }
    }

    /// Fixed budgets for the geometry scenarios below, independent of
    /// the shipped configuration.
    fn links() -> LinkModel {
        let budget = |kind, max_range_m, base_success| LinkBudget {
            kind,
            max_range_m,
            base_success,
            path_loss_exponent: 6.0,
        };
        LinkModel {
            n2d: budget(LinkKind::N2d, 700.0, 0.995),
            d2d: budget(LinkKind::D2d, 1000.0, 0.995),
            n2b: budget(LinkKind::N2b, 2400.0, 0.98),
            d2b: budget(LinkKind::D2b, 2400.0, 0.99),
        }
    }

    fn params(links: &LinkModel) -> RouteParams<'_> {
        RouteParams {
            links,
            bs: Endpoint {
                id: EntityId::BaseStation(0),
                pos: Position { x: 750.0, y: 750.0, z: 30.0 },
            },
            bs_hop_factor: 1.0,
            bs_admission_keep: 1.0,
            relay_factor: 1.0,
        }
    }

    /// Sampler that survives every hop with positive success probability.
    fn sure_sampler() -> FlowSampler {
        FlowSampler::new(0.0)
    }

    #[test]
    fn link_model_maps_config_budgets() {
        let radio = SimConfig::default_config().radio;
        let m = LinkModel::from_radio(&radio);
        assert_eq!(m.budget(LinkKind::N2d).max_range_m, radio.n2d.max_range_m);
        assert_eq!(m.budget(LinkKind::D2d).max_range_m, radio.d2d.max_range_m);
        assert_eq!(m.budget(LinkKind::N2b).kind, LinkKind::N2b);
        assert_eq!(m.budget(LinkKind::D2b).base_success, radio.d2b.base_success);
    }

    #[test]
    fn nearest_uav_orders_by_distance_and_skips_out_of_range() {
        let m = links();
        let fleet = [uav(0, 1200.0, 0.0), uav(1, 300.0, 0.0), uav(2, 600.0, 0.0)];
        let on = [true; 3];
        let src = Position { x: 0.0, y: 0.0, z: 0.0 };
        assert_eq!(uav_candidates(&src, &fleet, &on, &m.n2d), vec![1, 2]);
        assert_eq!(nearest_uav(&src, &fleet, &on, &m.n2d), Some(1));

        let lonely = [uav(0, 1200.0, 0.0)];
        assert_eq!(nearest_uav(&src, &lonely, &[true], &m.n2d), None);
    }

    #[test]
    fn nearest_uav_tie_breaks_to_lower_index() {
        let m = links();
        let fleet = [uav(0, 400.0, 300.0), uav(1, 300.0, 400.0)];
        let src = Position { x: 0.0, y: 0.0, z: 0.0 };
        assert_eq!(nearest_uav(&src, &fleet, &[true, true], &m.n2d), Some(0));
    }

    #[test]
    fn silent_relays_are_invisible_to_discovery() {
        let m = links();
        let fleet = [uav(0, 1200.0, 0.0), uav(1, 300.0, 0.0), uav(2, 600.0, 0.0)];
        let src = Position { x: 0.0, y: 0.0, z: 0.0 };
        assert_eq!(uav_candidates(&src, &fleet, &[true, false, true], &m.n2d), vec![2]);
        assert_eq!(nearest_uav(&src, &fleet, &[true, false, false], &m.n2d), None);

        let chain = [uav(0, 900.0, 0.0), uav(1, 500.0, 0.0), uav(2, 1400.0, 0.0)];
        let dst = Position { x: 1800.0, y: 0.0, z: 0.0 };
        let visited = vec![true, false, false];
        assert_eq!(
            fanet_candidates(0, &dst, &chain, &visited, &[true, true, false], &m.d2d),
            Vec::<usize>::new()
        );
    }

    #[test]
    fn fanet_requires_strict_progress() {
        let m = links();
        // u1 is in range but farther from the destination than u0.
        let fleet = [uav(0, 900.0, 0.0), uav(1, 500.0, 0.0), uav(2, 1400.0, 0.0)];
        let on = [true; 3];
        let dst = Position { x: 1800.0, y: 0.0, z: 0.0 };
        let visited = vec![true, false, false];
        assert_eq!(fanet_candidates(0, &dst, &fleet, &visited, &on, &m.d2d), vec![2]);

        let all_seen = vec![true, false, true];
        assert_eq!(fanet_next_hop(0, &dst, &fleet, &all_seen, &on, &m.d2d), None);
    }

    #[test]
    fn bs_route_is_exactly_two_hops() {
        let m = links();
        let p = params(&m);
        let mut calls = 0;
        let out = route_n2n_bs(node(0, 100.0, 100.0), node(1, 1400.0, 1400.0), &p, &mut sure_sampler(), &mut calls);
        assert_eq!(out.outcome, FlowOutcome::Delivered);
        assert_eq!(out.data_transmissions, 2);
        assert_eq!(calls, 2);
        assert_eq!(
            out.trace,
            vec![EntityId::Node(0), EntityId::BaseStation(0), EntityId::Node(1)]
        );
        assert_eq!(out.control_messages, 0);
    }

    #[test]
    fn bs_route_drop_counts_only_attempted_hops() {
        let m = links();
        let p = params(&m);
        let mut calls = 0;
        // A uniform this close to 1 fails the first imperfect hop.
        let mut sampler = FlowSampler::new(0.999_999_999);
        let out = route_n2n_bs(node(0, 100.0, 100.0), node(1, 1400.0, 1400.0), &p, &mut sampler, &mut calls);
        assert_eq!(out.outcome, FlowOutcome::Dropped);
        assert_eq!(out.data_transmissions, 1);
        assert_eq!(out.trace.len(), 2);
    }

    #[test]
    fn relay_route_chains_across_the_fleet() {
        let m = links();
        let p = params(&m);
        let fleet = [uav(0, 300.0, 0.0), uav(1, 900.0, 0.0), uav(2, 1500.0, 0.0)];
        let rogue = [false, false, false];
        let mut calls = 0;
        let out = route_n2n_uav(
            node(0, 0.0, 0.0),
            node(1, 1800.0, 0.0),
            &fleet,
            &rogue,
            &[true; 3],
            &mut admit_all,
            &p,
            &mut sure_sampler(),
            &mut calls,
        );
        assert_eq!(out.outcome, FlowOutcome::Delivered);
        assert_eq!(
            out.trace,
            vec![
                EntityId::Node(0),
                EntityId::Uav(0),
                EntityId::Uav(1),
                EntityId::Uav(2),
                EntityId::Node(1),
            ]
        );
        assert_eq!(out.data_transmissions, 4);
        assert_eq!(calls, 4);
        assert_eq!(out.hops(), 4);
    }

    #[test]
    fn relay_route_without_entry_falls_back_to_bs() {
        let m = links();
        let p = params(&m);
        let mut calls = 0;
        let out = route_n2n_uav(
            node(0, 0.0, 0.0),
            node(1, 1400.0, 1400.0),
            &[],
            &[],
            &[],
            &mut admit_all,
            &p,
            &mut sure_sampler(),
            &mut calls,
        );
        assert_eq!(out.outcome, FlowOutcome::Delivered);
        assert_eq!(
            out.trace,
            vec![EntityId::Node(0), EntityId::BaseStation(0), EntityId::Node(1)]
        );
        assert_eq!(out.data_transmissions, 2);
    }

    #[test]
    fn greedy_void_hands_down_through_bs() {
        let m = links();
        let p = params(&m);
        let fleet = [uav(0, 300.0, 0.0)];
        let rogue = [false];
        let mut calls = 0;
        let out = route_n2n_uav(
            node(0, 0.0, 0.0),
            node(1, 1800.0, 0.0),
            &fleet,
            &rogue,
            &[true],
            &mut admit_all,
            &p,
            &mut sure_sampler(),
            &mut calls,
        );
        assert_eq!(out.outcome, FlowOutcome::Delivered);
        assert_eq!(
            out.trace,
            vec![
                EntityId::Node(0),
                EntityId::Uav(0),
                EntityId::BaseStation(0),
                EntityId::Node(1),
            ]
        );
        assert_eq!(out.data_transmissions, 3);
    }

    #[test]
    fn rogue_relay_compromises_delivery_when_admitted() {
        let m = links();
        let p = params(&m);
        let fleet = [uav(0, 300.0, 0.0), uav(1, 900.0, 0.0), uav(2, 1500.0, 0.0)];
        let rogue = [false, true, false];
        let mut calls = 0;
        let out = route_n2n_uav(
            node(0, 0.0, 0.0),
            node(1, 1800.0, 0.0),
            &fleet,
            &rogue,
            &[true; 3],
            &mut admit_all,
            &p,
            &mut sure_sampler(),
            &mut calls,
        );
        assert_eq!(out.outcome, FlowOutcome::DeliveredCompromised);
        assert_eq!(out.control_messages, FLOW_SETUP_MESSAGES);
    }

    #[test]
    fn admission_filter_routes_around_rogue_relay() {
        let m = links();
        let p = params(&m);
        let fleet = [uav(0, 300.0, 0.0), uav(1, 900.0, 0.0), uav(2, 1500.0, 0.0)];
        let rogue = [false, true, false];
        let mut admit = |i: usize| (!rogue[i], 2u64);
        let mut calls = 0;
        let out = route_n2n_uav(
            node(0, 0.0, 0.0),
            node(1, 1800.0, 0.0),
            &fleet,
            &rogue,
            &[true; 3],
            &mut admit,
            &p,
            &mut sure_sampler(),
            &mut calls,
        );
        // u1 is rejected; u2 is beyond direct range of u0, so the packet
        // descends through the base station, still authentic.
        assert_eq!(out.outcome, FlowOutcome::Delivered);
        assert!(!out.trace.contains(&EntityId::Uav(1)));
        assert_eq!(
            out.trace,
            vec![
                EntityId::Node(0),
                EntityId::Uav(0),
                EntityId::BaseStation(0),
                EntityId::Node(1),
            ]
        );
        // Flow setup plus two admission checks: entry u0 accepted, fanet
        // u1 rejected.
        assert_eq!(out.control_messages, FLOW_SETUP_MESSAGES + 4);
    }

    #[test]
    fn admission_cost_does_not_change_the_path_without_rogues() {
        let m = links();
        let p = params(&m);
        let fleet = [uav(0, 300.0, 0.0), uav(1, 900.0, 0.0), uav(2, 1500.0, 0.0)];
        let rogue = [false, false, false];

        let mut calls_a = 0;
        let free = route_n2n_uav(
            node(0, 0.0, 0.0),
            node(1, 1800.0, 0.0),
            &fleet,
            &rogue,
            &[true; 3],
            &mut admit_all,
            &p,
            &mut FlowSampler::new(0.42),
            &mut calls_a,
        );
        let mut paid = |_: usize| (true, 2u64);
        let mut calls_b = 0;
        let checked = route_n2n_uav(
            node(0, 0.0, 0.0),
            node(1, 1800.0, 0.0),
            &fleet,
            &rogue,
            &[true; 3],
            &mut paid,
            &p,
            &mut FlowSampler::new(0.42),
            &mut calls_b,
        );
        assert_eq!(free.trace, checked.trace);
        assert_eq!(free.outcome, checked.outcome);
        assert_eq!(free.data_transmissions, checked.data_transmissions);
        assert_eq!(free.control_messages, FLOW_SETUP_MESSAGES);
        // One check per selection: entry u0, then fanet picks u1 and u2.
        assert_eq!(checked.control_messages, FLOW_SETUP_MESSAGES + 6);
    }
}
