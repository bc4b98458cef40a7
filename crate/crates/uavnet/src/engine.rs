//! Runs one configured scenario to completion.
//!
//! The run is flow-sampled: a panel of application packets is scheduled
//! across the duration and each is routed against the network state at
//! its departure time. Node trajectories advance lazily to the queried
//! instant, the fleet redistributes on its epoch ticks, and (under the
//! ledger scheme) validators commit delivery receipts on a fixed
//! cadence. Identical configurations produce identical outputs, bit for
//! bit: every random decision comes from a stream keyed by the scenario
//! seed, a purpose label, and the deciding entity, so toggling one
//! model never shifts the draws of another.

use crate::channel::{bs_admission_drop, load_factor, FlowSampler};
use crate::config::{ConfigError, Scheme, SimConfig};
use crate::entity::{EntityId, EntityState, Position};
use crate::event::{Event, EventKind, EventQueue};
use crate::ledger::{
    authenticate, consensus_commit, register_identity, sign_contract, Chain, ChainMode,
    DroneContract, IdentityRegistry, LedgerError, Rect, Transaction,
};
use crate::metrics::MetricsReport;
use crate::mobility::{
    draw_cell, density_grid, point_in_cell, uniform_point, DensityGrid, NodeTrajectory,
};
use crate::rng::{keyed_f64, RngStream};
use crate::routing::{
    admit_all, route_n2n_bs, route_n2n_uav, Endpoint, LinkModel, RouteParams,
};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

/// Report plus, for ledger runs, the chains the run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub report: MetricsReport,
    pub private_chain: Option<Chain>,
    pub public_chain: Option<Chain>,
    /// Raw count of channel transmissions attempted, kept separately
    /// from the metrics so the two tallies can be compared.
    pub transmit_invocations: u64,
}

const PROVIDERS: [&str; 2] = ["provider-a", "provider-b"];

fn uav_name(i: usize) -> String {
    format!("u{i}")
}

fn honest_credential(i: usize) -> String {
    format!("cred-u{i}")
}

/// Selects `count` distinct rogue indices by partial shuffle.
fn assign_rogues(n_uavs: usize, fraction: f64, seed: u64) -> Vec<bool> {
    let count = (fraction * n_uavs as f64).round() as usize;
    let mut order: Vec<usize> = (0..n_uavs).collect();
    let mut rng = RngStream::new(seed, "rogue");
    for k in 0..count.min(n_uavs) {
        let j = k + rng.below((n_uavs - k) as u64) as usize;
        order.swap(k, j);
    }
    let mut rogue = vec![false; n_uavs];
    for &i in order.iter().take(count.min(n_uavs)) {
        rogue[i] = true;
    }
    rogue
}

/// Full Fisher-Yates over `0..n`, keyed off the run seed.
fn shuffled_strata(seed: u64, n: u32) -> Vec<u32> {
    let mut order: Vec<u32> = (0..n).collect();
    let mut rng = RngStream::new(seed, "flow-stratum");
    for i in (1..order.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        order.swap(i, j);
    }
    order
}

fn advance_toward(from: Position, to: Position, max_dist: f64) -> Position {
    let d = from.distance(&to);
    if d <= max_dist || d == 0.0 {
        return to;
    }
    let f = max_dist / d;
    Position::new(
        from.x + (to.x - from.x) * f,
        from.y + (to.y - from.y) * f,
        from.z + (to.z - from.z) * f,
    )
}

/// Provisions the private chain: every honest relay gets an identity and
/// a service contract covering the whole scenario.
fn provision_private_chain(
    config: &SimConfig,
    rogue: &[bool],
) -> Result<Chain, LedgerError> {
    let mut chain = Chain::genesis(
        ChainMode::Private,
        PROVIDERS.iter().map(|p| p.to_string()).collect(),
    )?;
    let area = config.area();
    for i in 0..config.scenario.n_uavs as usize {
        if rogue[i] {
            continue;
        }
        let provider = PROVIDERS[i % PROVIDERS.len()];
        chain = register_identity(&chain, &uav_name(i), provider, &honest_credential(i), 0)?;
        chain = sign_contract(
            &chain,
            DroneContract {
                drone_id: uav_name(i),
                provider: provider.to_string(),
                service_area: Rect {
                    x_min: 0.0,
                    y_min: 0.0,
                    x_max: area.width_m,
                    y_max: area.depth_m,
                },
                valid_from_s: 0.0,
                valid_to_s: config.scenario.duration_s,
                resource_commitment: "relay".into(),
            },
            0,
        )?;
    }
    Ok(chain)
}

pub fn run(config: &SimConfig) -> Result<SimOutput, SimError> {
    config.validate()?;

    let scheme = config.scenario.scheme;
    let seed = config.scenario.seed;
    let area = config.area();
    let n_nodes = config.scenario.n_nodes;
    let n_uavs = if scheme.uses_uavs() { config.scenario.n_uavs as usize } else { 0 };
    let duration_us = config.duration_us();
    let mut report = MetricsReport::empty(scheme, n_nodes, seed);

    // Ground traffic and fleet state.
    let mut trajectories: Vec<NodeTrajectory> = (0..n_nodes)
        .map(|i| {
            let mut placement = RngStream::keyed(seed, "placement", &[u64::from(i)]);
            let state = EntityState {
                id: EntityId::Node(i),
                pos: uniform_point(area, &mut placement),
                waypoint: None,
                speed_mps: 0.0,
            };
            NodeTrajectory::new(
                state,
                area,
                config.mobility.v_min_mps,
                config.mobility.v_max_mps,
                RngStream::keyed(seed, "mobility", &[u64::from(i)]),
            )
        })
        .collect();

    let altitude = config.scenario.uav_altitude_m;
    let mut uavs: Vec<EntityState> = (0..n_uavs)
        .map(|i| {
            let mut placement = RngStream::keyed(seed, "uav-placement", &[i as u64]);
            let ground = uniform_point(area, &mut placement);
            EntityState {
                id: EntityId::Uav(i as u32),
                pos: Position::new(ground.x, ground.y, altitude),
                waypoint: None,
                speed_mps: config.redistribution.uav_speed_mps,
            }
        })
        .collect();
    let mut fleet_targets: Vec<Position> = uavs.iter().map(|u| u.pos).collect();
    let rogue = assign_rogues(n_uavs, config.adversary.rogue_uav_fraction, seed);
    // Honest relays always advertise; a rogue advertises only while the
    // cell it sits in is busy enough to be worth intercepting,
    // re-evaluated at launch and on every redistribution epoch.
    let mut advertising: Vec<bool> = rogue.iter().map(|r| !r).collect();
    if n_uavs > 0 {
        let cell = config.redistribution.cell_size_m;
        let launch: Vec<Position> =
            trajectories.iter_mut().map(|t| t.position_at(0)).collect();
        let grid = density_grid(area, cell, &launch);
        let threshold = config.adversary.rogue_activation_threshold;
        for i in 0..n_uavs {
            if rogue[i] {
                let (col, row) = DensityGrid::cell_of(area, cell, &uavs[i].pos);
                advertising[i] = grid.count_at(col, row) >= threshold;
            }
        }
    }

    // Ledger provisioning happens before the clock starts.
    let (private_chain, registry) = if scheme.uses_ledger() {
        let chain = provision_private_chain(config, &rogue)?;
        let registry = IdentityRegistry::replay(&chain)?;
        (Some(chain), Some(registry))
    } else {
        (None, None)
    };
    let mut public_chain =
        if scheme.uses_ledger() { Some(Chain::genesis(ChainMode::Public, Vec::new())?) } else { None };

    // Congestion is driven by the population's offered load, which is
    // constant through a run.
    let offered = config.offered_load_pps();
    let bs_offered = match scheme {
        Scheme::N2nBs => offered,
        _ => offered * config.base_station.uav_scheme_load_share,
    };
    let relay_factor = if scheme.uses_uavs() {
        load_factor(offered, config.relay.saturation_pps, config.relay.saturation_exponent)
    } else {
        1.0
    };
    let links = LinkModel::from_radio(&config.radio);
    let params = RouteParams {
        links: &links,
        bs: Endpoint {
            id: EntityId::BaseStation(0),
            pos: Position::new(
                area.width_m / 2.0,
                area.depth_m / 2.0,
                config.scenario.bs_mast_height_m,
            ),
        },
        bs_hop_factor: load_factor(
            bs_offered,
            config.base_station.saturation_pps,
            config.base_station.saturation_exponent,
        )
        .sqrt(),
        bs_admission_keep: 1.0 - bs_admission_drop(bs_offered, config.base_station.capacity_pps),
        relay_factor,
    };

    // Relay admission: the ledger scheme challenges each relay once per
    // run and caches the verdict; the others admit everyone for free.
    let mut auth_cache: Vec<Option<bool>> = vec![None; n_uavs];
    let presented: Vec<String> = (0..n_uavs)
        .map(|i| if rogue[i] { format!("cred-forged-{i}") } else { honest_credential(i) })
        .collect();
    let mut ledger_admit = |i: usize| -> (bool, u64) {
        if let Some(verdict) = auth_cache[i] {
            return (verdict, 0);
        }
        let registry = registry.as_ref().expect("ledger scheme has a registry");
        let result = authenticate(registry, &uav_name(i), &presented[i]);
        auth_cache[i] = Some(result.accepted);
        (result.accepted, result.control_messages)
    };

    // Schedule the whole run up front.
    let mut queue = EventQueue::new();
    let flows = config.sampled_flows();
    for k in 0..flows {
        let t = ((f64::from(k) + 0.5) / f64::from(flows) * duration_us as f64) as u64;
        let src = traffic_endpoints(seed, k, n_nodes).0;
        queue.push(Event {
            time_us: t,
            kind: EventKind::PacketGeneration { flow: k, src: EntityId::Node(src) },
        });
    }
    let reposition_us = (config.redistribution.interval_s * 1e6).round() as u64;
    if reposition_us > 0 && n_uavs > 0 {
        let mut epoch = 1u32;
        while u64::from(epoch) * reposition_us < duration_us {
            queue.push(Event {
                time_us: u64::from(epoch) * reposition_us,
                kind: EventKind::UavReposition { epoch },
            });
            epoch += 1;
        }
    }
    if scheme.uses_ledger() {
        let consensus_us = (config.ledger.consensus_interval_s * 1e6).round() as u64;
        if consensus_us > 0 {
            let mut round = 1u32;
            while u64::from(round) * consensus_us < duration_us {
                queue.push(Event {
                    time_us: u64::from(round) * consensus_us,
                    kind: EventKind::ConsensusRound { round },
                });
                round += 1;
            }
            // Closing round sweeps up the tail of the run.
            queue.push(Event { time_us: duration_us, kind: EventKind::ConsensusRound { round } });
        }
    }
    queue.push(Event { time_us: duration_us, kind: EventKind::MetricsSnapshot });

    // Strata are dealt to flows in shuffled order: every flow still owns
    // one exclusive slice of the unit interval, but which slice is
    // independent of its place in the schedule, so delivery odds do not
    // drift over the run.
    let strata = shuffled_strata(seed, flows);

    let mut transmit_calls: u64 = 0;
    let mut pending_receipts: Vec<Transaction> = Vec::new();

    while let Some(event) = queue.pop() {
        let now = event.time_us;
        match event.kind {
            EventKind::PacketGeneration { flow, .. } => {
                let (src_i, dst_i) = traffic_endpoints(seed, flow, n_nodes);
                let src = Endpoint {
                    id: EntityId::Node(src_i),
                    pos: trajectories[src_i as usize].position_at(now),
                };
                let dst = Endpoint {
                    id: EntityId::Node(dst_i),
                    pos: trajectories[dst_i as usize].position_at(now),
                };
                // Stratified uniform: each flow draws from its own slice
                // of the unit interval, keeping panel estimates tight
                // while each flow stays marginally uniform.
                let u = (f64::from(strata[flow as usize])
                    + keyed_f64(seed, "flow-u", &[u64::from(flow)]))
                    / f64::from(flows);
                let mut sampler = FlowSampler::new(u);
                let routed = match scheme {
                    Scheme::N2nBs => {
                        route_n2n_bs(src, dst, &params, &mut sampler, &mut transmit_calls)
                    }
                    Scheme::N2nUavNoBc => route_n2n_uav(
                        src,
                        dst,
                        &uavs,
                        &rogue,
                        &advertising,
                        &mut admit_all,
                        &params,
                        &mut sampler,
                        &mut transmit_calls,
                    ),
                    Scheme::N2nUavBc => route_n2n_uav(
                        src,
                        dst,
                        &uavs,
                        &rogue,
                        &advertising,
                        &mut ledger_admit,
                        &params,
                        &mut sampler,
                        &mut transmit_calls,
                    ),
                };
                if scheme.uses_ledger()
                    && routed.outcome == crate::routing::FlowOutcome::Delivered
                {
                    pending_receipts.push(Transaction::DeliveryReceipt {
                        flow,
                        src: src.id.to_string(),
                        dst: dst.id.to_string(),
                        hops: routed.hops(),
                        timestamp_us: now,
                    });
                }
                report.record(&routed);
            }
            EventKind::UavReposition { epoch } => {
                // Finish (or cap) travel toward the previous targets, then
                // retask: honest relays chase node density, rogues drift to
                // a uniform cell. Zero speed means relocation is instant.
                let speed = config.redistribution.uav_speed_mps;
                if speed > 0.0 {
                    let leg = speed * config.redistribution.interval_s;
                    for (uav, target) in uavs.iter_mut().zip(&fleet_targets) {
                        uav.pos = advance_toward(uav.pos, *target, leg);
                    }
                }
                let positions: Vec<Position> = trajectories
                    .iter_mut()
                    .map(|t| t.position_at(now))
                    .collect();
                let cell = config.redistribution.cell_size_m;
                let grid = density_grid(area, cell, &positions);
                let threshold = config.adversary.rogue_activation_threshold;
                let cols = u64::from(grid.cols);
                let rows = u64::from(grid.rows);
                for i in 0..n_uavs {
                    let target = if rogue[i] {
                        // Wander to a scouting cell, then advertise only
                        // if that cell turns out busy enough.
                        let mut rng =
                            RngStream::keyed(seed, "rogue-wander", &[u64::from(epoch), i as u64]);
                        let col = rng.below(cols) as u32;
                        let row = rng.below(rows) as u32;
                        advertising[i] = grid.count_at(col, row) >= threshold;
                        point_in_cell(area, cell, col, row, altitude, &mut rng)
                    } else {
                        let mut rng =
                            RngStream::keyed(seed, "reposition", &[u64::from(epoch), i as u64]);
                        let (col, row) = draw_cell(&grid, &mut rng);
                        point_in_cell(area, cell, col, row, altitude, &mut rng)
                    };
                    fleet_targets[i] = target;
                    if speed == 0.0 {
                        uavs[i].pos = target;
                    }
                }
            }
            EventKind::ConsensusRound { round } => {
                if pending_receipts.is_empty() {
                    continue;
                }
                let outcome =
                    consensus_commit(config.ledger.validators, config.ledger.faulty_validators);
                report.consensus_messages += outcome.messages;
                if outcome.committed {
                    let proposer = format!("v{}", round % config.ledger.validators);
                    let chain = public_chain.as_ref().expect("ledger scheme has a public chain");
                    public_chain =
                        Some(chain.append_block(std::mem::take(&mut pending_receipts), &proposer, now)?);
                }
            }
            EventKind::MobilityTick | EventKind::MetricsSnapshot => {}
        }
    }

    assert_eq!(
        transmit_calls, report.data_transmissions,
        "transmission tallies diverged between channel and metrics"
    );
    report
        .check_conservation()
        .expect("every accounted flow lands in exactly one outcome bucket");

    Ok(SimOutput { report, private_chain, public_chain, transmit_invocations: transmit_calls })
}

/// Source and destination node for a flow: two distinct indices drawn
/// from a stream keyed by the flow id alone.
fn traffic_endpoints(seed: u64, flow: u32, n_nodes: u32) -> (u32, u32) {
    debug_assert!(n_nodes >= 2);
    let mut rng = RngStream::keyed(seed, "traffic", &[u64::from(flow)]);
    let src = rng.below(u64::from(n_nodes)) as u32;
    let d = rng.below(u64::from(n_nodes) - 1) as u32;
    let dst = if d >= src { d + 1 } else { d };
    (src, dst)
}
