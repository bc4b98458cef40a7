//! Ground-node mobility and UAV fleet redistribution.
//!
//! Nodes follow a random-waypoint walk with no pause: move toward the
//! waypoint at the segment's speed, draw a fresh waypoint and speed on
//! arrival. UAVs hover until a redistribution epoch, then relocate to
//! density-grid cells with probability proportional to each cell's node
//! count, plus uniform jitter inside the chosen cell.

use crate::entity::{Area, EntityState, Position};
use crate::rng::RngStream;

/// Draws `count` independent uniform ground positions (z = 0).
pub fn uniform_placement(area: Area, count: u32, rng: &mut RngStream) -> Vec<Position> {
    (0..count).map(|_| uniform_point(area, rng)).collect()
}

/// One uniform ground position in the area.
pub fn uniform_point(area: Area, rng: &mut RngStream) -> Position {
    let x = rng.range_f64(0.0, area.width_m);
    let y = rng.range_f64(0.0, area.depth_m);
    Position::new(x, y, 0.0)
}

fn draw_waypoint(area: Area, rng: &mut RngStream) -> Position {
    uniform_point(area, rng)
}

fn draw_speed(v_min: f64, v_max: f64, rng: &mut RngStream) -> f64 {
    rng.range_f64(v_min, v_max)
}

/// Advances one random-waypoint walker by `dt_s` seconds.
///
/// Consumes as many segments as the time budget covers: if the walker
/// reaches its waypoint with time to spare, a new waypoint and speed are
/// drawn and the walk continues within the same call. The walker never
/// leaves `area` because waypoints are drawn inside it and movement is
/// linear interpolation toward them.
pub fn waypoint_step(
    state: &mut EntityState,
    dt_s: f64,
    area: Area,
    v_min: f64,
    v_max: f64,
    rng: &mut RngStream,
) {
    debug_assert!(dt_s >= 0.0);
    let mut remaining = dt_s;
    loop {
        let waypoint = match state.waypoint {
            Some(w) => w,
            None => {
                let w = draw_waypoint(area, rng);
                state.speed_mps = draw_speed(v_min, v_max, rng);
                state.waypoint = Some(w);
                w
            }
        };
        if remaining <= 0.0 {
            return;
        }
        let dist = state.pos.distance(&waypoint);
        let travel = state.speed_mps * remaining;
        if travel < dist {
            let f = travel / dist;
            state.pos = Position::new(
                state.pos.x + (waypoint.x - state.pos.x) * f,
                state.pos.y + (waypoint.y - state.pos.y) * f,
                state.pos.z,
            );
            return;
        }
        // Arrive, spend the time the leg took, pick the next leg.
        remaining -= if state.speed_mps > 0.0 { dist / state.speed_mps } else { remaining };
        state.pos = Position::new(waypoint.x, waypoint.y, state.pos.z);
        let w = draw_waypoint(area, rng);
        state.speed_mps = draw_speed(v_min, v_max, rng);
        state.waypoint = Some(w);
    }
}

/// Lazily evaluated trajectory of one ground node.
///
/// Positions are produced on demand for non-decreasing query times, so
/// the engine can interleave queries from packet routing and from
/// density sampling without stepping every node at a fixed tick rate.
#[derive(Debug, Clone)]
pub struct NodeTrajectory {
    state: EntityState,
    clock_us: u64,
    area: Area,
    v_min: f64,
    v_max: f64,
    rng: RngStream,
}

impl NodeTrajectory {
    pub fn new(
        state: EntityState,
        area: Area,
        v_min: f64,
        v_max: f64,
        rng: RngStream,
    ) -> Self {
        NodeTrajectory { state, clock_us: 0, area, v_min, v_max, rng }
    }

    /// Position at `t_us`. Queries must not go backwards in time.
    pub fn position_at(&mut self, t_us: u64) -> Position {
        assert!(
            t_us >= self.clock_us,
            "trajectory queried backwards: {} < {}",
            t_us,
            self.clock_us
        );
        let dt_s = (t_us - self.clock_us) as f64 * 1e-6;
        if dt_s > 0.0 {
            waypoint_step(&mut self.state, dt_s, self.area, self.v_min, self.v_max, &mut self.rng);
            self.clock_us = t_us;
        }
        self.state.pos
    }
}

/// Node counts over a regular grid of square cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityGrid {
    pub cols: u32,
    pub rows: u32,
    pub counts: Vec<u32>,
}

impl DensityGrid {
    pub fn cell_of(area: Area, cell_size_m: f64, p: &Position) -> (u32, u32) {
        let cols = Self::axis_cells(area.width_m, cell_size_m);
        let rows = Self::axis_cells(area.depth_m, cell_size_m);
        (
            Self::axis_index(p.x, cell_size_m, cols),
            Self::axis_index(p.y, cell_size_m, rows),
        )
    }

    fn axis_cells(extent: f64, cell: f64) -> u32 {
        (extent / cell).ceil().max(1.0) as u32
    }

    // Points exactly on a cell boundary belong to the lower-index cell.
    fn axis_index(coord: f64, cell: f64, cells: u32) -> u32 {
        let idx = (coord / cell).ceil() - 1.0;
        (idx.max(0.0) as u32).min(cells - 1)
    }

    pub fn count_at(&self, col: u32, row: u32) -> u32 {
        self.counts[(row * self.cols + col) as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// Bins `positions` into cells of `cell_size_m` over `area`.
pub fn density_grid(area: Area, cell_size_m: f64, positions: &[Position]) -> DensityGrid {
    let cols = DensityGrid::axis_cells(area.width_m, cell_size_m);
    let rows = DensityGrid::axis_cells(area.depth_m, cell_size_m);
    let mut counts = vec![0u32; (cols * rows) as usize];
    for p in positions {
        let col = DensityGrid::axis_index(p.x, cell_size_m, cols);
        let row = DensityGrid::axis_index(p.y, cell_size_m, rows);
        counts[(row * cols + col) as usize] += 1;
    }
    DensityGrid { cols, rows, counts }
}

/// Draws a cell index with probability proportional to its node count.
/// An all-empty grid falls back to the uniform distribution.
pub fn draw_cell(grid: &DensityGrid, rng: &mut RngStream) -> (u32, u32) {
    let total = grid.total();
    let flat = if total == 0 {
        rng.below(grid.counts.len() as u64)
    } else {
        let mut target = rng.below(total);
        let mut idx = 0u64;
        for (i, &c) in grid.counts.iter().enumerate() {
            if (c as u64) > target {
                idx = i as u64;
                break;
            }
            target -= c as u64;
        }
        idx
    };
    ((flat % grid.cols as u64) as u32, (flat / grid.cols as u64) as u32)
}

/// New hover targets for the fleet: each UAV independently picks a
/// density-weighted cell and a uniform point inside it (clamped to the
/// area). Targets keep each UAV's current altitude.
pub fn reposition_uavs(
    uavs: &[EntityState],
    grid: &DensityGrid,
    area: Area,
    cell_size_m: f64,
    rng: &mut RngStream,
) -> Vec<Position> {
    uavs.iter()
        .map(|uav| {
            let (col, row) = draw_cell(grid, rng);
            point_in_cell(area, cell_size_m, col, row, uav.pos.z, rng)
        })
        .collect()
}

/// Uniform point inside one grid cell at the given altitude.
pub fn point_in_cell(
    area: Area,
    cell_size_m: f64,
    col: u32,
    row: u32,
    altitude: f64,
    rng: &mut RngStream,
) -> Position {
    let x0 = col as f64 * cell_size_m;
    let y0 = row as f64 * cell_size_m;
    let x = rng.range_f64(x0, (x0 + cell_size_m).min(area.width_m));
    let y = rng.range_f64(y0, (y0 + cell_size_m).min(area.depth_m));
    Position::new(x, y, altitude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entity::EntityId;

    fn area() -> Area {
        Area { width_m: 1500.0, depth_m: 1500.0 }
    }

    fn walker(pos: Position, waypoint: Position, speed: f64) -> EntityState {
        EntityState {
            id: EntityId::Node(0),
            pos,
            waypoint: Some(waypoint),
            speed_mps: speed,
        }
    }

    #[test]
    fn placement_is_uniform_in_expectation() {
        let mut rng = RngStream::new(1, "placement");
        let pts = uniform_placement(area(), 100_000, &mut rng);
        let n = pts.len() as f64;
        let mx: f64 = pts.iter().map(|p| p.x).sum::<f64>() / n;
        let my: f64 = pts.iter().map(|p| p.y).sum::<f64>() / n;
        // Expected axis mean is 750; accept 1% of the area extent.
        assert!((mx - 750.0).abs() < 15.0, "mean x = {mx}");
        assert!((my - 750.0).abs() < 15.0, "mean y = {my}");
        assert!(pts.iter().all(|p| area().contains_xy(p) && p.z == 0.0));
    }

    #[test]
    fn step_moves_exactly_speed_times_dt_along_segment() {
        let mut rng = RngStream::new(2, "mobility");
        let start = Position::new(100.0, 100.0, 0.0);
        let target = Position::new(110.0, 100.0, 0.0); // 10 m away
        let mut state = walker(start, target, 2.0);
        waypoint_step(&mut state, 1.0, area(), 1.0, 5.0, &mut rng);
        assert!((state.pos.x - 102.0).abs() < 1e-9);
        assert!((state.pos.y - 100.0).abs() < 1e-9);
        assert_eq!(state.waypoint, Some(target));
    }

    #[test]
    fn arrival_draws_new_waypoint_and_speed_in_range() {
        let mut rng = RngStream::new(3, "mobility");
        let at = Position::new(50.0, 60.0, 0.0);
        let mut state = walker(at, at, 2.0);
        waypoint_step(&mut state, 1e-9, area(), 1.0, 5.0, &mut rng);
        // The walker was already at its waypoint, so the leg rolls over.
        let w = state.waypoint.unwrap();
        assert_ne!(w, at);
        assert!((1.0..=5.0).contains(&state.speed_mps));
        assert!(area().contains_xy(&w));
        assert!(state.pos.distance(&at) < 1e-6);
    }

    #[test]
    fn zero_dt_leaves_position_unchanged() {
        let mut rng = RngStream::new(4, "mobility");
        let mut state = walker(
            Position::new(700.0, 800.0, 0.0),
            Position::new(900.0, 800.0, 0.0),
            3.0,
        );
        let before = state.pos;
        waypoint_step(&mut state, 0.0, area(), 1.0, 5.0, &mut rng);
        assert_eq!(state.pos, before);
    }

    #[test]
    fn long_steps_never_leave_the_area() {
        let mut rng = RngStream::new(5, "mobility");
        let mut state = walker(
            Position::new(10.0, 10.0, 0.0),
            Position::new(20.0, 10.0, 0.0),
            5.0,
        );
        for _ in 0..2000 {
            waypoint_step(&mut state, 7.5, area(), 1.0, 5.0, &mut rng);
            assert!(area().contains_xy(&state.pos), "escaped at {:?}", state.pos);
        }
    }

    #[test]
    fn trajectory_queries_match_direct_stepping() {
        let start = walker(
            Position::new(400.0, 500.0, 0.0),
            Position::new(450.0, 520.0, 0.0),
            2.5,
        );
        let mut direct = start.clone();
        let mut direct_rng = RngStream::keyed(9, "mobility", &[7]);
        let mut traj = NodeTrajectory::new(
            start,
            area(),
            1.0,
            5.0,
            RngStream::keyed(9, "mobility", &[7]),
        );
        let mut t = 0u64;
        for step_us in [250_000u64, 1_000_000, 4_750_000, 30_000_000] {
            t += step_us;
            waypoint_step(&mut direct, step_us as f64 * 1e-6, area(), 1.0, 5.0, &mut direct_rng);
            let got = traj.position_at(t);
            assert!((got.x - direct.pos.x).abs() < 1e-6);
            assert!((got.y - direct.pos.y).abs() < 1e-6);
        }
    }

    #[test]
    fn grid_counts_match_brute_force() {
        let mut rng = RngStream::new(6, "placement");
        let pts = uniform_placement(area(), 500, &mut rng);
        let grid = density_grid(area(), 300.0, &pts);
        assert_eq!(grid.cols, 5);
        assert_eq!(grid.rows, 5);
        assert_eq!(grid.total(), 500);
        for col in 0..5u32 {
            for row in 0..5u32 {
                let brute = pts
                    .iter()
                    .filter(|p| DensityGrid::cell_of(area(), 300.0, p) == (col, row))
                    .count() as u32;
                assert_eq!(grid.count_at(col, row), brute);
            }
        }
    }

    #[test]
    fn boundary_points_bin_to_lower_cell() {
        let pts = [
            Position::new(0.0, 0.0, 0.0),
            Position::new(300.0, 0.0, 0.0),
            Position::new(300.0001, 0.0, 0.0),
            Position::new(1500.0, 1500.0, 0.0),
        ];
        let grid = density_grid(area(), 300.0, &pts);
        assert_eq!(grid.count_at(0, 0), 2); // origin and the 300 m boundary
        assert_eq!(grid.count_at(1, 0), 1);
        assert_eq!(grid.count_at(4, 4), 1); // far corner stays in the last cell
    }

    #[test]
    fn cell_draw_frequencies_follow_counts() {
        let grid = DensityGrid { cols: 3, rows: 1, counts: vec![1, 2, 7] };
        let mut rng = RngStream::new(7, "placement");
        let mut hits = [0u32; 3];
        let draws = 10_000;
        for _ in 0..draws {
            let (col, row) = draw_cell(&grid, &mut rng);
            assert_eq!(row, 0);
            hits[col as usize] += 1;
        }
        let freq: Vec<f64> = hits.iter().map(|&h| h as f64 / draws as f64).collect();
        for (got, want) in freq.iter().zip([0.1, 0.2, 0.7]) {
            assert!((got - want).abs() < 0.02, "freq {freq:?}");
        }
    }

    #[test]
    fn empty_grid_falls_back_to_uniform_cells() {
        let grid = DensityGrid { cols: 2, rows: 2, counts: vec![0; 4] };
        let mut rng = RngStream::new(8, "placement");
        let mut seen = [false; 4];
        for _ in 0..200 {
            let (col, row) = draw_cell(&grid, &mut rng);
            seen[(row * 2 + col) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn reposition_targets_stay_in_area_at_altitude() {
        let mut placement = RngStream::new(10, "placement");
        let pts = uniform_placement(area(), 40, &mut placement);
        let grid = density_grid(area(), 300.0, &pts);
        let uavs: Vec<EntityState> = (0..20)
            .map(|i| {
                EntityState::stationary(
                    EntityId::Uav(i),
                    Position::new(10.0 * i as f64, 5.0, 50.0),
                )
            })
            .collect();
        let mut rng = RngStream::new(10, "reposition");
        let targets = reposition_uavs(&uavs, &grid, area(), 300.0, &mut rng);
        assert_eq!(targets.len(), 20);
        for t in &targets {
            assert!(area().contains_xy(t));
            assert_eq!(t.z, 50.0);
        }
    }
}
