//! Entities and geometry.

use std::fmt;

/// Typed identifier for every simulated radio endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityId {
    Node(u32),
    Uav(u32),
    BaseStation(u32),
}

impl EntityId {
    pub fn role(self) -> Role {
        match self {
            EntityId::Node(_) => Role::MobileNode,
            EntityId::Uav(_) => Role::Uav,
            EntityId::BaseStation(_) => Role::BaseStation,
        }
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityId::Node(i) => write!(f, "n{i}"),
            EntityId::Uav(i) => write!(f, "u{i}"),
            EntityId::BaseStation(i) => write!(f, "b{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    MobileNode,
    Uav,
    BaseStation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Position { x, y, z }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Horizontal (ground-plane) distance.
    pub fn distance_2d(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Rectangular ground area with its origin at (0, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Area {
    pub width_m: f64,
    pub depth_m: f64,
}

impl Area {
    pub fn contains_xy(&self, p: &Position) -> bool {
        p.x >= 0.0 && p.x <= self.width_m && p.y >= 0.0 && p.y <= self.depth_m
    }

    pub fn center(&self) -> (f64, f64) {
        (self.width_m / 2.0, self.depth_m / 2.0)
    }

    pub fn diagonal(&self) -> f64 {
        (self.width_m * self.width_m + self.depth_m * self.depth_m).sqrt()
    }
}

/// Kinematic state of one entity at a point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityState {
    pub id: EntityId,
    pub pos: Position,
    /// Current movement target; `None` for stationary entities.
    pub waypoint: Option<Position>,
    pub speed_mps: f64,
}

impl EntityState {
    pub fn stationary(id: EntityId, pos: Position) -> Self {
        EntityState { id, pos, waypoint: None, speed_mps: 0.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_is_euclidean_3d() {
        let a = Position::new(0.0, 0.0, 0.0);
        let b = Position::new(3.0, 4.0, 12.0);
        assert_eq!(a.distance(&b), 13.0);
        assert_eq!(a.distance_2d(&b), 5.0);
    }

    #[test]
    fn area_contains_boundary() {
        let area = Area { width_m: 100.0, depth_m: 50.0 };
        assert!(area.contains_xy(&Position::new(0.0, 0.0, 10.0)));
        assert!(area.contains_xy(&Position::new(100.0, 50.0, 0.0)));
        assert!(!area.contains_xy(&Position::new(100.1, 0.0, 0.0)));
    }

    #[test]
    fn ids_format_by_role() {
        assert_eq!(EntityId::Node(7).to_string(), "n7");
        assert_eq!(EntityId::Uav(3).to_string(), "u3");
        assert_eq!(EntityId::BaseStation(0).to_string(), "b0");
        assert_eq!(EntityId::Uav(3).role(), Role::Uav);
    }
}
