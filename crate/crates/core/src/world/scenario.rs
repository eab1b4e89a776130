//! Scenario documents: a JSON description of one scene (bounds, obstacles,
//! labelled regions, scripted people, artworks, machines, robot start/goal).

use serde::{Deserialize, Serialize};

use crate::geom::{dist_point_segment, point_in_polygon, Point2D};
use crate::world::Pose2D;
use crate::{Error, Result};

/// The four labels a map region can carry. The numeric order is fixed; it is
/// the index order of every probability vector in the context pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvLabel {
    Hallway,
    ArtGallery,
    VendingMachine,
    Other,
}

impl EnvLabel {
    pub const ALL: [EnvLabel; 4] = [
        EnvLabel::Hallway,
        EnvLabel::ArtGallery,
        EnvLabel::VendingMachine,
        EnvLabel::Other,
    ];

    pub fn index(self) -> usize {
        match self {
            EnvLabel::Hallway => 0,
            EnvLabel::ArtGallery => 1,
            EnvLabel::VendingMachine => 2,
            EnvLabel::Other => 3,
        }
    }

    pub fn from_index(i: usize) -> EnvLabel {
        Self::ALL[i]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EnvLabel::Hallway => "hallway",
            EnvLabel::ArtGallery => "art_gallery",
            EnvLabel::VendingMachine => "vending_machine",
            EnvLabel::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bounds {
    pub fn contains(&self, p: &Point2D) -> bool {
        p.x >= self.min[0] && p.x <= self.max[0] && p.y >= self.min[1] && p.y <= self.max[1]
    }
}

/// Static obstacles: axis-aligned boxes or thin wall segments.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum Obstacle {
    Rect { min: [f64; 2], max: [f64; 2] },
    Wall { from: [f64; 2], to: [f64; 2] },
}

impl Obstacle {
    fn contains(&self, p: &Point2D) -> bool {
        match self {
            Obstacle::Rect { min, max } => {
                p.x >= min[0] && p.x <= max[0] && p.y >= min[1] && p.y <= max[1]
            }
            Obstacle::Wall { from, to } => {
                dist_point_segment(p, &Point2D::new(from[0], from[1]), &Point2D::new(to[0], to[1]))
                    <= 1e-9
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub label: EnvLabel,
    pub polygon: Vec<[f64; 2]>,
}

impl Region {
    pub fn vertices(&self) -> Vec<Point2D> {
        self.polygon.iter().map(|v| Point2D::new(v[0], v[1])).collect()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub t: f64,
    pub position: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonSpec {
    pub position: [f64; 2],
    #[serde(default)]
    pub waypoints: Vec<Waypoint>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    /// x, y, theta.
    pub start: [f64; 3],
    pub goal: [f64; 2],
}

fn default_resolution() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub bounds: Bounds,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub regions: Vec<Region>,
    #[serde(default)]
    pub persons: Vec<PersonSpec>,
    #[serde(default)]
    pub artworks: Vec<[f64; 2]>,
    #[serde(default)]
    pub machines: Vec<[f64; 2]>,
    pub robot: RobotSpec,
    #[serde(default)]
    pub noise: f64,
}

impl Scenario {
    pub fn start_pose(&self) -> Pose2D {
        Pose2D::new(self.robot.start[0], self.robot.start[1], self.robot.start[2])
    }

    pub fn goal_point(&self) -> Point2D {
        Point2D::new(self.robot.goal[0], self.robot.goal[1])
    }

    pub fn artwork_points(&self) -> Vec<Point2D> {
        self.artworks.iter().map(|a| Point2D::new(a[0], a[1])).collect()
    }

    pub fn machine_points(&self) -> Vec<Point2D> {
        self.machines.iter().map(|m| Point2D::new(m[0], m[1])).collect()
    }

    /// Scripted person position at time t: piecewise linear through the
    /// waypoints, holding the last one.
    pub fn person_position(&self, index: usize, t: f64) -> Point2D {
        let person = &self.persons[index];
        let start = Point2D::new(person.position[0], person.position[1]);
        let mut prev_t = 0.0;
        let mut prev_p = start;
        for wp in &person.waypoints {
            let p = Point2D::new(wp.position[0], wp.position[1]);
            if t <= wp.t {
                let span = wp.t - prev_t;
                if span <= 0.0 {
                    return p;
                }
                let a = (t - prev_t) / span;
                return Point2D::new(
                    prev_p.x + a * (p.x - prev_p.x),
                    prev_p.y + a * (p.y - prev_p.y),
                );
            }
            prev_t = wp.t;
            prev_p = p;
        }
        prev_p
    }

    pub fn person_positions(&self, t: f64) -> Vec<Point2D> {
        (0..self.persons.len())
            .map(|i| self.person_position(i, t))
            .collect()
    }

    /// Label of the first region containing the point, if any.
    pub fn region_at(&self, p: &Point2D) -> Option<EnvLabel> {
        self.region_containing(p).map(|r| r.label)
    }

    pub fn region_containing(&self, p: &Point2D) -> Option<&Region> {
        self.regions
            .iter()
            .find(|r| point_in_polygon(p, &r.vertices()))
    }

    fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(Error::Parse(format!(
                "schema: expected 1, got {}",
                self.schema
            )));
        }
        if self.bounds.max[0] <= self.bounds.min[0] || self.bounds.max[1] <= self.bounds.min[1] {
            return Err(Error::InvariantViolation("bounds: max must exceed min".into()));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::InvariantViolation(format!(
                "resolution: must be positive, got {}",
                self.resolution
            )));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return Err(Error::InvariantViolation(format!(
                "noise: must lie in [0, 1), got {}",
                self.noise
            )));
        }
        let start = Point2D::new(self.robot.start[0], self.robot.start[1]);
        let goal = self.goal_point();
        for (name, p) in [("robot.start", &start), ("robot.goal", &goal)] {
            if !self.bounds.contains(p) {
                return Err(Error::InvariantViolation(format!(
                    "{name}: outside bounds"
                )));
            }
            for (i, obstacle) in self.obstacles.iter().enumerate() {
                if obstacle.contains(p) {
                    return Err(Error::InvariantViolation(format!(
                        "{name}: inside obstacles[{i}]"
                    )));
                }
            }
        }
        for (i, region) in self.regions.iter().enumerate() {
            if region.polygon.len() < 3 {
                return Err(Error::InvariantViolation(format!(
                    "regions[{i}].polygon: needs >= 3 vertices"
                )));
            }
            if !polygon_is_simple(&region.vertices()) {
                return Err(Error::InvariantViolation(format!(
                    "regions[{i}].polygon: self-intersecting"
                )));
            }
        }
        for (i, person) in self.persons.iter().enumerate() {
            let mut prev = 0.0;
            for (j, wp) in person.waypoints.iter().enumerate() {
                if wp.t <= prev {
                    return Err(Error::InvariantViolation(format!(
                        "persons[{i}].waypoints[{j}].t: times must be strictly ascending"
                    )));
                }
                prev = wp.t;
            }
        }
        for i in 0..self.persons.len() {
            for j in (i + 1)..self.persons.len() {
                let a = self.person_position(i, 0.0);
                let b = self.person_position(j, 0.0);
                if a.dist(&b) < 0.1 {
                    return Err(Error::InvariantViolation(format!(
                        "persons[{i}]/persons[{j}]: closer than 0.1 m at t = 0"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn orient(a: &Point2D, b: &Point2D, c: &Point2D) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(a: &Point2D, b: &Point2D, c: &Point2D, d: &Point2D) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: &Point2D, q: &Point2D, r: &Point2D| {
        orient(p, q, r).abs() <= 1e-12
            && r.x >= p.x.min(q.x) - 1e-12
            && r.x <= p.x.max(q.x) + 1e-12
            && r.y >= p.y.min(q.y) - 1e-12
            && r.y <= p.y.max(q.y) + 1e-12
    };
    on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b)
}

/// A polygon is simple when no two non-adjacent edges touch.
fn polygon_is_simple(vertices: &[Point2D]) -> bool {
    let n = vertices.len();
    for i in 0..n {
        for j in (i + 1)..n {
            // Skip adjacent edges (they share exactly one endpoint).
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = (&vertices[i], &vertices[(i + 1) % n]);
            let (c, d) = (&vertices[j], &vertices[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario = serde_json::from_str(text)?;
    scenario.validate()?;
    Ok(scenario)
}
