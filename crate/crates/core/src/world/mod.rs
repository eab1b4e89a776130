//! World model: scenario documents, occupancy grids, the simulated laser and
//! unicycle kinematics.

mod grid;
mod laser;
mod scenario;

pub use grid::{rasterize, rasterize_with, OccupancyGrid, DEFAULT_INFLATION_RADIUS};
pub use laser::{simulate_scan, LaserConfig, LaserScan};
pub use scenario::{
    load_scenario, Bounds, EnvLabel, Obstacle, PersonSpec, Region, RobotSpec, Scenario, Waypoint,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::Point2D;

/// Radius of the disc used for simulated people, meters.
pub const PERSON_RADIUS: f64 = 0.2;

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(std::f64::consts::TAU);
    if r > std::f64::consts::PI {
        r - std::f64::consts::TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    /// Heading, kept in (-pi, pi].
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2D {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn position(&self) -> Point2D {
        Point2D::new(self.x, self.y)
    }
}

/// Unicycle command: linear speed and turn rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Velocity {
    pub v: f64,
    pub omega: f64,
}

impl Velocity {
    pub fn new(v: f64, omega: f64) -> Self {
        Velocity { v, omega }
    }

    pub const STOP: Velocity = Velocity { v: 0.0, omega: 0.0 };
}

/// Exact unicycle integration over one interval: a straight segment for
/// omega ~ 0, otherwise a circular arc of radius v/omega.
pub fn step_kinematics(pose: &Pose2D, cmd: &Velocity, dt: f64) -> Pose2D {
    if cmd.omega.abs() < 1e-9 {
        Pose2D::new(
            pose.x + cmd.v * dt * pose.theta.cos(),
            pose.y + cmd.v * dt * pose.theta.sin(),
            pose.theta,
        )
    } else {
        let r = cmd.v / cmd.omega;
        let next = pose.theta + cmd.omega * dt;
        Pose2D::new(
            pose.x + r * (next.sin() - pose.theta.sin()),
            pose.y + r * (pose.theta.cos() - next.cos()),
            next,
        )
    }
}

/// Probability vector over the four environmental labels, indexed in the
/// fixed order (hallway, art_gallery, vending_machine, other).
pub type EnvProbs = [f64; 4];

/// Noisy map-based context source. The enclosing region's label gets mass
/// 1 - noise and every other label noise/3. With probability `noise` the
/// reported label flips to a uniformly random other label, which is the
/// flicker the downstream smoother has to absorb.
pub fn region_context<R: Rng>(scenario: &Scenario, pose: &Pose2D, rng: &mut R) -> EnvProbs {
    let truth = scenario
        .region_at(&pose.position())
        .unwrap_or(EnvLabel::Other);
    let noise = scenario.noise;
    let reported = if noise > 0.0 && rng.gen::<f64>() < noise {
        let others: Vec<EnvLabel> = EnvLabel::ALL
            .iter()
            .copied()
            .filter(|l| *l != truth)
            .collect();
        others[rng.gen_range(0..others.len())]
    } else {
        truth
    };
    let mut probs = [noise / 3.0; 4];
    probs[reported.index()] = 1.0 - noise;
    probs
}
