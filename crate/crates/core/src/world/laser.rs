//! Simulated 2D laser: grid ray-marching for static obstacles plus exact
//! ray-disc intersections for people.

use crate::geom::Point2D;
use crate::world::{OccupancyGrid, Pose2D, PERSON_RADIUS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LaserConfig {
    pub beams: usize,
    /// Total field of view, radians, centered on the robot heading.
    pub fov: f64,
    pub range_max: f64,
}

impl Default for LaserConfig {
    fn default() -> Self {
        LaserConfig {
            beams: 512,
            fov: 1.5 * std::f64::consts::PI,
            range_max: 8.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LaserScan {
    pub angle_min: f64,
    pub angle_max: f64,
    pub increment: f64,
    pub range_max: f64,
    /// One range per beam; misses carry the sentinel range_max + 1.
    pub ranges: Vec<f64>,
}

impl LaserScan {
    /// Beam angle relative to the robot heading.
    pub fn angle(&self, beam: usize) -> f64 {
        self.angle_min + beam as f64 * self.increment
    }

    pub fn is_hit(&self, beam: usize) -> bool {
        self.ranges[beam] <= self.range_max
    }
}

/// First positive ray parameter where the ray hits the disc, if any.
fn ray_disc(origin: &Point2D, dir: (f64, f64), center: &Point2D, radius: f64) -> Option<f64> {
    let ox = origin.x - center.x;
    let oy = origin.y - center.y;
    let b = ox * dir.0 + oy * dir.1;
    let c = ox * ox + oy * oy - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t1 = -b - sq;
    if t1 > 0.0 {
        return Some(t1);
    }
    let t2 = -b + sq;
    (t2 > 0.0).then_some(t2)
}

/// Casts all beams from `pose`. Static obstacles are found by marching the
/// raw occupancy at half-cell steps; people are discs intersected exactly.
/// The nearer hit wins, so people occlude walls and vice versa.
pub fn simulate_scan(
    grid: &OccupancyGrid,
    persons: &[Point2D],
    pose: &Pose2D,
    cfg: &LaserConfig,
) -> Result<LaserScan> {
    if grid.is_occupied(&pose.position()) {
        return Err(Error::InvalidPose(format!(
            "scan origin ({:.3}, {:.3}) lies in an occupied cell",
            pose.x, pose.y
        )));
    }
    let angle_min = -cfg.fov / 2.0;
    let increment = cfg.fov / (cfg.beams - 1) as f64;
    let origin = pose.position();
    let step = grid.resolution / 2.0;
    let sentinel = cfg.range_max + 1.0;

    let mut ranges = Vec::with_capacity(cfg.beams);
    for beam in 0..cfg.beams {
        let angle = pose.theta + angle_min + beam as f64 * increment;
        let dir = (angle.cos(), angle.sin());
        let mut range = sentinel;

        let mut t = step;
        while t <= cfg.range_max {
            let p = Point2D::new(origin.x + t * dir.0, origin.y + t * dir.1);
            match grid.cell_of(&p) {
                None => break, // left the grid; nothing further to hit
                Some((ix, iy)) => {
                    if grid.cell_occupied(ix, iy) {
                        range = t;
                        break;
                    }
                }
            }
            t += step;
        }
        for person in persons {
            if let Some(t) = ray_disc(&origin, dir, person, PERSON_RADIUS) {
                if t <= cfg.range_max && t < range {
                    range = t;
                }
            }
        }
        ranges.push(range);
    }
    Ok(LaserScan {
        angle_min,
        angle_max: angle_min + increment * (cfg.beams - 1) as f64,
        increment,
        range_max: cfg.range_max,
        ranges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{load_scenario, rasterize_with};

    fn wall_ahead_grid() -> OccupancyGrid {
        let s = load_scenario(
            r#"{
                "schema": 1,
                "bounds": {"min": [0.0, 0.0], "max": [8.0, 8.0]},
                "resolution": 0.05,
                "obstacles": [{"wall": {"from": [4.0, 0.0], "to": [4.0, 8.0]}}],
                "robot": {"start": [1.0, 4.0, 0.0], "goal": [3.0, 4.0]}
            }"#,
        )
        .unwrap();
        rasterize_with(&s, 0.25)
    }

    // Odd beam count puts one beam exactly forward.
    fn cfg_odd() -> LaserConfig {
        LaserConfig {
            beams: 511,
            ..LaserConfig::default()
        }
    }

    #[test]
    fn empty_world_is_all_sentinel() {
        let s = load_scenario(
            r#"{
                "schema": 1,
                "bounds": {"min": [0.0, 0.0], "max": [8.0, 8.0]},
                "resolution": 0.05,
                "robot": {"start": [4.0, 4.0, 0.0], "goal": [5.0, 4.0]}
            }"#,
        )
        .unwrap();
        let grid = rasterize_with(&s, 0.25);
        let scan =
            simulate_scan(&grid, &[], &Pose2D::new(4.0, 4.0, 0.0), &LaserConfig::default())
                .unwrap();
        assert_eq!(scan.ranges.len(), 512);
        assert!(scan.ranges.iter().all(|&r| r == 9.0));
    }

    #[test]
    fn wall_ranges_within_tolerance() {
        let grid = wall_ahead_grid();
        let cfg = cfg_odd();
        let scan = simulate_scan(&grid, &[], &Pose2D::new(1.0, 4.0, 0.0), &cfg).unwrap();
        let forward = (cfg.beams - 1) / 2;
        assert!((scan.ranges[forward] - 3.0).abs() <= grid.resolution);
        // Beam closest to +45 degrees.
        let quarter = std::f64::consts::FRAC_PI_4;
        let beam45 = ((quarter - scan.angle_min) / scan.increment).round() as usize;
        let expected = 3.0 / scan.angle(beam45).cos();
        assert!(
            (scan.ranges[beam45] - expected).abs() <= 2.0 * grid.resolution,
            "range {} expected {expected}",
            scan.ranges[beam45]
        );
    }

    #[test]
    fn person_range_is_exact() {
        let grid = wall_ahead_grid();
        let cfg = cfg_odd();
        let person = Point2D::new(3.0, 4.0);
        let scan = simulate_scan(&grid, &[person], &Pose2D::new(1.0, 4.0, 0.0), &cfg).unwrap();
        let forward = (cfg.beams - 1) / 2;
        assert!((scan.ranges[forward] - 1.8).abs() < 1e-9);
    }

    #[test]
    fn wall_occludes_person() {
        let grid = wall_ahead_grid();
        let cfg = cfg_odd();
        let hidden = Point2D::new(6.0, 4.0);
        let scan = simulate_scan(&grid, &[hidden], &Pose2D::new(1.0, 4.0, 0.0), &cfg).unwrap();
        let forward = (cfg.beams - 1) / 2;
        assert!((scan.ranges[forward] - 3.0).abs() <= grid.resolution);
    }

    #[test]
    fn scan_from_occupied_cell_fails() {
        let grid = wall_ahead_grid();
        let r = simulate_scan(
            &grid,
            &[],
            &Pose2D::new(4.0, 4.0, 0.0),
            &LaserConfig::default(),
        );
        assert!(matches!(r, Err(Error::InvalidPose(_))));
    }
}
