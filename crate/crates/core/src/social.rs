//! Social-goal geometry and the objective cost library.
//!
//! Costs are pure functions of a trajectory candidate and a per-tick world
//! snapshot. Intrusion-type costs (personal space, o-space) aggregate with
//! max over the trajectory, lane and zone costs with a mean, so a single bad
//! pose cannot hide inside an otherwise polite candidate.

use crate::error::Error;
use crate::geom::{centroid, point_in_polygon, CircleFit, Point2D};
use crate::perception::PersonTrack;
use crate::world::{wrap_angle, OccupancyGrid, Pose2D};
use crate::Result;

/// Personal-zone boundary, meters. Gaussian falloff scale for
/// [`personal_space_cost`].
pub const PERSONAL_SPACE_SIGMA: f64 = 0.45;
/// Default gap kept to the last person when joining a queue, meters.
pub const QUEUE_SPACING: f64 = 0.8;
/// Default activity-zone half width, meters.
pub const ACTIVITY_HALF_WIDTH: f64 = 0.5;
/// Obstacle distance at which the clearance cost reaches zero, meters.
pub const CLEARANCE_SAFE_DIST: f64 = 1.0;

/// Objective identifiers with a stable integer encoding for trace files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveId {
    GoalDistance = 0,
    PathAlignment = 1,
    Clearance = 2,
    PersonalSpace = 3,
    ActivitySpace = 4,
    RightSide = 5,
    OSpace = 6,
    SocialGoal = 7,
}

impl ObjectiveId {
    pub const ALL: [ObjectiveId; 8] = [
        ObjectiveId::GoalDistance,
        ObjectiveId::PathAlignment,
        ObjectiveId::Clearance,
        ObjectiveId::PersonalSpace,
        ObjectiveId::ActivitySpace,
        ObjectiveId::RightSide,
        ObjectiveId::OSpace,
        ObjectiveId::SocialGoal,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ObjectiveId> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveId::GoalDistance => "goal_distance",
            ObjectiveId::PathAlignment => "path_alignment",
            ObjectiveId::Clearance => "clearance",
            ObjectiveId::PersonalSpace => "personal_space",
            ObjectiveId::ActivitySpace => "activity_space",
            ObjectiveId::RightSide => "right_side",
            ObjectiveId::OSpace => "o_space",
            ObjectiveId::SocialGoal => "social_goal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SocialGoalKind {
    QueueEnd,
    OFormationSlot,
}

/// A navigation target derived from group geometry rather than the mission
/// goal.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialGoal {
    pub pose: Pose2D,
    pub kind: SocialGoalKind,
}

/// Quadrilateral between a spectator and the artwork they are watching.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityZone {
    pub polygon: [Point2D; 4],
}

/// Unit principal axis of a point set (largest-eigenvalue direction of the
/// position covariance). Errors when the points are effectively coincident.
fn principal_axis(points: &[Point2D]) -> Result<(Point2D, Point2D)> {
    let c = centroid(points);
    let n = points.len() as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let dx = p.x - c.x;
        let dy = p.y - c.y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    sxx /= n;
    sxy /= n;
    syy /= n;
    let tr = sxx + syy;
    if tr <= 1e-12 {
        return Err(Error::DegenerateInput(
            "cannot fit a line through coincident points".into(),
        ));
    }
    let disc = ((sxx - syy) / 2.0).hypot(sxy);
    let lambda1 = tr / 2.0 + disc;
    let dir = if sxy.abs() > 1e-12 {
        let v = Point2D::new(lambda1 - syy, sxy);
        let norm = (v.x * v.x + v.y * v.y).sqrt();
        Point2D::new(v.x / norm, v.y / norm)
    } else if sxx >= syy {
        Point2D::new(1.0, 0.0)
    } else {
        Point2D::new(0.0, 1.0)
    };
    Ok((c, dir))
}

/// Places the joining pose one `spacing` behind the back of the queue.
///
/// The queue line is a total-least-squares fit through the tracks. The front
/// is the projected endpoint nearest the machine when one is given, else the
/// endpoint farthest from the robot; the goal sits `spacing` beyond the
/// opposite endpoint, facing the front.
pub fn queue_goal(
    tracks: &[PersonTrack],
    machine: Option<Point2D>,
    robot: &Pose2D,
    spacing: f64,
) -> Result<SocialGoal> {
    if tracks.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "queue goal needs at least 2 tracks, got {}",
            tracks.len()
        )));
    }
    let positions: Vec<Point2D> = tracks.iter().map(|t| t.position).collect();
    let (c, u) = principal_axis(&positions)?;
    let mut s_min = f64::INFINITY;
    let mut s_max = f64::NEG_INFINITY;
    for p in &positions {
        let s = (p.x - c.x) * u.x + (p.y - c.y) * u.y;
        s_min = s_min.min(s);
        s_max = s_max.max(s);
    }
    let lo = Point2D::new(c.x + s_min * u.x, c.y + s_min * u.y);
    let hi = Point2D::new(c.x + s_max * u.x, c.y + s_max * u.y);
    let lo_is_front = match machine {
        Some(m) => lo.dist(&m) <= hi.dist(&m),
        None => lo.dist(&robot.position()) >= hi.dist(&robot.position()),
    };
    let (front, back, back_s) = if lo_is_front {
        (lo, hi, 1.0)
    } else {
        (hi, lo, -1.0)
    };
    let goal = Point2D::new(back.x + back_s * spacing * u.x, back.y + back_s * spacing * u.y);
    let theta = (front.y - goal.y).atan2(front.x - goal.x);
    Ok(SocialGoal {
        pose: Pose2D::new(goal.x, goal.y, theta),
        kind: SocialGoalKind::QueueEnd,
    })
}

/// Places the joining pose in the largest angular gap of the group circle.
///
/// Gap ties within one degree break toward the gap whose midpoint bearing is
/// closest to the robot's bearing from the circle center. The pose sits on
/// the fitted circle facing its center.
pub fn oformation_goal(tracks: &[PersonTrack], robot: &Pose2D) -> Result<SocialGoal> {
    if tracks.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "o-formation goal needs at least 3 tracks, got {}",
            tracks.len()
        )));
    }
    let positions: Vec<Point2D> = tracks.iter().map(|t| t.position).collect();
    let fit = crate::geom::best_fit_circle(&positions).map_err(|e| match e {
        Error::SingularFit(msg) => Error::DegenerateInput(msg),
        other => other,
    })?;
    let mut angles: Vec<f64> = positions
        .iter()
        .map(|p| (p.y - fit.center.y).atan2(p.x - fit.center.x))
        .collect();
    angles.sort_by(f64::total_cmp);

    let robot_bearing =
        (robot.y - fit.center.y).atan2(robot.x - fit.center.x);
    let tie = 1.0f64.to_radians();
    let mut best: Option<(f64, f64)> = None; // (gap width, midpoint angle)
    for i in 0..angles.len() {
        let a = angles[i];
        let b = if i + 1 < angles.len() {
            angles[i + 1]
        } else {
            angles[0] + std::f64::consts::TAU
        };
        let gap = b - a;
        let mid = wrap_angle(a + gap / 2.0);
        let better = match best {
            None => true,
            Some((bg, bm)) => {
                if gap > bg + tie {
                    true
                } else if gap > bg - tie {
                    wrap_angle(mid - robot_bearing).abs() < wrap_angle(bm - robot_bearing).abs()
                } else {
                    false
                }
            }
        };
        if better {
            best = Some((gap, mid));
        }
    }
    let (_, mid) = best.unwrap();
    let pos = Point2D::new(
        fit.center.x + fit.radius * mid.cos(),
        fit.center.y + fit.radius * mid.sin(),
    );
    let theta = (fit.center.y - pos.y).atan2(fit.center.x - pos.x);
    Ok(SocialGoal {
        pose: Pose2D::new(pos.x, pos.y, theta),
        kind: SocialGoalKind::OFormationSlot,
    })
}

/// Worst-pose sum of Gaussian personal-space intrusions.
pub fn personal_space_cost(poses: &[Pose2D], tracks: &[PersonTrack]) -> f64 {
    let two_sigma_sq = 2.0 * PERSONAL_SPACE_SIGMA * PERSONAL_SPACE_SIGMA;
    poses
        .iter()
        .map(|pose| {
            tracks
                .iter()
                .map(|t| {
                    let d2 = (pose.x - t.position.x).powi(2) + (pose.y - t.position.y).powi(2);
                    (-d2 / two_sigma_sq).exp()
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Fraction of poses inside any activity zone. Zone boundaries count as
/// inside.
pub fn activity_space_cost(poses: &[Pose2D], zones: &[ActivityZone]) -> f64 {
    if poses.is_empty() {
        return 0.0;
    }
    let inside = poses
        .iter()
        .filter(|pose| {
            zones
                .iter()
                .any(|z| point_in_polygon(&pose.position(), &z.polygon))
        })
        .count();
    inside as f64 / poses.len() as f64
}

/// Rectangle between a spectator and an artwork, axis along the connecting
/// segment.
pub fn activity_zone(
    spectator: &PersonTrack,
    artwork: Point2D,
    half_width: f64,
) -> Result<ActivityZone> {
    let s = spectator.position;
    let d = s.dist(&artwork);
    if d <= 0.1 {
        return Err(Error::DegenerateInput(format!(
            "spectator is {d:.3} m from the artwork, zone undefined"
        )));
    }
    let ux = (artwork.x - s.x) / d;
    let uy = (artwork.y - s.y) / d;
    let nx = -uy * half_width;
    let ny = ux * half_width;
    Ok(ActivityZone {
        polygon: [
            Point2D::new(s.x - nx, s.y - ny),
            Point2D::new(s.x + nx, s.y + ny),
            Point2D::new(artwork.x + nx, artwork.y + ny),
            Point2D::new(artwork.x - nx, artwork.y - ny),
        ],
    })
}

/// Mean lane position across the corridor, 0 at the right wall, 1 at the
/// left. The corridor axis is the major axis of the region polygon, oriented
/// so it points along `travel_dir` (typically goal minus robot).
pub fn right_side_cost(poses: &[Pose2D], corridor: &[Point2D], travel_dir: [f64; 2]) -> f64 {
    if poses.is_empty() || corridor.len() < 3 {
        return 0.0;
    }
    let Ok((c, mut u)) = principal_axis(corridor) else {
        return 0.0;
    };
    if u.x * travel_dir[0] + u.y * travel_dir[1] < 0.0 {
        u = Point2D::new(-u.x, -u.y);
    }
    // Left normal of the travel axis; lateral offsets are positive leftward.
    let n = Point2D::new(-u.y, u.x);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in corridor {
        let l = (v.x - c.x) * n.x + (v.y - c.y) * n.y;
        lo = lo.min(l);
        hi = hi.max(l);
    }
    let width = hi - lo;
    if width <= 1e-12 {
        return 0.0;
    }
    let center = (hi + lo) / 2.0;
    poses
        .iter()
        .map(|p| {
            let l = (p.x - c.x) * n.x + (p.y - c.y) * n.y - center;
            ((l + width / 2.0) / width).clamp(0.0, 1.0)
        })
        .sum::<f64>()
        / poses.len() as f64
}

/// Worst-pose intrusion into the group's o-space: 1 at the circle center,
/// fading linearly to 0 at the perimeter.
pub fn o_space_cost(poses: &[Pose2D], circle: &CircleFit) -> f64 {
    if circle.radius <= 0.0 {
        return 0.0;
    }
    poses
        .iter()
        .map(|p| {
            let d = p.position().dist(&circle.center);
            (1.0 - d / circle.radius).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// The three always-on costs: distance from the final pose to the local
/// goal, mean distance to the global path, and worst clearance shortfall.
pub fn base_costs(
    poses: &[Pose2D],
    local_goal: Point2D,
    global_path: &[Point2D],
    grid: &OccupancyGrid,
) -> (f64, f64, f64) {
    let last = poses.last().expect("non-empty trajectory");
    let goal_distance = last.position().dist(&local_goal);

    let path_alignment = poses
        .iter()
        .map(|pose| {
            global_path
                .iter()
                .map(|v| pose.position().dist(v))
                .fold(f64::INFINITY, f64::min)
        })
        .sum::<f64>()
        / poses.len() as f64;

    let d_min = poses
        .iter()
        .map(|pose| grid.obstacle_distance(&pose.position()))
        .fold(f64::INFINITY, f64::min);
    let clearance = (1.0 - d_min / CLEARANCE_SAFE_DIST).max(0.0);
    (goal_distance, path_alignment, clearance)
}
