//! Sampling local planner: control sampling, rollout, validation, objective
//! scoring, and gauge selection, plus the grid global planner.

mod astar;

pub use astar::plan_global;

use crate::context::{select_objectives, ContextLabel};
use crate::error::Error;
use crate::geom::{CircleFit, Point2D};
use crate::paccet;
use crate::perception::PersonTrack;
use crate::social::{self, ActivityZone, ObjectiveId};
use crate::world::{step_kinematics, OccupancyGrid, Pose2D, Velocity};
use crate::Result;

/// Control limits and sampling layout.
#[derive(Debug, Clone)]
pub struct PlannerConfig {
    pub v_min: f64,
    pub v_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    /// Linear acceleration limit, m/s^2.
    pub accel_v: f64,
    /// Angular acceleration limit, rad/s^2.
    pub accel_omega: f64,
    pub v_samples: usize,
    pub omega_samples: usize,
    /// Rollout duration, seconds.
    pub horizon: f64,
    /// Rollout and control step, seconds.
    pub dt: f64,
    /// Carrot distance along the global path, meters.
    pub lookahead: f64,
    /// Hard minimum distance to any person track, meters.
    pub person_clearance: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            v_min: 0.0,
            v_max: 0.6,
            omega_min: -1.0,
            omega_max: 1.0,
            accel_v: 0.5,
            accel_omega: 1.5,
            v_samples: 11,
            omega_samples: 21,
            horizon: 2.0,
            dt: 0.1,
            lookahead: 1.5,
            person_clearance: 0.3,
        }
    }
}

impl PlannerConfig {
    pub fn check(&self) -> Result<()> {
        if self.v_samples < 2 || self.omega_samples < 2 {
            return Err(Error::InvariantViolation(
                "planner needs at least 2 samples per control axis".into(),
            ));
        }
        let steps = self.horizon / self.dt;
        if self.dt <= 0.0 || (steps - steps.round()).abs() > 1e-9 || steps < 1.0 {
            return Err(Error::InvariantViolation(format!(
                "horizon {} is not a positive multiple of dt {}",
                self.horizon, self.dt
            )));
        }
        Ok(())
    }

    pub fn rollout_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// One rolled-out control with its scores.
#[derive(Debug, Clone)]
pub struct TrajectoryCandidate {
    pub control: Velocity,
    pub poses: Vec<Pose2D>,
    pub valid: bool,
    pub objectives: Option<Vec<f64>>,
    pub fitness: Option<f64>,
}

/// Immutable per-tick world view scored by the local planner.
#[derive(Debug, Clone)]
pub struct Snapshot<'a> {
    pub grid: &'a OccupancyGrid,
    pub tracks: &'a [PersonTrack],
    /// Carrot point on the global path (or the mission goal).
    pub local_goal: Point2D,
    /// Corridor polygon for the right-side objective, when one is in scope.
    pub corridor: Option<&'a [Point2D]>,
    /// Direction of travel used to orient the corridor axis.
    pub travel_dir: [f64; 2],
    pub zones: &'a [ActivityZone],
    /// Group circle for the o-space objective.
    pub o_space: Option<CircleFit>,
    /// Joining pose for queue / o-formation contexts.
    pub social_goal: Option<Point2D>,
}

/// What the local planner decided this tick.
#[derive(Debug, Clone)]
pub struct PlanResult {
    pub control: Velocity,
    /// Gauge fitness of the chosen candidate; None in recovery.
    pub fitness: Option<f64>,
    /// Chosen candidate's objective values, ordered per the context's
    /// objective set.
    pub objectives: Option<Vec<f64>>,
    pub objective_set: &'static [ObjectiveId],
    /// True when no candidate was valid and the rotate-in-place recovery
    /// command was issued.
    pub recovery: bool,
    /// True when the right-side objective was scored without a corridor.
    pub missing_corridor: bool,
}

/// Recovery command when every candidate collides: rotate in place.
pub const RECOVERY_CONTROL: Velocity = Velocity {
    v: 0.0,
    omega: 0.5,
};

/// First path vertex at least `lookahead` meters of arc length beyond the
/// vertex nearest the robot; the final vertex when the path is too short.
pub fn carrot(path: &[Point2D], pose: &Pose2D, lookahead: f64) -> Point2D {
    assert!(!path.is_empty(), "carrot needs a non-empty path");
    let here = pose.position();
    let mut nearest = 0;
    let mut nearest_d = f64::INFINITY;
    for (i, p) in path.iter().enumerate() {
        let d = p.dist(&here);
        if d < nearest_d {
            nearest_d = d;
            nearest = i;
        }
    }
    let mut arc = 0.0;
    for i in nearest + 1..path.len() {
        arc += path[i].dist(&path[i - 1]);
        if arc >= lookahead {
            return path[i];
        }
    }
    path[path.len() - 1]
}

/// Uniform grid over the one-step dynamic window, clamped to the absolute
/// limits. Row-major: v ascending outer, omega ascending inner. Downstream
/// tie-breaks lean on this order, so it must not change.
pub fn sample_controls(current: &Velocity, cfg: &PlannerConfig) -> Vec<Velocity> {
    let v_lo = (current.v - cfg.accel_v * cfg.dt).max(cfg.v_min);
    let v_hi = (current.v + cfg.accel_v * cfg.dt).min(cfg.v_max);
    let w_lo = (current.omega - cfg.accel_omega * cfg.dt).max(cfg.omega_min);
    let w_hi = (current.omega + cfg.accel_omega * cfg.dt).min(cfg.omega_max);
    let mut out = Vec::with_capacity(cfg.v_samples * cfg.omega_samples);
    for i in 0..cfg.v_samples {
        let v = v_lo + (v_hi - v_lo) * i as f64 / (cfg.v_samples - 1) as f64;
        for j in 0..cfg.omega_samples {
            let omega = w_lo + (w_hi - w_lo) * j as f64 / (cfg.omega_samples - 1) as f64;
            out.push(Velocity::new(v, omega));
        }
    }
    out
}

/// Forward-simulates a constant control for the full horizon. The returned
/// poses exclude the start pose.
pub fn rollout(pose: &Pose2D, control: &Velocity, cfg: &PlannerConfig) -> Vec<Pose2D> {
    let mut poses = Vec::with_capacity(cfg.rollout_steps());
    let mut cur = *pose;
    for _ in 0..cfg.rollout_steps() {
        cur = step_kinematics(&cur, control, cfg.dt);
        poses.push(cur);
    }
    poses
}

/// A candidate survives when every pose sits inside the grid, in free
/// inflated space, and no closer than the hard clearance to any track.
pub fn validate(
    poses: &[Pose2D],
    grid: &OccupancyGrid,
    tracks: &[PersonTrack],
    cfg: &PlannerConfig,
) -> bool {
    poses.iter().all(|pose| {
        let p = pose.position();
        grid.cell_of(&p).is_some()
            && grid.is_free_inflated(&p)
            && tracks
                .iter()
                .all(|t| t.position.dist(&p) >= cfg.person_clearance)
    })
}

fn score(
    poses: &[Pose2D],
    objective_set: &[ObjectiveId],
    snapshot: &Snapshot,
    missing_corridor: &mut bool,
) -> Vec<f64> {
    let last = poses.last().expect("rollout is never empty");
    objective_set
        .iter()
        .map(|id| match id {
            ObjectiveId::GoalDistance => last.position().dist(&snapshot.local_goal),
            ObjectiveId::SocialGoal => {
                let goal = snapshot.social_goal.unwrap_or(snapshot.local_goal);
                last.position().dist(&goal)
            }
            ObjectiveId::PathAlignment => 0.0,
            ObjectiveId::Clearance => {
                let d_min = poses
                    .iter()
                    .map(|p| snapshot.grid.obstacle_distance(&p.position()))
                    .fold(f64::INFINITY, f64::min);
                (1.0 - d_min / social::CLEARANCE_SAFE_DIST).max(0.0)
            }
            ObjectiveId::PersonalSpace => social::personal_space_cost(poses, snapshot.tracks),
            ObjectiveId::ActivitySpace => social::activity_space_cost(poses, snapshot.zones),
            ObjectiveId::RightSide => match snapshot.corridor {
                Some(corridor) => social::right_side_cost(poses, corridor, snapshot.travel_dir),
                None => {
                    *missing_corridor = true;
                    0.0
                }
            },
            ObjectiveId::OSpace => match &snapshot.o_space {
                Some(circle) => social::o_space_cost(poses, circle),
                None => 0.0,
            },
        })
        .collect()
}

/// Full per-tick pipeline: sample, roll out, validate, score on the
/// context's objective set, and pick the gauge winner. With no valid
/// candidate the rotate-in-place recovery command is returned and flagged.
pub fn plan_local(
    pose: &Pose2D,
    current: &Velocity,
    context: ContextLabel,
    snapshot: &Snapshot,
    cfg: &PlannerConfig,
) -> Result<PlanResult> {
    cfg.check()?;
    let objective_set = select_objectives(context);
    let mut missing_corridor = false;

    let mut controls = Vec::new();
    let mut vectors = Vec::new();
    for control in sample_controls(current, cfg) {
        let poses = rollout(pose, &control, cfg);
        if !validate(&poses, snapshot.grid, snapshot.tracks, cfg) {
            continue;
        }
        vectors.push(score(&poses, objective_set, snapshot, &mut missing_corridor));
        controls.push(control);
    }

    if controls.is_empty() {
        return Ok(PlanResult {
            control: RECOVERY_CONTROL,
            fitness: None,
            objectives: None,
            objective_set,
            recovery: true,
            missing_corridor,
        });
    }

    let (best, fitness) = paccet::select_best_with_fitness(&vectors)?;
    Ok(PlanResult {
        control: controls[best],
        fitness: Some(fitness),
        objectives: Some(vectors[best].clone()),
        objective_set,
        recovery: false,
        missing_corridor,
    })
}

/// Scores every candidate and returns them all; the CLI's evaluation views
/// use this to show what the planner saw.
pub fn enumerate_candidates(
    pose: &Pose2D,
    current: &Velocity,
    context: ContextLabel,
    snapshot: &Snapshot,
    cfg: &PlannerConfig,
) -> Result<Vec<TrajectoryCandidate>> {
    cfg.check()?;
    let objective_set = select_objectives(context);
    let mut missing_corridor = false;
    let mut out = Vec::new();
    for control in sample_controls(current, cfg) {
        let poses = rollout(pose, &control, cfg);
        let valid = validate(&poses, snapshot.grid, snapshot.tracks, cfg);
        let objectives = valid
            .then(|| score(&poses, objective_set, snapshot, &mut missing_corridor));
        out.push(TrajectoryCandidate {
            control,
            poses,
            valid,
            objectives,
            fitness: None,
        });
    }
    let vectors: Vec<Vec<f64>> = out
        .iter()
        .filter_map(|c| c.objectives.clone())
        .collect();
    if !vectors.is_empty() {
        let (normalized, _) = paccet::normalize(&vectors)?;
        let front_idx = paccet::pareto_front(&normalized)?;
        let front = paccet::ParetoFront {
            members: front_idx.iter().map(|&i| normalized[i].clone()).collect(),
        };
        let mut k = 0;
        for candidate in &mut out {
            if candidate.objectives.is_some() {
                candidate.fitness = Some(paccet::paccet_fitness(&front, &normalized[k])?);
                k += 1;
            }
        }
    }
    Ok(out)
}
