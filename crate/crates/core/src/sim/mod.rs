//! Closed-loop simulation: per tick the robot senses, perceives, classifies
//! its context, plans, and moves; every tick is recorded and the run is
//! summarized into metrics. Runs are fully deterministic for a given seed.

pub mod trace;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::context::{
    extract_features, generate_formation_samples, predict_svm, train_svm,
    ContextArbiter, ContextLabel, ContextSmoother, LinearSvmModel, TrainConfig,
    DEFAULT_PEOPLE, GROUP_RANGE,
};
use crate::geom::{best_fit_circle, point_in_polygon, Point2D};
use crate::perception::{detect_persons, PersonTrack, Tracker};
use crate::planner::{carrot, plan_global, plan_local, PlannerConfig, Snapshot};
use crate::social::{activity_zone, ObjectiveId, PERSONAL_SPACE_SIGMA, QUEUE_SPACING};
use crate::world::{
    rasterize, region_context, simulate_scan, step_kinematics, EnvLabel, LaserConfig,
    Pose2D, Scenario, Velocity,
};
use crate::{Error, Result};
use trace::fmt_sig;

/// Which objective policy drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Context-dependent objective sets plus social goals.
    Social,
    /// Goal distance and clearance only, everywhere.
    Traditional,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Social => "social",
            Mode::Traditional => "traditional",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "social" => Ok(Mode::Social),
            "traditional" => Ok(Mode::Traditional),
            other => Err(Error::InvalidInput(format!(
                "mode must be social or traditional, got {other:?}"
            ))),
        }
    }
}

/// Everything the loop needs beyond the scenario itself.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub planner: PlannerConfig,
    /// Rolling window of the environmental context smoother, ticks.
    pub smoother_window: usize,
    /// Gap between the last queue member and the joining pose, meters.
    pub queue_spacing: f64,
    /// Half-width of spectator-artwork activity zones, meters.
    pub activity_half_width: f64,
    /// Spectators farther than this from an artwork cast no zone, meters.
    pub activity_pair_range: f64,
    /// Arriving within this distance of the active goal ends the run, meters.
    pub success_radius: f64,
    /// Replan when the robot strays this far from the global path, meters.
    pub replan_distance: f64,
    /// Replan when the active goal moves by more than this, meters.
    pub goal_change_threshold: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            planner: PlannerConfig::default(),
            smoother_window: 10,
            queue_spacing: QUEUE_SPACING,
            activity_half_width: crate::social::ACTIVITY_HALF_WIDTH,
            activity_pair_range: 4.0,
            success_radius: 0.3,
            replan_distance: 1.0,
            goal_change_threshold: 0.3,
        }
    }
}

/// One row of the run trace.
#[derive(Debug, Clone)]
pub struct TickRecord {
    pub tick: u64,
    /// Pose at the start of the tick, before the command is applied.
    pub robot: Pose2D,
    pub command: Velocity,
    pub context: ContextLabel,
    pub active_objectives: Vec<ObjectiveId>,
    pub chosen_fitness: Option<f64>,
    /// Values of the chosen candidate, aligned with `active_objectives`.
    pub objective_values: Option<Vec<f64>>,
    /// Ground-truth distance to the nearest scripted person, meters.
    pub min_person_distance: Option<f64>,
    pub events: Vec<String>,
}

/// Run summary; `min_person_distance` is None when the scene has no people.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub success: bool,
    pub path_length: f64,
    pub duration: f64,
    pub min_person_distance: Option<f64>,
    pub personal_space_violation_time: f64,
    pub activity_zone_time: f64,
    pub context_switches: u64,
}

fn formation_model() -> Result<LinearSvmModel> {
    let mut samples =
        generate_formation_samples(ContextLabel::Queue, 170, DEFAULT_PEOPLE, 0.05, 41)?;
    samples.extend(generate_formation_samples(
        ContextLabel::OFormation,
        170,
        DEFAULT_PEOPLE,
        0.05,
        42,
    )?);
    let (features, labels): (Vec<_>, Vec<_>) = samples.into_iter().unzip();
    train_svm(&features, &labels, &TrainConfig::default())
}

fn min_person_dist(persons: &[Point2D], pose: &Pose2D) -> Option<f64> {
    persons
        .iter()
        .map(|p| p.dist(&pose.position()))
        .min_by(|a, b| a.total_cmp(b))
}

fn distance_to_path(path: &[Point2D], p: &Point2D) -> f64 {
    path.iter()
        .map(|w| w.dist(p))
        .min_by(|a, b| a.total_cmp(b))
        .unwrap_or(f64::INFINITY)
}

/// Runs the sense-perceive-classify-plan-move loop until the robot arrives
/// at the active goal or `max_ticks` elapse. The trace gets one record per
/// executed tick plus a terminal record holding the final state.
pub fn run_simulation(
    scenario: &Scenario,
    cfg: &SimConfig,
    mode: Mode,
    seed: u64,
    max_ticks: u64,
) -> Result<(Vec<TickRecord>, RunMetrics)> {
    cfg.planner.check()?;
    if max_ticks == 0 {
        return Err(Error::InvalidInput("max_ticks must be at least 1".into()));
    }

    let grid = rasterize(scenario);
    let model = formation_model()?;
    let laser = LaserConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = Tracker::new(cfg.planner.dt);
    let mut smoother = ContextSmoother::new(cfg.smoother_window);
    let mut arbiter = ContextArbiter::new();

    let mission_goal = scenario.goal_point();
    let machines = scenario.machine_points();
    let artworks = scenario.artwork_points();

    let mut pose = scenario.start_pose();
    let mut vel = Velocity::STOP;
    let mut active_goal = mission_goal;
    let mut path = plan_global(&grid, pose.position(), active_goal)?;
    let mut records = Vec::new();

    for tick in 0..max_ticks {
        let t = tick as f64 * cfg.planner.dt;
        let persons = scenario.person_positions(t);
        let scan = simulate_scan(&grid, &persons, &pose, &laser)?;
        let detections = detect_persons(&scan, &pose);
        tracker.update(&detections, tick);

        let env_label = smoother.push(region_context(scenario, &pose, &mut rng))?;
        let near: Vec<PersonTrack> = tracker
            .tracks()
            .iter()
            .filter(|tr| tr.position.dist(&pose.position()) <= GROUP_RANGE)
            .cloned()
            .collect();
        let spatial = if near.len() >= 3 {
            let pts: Vec<Point2D> = near.iter().map(|tr| tr.position).collect();
            extract_features(&pts).ok().map(|f| {
                let mut estimate = predict_svm(&model, &f);
                estimate.tick = tick;
                estimate
            })
        } else {
            None
        };
        let context =
            arbiter.arbitrate(env_label, spatial.as_ref(), tracker.tracks(), &pose, &machines);

        let mut events = Vec::new();
        let mut social_goal = None;
        let mut o_space = None;
        if mode == Mode::Social {
            match context {
                ContextLabel::Queue => {
                    let machine = nearest_machine(&machines, &near);
                    match crate::social::queue_goal(&near, machine, &pose, cfg.queue_spacing) {
                        Ok(g) => social_goal = Some(g.pose.position()),
                        Err(_) => events.push("social_goal_error".to_string()),
                    }
                }
                ContextLabel::OFormation => {
                    match crate::social::oformation_goal(&near, &pose) {
                        Ok(g) => {
                            social_goal = Some(g.pose.position());
                            let pts: Vec<Point2D> =
                                near.iter().map(|tr| tr.position).collect();
                            o_space = best_fit_circle(&pts).ok();
                        }
                        Err(_) => events.push("social_goal_error".to_string()),
                    }
                }
                _ => {}
            }
        }

        let desired = social_goal.unwrap_or(mission_goal);
        if desired.dist(&active_goal) > cfg.goal_change_threshold {
            match plan_global(&grid, pose.position(), desired) {
                Ok(p) => {
                    path = p;
                    active_goal = desired;
                    events.push("replanned".to_string());
                }
                Err(_) => events.push("goal_unreachable".to_string()),
            }
        } else if distance_to_path(&path, &pose.position()) > cfg.replan_distance {
            match plan_global(&grid, pose.position(), active_goal) {
                Ok(p) => {
                    path = p;
                    events.push("replanned".to_string());
                }
                Err(_) => events.push("goal_unreachable".to_string()),
            }
        }

        let effective = if mode == Mode::Traditional {
            ContextLabel::Other
        } else {
            context
        };
        let corridor: Option<Vec<Point2D>> = if effective == ContextLabel::Hallway {
            scenario
                .region_containing(&pose.position())
                .filter(|r| r.label == EnvLabel::Hallway)
                .map(|r| r.vertices())
        } else {
            None
        };
        let mut zones = Vec::new();
        for art in &artworks {
            for tr in tracker.tracks() {
                if tr.position.dist(art) <= cfg.activity_pair_range {
                    if let Ok(z) = activity_zone(tr, *art, cfg.activity_half_width) {
                        zones.push(z);
                    }
                }
            }
        }
        let local_goal = carrot(&path, &pose, cfg.planner.lookahead);
        let snapshot = Snapshot {
            grid: &grid,
            tracks: tracker.tracks(),
            local_goal,
            corridor: corridor.as_deref(),
            travel_dir: [local_goal.x - pose.x, local_goal.y - pose.y],
            zones: &zones,
            o_space,
            social_goal,
        };
        let plan = plan_local(&pose, &vel, effective, &snapshot, &cfg.planner)?;
        if plan.recovery {
            events.push("recovery".to_string());
        }
        if plan.missing_corridor {
            events.push("corridor_missing".to_string());
        }
        if let Some(g) = social_goal {
            events.push(format!("social_goal:{}:{}", fmt_sig(g.x), fmt_sig(g.y)));
        }

        records.push(TickRecord {
            tick,
            robot: pose,
            command: plan.control,
            context,
            active_objectives: plan.objective_set.to_vec(),
            chosen_fitness: plan.fitness,
            objective_values: plan.objectives.clone(),
            min_person_distance: min_person_dist(&persons, &pose),
            events,
        });

        pose = step_kinematics(&pose, &plan.control, cfg.planner.dt);
        vel = plan.control;

        let arrived = pose.position().dist(&active_goal) <= cfg.success_radius;
        if arrived || tick + 1 == max_ticks {
            let t_end = (tick + 1) as f64 * cfg.planner.dt;
            let persons_end = scenario.person_positions(t_end);
            let mut end_events = vec![format!(
                "goal:{}:{}",
                fmt_sig(active_goal.x),
                fmt_sig(active_goal.y)
            )];
            if arrived {
                end_events.push("arrived".to_string());
            }
            records.push(TickRecord {
                tick: tick + 1,
                robot: pose,
                command: Velocity::STOP,
                context,
                active_objectives: plan.objective_set.to_vec(),
                chosen_fitness: None,
                objective_values: None,
                min_person_distance: min_person_dist(&persons_end, &pose),
                events: end_events,
            });
            break;
        }
    }

    let metrics = compute_metrics(&records, scenario, cfg);
    Ok((records, metrics))
}

fn nearest_machine(machines: &[Point2D], near: &[PersonTrack]) -> Option<Point2D> {
    if near.is_empty() {
        return None;
    }
    let c = crate::geom::centroid(&near.iter().map(|t| t.position).collect::<Vec<_>>());
    machines
        .iter()
        .copied()
        .min_by(|a, b| a.dist(&c).total_cmp(&b.dist(&c)))
}

/// The active goal of a finished run, as stamped into the terminal record.
fn goal_from_records(records: &[TickRecord], scenario: &Scenario) -> Point2D {
    let parsed = records.last().and_then(|r| {
        r.events.iter().find_map(|e| {
            let mut parts = e.strip_prefix("goal:")?.split(':');
            let x = parts.next()?.parse().ok()?;
            let y = parts.next()?.parse().ok()?;
            Some(Point2D::new(x, y))
        })
    });
    parsed.unwrap_or_else(|| scenario.goal_point())
}

/// Aggregates a trace into `RunMetrics`. Violation and zone times accrue per
/// started tick; the terminal record only contributes the final state.
pub fn compute_metrics(
    records: &[TickRecord],
    scenario: &Scenario,
    cfg: &SimConfig,
) -> RunMetrics {
    let dt = cfg.planner.dt;
    let mut metrics = RunMetrics {
        success: false,
        path_length: 0.0,
        duration: 0.0,
        min_person_distance: None,
        personal_space_violation_time: 0.0,
        activity_zone_time: 0.0,
        context_switches: 0,
    };
    let Some(last) = records.last() else {
        return metrics;
    };

    let goal = goal_from_records(records, scenario);
    metrics.success = last.robot.position().dist(&goal) <= cfg.success_radius;
    metrics.duration = (records.len() - 1) as f64 * dt;
    for pair in records.windows(2) {
        metrics.path_length += pair[0].robot.position().dist(&pair[1].robot.position());
        if pair[1].context != pair[0].context {
            metrics.context_switches += 1;
        }
    }
    metrics.min_person_distance = records
        .iter()
        .filter_map(|r| r.min_person_distance)
        .min_by(|a, b| a.total_cmp(b));

    let artworks = scenario.artwork_points();
    for r in &records[..records.len() - 1] {
        if let Some(d) = r.min_person_distance {
            if d < PERSONAL_SPACE_SIGMA {
                metrics.personal_space_violation_time += dt;
            }
        }
        let t = r.tick as f64 * dt;
        let persons = scenario.person_positions(t);
        'zones: for art in &artworks {
            for p in &persons {
                if p.dist(art) > cfg.activity_pair_range {
                    continue;
                }
                let spectator = PersonTrack {
                    id: 0,
                    position: *p,
                    velocity: [0.0, 0.0],
                    last_seen: 0,
                    age: 0,
                };
                let Ok(zone) = activity_zone(&spectator, *art, cfg.activity_half_width)
                else {
                    continue;
                };
                if point_in_polygon(&r.robot.position(), &zone.polygon) {
                    metrics.activity_zone_time += dt;
                    break 'zones;
                }
            }
        }
    }
    metrics
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::load_scenario;

    fn empty_room() -> Scenario {
        load_scenario(
            r#"{
                "schema": 1,
                "bounds": {"min": [0.0, 0.0], "max": [10.0, 10.0]},
                "robot": {"start": [3.0, 5.0, 0.0], "goal": [6.0, 5.0]}
            }"#,
        )
        .unwrap()
    }

    fn hallway(noise: f64) -> Scenario {
        load_scenario(&format!(
            r#"{{
                "schema": 1,
                "bounds": {{"min": [0.0, 0.0], "max": [12.0, 2.4]}},
                "obstacles": [
                    {{"wall": {{"from": [0.0, 0.0], "to": [12.0, 0.0]}}}},
                    {{"wall": {{"from": [0.0, 2.4], "to": [12.0, 2.4]}}}}
                ],
                "regions": [
                    {{"label": "hallway",
                      "polygon": [[0.0, 0.0], [12.0, 0.0], [12.0, 2.4], [0.0, 2.4]]}}
                ],
                "persons": [
                    {{"position": [9.0, 1.35],
                      "waypoints": [{{"t": 12.0, "position": [1.0, 1.35]}}]}}
                ],
                "robot": {{"start": [1.0, 1.2, 0.0], "goal": [11.0, 0.9]}},
                "noise": {noise}
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn empty_room_run_reaches_goal() {
        let scenario = empty_room();
        let cfg = SimConfig::default();
        let (records, metrics) =
            run_simulation(&scenario, &cfg, Mode::Social, 5, 200).unwrap();

        assert!(metrics.success);
        assert!(
            metrics.path_length >= 2.65 && metrics.path_length <= 3.6,
            "path length {}",
            metrics.path_length
        );
        assert_eq!(metrics.min_person_distance, None);
        assert_eq!(metrics.personal_space_violation_time, 0.0);
        assert_eq!(metrics.activity_zone_time, 0.0);
        assert_eq!(metrics.context_switches, 0);
        assert!((metrics.duration - (records.len() - 1) as f64 * 0.1).abs() < 1e-12);

        let last = records.last().unwrap();
        assert_eq!(last.command, Velocity::STOP);
        assert_eq!(last.chosen_fitness, None);
        assert!(last.events.iter().any(|e| e == "arrived"));
        for r in &records[..records.len() - 1] {
            assert!(r.chosen_fitness.is_some(), "tick {} has no fitness", r.tick);
            assert!(!r.events.iter().any(|e| e == "recovery"));
        }
    }

    #[test]
    fn traditional_mode_keeps_base_objectives() {
        let scenario = hallway(0.0);
        let cfg = SimConfig::default();
        let (records, _) =
            run_simulation(&scenario, &cfg, Mode::Traditional, 1, 60).unwrap();
        for r in &records {
            assert_eq!(
                r.active_objectives,
                vec![ObjectiveId::GoalDistance, ObjectiveId::Clearance],
                "tick {}",
                r.tick
            );
        }
    }

    #[test]
    fn identical_seeds_reproduce_runs_exactly() {
        let scenario = hallway(0.1);
        let cfg = SimConfig::default();
        let (ra, ma) = run_simulation(&scenario, &cfg, Mode::Social, 9, 80).unwrap();
        let (rb, mb) = run_simulation(&scenario, &cfg, Mode::Social, 9, 80).unwrap();
        assert_eq!(trace::render_trace(&ra), trace::render_trace(&rb));
        assert_eq!(trace::render_metrics(&ma), trace::render_metrics(&mb));
    }

    #[test]
    fn walled_off_goal_is_an_error() {
        let scenario = load_scenario(
            r#"{
                "schema": 1,
                "bounds": {"min": [0.0, 0.0], "max": [12.0, 10.0]},
                "obstacles": [
                    {"wall": {"from": [7.0, 4.0], "to": [9.0, 4.0]}},
                    {"wall": {"from": [9.0, 4.0], "to": [9.0, 6.0]}},
                    {"wall": {"from": [9.0, 6.0], "to": [7.0, 6.0]}},
                    {"wall": {"from": [7.0, 6.0], "to": [7.0, 4.0]}}
                ],
                "robot": {"start": [1.0, 5.0, 0.0], "goal": [8.0, 5.0]}
            }"#,
        )
        .unwrap();
        let err = run_simulation(&scenario, &SimConfig::default(), Mode::Social, 0, 10)
            .unwrap_err();
        assert!(matches!(err, Error::UnreachableGoal(_)), "{err:?}");
    }

    #[test]
    fn static_person_keeps_distance_floor() {
        let scenario = load_scenario(
            r#"{
                "schema": 1,
                "bounds": {"min": [0.0, 0.0], "max": [12.0, 6.0]},
                "persons": [{"position": [6.0, 3.0]}],
                "robot": {"start": [1.0, 3.0, 0.0], "goal": [11.0, 3.0]}
            }"#,
        )
        .unwrap();
        let (_, metrics) =
            run_simulation(&scenario, &SimConfig::default(), Mode::Social, 3, 400).unwrap();
        assert!(metrics.success, "robot never arrived");
        let min = metrics.min_person_distance.unwrap();
        assert!(min >= 0.29, "came within {min} m of the person");
    }

    #[test]
    fn metrics_aggregate_fabricated_records() {
        let scenario = load_scenario(
            r#"{
                "schema": 1,
                "bounds": {"min": [0.0, 0.0], "max": [10.0, 10.0]},
                "persons": [{"position": [2.0, 1.0]}],
                "artworks": [[2.0, 2.0]],
                "robot": {"start": [0.5, 0.5, 0.0], "goal": [9.0, 9.0]}
            }"#,
        )
        .unwrap();
        let base = TickRecord {
            tick: 0,
            robot: Pose2D::new(0.0, 0.0, 0.0),
            command: Velocity::STOP,
            context: ContextLabel::Hallway,
            active_objectives: vec![ObjectiveId::GoalDistance],
            chosen_fitness: Some(1.0),
            objective_values: Some(vec![0.5]),
            min_person_distance: None,
            events: vec![],
        };
        let mut records = vec![base.clone(), base.clone(), base.clone(), base.clone()];
        records[1].tick = 1;
        records[1].robot = Pose2D::new(2.0, 1.5, 0.0);
        records[1].min_person_distance = Some(0.4);
        records[2].tick = 2;
        records[2].robot = Pose2D::new(2.0, 1.5, 0.0);
        records[2].context = ContextLabel::Queue;
        records[2].min_person_distance = Some(0.5);
        records[3].tick = 3;
        records[3].robot = Pose2D::new(2.0, 2.5, 0.0);
        records[3].context = ContextLabel::Queue;
        records[3].min_person_distance = Some(0.2);
        records[3].events = vec!["goal:2.00000000:2.50000000".to_string()];

        let m = compute_metrics(&records, &scenario, &SimConfig::default());
        assert!(m.success, "terminal goal event should set the active goal");
        assert_eq!(m.context_switches, 1);
        assert!((m.duration - 0.3).abs() < 1e-12);
        assert!((m.personal_space_violation_time - 0.1).abs() < 1e-12);
        assert_eq!(m.min_person_distance, Some(0.2));
        let expected_path = 2.5 + 1.0;
        assert!((m.path_length - expected_path).abs() < 1e-12);
        assert!(
            (m.activity_zone_time - 0.2).abs() < 1e-12,
            "ticks 1 and 2 sit inside the spectator-artwork zone, got {}",
            m.activity_zone_time
        );
    }
}
