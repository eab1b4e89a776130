//! Context classification and arbitration.
//!
//! Two signals feed the active context: a noisy environmental label stream
//! (smoothed by a rolling mean over class probabilities) and a spatial
//! formation classifier over tracked people (a linear SVM on circularity and
//! linearity). The arbiter decides which one drives objective selection each
//! tick.

mod samples;
mod svm;

pub use samples::{
    generate_formation_samples, parse_samples_csv, samples_to_csv, DEFAULT_PEOPLE,
};
pub use svm::{
    load_model, predict_svm, save_model, train_svm, LinearSvmModel, TrainConfig,
};

use std::collections::VecDeque;

use crate::error::Error;
use crate::geom::{centroid, circularity, linearity, FormationFeatures, Point2D};
use crate::perception::PersonTrack;
use crate::social::ObjectiveId;
use crate::world::{EnvLabel, EnvProbs, Pose2D};
use crate::Result;

/// Tracks must lie within this range of the robot to count as a group.
pub const GROUP_RANGE: f64 = 4.0;
/// Group members must stay within this distance of their centroid.
pub const GROUP_COHESION: f64 = 3.0;
/// Minimum SVM margin for the spatial label to override the environment.
pub const SPATIAL_CONFIDENCE_MIN: f64 = 0.5;
/// A machine this close to the line through two tracks marks a queue.
pub const MACHINE_LINE_DIST: f64 = 2.0;
/// Spatial labels are majority-voted over this many ticks.
pub const SPATIAL_VOTE_WINDOW: usize = 5;

/// The active context after arbitration; exactly one per tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContextLabel {
    Hallway,
    ArtGallery,
    VendingMachine,
    Other,
    Queue,
    OFormation,
}

impl ContextLabel {
    pub const ALL: [ContextLabel; 6] = [
        ContextLabel::Hallway,
        ContextLabel::ArtGallery,
        ContextLabel::VendingMachine,
        ContextLabel::Other,
        ContextLabel::Queue,
        ContextLabel::OFormation,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ContextLabel> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ContextLabel::Hallway => "hallway",
            ContextLabel::ArtGallery => "art_gallery",
            ContextLabel::VendingMachine => "vending_machine",
            ContextLabel::Other => "other",
            ContextLabel::Queue => "queue",
            ContextLabel::OFormation => "o_formation",
        }
    }

    pub fn from_str(s: &str) -> Option<ContextLabel> {
        Self::ALL.iter().copied().find(|l| l.as_str() == s)
    }

    pub fn is_spatial(self) -> bool {
        matches!(self, ContextLabel::Queue | ContextLabel::OFormation)
    }
}

impl From<EnvLabel> for ContextLabel {
    fn from(label: EnvLabel) -> ContextLabel {
        match label {
            EnvLabel::Hallway => ContextLabel::Hallway,
            EnvLabel::ArtGallery => ContextLabel::ArtGallery,
            EnvLabel::VendingMachine => ContextLabel::VendingMachine,
            EnvLabel::Other => ContextLabel::Other,
        }
    }
}

/// A classifier output with its geometric margin as confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextEstimate {
    pub label: ContextLabel,
    pub confidence: f64,
    pub tick: u64,
}

/// Circularity and linearity of the current group of people.
pub fn extract_features(persons: &[Point2D]) -> Result<FormationFeatures> {
    Ok(FormationFeatures {
        circularity: circularity(persons)?,
        linearity: linearity(persons)?,
    })
}

/// Rolling mean over environmental class probabilities.
#[derive(Debug, Clone)]
pub struct ContextSmoother {
    window: usize,
    history: VecDeque<EnvProbs>,
}

impl ContextSmoother {
    pub fn new(window: usize) -> Self {
        assert!(window >= 1, "smoothing window must be at least 1");
        ContextSmoother {
            window,
            history: VecDeque::with_capacity(window),
        }
    }

    /// Appends one probability vector and returns the argmax of the mean of
    /// the most recent `window` vectors. Ties break toward the lower label
    /// index.
    pub fn push(&mut self, incoming: EnvProbs) -> Result<EnvLabel> {
        let sum: f64 = incoming.iter().sum();
        if incoming.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "malformed probability vector {incoming:?} (sum {sum})"
            )));
        }
        if self.history.len() == self.window {
            self.history.pop_front();
        }
        self.history.push_back(incoming);

        let mut mean = [0.0f64; 4];
        for probs in &self.history {
            for (m, p) in mean.iter_mut().zip(probs) {
                *m += p;
            }
        }
        let mut best = 0;
        for i in 1..4 {
            if mean[i] > mean[best] {
                best = i;
            }
        }
        Ok(EnvLabel::from_index(best))
    }
}

/// Chooses between the environmental and spatial context streams.
///
/// The spatial label wins when a cohesive group surrounds the robot and the
/// classifier is confident; a two-person line pointing at a machine is ruled
/// a queue directly. Spatial decisions are majority-voted over the last
/// [`SPATIAL_VOTE_WINDOW`] ticks so single-tick flickers cannot switch the
/// behavior.
#[derive(Debug, Clone, Default)]
pub struct ContextArbiter {
    votes: VecDeque<Option<ContextLabel>>,
}

impl ContextArbiter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn arbitrate(
        &mut self,
        env_label: EnvLabel,
        spatial: Option<&ContextEstimate>,
        tracks: &[PersonTrack],
        robot: &Pose2D,
        machines: &[Point2D],
    ) -> ContextLabel {
        let near: Vec<Point2D> = tracks
            .iter()
            .map(|t| t.position)
            .filter(|p| p.dist(&robot.position()) <= GROUP_RANGE)
            .collect();

        let mut raw = None;
        if near.len() >= 3 {
            let c = centroid(&near);
            let cohesive = near.iter().all(|p| p.dist(&c) <= GROUP_COHESION);
            if cohesive {
                if let Some(est) = spatial {
                    if est.label.is_spatial() && est.confidence >= SPATIAL_CONFIDENCE_MIN {
                        raw = Some(est.label);
                    }
                }
            }
        } else if near.len() == 2 && machine_near_line(&near[0], &near[1], machines) {
            raw = Some(ContextLabel::Queue);
        }

        if self.votes.len() == SPATIAL_VOTE_WINDOW {
            self.votes.pop_front();
        }
        self.votes.push_back(raw);

        let half = self.votes.len() / 2;
        let winner = [ContextLabel::Queue, ContextLabel::OFormation]
            .into_iter()
            .find(|label| {
                self.votes.iter().filter(|v| **v == Some(*label)).count() > half
            });
        match winner {
            // A spatial label never wins without a live group in range.
            Some(label) if near.len() >= 2 => label,
            _ => env_label.into(),
        }
    }
}

fn machine_near_line(a: &Point2D, b: &Point2D, machines: &[Point2D]) -> bool {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let norm = (dx * dx + dy * dy).sqrt();
    if norm <= 1e-12 {
        return false;
    }
    machines.iter().any(|m| {
        let cross = ((m.x - a.x) * dy - (m.y - a.y) * dx).abs() / norm;
        cross <= MACHINE_LINE_DIST
    })
}

/// Cardinal objectives for each context.
pub fn select_objectives(label: ContextLabel) -> &'static [ObjectiveId] {
    use ObjectiveId::*;
    match label {
        ContextLabel::Hallway => &[GoalDistance, Clearance, PersonalSpace, RightSide],
        ContextLabel::ArtGallery => &[GoalDistance, Clearance, PersonalSpace, ActivitySpace],
        ContextLabel::OFormation => &[SocialGoal, Clearance, PersonalSpace, OSpace],
        ContextLabel::Queue => &[SocialGoal, Clearance, PersonalSpace],
        ContextLabel::VendingMachine => &[GoalDistance, Clearance, PersonalSpace],
        ContextLabel::Other => &[GoalDistance, Clearance],
    }
}

/// Per-class precision, recall, and F1 over a 6x6 confusion matrix
/// (row = truth, column = prediction).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub confusion: [[usize; 6]; 6],
    pub precision: [f64; 6],
    pub recall: [f64; 6],
    pub f1: [f64; 6],
}

impl EvalReport {
    pub fn accuracy(&self) -> f64 {
        let correct: usize = (0..6).map(|i| self.confusion[i][i]).sum();
        let total: usize = self.confusion.iter().flatten().sum();
        correct as f64 / total as f64
    }
}

pub fn evaluate_classifier(
    predictions: &[ContextLabel],
    truths: &[ContextLabel],
) -> Result<EvalReport> {
    if predictions.len() != truths.len() || predictions.is_empty() {
        return Err(Error::InvalidInput(format!(
            "prediction/truth length mismatch: {} vs {}",
            predictions.len(),
            truths.len()
        )));
    }
    let mut confusion = [[0usize; 6]; 6];
    for (p, t) in predictions.iter().zip(truths) {
        confusion[t.index()][p.index()] += 1;
    }
    let mut precision = [0.0; 6];
    let mut recall = [0.0; 6];
    let mut f1 = [0.0; 6];
    for k in 0..6 {
        let tp = confusion[k][k] as f64;
        let predicted: usize = (0..6).map(|i| confusion[i][k]).sum();
        let truth: usize = confusion[k].iter().sum();
        precision[k] = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        recall[k] = if truth > 0 { tp / truth as f64 } else { 0.0 };
        f1[k] = if precision[k] + recall[k] > 0.0 {
            2.0 * precision[k] * recall[k] / (precision[k] + recall[k])
        } else {
            0.0
        };
    }
    Ok(EvalReport {
        confusion,
        precision,
        recall,
        f1,
    })
}
