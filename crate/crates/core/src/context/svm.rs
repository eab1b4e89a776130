//! Linear SVM over (circularity, linearity), trained by seeded subgradient
//! descent on the hinge loss. Two well-separated feature blobs do not need a
//! QP solver; determinism matters more here than an exact margin.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ContextEstimate, ContextLabel};
use crate::error::Error;
use crate::geom::FormationFeatures;
use crate::Result;

/// Floor applied to feature standard deviations during standardization.
pub const STD_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSvmModel {
    /// Weights over standardized (circularity, linearity).
    pub weights: [f64; 2],
    pub bias: f64,
    pub feature_means: [f64; 2],
    pub feature_stds: [f64; 2],
}

#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1e-3,
            epochs: 200,
            seed: 0,
        }
    }
}

fn standardize(f: &FormationFeatures, means: &[f64; 2], stds: &[f64; 2]) -> [f64; 2] {
    [
        (f.circularity - means[0]) / stds[0],
        (f.linearity - means[1]) / stds[1],
    ]
}

/// Trains the queue / o-formation separator.
///
/// Features are standardized by the training means and stds; the descent
/// shuffles the sample order each epoch with a seeded generator and steps by
/// 1/(lambda * t). O-formation is the positive class.
pub fn train_svm(
    samples: &[FormationFeatures],
    labels: &[ContextLabel],
    config: &TrainConfig,
) -> Result<LinearSvmModel> {
    if samples.len() != labels.len() || samples.is_empty() {
        return Err(Error::InvalidTrainingSet(format!(
            "got {} samples and {} labels",
            samples.len(),
            labels.len()
        )));
    }
    let mut ys = Vec::with_capacity(labels.len());
    for label in labels {
        let y = match label {
            ContextLabel::OFormation => 1.0,
            ContextLabel::Queue => -1.0,
            other => {
                return Err(Error::InvalidTrainingSet(format!(
                    "label {:?} is not a formation class",
                    other
                )))
            }
        };
        ys.push(y);
    }
    if !ys.contains(&1.0) || !ys.contains(&-1.0) {
        return Err(Error::InvalidTrainingSet(
            "training set must contain both formation classes".into(),
        ));
    }

    let n = samples.len() as f64;
    let mut means = [0.0f64; 2];
    for s in samples {
        means[0] += s.circularity;
        means[1] += s.linearity;
    }
    means[0] /= n;
    means[1] /= n;
    let mut stds = [0.0f64; 2];
    for s in samples {
        stds[0] += (s.circularity - means[0]).powi(2);
        stds[1] += (s.linearity - means[1]).powi(2);
    }
    stds[0] = (stds[0] / n).sqrt().max(STD_FLOOR);
    stds[1] = (stds[1] / n).sqrt().max(STD_FLOOR);

    let xs: Vec<[f64; 2]> = samples.iter().map(|s| standardize(s, &means, &stds)).collect();

    // The bias rides along as a third weight on a constant feature. A free
    // bias with 1/(lambda t) steps never recovers from its first huge step
    // and can leave points misclassified on cleanly separable data.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut w = [0.0f64; 3];
    let mut t = 0u64;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (config.lambda * t as f64);
            let margin = ys[i] * (w[0] * xs[i][0] + w[1] * xs[i][1] + w[2]);
            let decay = 1.0 - eta * config.lambda;
            w[0] *= decay;
            w[1] *= decay;
            w[2] *= decay;
            if margin < 1.0 {
                w[0] += eta * ys[i] * xs[i][0];
                w[1] += eta * ys[i] * xs[i][1];
                w[2] += eta * ys[i];
            }
        }
    }

    Ok(LinearSvmModel {
        weights: [w[0], w[1]],
        bias: w[2],
        feature_means: means,
        feature_stds: stds,
    })
}

/// Labels by the sign of the decision value; exactly zero counts as
/// o-formation. Confidence is the geometric margin in standardized space.
pub fn predict_svm(model: &LinearSvmModel, features: &FormationFeatures) -> ContextEstimate {
    let x = standardize(features, &model.feature_means, &model.feature_stds);
    let decision = model.weights[0] * x[0] + model.weights[1] * x[1] + model.bias;
    let norm = (model.weights[0].powi(2) + model.weights[1].powi(2)).sqrt();
    let confidence = if norm > 0.0 { decision.abs() / norm } else { 0.0 };
    ContextEstimate {
        label: if decision >= 0.0 {
            ContextLabel::OFormation
        } else {
            ContextLabel::Queue
        },
        confidence,
        tick: 0,
    }
}

/// Serializes a model as a flat text file, 17 significant digits per value.
pub fn save_model(model: &LinearSvmModel) -> String {
    format!(
        "schema: 1\nweights: {:.16e} {:.16e}\nbias: {:.16e}\nmeans: {:.16e} {:.16e}\nstds: {:.16e} {:.16e}\n",
        model.weights[0],
        model.weights[1],
        model.bias,
        model.feature_means[0],
        model.feature_means[1],
        model.feature_stds[0],
        model.feature_stds[1],
    )
}

pub fn load_model(text: &str) -> Result<LinearSvmModel> {
    let mut schema = None;
    let mut weights = None;
    let mut bias = None;
    let mut means = None;
    let mut stds = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(':').ok_or_else(|| {
            Error::Parse(format!("model line {}: expected `key: values`", lineno + 1))
        })?;
        let values: Vec<f64> = rest
            .split_whitespace()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("model line {}: {e}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        let pair = |name: &str| -> Result<[f64; 2]> {
            values.clone().try_into().map_err(|_| {
                Error::Parse(format!("model field `{name}` needs exactly 2 values"))
            })
        };
        match key.trim() {
            "schema" => schema = Some(values),
            "weights" => weights = Some(pair("weights")?),
            "bias" => bias = values.first().copied(),
            "means" => means = Some(pair("means")?),
            "stds" => stds = Some(pair("stds")?),
            other => return Err(Error::Parse(format!("unknown model field `{other}`"))),
        }
    }
    match schema.as_deref() {
        Some([v]) if *v == 1.0 => {}
        other => {
            return Err(Error::Parse(format!(
                "unsupported model schema {other:?}, expected 1"
            )))
        }
    }
    let model = LinearSvmModel {
        weights: weights.ok_or_else(|| Error::Parse("model is missing `weights`".into()))?,
        bias: bias.ok_or_else(|| Error::Parse("model is missing `bias`".into()))?,
        feature_means: means.ok_or_else(|| Error::Parse("model is missing `means`".into()))?,
        feature_stds: stds.ok_or_else(|| Error::Parse("model is missing `stds`".into()))?,
    };
    if model.weights.iter().any(|w| !w.is_finite())
        || !model.bias.is_finite()
        || model.feature_stds.iter().any(|s| *s < STD_FLOOR)
    {
        return Err(Error::Parse("model parameters out of range".into()));
    }
    Ok(model)
}
