//! Synthetic formation generator and the sample CSV format.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{extract_features, ContextLabel};
use crate::error::Error;
use crate::geom::{FormationFeatures, Point2D};
use crate::Result;

/// Person-count range used when the caller does not specify one.
pub const DEFAULT_PEOPLE: RangeInclusive<usize> = 4..=8;

/// Generates labelled formation features.
///
/// Queues are collinear points with 0.6-1.0 m gaps at a random orientation;
/// o-formations are points equally spaced on a 0.6-1.5 m circle with up to
/// 15 degrees of angular scatter. Both get Gaussian position jitter of
/// `noise_sigma`. Output is deterministic for a given seed.
pub fn generate_formation_samples(
    kind: ContextLabel,
    count: usize,
    people: RangeInclusive<usize>,
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<(FormationFeatures, ContextLabel)>> {
    if !matches!(kind, ContextLabel::Queue | ContextLabel::OFormation) {
        return Err(Error::InvalidInput(format!(
            "cannot generate samples for {:?}",
            kind
        )));
    }
    if *people.start() < 3 || people.is_empty() {
        return Err(Error::InvalidInput(format!(
            "people range {people:?} must start at 3 or more"
        )));
    }
    if count < 1 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    let jitter = Normal::new(0.0, noise_sigma.max(0.0))
        .map_err(|e| Error::InvalidInput(format!("bad noise sigma: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(people.clone());
        let mut points = Vec::with_capacity(n);
        match kind {
            ContextLabel::Queue => {
                let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                let (dx, dy) = (phi.cos(), phi.sin());
                let mut s = 0.0;
                for k in 0..n {
                    if k > 0 {
                        s += rng.gen_range(0.6..1.0);
                    }
                    points.push(Point2D::new(
                        s * dx + jitter.sample(&mut rng),
                        s * dy + jitter.sample(&mut rng),
                    ));
                }
            }
            ContextLabel::OFormation => {
                let r = rng.gen_range(0.6..1.5);
                let offset = rng.gen_range(0.0..std::f64::consts::TAU);
                let scatter = 15.0f64.to_radians();
                for k in 0..n {
                    let theta = offset
                        + k as f64 * std::f64::consts::TAU / n as f64
                        + rng.gen_range(-scatter..scatter);
                    points.push(Point2D::new(
                        r * theta.cos() + jitter.sample(&mut rng),
                        r * theta.sin() + jitter.sample(&mut rng),
                    ));
                }
            }
            _ => unreachable!(),
        }
        out.push((extract_features(&points)?, kind));
    }
    Ok(out)
}

/// Renders samples as `circularity,linearity,label` CSV.
pub fn samples_to_csv(samples: &[(FormationFeatures, ContextLabel)]) -> String {
    let mut csv = String::from("circularity,linearity,label\n");
    for (f, label) in samples {
        csv.push_str(&format!(
            "{:.16e},{:.16e},{}\n",
            f.circularity,
            f.linearity,
            label.as_str()
        ));
    }
    csv
}

pub fn parse_samples_csv(text: &str) -> Result<Vec<(FormationFeatures, ContextLabel)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "circularity,linearity,label" => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header `circularity,linearity,label`, got {:?}",
                other.map(|(_, l)| l)
            )))
        }
    }
    let mut out = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!(
                "samples line {}: expected 3 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let circularity: f64 = fields[0]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("samples line {}: {e}", lineno + 1)))?;
        let linearity: f64 = fields[1]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("samples line {}: {e}", lineno + 1)))?;
        let label = ContextLabel::from_str(fields[2].trim()).ok_or_else(|| {
            Error::Parse(format!(
                "samples line {}: unknown label `{}`",
                lineno + 1,
                fields[2]
            ))
        })?;
        out.push((
            FormationFeatures {
                circularity,
                linearity,
            },
            label,
        ));
    }
    Ok(out)
}
