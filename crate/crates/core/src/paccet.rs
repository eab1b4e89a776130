//! Pareto-front based scoring for trajectory candidates.
//!
//! Candidate trajectories are scored on several objectives at once (all
//! minimised). Instead of collapsing them with a weighted sum, which cannot
//! reach concave regions of the trade-off surface, each planning cycle builds
//! the Pareto front of the candidate set and scores every candidate by the
//! radial gauge of the front's weakly-dominated region: scale the candidate's
//! vector until the ray first enters the region. Front members sit exactly on
//! the boundary (fitness 1), strictly dominated candidates score above 1, and
//! a candidate beyond the front would score below 1. Lower is better.
//!
//! Because every front member scores exactly 1, selection breaks the tie with
//! the squared distance to the utopia corner in normalized space, i.e. the
//! balanced compromise member, and falls back to the lowest candidate index so
//! the result is deterministic for a fixed sampling order.

use crate::{Error, Result};

/// Treat objective components at or below this as exactly zero.
pub const GAUGE_EPS: f64 = 1e-9;

/// Span below which a normalization column is considered constant.
const SPAN_EPS: f64 = 1e-12;

pub type ObjectiveVector = Vec<f64>;

/// Per-column extremes used to map raw objective values into [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationBounds {
    pub utopia: Vec<f64>,
    pub nadir: Vec<f64>,
}

/// Non-dominated members of a normalized candidate set.
#[derive(Debug, Clone)]
pub struct ParetoFront {
    pub members: Vec<ObjectiveVector>,
}

fn check_set(vectors: &[ObjectiveVector]) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Err(Error::InvalidInput("empty objective vector set".into()));
    };
    if first.is_empty() {
        return Err(Error::InvalidInput("zero-dimensional objectives".into()));
    }
    debug_assert!(
        vectors
            .iter()
            .all(|v| v.len() == first.len() && v.iter().all(|x| x.is_finite() && *x >= 0.0)),
        "objective vectors must share a dimension and be finite, non-negative"
    );
    Ok(first.len())
}

/// True when `a` weakly dominates `b`: no worse anywhere, better somewhere.
fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Indices of the non-dominated vectors, ascending. Exact duplicates keep the
/// lowest index only.
pub fn pareto_front(vectors: &[ObjectiveVector]) -> Result<Vec<usize>> {
    check_set(vectors)?;
    let mut out = Vec::new();
    'candidates: for i in 0..vectors.len() {
        for j in 0..vectors.len() {
            if j != i && dominates(&vectors[j], &vectors[i]) {
                continue 'candidates;
            }
        }
        for j in 0..i {
            if vectors[j] == vectors[i] {
                continue 'candidates;
            }
        }
        out.push(i);
    }
    Ok(out)
}

/// Column-wise min/max normalization into [0, 1]. Columns whose span is at
/// most 1e-12 map to 0: a constant objective carries no preference.
pub fn normalize(
    vectors: &[ObjectiveVector],
) -> Result<(Vec<ObjectiveVector>, NormalizationBounds)> {
    let dim = check_set(vectors)?;
    let mut utopia = vec![f64::INFINITY; dim];
    let mut nadir = vec![f64::NEG_INFINITY; dim];
    for v in vectors {
        for d in 0..dim {
            utopia[d] = utopia[d].min(v[d]);
            nadir[d] = nadir[d].max(v[d]);
        }
    }
    let normalized = vectors
        .iter()
        .map(|v| {
            (0..dim)
                .map(|d| {
                    let span = nadir[d] - utopia[d];
                    if span <= SPAN_EPS {
                        0.0
                    } else {
                        (v[d] - utopia[d]) / span
                    }
                })
                .collect()
        })
        .collect();
    Ok((normalized, NormalizationBounds { utopia, nadir }))
}

fn ratio(f: f64, p: f64) -> f64 {
    if f <= GAUGE_EPS {
        0.0
    } else if p <= GAUGE_EPS {
        f64::INFINITY
    } else {
        f / p
    }
}

/// Radial gauge fitness of `candidate` against `front`, both in normalized
/// space. rho is the smallest scale at which the candidate's ray enters the
/// front's weakly-dominated region; fitness is 1/rho.
///
/// A candidate at the utopia corner scores 0 (no scale reaches the region)
/// unless the corner itself is a front member, in which case the candidate
/// lies on the boundary like any other member and scores 1.
pub fn paccet_fitness(front: &ParetoFront, candidate: &[f64]) -> Result<f64> {
    if front.members.is_empty() {
        return Err(Error::InvalidInput("empty Pareto front".into()));
    }
    debug_assert!(front.members.iter().all(|m| m.len() == candidate.len()));
    if candidate.iter().all(|&x| x <= GAUGE_EPS) {
        let corner_on_front = front
            .members
            .iter()
            .any(|m| m.iter().all(|&x| x <= GAUGE_EPS));
        return Ok(if corner_on_front { 1.0 } else { 0.0 });
    }
    let mut rho = f64::INFINITY;
    for member in &front.members {
        let mut worst = 0.0f64;
        for (&f, &p) in member.iter().zip(candidate.iter()) {
            let r = ratio(f, p);
            if r > worst {
                worst = r;
            }
            if worst.is_infinite() {
                break;
            }
        }
        if worst < rho {
            rho = worst;
        }
    }
    if rho == 0.0 {
        // The front contains the utopia corner and the candidate does not:
        // dominated at every scale.
        return Ok(f64::INFINITY);
    }
    Ok(if rho.is_infinite() { 0.0 } else { 1.0 / rho })
}

/// Picks the best candidate of a raw objective set: normalize, build the
/// front, score everything, take the minimum fitness. Ties go to the
/// candidate closest to the utopia corner, then to the lowest index.
pub fn select_best(vectors: &[ObjectiveVector]) -> Result<usize> {
    select_best_with_fitness(vectors).map(|(i, _)| i)
}

/// [`select_best`] plus the winner's fitness, for trace records.
pub fn select_best_with_fitness(vectors: &[ObjectiveVector]) -> Result<(usize, f64)> {
    let (normalized, _) = normalize(vectors)?;
    let indices = pareto_front(&normalized)?;
    let front = ParetoFront {
        members: indices.iter().map(|&i| normalized[i].clone()).collect(),
    };
    let mut best = 0;
    let mut best_fit = f64::INFINITY;
    let mut best_sq = f64::INFINITY;
    for (i, v) in normalized.iter().enumerate() {
        let fit = paccet_fitness(&front, v)?;
        let sq: f64 = v.iter().map(|x| x * x).sum();
        if fit < best_fit || (fit == best_fit && sq < best_sq) {
            best = i;
            best_fit = fit;
            best_sq = sq;
        }
    }
    Ok((best, best_fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(raw: &[&[f64]]) -> Vec<ObjectiveVector> {
        raw.iter().map(|r| r.to_vec()).collect()
    }

    fn front_of(vectors: &[ObjectiveVector]) -> ParetoFront {
        let idx = pareto_front(vectors).unwrap();
        ParetoFront {
            members: idx.iter().map(|&i| vectors[i].clone()).collect(),
        }
    }

    #[test]
    fn front_drops_dominated() {
        assert_eq!(pareto_front(&v(&[&[1.0, 1.0], &[2.0, 2.0]])).unwrap(), [0]);
    }

    #[test]
    fn front_keeps_first_duplicate() {
        let set = v(&[&[1.0, 2.0], &[1.0, 2.0], &[0.0, 3.0]]);
        assert_eq!(pareto_front(&set).unwrap(), [0, 2]);
    }

    #[test]
    fn normalize_example() {
        let set = v(&[&[2.0, 10.0], &[4.0, 20.0], &[6.0, 30.0]]);
        let (n, b) = normalize(&set).unwrap();
        assert_eq!(b.utopia, [2.0, 10.0]);
        assert_eq!(b.nadir, [6.0, 30.0]);
        assert_eq!(n, v(&[&[0.0, 0.0], &[0.5, 0.5], &[1.0, 1.0]]));
    }

    #[test]
    fn normalize_zeroes_constant_column() {
        let set = v(&[&[3.0, 1.0], &[3.0, 2.0]]);
        let (n, _) = normalize(&set).unwrap();
        assert_eq!(n, v(&[&[0.0, 0.0], &[0.0, 1.0]]));
    }

    #[test]
    fn gauge_values_on_two_point_front() {
        let front = front_of(&v(&[&[0.0, 1.0], &[1.0, 0.0]]));
        assert_eq!(paccet_fitness(&front, &[0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(paccet_fitness(&front, &[2.0, 2.0]).unwrap(), 0.5f64.recip());
        assert_eq!(paccet_fitness(&front, &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(paccet_fitness(&front, &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(paccet_fitness(&front, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn gauge_handles_degenerate_corner_front() {
        // One candidate dominating everything normalizes to the corner and is
        // the whole front; it must still score like a member.
        let front = front_of(&v(&[&[0.0, 0.0]]));
        assert_eq!(paccet_fitness(&front, &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(paccet_fitness(&front, &[0.5, 1.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn select_best_tie_goes_to_balanced_member() {
        let set = v(&[&[5.0, 5.0], &[1.0, 9.0], &[9.0, 1.0]]);
        assert_eq!(select_best(&set).unwrap(), 0);
    }

    #[test]
    fn select_best_prefers_dominating_candidate() {
        let set = v(&[&[0.0, 10.0], &[5.0, 20.0]]);
        assert_eq!(select_best(&set).unwrap(), 0);
        let set = v(&[&[5.0, 20.0], &[0.0, 10.0]]);
        assert_eq!(select_best(&set).unwrap(), 1);
    }

    #[test]
    fn select_best_reaches_concave_front_region() {
        // A weighted sum would skip the middle point; the gauge keeps it in
        // the tie set and the corner-distance tie-break picks it.
        let set = v(&[
            &[0.0, 1.0],
            &[0.45, 0.45],
            &[1.0, 0.0],
            &[0.9, 0.9],
            &[0.7, 1.0],
        ]);
        assert_eq!(select_best(&set).unwrap(), 1);
    }

    #[test]
    fn single_candidate_selected() {
        assert_eq!(select_best(&v(&[&[3.0, 4.0, 5.0]])).unwrap(), 0);
    }

    // Independent oracle used by the property tests below and by the
    // acceptance suite: straight pairwise scan with its own dominance code.
    fn oracle_front(vectors: &[ObjectiveVector]) -> Vec<usize> {
        let dom = |a: &[f64], b: &[f64]| {
            a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
        };
        (0..vectors.len())
            .filter(|&i| {
                !(0..vectors.len()).any(|j| j != i && dom(&vectors[j], &vectors[i]))
                    && !(0..i).any(|j| vectors[j] == vectors[i])
            })
            .collect()
    }

    fn arb_set() -> impl Strategy<Value = Vec<ObjectiveVector>> {
        (2usize..5).prop_flat_map(|dim| {
            proptest::collection::vec(
                proptest::collection::vec(0.0..10.0f64, dim..=dim),
                1..40,
            )
        })
    }

    proptest! {
        #[test]
        fn front_matches_oracle(set in arb_set()) {
            prop_assert_eq!(pareto_front(&set).unwrap(), oracle_front(&set));
        }

        #[test]
        fn front_members_score_one(set in arb_set()) {
            let (norm, _) = normalize(&set).unwrap();
            let front = front_of(&norm);
            for m in &front.members {
                let fit = paccet_fitness(&front, m).unwrap();
                prop_assert!((fit - 1.0).abs() <= 1e-6, "member fitness {fit}");
            }
        }

        #[test]
        fn fitness_is_dominance_monotone(set in arb_set()) {
            let (norm, _) = normalize(&set).unwrap();
            let front = front_of(&norm);
            for a in &norm {
                for b in &norm {
                    if a.iter().zip(b).all(|(x, y)| x <= y) {
                        let fa = paccet_fitness(&front, a).unwrap();
                        let fb = paccet_fitness(&front, b).unwrap();
                        prop_assert!(fa <= fb + 1e-12, "{fa} > {fb}");
                    }
                }
            }
        }

        #[test]
        fn fitness_scales_radially(
            set in arb_set(),
            alpha in 0.1..=1.0f64,
        ) {
            let (norm, _) = normalize(&set).unwrap();
            let front = front_of(&norm);
            for p in &norm {
                if p.iter().any(|&x| x <= 2.0 * GAUGE_EPS) {
                    continue;
                }
                let scaled: Vec<f64> = p.iter().map(|x| x * alpha).collect();
                if scaled.iter().any(|&x| x <= GAUGE_EPS) {
                    continue;
                }
                let f1 = paccet_fitness(&front, p).unwrap();
                let f2 = paccet_fitness(&front, &scaled).unwrap();
                if f1.is_finite() {
                    prop_assert!((f2 - alpha * f1).abs() <= 1e-9 * (1.0 + f1));
                }
            }
        }

        #[test]
        fn choice_invariant_under_positive_affine_maps(
            set in arb_set(),
            scale in 0.1..20.0f64,
            shift in 0.0..50.0f64,
        ) {
            let chosen = select_best(&set).unwrap();
            let mapped: Vec<ObjectiveVector> = set
                .iter()
                .map(|v| v.iter().map(|x| x * scale + shift).collect())
                .collect();
            prop_assert_eq!(select_best(&mapped).unwrap(), chosen);
        }
    }
}
