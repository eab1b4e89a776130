//! Planar geometry for group-formation features.
//!
//! A group of people is summarised by two shape features computed from their
//! positions: circularity (how close the polygon through the positions is to
//! a circle) and linearity (how well a single line explains the spread).
//! Both land in [0, 1], which keeps them comparable across group sizes.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn dist(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Shape features of one group of positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormationFeatures {
    pub circularity: f64,
    pub linearity: f64,
}

/// Algebraic circle fit result.
#[derive(Debug, Clone, Copy)]
pub struct CircleFit {
    pub center: Point2D,
    pub radius: f64,
    /// Root mean square of the radial residuals, meters.
    pub rms_residual: f64,
}

pub fn centroid(points: &[Point2D]) -> Point2D {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point2D::new(sx / n, sy / n)
}

/// Covariance eigenvalues of a point set, largest first. Values are >= 0 up
/// to rounding.
fn covariance_eigenvalues(points: &[Point2D]) -> (f64, f64) {
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
    let disc = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    ((tr + disc) / 2.0, (tr - disc) / 2.0)
}

/// Orders points counter-clockwise by polar angle about their centroid.
/// Ties on the angle are broken by ascending distance from the centroid, so
/// the result is deterministic for any input order.
pub fn angular_sort(points: &[Point2D]) -> Result<Vec<Point2D>> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "angular_sort needs >= 3 points, got {}",
            points.len()
        )));
    }
    let c = centroid(points);
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        let ka = ((a.y - c.y).atan2(a.x - c.x), a.dist(&c));
        let kb = ((b.y - c.y).atan2(b.x - c.x), b.dist(&c));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    Ok(sorted)
}

/// Shoelace area of a closed polygon given its ordered vertices.
pub fn polygon_area(vertices: &[Point2D]) -> Result<f64> {
    if vertices.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "polygon_area needs >= 3 vertices, got {}",
            vertices.len()
        )));
    }
    let mut twice = 0.0;
    for i in 0..vertices.len() {
        let a = &vertices[i];
        let b = &vertices[(i + 1) % vertices.len()];
        twice += a.x * b.y - b.x * a.y;
    }
    Ok(twice.abs() / 2.0)
}

/// Perimeter of a closed polygon given its ordered vertices.
pub fn polygon_perimeter(vertices: &[Point2D]) -> Result<f64> {
    if vertices.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "polygon_perimeter needs >= 3 vertices, got {}",
            vertices.len()
        )));
    }
    let mut total = 0.0;
    for i in 0..vertices.len() {
        total += vertices[i].dist(&vertices[(i + 1) % vertices.len()]);
    }
    Ok(total)
}

/// Isoperimetric quotient of the polygon through the points after angular
/// sorting: 4*pi*area / perimeter^2. 1 for a circle, 0 for collinear points,
/// clamped to [0, 1] against rounding.
pub fn circularity(points: &[Point2D]) -> Result<f64> {
    let ordered = angular_sort(points)?;
    let area = polygon_area(&ordered)?;
    let perimeter = polygon_perimeter(&ordered)?;
    if perimeter <= EPS {
        return Err(Error::DegenerateInput(
            "circularity: zero perimeter (coincident points)".into(),
        ));
    }
    Ok((4.0 * std::f64::consts::PI * area / (perimeter * perimeter)).clamp(0.0, 1.0))
}

/// Ordinary least squares slope of y on x.
pub fn linearity_slope(points: &[Point2D]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "linearity_slope needs >= 2 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxy, mut sxx) = (0.0, 0.0, 0.0, 0.0);
    for p in points {
        sx += p.x;
        sy += p.y;
        sxy += p.x * p.y;
        sxx += p.x * p.x;
    }
    let denom = sxx - sx * sx / n;
    if denom.abs() <= EPS {
        return Err(Error::SingularFit(
            "linearity_slope: vertical point set, slope undefined".into(),
        ));
    }
    Ok((sxy - sx * sy / n) / denom)
}

/// Rotation-invariant linearity: 1 - lambda2/lambda1 over the covariance
/// eigenvalues. 1 for collinear points, 0 for an isotropic spread.
pub fn linearity(points: &[Point2D]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "linearity needs >= 3 points, got {}",
            points.len()
        )));
    }
    let (l1, l2) = covariance_eigenvalues(points);
    if l1 <= EPS {
        return Err(Error::DegenerateInput(
            "linearity: coincident points".into(),
        ));
    }
    Ok((1.0 - l2 / l1).clamp(0.0, 1.0))
}

/// Distance from a point to a segment.
pub fn dist_point_segment(p: &Point2D, a: &Point2D, b: &Point2D) -> f64 {
    let (abx, aby) = (b.x - a.x, b.y - a.y);
    let len_sq = abx * abx + aby * aby;
    if len_sq <= EPS {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * abx + (p.y - a.y) * aby) / len_sq).clamp(0.0, 1.0);
    p.dist(&Point2D::new(a.x + t * abx, a.y + t * aby))
}

/// Even-odd point-in-polygon test; points on the boundary count as inside.
pub fn point_in_polygon(p: &Point2D, poly: &[Point2D]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        if dist_point_segment(p, &poly[i], &poly[(i + 1) % n]) <= 1e-9 {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (&poly[i], &poly[j]);
        if (pi.y > p.y) != (pj.y > p.y) {
            let x_int = pi.x + (p.y - pi.y) * (pj.x - pi.x) / (pj.y - pi.y);
            if p.x < x_int {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Algebraic least-squares circle fit (Kasa). Works on the centered data so
/// the 2x2 normal system stays well conditioned.
pub fn best_fit_circle(points: &[Point2D]) -> Result<CircleFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "best_fit_circle needs >= 3 points, got {}",
            points.len()
        )));
    }
    let c = centroid(points);
    let n = points.len() as f64;
    let (mut suu, mut suv, mut svv) = (0.0, 0.0, 0.0);
    let (mut suuu, mut svvv, mut suvv, mut suuv) = (0.0, 0.0, 0.0, 0.0);
    for p in points {
        let u = p.x - c.x;
        let v = p.y - c.y;
        suu += u * u;
        suv += u * v;
        svv += v * v;
        suuu += u * u * u;
        svvv += v * v * v;
        suvv += u * v * v;
        suuv += u * u * v;
    }
    let det = suu * svv - suv * suv;
    // det is n^2 times the covariance determinant; zero means collinear.
    let scale = (suu + svv).max(EPS);
    if det.abs() <= 1e-9 * scale * scale {
        return Err(Error::SingularFit(
            "best_fit_circle: collinear points".into(),
        ));
    }
    let rhs_u = (suuu + suvv) / 2.0;
    let rhs_v = (svvv + suuv) / 2.0;
    let uc = (rhs_u * svv - rhs_v * suv) / det;
    let vc = (rhs_v * suu - rhs_u * suv) / det;
    let radius = (uc * uc + vc * vc + (suu + svv) / n).sqrt();
    let center = Point2D::new(uc + c.x, vc + c.y);
    let mut sq = 0.0;
    for p in points {
        let r = p.dist(&center);
        sq += (r - radius) * (r - radius);
    }
    Ok(CircleFit {
        center,
        radius,
        rms_residual: (sq / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(raw: &[(f64, f64)]) -> Vec<Point2D> {
        raw.iter().map(|&(x, y)| Point2D::new(x, y)).collect()
    }

    fn regular_polygon(n: usize, r: f64) -> Vec<Point2D> {
        (0..n)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Point2D::new(r * a.cos(), r * a.sin())
            })
            .collect()
    }

    /// Independent area oracle: monotone-chain convex hull + shoelace. Valid
    /// for point sets in convex position, which all the fixtures below are.
    fn convex_hull_area(points: &[Point2D]) -> f64 {
        let mut p = points.to_vec();
        p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        let cross = |o: &Point2D, a: &Point2D, b: &Point2D| {
            (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
        };
        let mut hull: Vec<Point2D> = Vec::new();
        for pass in 0..2 {
            let start = hull.len();
            let iter: Vec<&Point2D> = if pass == 0 {
                p.iter().collect()
            } else {
                p.iter().rev().collect()
            };
            for q in iter {
                while hull.len() >= start + 2
                    && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], q) <= 0.0
                {
                    hull.pop();
                }
                hull.push(*q);
            }
            hull.pop();
        }
        polygon_area(&hull).unwrap()
    }

    #[test]
    fn angular_sort_square_is_ccw() {
        let shuffled = pts(&[(1.0, 1.0), (0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]);
        let sorted = angular_sort(&shuffled).unwrap();
        // Counter-clockwise from the third quadrant about centroid (0.5, 0.5).
        assert_eq!(
            sorted,
            pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
        );
        let area = polygon_area(&sorted).unwrap();
        assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angular_sort_keeps_sorted_triangle() {
        let tri = pts(&[(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)]);
        assert_eq!(angular_sort(&tri).unwrap(), tri);
    }

    #[test]
    fn angular_sort_rejects_two_points() {
        assert!(angular_sort(&pts(&[(0.0, 0.0), (1.0, 0.0)])).is_err());
    }

    #[test]
    fn area_and_perimeter_of_unit_square() {
        let sq = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert!((polygon_area(&sq).unwrap() - 1.0).abs() < 1e-12);
        assert!((polygon_perimeter(&sq).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn area_matches_hull_oracle_on_convex_sets() {
        for n in 3..10 {
            let poly = regular_polygon(n, 1.3);
            let sorted = angular_sort(&poly).unwrap();
            let a = polygon_area(&sorted).unwrap();
            assert!((a - convex_hull_area(&poly)).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn circularity_square_quarter_pi() {
        let sq = pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]);
        let c = circularity(&sq).unwrap();
        assert!((c - std::f64::consts::PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn circularity_regular_hexagon() {
        // Closed form: 4*pi*(3*sqrt(3)/2) / 36 = pi*sqrt(3)/6.
        let expected = std::f64::consts::PI * 3.0f64.sqrt() / 6.0;
        assert!((expected - 0.9069).abs() < 1e-4);
        let c = circularity(&regular_polygon(6, 2.0)).unwrap();
        assert!((c - expected).abs() < 1e-4);
    }

    #[test]
    fn circularity_collinear_is_zero() {
        let line = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        assert_eq!(circularity(&line).unwrap(), 0.0);
    }

    #[test]
    fn circularity_rejects_coincident() {
        let same = pts(&[(1.0, 1.0), (1.0, 1.0), (1.0, 1.0)]);
        assert!(circularity(&same).is_err());
    }

    #[test]
    fn slope_flat_and_sloped() {
        assert_eq!(
            linearity_slope(&pts(&[(0.0, 5.0), (1.0, 5.0), (2.0, 5.0)])).unwrap(),
            0.0
        );
        let s = linearity_slope(&pts(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)])).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn slope_vertical_is_singular() {
        let v = pts(&[(2.0, 0.0), (2.0, 1.0), (2.0, 2.0)]);
        assert!(matches!(linearity_slope(&v), Err(Error::SingularFit(_))));
    }

    #[test]
    fn linearity_extremes() {
        let line = pts(&[(0.0, 0.0), (1.0, 0.5), (2.0, 1.0), (3.0, 1.5)]);
        assert!((linearity(&line).unwrap() - 1.0).abs() < 1e-12);
        let sq = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert!(linearity(&sq).unwrap().abs() < 1e-12);
        assert!(linearity(&regular_polygon(8, 1.0)).unwrap().abs() < 1e-9);
    }

    #[test]
    fn point_in_polygon_includes_boundary() {
        let sq = pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]);
        assert!(point_in_polygon(&Point2D::new(1.0, 1.0), &sq));
        assert!(point_in_polygon(&Point2D::new(2.0, 1.0), &sq));
        assert!(point_in_polygon(&Point2D::new(0.0, 0.0), &sq));
        assert!(!point_in_polygon(&Point2D::new(2.1, 1.0), &sq));
        assert!(!point_in_polygon(&Point2D::new(-0.001, 1.0), &sq));
    }

    #[test]
    fn circle_fit_exact_three_points() {
        let fit = best_fit_circle(&pts(&[(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)])).unwrap();
        assert!(fit.center.dist(&Point2D::new(0.0, 0.0)) < 1e-9);
        assert!((fit.radius - 1.0).abs() < 1e-9);
        assert!(fit.rms_residual < 1e-9);
    }

    #[test]
    fn circle_fit_recovers_offset_circle() {
        let pts: Vec<Point2D> = regular_polygon(7, 0.9)
            .into_iter()
            .map(|p| Point2D::new(p.x + 3.0, p.y - 2.0))
            .collect();
        let fit = best_fit_circle(&pts).unwrap();
        assert!(fit.center.dist(&Point2D::new(3.0, -2.0)) < 1e-9);
        assert!((fit.radius - 0.9).abs() < 1e-9);
    }

    #[test]
    fn circle_fit_collinear_is_singular() {
        let line = pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]);
        assert!(matches!(best_fit_circle(&line), Err(Error::SingularFit(_))));
    }

    fn rigid(points: &[Point2D], angle: f64, tx: f64, ty: f64) -> Vec<Point2D> {
        let (s, c) = angle.sin_cos();
        points
            .iter()
            .map(|p| Point2D::new(c * p.x - s * p.y + tx, s * p.x + c * p.y + ty))
            .collect()
    }

    proptest! {
        #[test]
        fn features_invariant_under_rigid_transforms(
            angle in -std::f64::consts::PI..std::f64::consts::PI,
            tx in -50.0..50.0f64,
            ty in -50.0..50.0f64,
            n in 3usize..9,
        ) {
            let base = regular_polygon(n, 1.0 + n as f64 * 0.1);
            let moved = rigid(&base, angle, tx, ty);
            let c0 = circularity(&base).unwrap();
            let c1 = circularity(&moved).unwrap();
            let l0 = linearity(&base).unwrap();
            let l1 = linearity(&moved).unwrap();
            prop_assert!((c0 - c1).abs() < 1e-9);
            prop_assert!((l0 - l1).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&c1));
            prop_assert!((0.0..=1.0).contains(&l1));
        }
    }
}
