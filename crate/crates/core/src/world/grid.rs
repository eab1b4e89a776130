//! Occupancy grid: obstacle rasterization, an exact Euclidean distance field
//! and the inflated planning layer derived from it.

use crate::geom::Point2D;
use crate::world::{Obstacle, Scenario};

/// Default obstacle inflation, meters. Matches the robot's footprint radius
/// so the planner can treat the robot as a point.
pub const DEFAULT_INFLATION_RADIUS: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    /// World position of the lower-left corner of cell (0, 0).
    pub origin: Point2D,
    pub inflation_radius: f64,
    /// Raw obstacle cells; what the laser sees.
    occupied: Vec<bool>,
    /// Obstacle cells dilated by the inflation radius; what the planner
    /// treats as untraversable.
    inflated: Vec<bool>,
    /// Meters from each cell center to the nearest raw obstacle cell center.
    distance: Vec<f64>,
}

impl OccupancyGrid {
    fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.width + ix
    }

    /// Cell containing a world point, or None when outside the grid.
    pub fn cell_of(&self, p: &Point2D) -> Option<(usize, usize)> {
        let fx = (p.x - self.origin.x) / self.resolution;
        let fy = (p.y - self.origin.y) / self.resolution;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        (ix < self.width && iy < self.height).then_some((ix, iy))
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point2D {
        Point2D::new(
            self.origin.x + (ix as f64 + 0.5) * self.resolution,
            self.origin.y + (iy as f64 + 0.5) * self.resolution,
        )
    }

    pub fn cell_occupied(&self, ix: usize, iy: usize) -> bool {
        self.occupied[self.idx(ix, iy)]
    }

    pub fn cell_inflated(&self, ix: usize, iy: usize) -> bool {
        self.inflated[self.idx(ix, iy)]
    }

    /// Raw obstacle test for a world point; outside the grid is free.
    pub fn is_occupied(&self, p: &Point2D) -> bool {
        self.cell_of(p)
            .map(|(ix, iy)| self.cell_occupied(ix, iy))
            .unwrap_or(false)
    }

    /// Planning-layer free-space test; outside the grid is free.
    pub fn is_free_inflated(&self, p: &Point2D) -> bool {
        self.cell_of(p)
            .map(|(ix, iy)| !self.cell_inflated(ix, iy))
            .unwrap_or(true)
    }

    /// Distance from the point's cell center to the nearest obstacle,
    /// meters. Infinite when there are no obstacles or the point is outside
    /// the grid.
    pub fn obstacle_distance(&self, p: &Point2D) -> f64 {
        self.cell_of(p)
            .map(|(ix, iy)| self.distance[self.idx(ix, iy)])
            .unwrap_or(f64::INFINITY)
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    pub fn inflated_count(&self) -> usize {
        self.inflated.iter().filter(|&&o| o).count()
    }
}

/// Rasterizes the scenario's obstacles with the default inflation radius.
pub fn rasterize(scenario: &Scenario) -> OccupancyGrid {
    rasterize_with(scenario, DEFAULT_INFLATION_RADIUS)
}

pub fn rasterize_with(scenario: &Scenario, inflation_radius: f64) -> OccupancyGrid {
    let res = scenario.resolution;
    let origin = Point2D::new(scenario.bounds.min[0], scenario.bounds.min[1]);
    // Subtract a hair before the ceil so exact multiples don't gain a cell.
    let width = (((scenario.bounds.max[0] - origin.x) / res) - 1e-9).ceil().max(1.0) as usize;
    let height = (((scenario.bounds.max[1] - origin.y) / res) - 1e-9).ceil().max(1.0) as usize;
    let mut occupied = vec![false; width * height];

    for obstacle in &scenario.obstacles {
        match obstacle {
            Obstacle::Rect { min, max } => {
                mark_rect(&mut occupied, width, height, &origin, res, min, max)
            }
            Obstacle::Wall { from, to } => mark_segment(
                &mut occupied,
                width,
                height,
                &origin,
                res,
                &Point2D::new(from[0], from[1]),
                &Point2D::new(to[0], to[1]),
            ),
        }
    }

    let distance = distance_field(&occupied, width, height, res);
    let inflated = distance
        .iter()
        .map(|&d| d <= inflation_radius + 1e-12)
        .collect();
    OccupancyGrid {
        resolution: res,
        width,
        height,
        origin,
        inflation_radius,
        occupied,
        inflated,
        distance,
    }
}

/// Marks every cell with positive-area overlap with the box.
fn mark_rect(
    occupied: &mut [bool],
    width: usize,
    height: usize,
    origin: &Point2D,
    res: f64,
    min: &[f64; 2],
    max: &[f64; 2],
) {
    let lo_x = (((min[0] - origin.x) / res).floor().max(0.0)) as usize;
    let lo_y = (((min[1] - origin.y) / res).floor().max(0.0)) as usize;
    let hi_x = ((((max[0] - origin.x) / res).ceil()) as usize).min(width.saturating_sub(1));
    let hi_y = ((((max[1] - origin.y) / res).ceil()) as usize).min(height.saturating_sub(1));
    for iy in lo_y..=hi_y.min(height - 1) {
        for ix in lo_x..=hi_x.min(width - 1) {
            let cx = origin.x + ix as f64 * res;
            let cy = origin.y + iy as f64 * res;
            let wx = max[0].min(cx + res) - min[0].max(cx);
            let wy = max[1].min(cy + res) - min[1].max(cy);
            if wx > 1e-12 && wy > 1e-12 {
                occupied[iy * width + ix] = true;
            }
        }
    }
}

/// Supercover traversal: marks every cell the segment passes through.
/// Endpoints exactly on the outer boundary clamp into the edge cells, so a
/// wall drawn along the bounds lands in the grid.
fn mark_segment(
    occupied: &mut [bool],
    width: usize,
    height: usize,
    origin: &Point2D,
    res: f64,
    from: &Point2D,
    to: &Point2D,
) {
    let clamp_cell = |p: &Point2D| -> (usize, usize) {
        let ix = ((p.x - origin.x) / res).floor().clamp(0.0, (width - 1) as f64) as usize;
        let iy = ((p.y - origin.y) / res).floor().clamp(0.0, (height - 1) as f64) as usize;
        (ix, iy)
    };
    let (mut ix, mut iy) = clamp_cell(from);
    let (ex, ey) = clamp_cell(to);
    occupied[iy * width + ix] = true;

    let dx = to.x - from.x;
    let dy = to.y - from.y;
    let step_x: isize = if dx > 0.0 { 1 } else { -1 };
    let step_y: isize = if dy > 0.0 { 1 } else { -1 };
    let next_boundary = |i: usize, step: isize, o: f64| -> f64 {
        let edge = if step > 0 { i as f64 + 1.0 } else { i as f64 };
        o + edge * res
    };
    let mut t_max_x = if dx.abs() > 1e-12 {
        (next_boundary(ix, step_x, origin.x) - from.x) / dx
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy.abs() > 1e-12 {
        (next_boundary(iy, step_y, origin.y) - from.y) / dy
    } else {
        f64::INFINITY
    };
    let t_delta_x = if dx.abs() > 1e-12 { res / dx.abs() } else { f64::INFINITY };
    let t_delta_y = if dy.abs() > 1e-12 { res / dy.abs() } else { f64::INFINITY };

    let mut guard = 2 * (width + height) + 4;
    while (ix, iy) != (ex, ey) && guard > 0 {
        guard -= 1;
        if t_max_x <= t_max_y {
            let nx = ix as isize + step_x;
            if nx < 0 || nx >= width as isize {
                break;
            }
            ix = nx as usize;
            t_max_x += t_delta_x;
        } else {
            let ny = iy as isize + step_y;
            if ny < 0 || ny >= height as isize {
                break;
            }
            iy = ny as usize;
            t_max_y += t_delta_y;
        }
        occupied[iy * width + ix] = true;
    }
}

/// Exact squared Euclidean distance transform of one row/column
/// (Felzenszwalb-Huttenlocher lower envelope of parabolas). `f` holds input
/// squared distances, infinity for "no source here".
fn dt1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = if f[q].is_infinite() {
                f64::INFINITY
            } else if f[p].is_infinite() {
                f64::NEG_INFINITY
            } else {
                ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / ((2 * q - 2 * p) as f64)
            };
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    let mut k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        d[q] = if f[p].is_infinite() {
            f64::INFINITY
        } else {
            let dq = q as f64 - p as f64;
            dq * dq + f[p]
        };
    }
}

/// Meters from every cell center to the nearest occupied cell center.
fn distance_field(occupied: &[bool], width: usize, height: usize, res: f64) -> Vec<f64> {
    let mut g = vec![f64::INFINITY; width * height];
    let m = width.max(height);
    let mut f = vec![0.0f64; m];
    let mut d = vec![0.0f64; m];
    for x in 0..width {
        for y in 0..height {
            f[y] = if occupied[y * width + x] { 0.0 } else { f64::INFINITY };
        }
        dt1d(&f[..height], &mut d[..height]);
        for y in 0..height {
            g[y * width + x] = d[y];
        }
    }
    for y in 0..height {
        f[..width].copy_from_slice(&g[y * width..(y + 1) * width]);
        dt1d(&f[..width], &mut d[..width]);
        for x in 0..width {
            g[y * width + x] = d[x];
        }
    }
    g.into_iter().map(|sq| sq.sqrt() * res).collect()
}
