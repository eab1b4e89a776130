//! Grid global planner: 8-connected A* over the inflated layer.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Error;
use crate::geom::Point2D;
use crate::world::OccupancyGrid;
use crate::Result;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Min-heap entry ordered by (f, h, cell index) so expansions are
/// deterministic.
#[derive(PartialEq)]
struct Entry {
    f: f64,
    h: f64,
    idx: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.h.total_cmp(&self.h))
            .then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn octile(a: (usize, usize), b: (usize, usize), resolution: f64) -> f64 {
    let dx = a.0.abs_diff(b.0) as f64;
    let dy = a.1.abs_diff(b.1) as f64;
    resolution * (dx.max(dy) + (SQRT2 - 1.0) * dx.min(dy))
}

/// Shortest 8-connected path of cell centers through free inflated space.
/// Diagonal steps may not cut corners past an occupied cardinal neighbor.
pub fn plan_global(grid: &OccupancyGrid, start: Point2D, goal: Point2D) -> Result<Vec<Point2D>> {
    let start_cell = grid
        .cell_of(&start)
        .filter(|&(x, y)| !grid.cell_inflated(x, y))
        .ok_or_else(|| {
            Error::InvalidPose(format!(
                "global plan start ({:.2}, {:.2}) is not in free space",
                start.x, start.y
            ))
        })?;
    let goal_cell = grid
        .cell_of(&goal)
        .filter(|&(x, y)| !grid.cell_inflated(x, y))
        .ok_or_else(|| {
            Error::UnreachableGoal(format!(
                "goal ({:.2}, {:.2}) is not in free space",
                goal.x, goal.y
            ))
        })?;

    let idx = |(x, y): (usize, usize)| y * grid.width + x;
    let mut g = vec![f64::INFINITY; grid.width * grid.height];
    let mut parent = vec![usize::MAX; grid.width * grid.height];
    let mut settled = vec![false; grid.width * grid.height];
    let mut open = BinaryHeap::new();
    g[idx(start_cell)] = 0.0;
    let h0 = octile(start_cell, goal_cell, grid.resolution);
    open.push(Entry {
        f: h0,
        h: h0,
        idx: idx(start_cell),
    });

    const MOVES: [(isize, isize); 8] = [
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, 1),
        (1, -1),
        (-1, 1),
        (-1, -1),
    ];

    while let Some(entry) = open.pop() {
        if settled[entry.idx] {
            continue;
        }
        settled[entry.idx] = true;
        if entry.idx == idx(goal_cell) {
            let mut cells = vec![entry.idx];
            let mut cur = entry.idx;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                cells.push(cur);
            }
            cells.reverse();
            return Ok(cells
                .into_iter()
                .map(|i| grid.cell_center(i % grid.width, i / grid.width))
                .collect());
        }
        let cx = entry.idx % grid.width;
        let cy = entry.idx / grid.width;
        for (dx, dy) in MOVES {
            let nx = cx as isize + dx;
            let ny = cy as isize + dy;
            if nx < 0 || ny < 0 || nx as usize >= grid.width || ny as usize >= grid.height {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if grid.cell_inflated(nx, ny) {
                continue;
            }
            let diagonal = dx != 0 && dy != 0;
            if diagonal
                && (grid.cell_inflated(nx, cy) || grid.cell_inflated(cx, ny))
            {
                continue;
            }
            let step = if diagonal { SQRT2 } else { 1.0 } * grid.resolution;
            let ni = idx((nx, ny));
            let tentative = g[entry.idx] + step;
            if tentative < g[ni] {
                g[ni] = tentative;
                parent[ni] = entry.idx;
                let h = octile((nx, ny), goal_cell, grid.resolution);
                open.push(Entry {
                    f: tentative + h,
                    h,
                    idx: ni,
                });
            }
        }
    }
    Err(Error::UnreachableGoal(format!(
        "no path from ({:.2}, {:.2}) to ({:.2}, {:.2})",
        start.x, start.y, goal.x, goal.y
    )))
}
