//! Top-down SVG rendering of scenarios and run traces: shaded regions,
//! obstacles, person and artwork markers, and one robot path per run with
//! per-tick context coloring.

use std::fmt::Write as _;

use socnav_core::sim::TickRecord;
use socnav_core::world::{Obstacle, Scenario};
use socnav_core::{Error, Result};

const PX_PER_M: f64 = 60.0;
const MARGIN_M: f64 = 0.5;

/// The part of a run the plot needs: poses with their context label and the
/// last social goal the run pursued, if any.
pub struct RunView {
    pub points: Vec<(f64, f64, String)>,
    pub social_goal: Option<(f64, f64)>,
}

pub fn run_view_from_records(records: &[TickRecord]) -> RunView {
    let mut social_goal = None;
    for r in records {
        if let Some(g) = social_goal_event(&r.events) {
            social_goal = Some(g);
        }
    }
    RunView {
        points: records
            .iter()
            .map(|r| (r.robot.x, r.robot.y, r.context.as_str().to_string()))
            .collect(),
        social_goal,
    }
}

fn social_goal_event(events: &[String]) -> Option<(f64, f64)> {
    events.iter().find_map(|e| {
        let mut parts = e.strip_prefix("social_goal:")?.split(':');
        let x = parts.next()?.parse().ok()?;
        let y = parts.next()?.parse().ok()?;
        Some((x, y))
    })
}

/// Rebuilds a `RunView` from a trace CSV produced by the run command.
pub fn run_view_from_trace(text: &str) -> Result<RunView> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("trace: empty file".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    let index_of = |name: &str| {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::Parse(format!("trace: missing column {name}")))
    };
    let (xi, yi) = (index_of("x")?, index_of("y")?);
    let ci = index_of("context")?;
    let ei = index_of("events")?;

    let mut points = Vec::new();
    let mut social_goal = None;
    for (lineno, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            return Err(Error::Parse(format!(
                "trace line {}: expected {} cells, got {}",
                lineno + 2,
                columns.len(),
                cells.len()
            )));
        }
        let coord = |i: usize| -> Result<f64> {
            cells[i]
                .parse()
                .map_err(|_| Error::Parse(format!("trace line {}: bad number", lineno + 2)))
        };
        points.push((coord(xi)?, coord(yi)?, cells[ci].to_string()));
        let events: Vec<String> = cells[ei].split(';').map(str::to_string).collect();
        if let Some(g) = social_goal_event(&events) {
            social_goal = Some(g);
        }
    }
    Ok(RunView { points, social_goal })
}

fn context_color(label: &str) -> &'static str {
    match label {
        "hallway" => "#4c78a8",
        "art_gallery" => "#b8860b",
        "vending_machine" => "#8073ac",
        "queue" => "#d62728",
        "o_formation" => "#2ca02c",
        _ => "#9aa0a6",
    }
}

const RUN_STROKES: [&str; 4] = ["#30404d", "#792020", "#1f5c2d", "#5b3b8c"];

/// One self-contained SVG document. Every person and artwork gets exactly
/// one marker and every run exactly one path element; context shows up as
/// colored dots along each path.
pub fn render_svg(scenario: &Scenario, runs: &[RunView]) -> String {
    let min = scenario.bounds.min;
    let max = scenario.bounds.max;
    let w = ((max[0] - min[0]) + 2.0 * MARGIN_M) * PX_PER_M;
    let h = ((max[1] - min[1]) + 2.0 * MARGIN_M) * PX_PER_M;
    let sx = |x: f64| (x - min[0] + MARGIN_M) * PX_PER_M;
    let sy = |y: f64| (max[1] - y + MARGIN_M) * PX_PER_M;

    let mut out = String::new();
    let _ = writeln!(out, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"##
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{w:.0}" height="{h:.0}" fill="#fafafa"/>"##
    );
    let _ = writeln!(
        out,
        r##"<rect class="bounds" x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#ffffff" stroke="#666666"/>"##,
        sx(min[0]),
        sy(max[1]),
        (max[0] - min[0]) * PX_PER_M,
        (max[1] - min[1]) * PX_PER_M
    );

    for region in &scenario.regions {
        let d: Vec<String> = region
            .polygon
            .iter()
            .map(|v| format!("{:.1},{:.1}", sx(v[0]), sy(v[1])))
            .collect();
        let _ = writeln!(
            out,
            r##"<polygon class="region" points="{}" fill="{}" fill-opacity="0.18" stroke="none"/>"##,
            d.join(" "),
            context_color(region.label.as_str())
        );
    }

    for obstacle in &scenario.obstacles {
        match obstacle {
            Obstacle::Rect { min: a, max: b } => {
                let _ = writeln!(
                    out,
                    r##"<rect class="obstacle" x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#444444"/>"##,
                    sx(a[0]),
                    sy(b[1]),
                    (b[0] - a[0]) * PX_PER_M,
                    (b[1] - a[1]) * PX_PER_M
                );
            }
            Obstacle::Wall { from, to } => {
                let _ = writeln!(
                    out,
                    r##"<line class="obstacle" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#444444" stroke-width="3"/>"##,
                    sx(from[0]),
                    sy(from[1]),
                    sx(to[0]),
                    sy(to[1])
                );
            }
        }
    }

    for art in &scenario.artworks {
        let s = 0.24 * PX_PER_M;
        let _ = writeln!(
            out,
            r##"<rect class="artwork" x="{:.1}" y="{:.1}" width="{s:.1}" height="{s:.1}" fill="#b8860b" stroke="#5c4306"/>"##,
            sx(art[0]) - s / 2.0,
            sy(art[1]) - s / 2.0
        );
    }
    for machine in &scenario.machines {
        let s = 0.3 * PX_PER_M;
        let _ = writeln!(
            out,
            r##"<rect class="machine" x="{:.1}" y="{:.1}" width="{s:.1}" height="{s:.1}" fill="#8073ac" stroke="#3f3361"/>"##,
            sx(machine[0]) - s / 2.0,
            sy(machine[1]) - s / 2.0
        );
    }
    for person in &scenario.persons {
        let _ = writeln!(
            out,
            r##"<circle class="person" cx="{:.1}" cy="{:.1}" r="{:.1}" fill="#e8a33d" stroke="#7a5212"/>"##,
            sx(person.position[0]),
            sy(person.position[1]),
            0.2 * PX_PER_M
        );
    }
    let _ = writeln!(
        out,
        r##"<circle class="goal" cx="{:.1}" cy="{:.1}" r="{:.1}" fill="none" stroke="#222222" stroke-width="2"/>"##,
        sx(scenario.robot.goal[0]),
        sy(scenario.robot.goal[1]),
        0.3 * PX_PER_M
    );

    for (i, run) in runs.iter().enumerate() {
        if run.points.is_empty() {
            let _ = writeln!(out, r##"<path class="run" d="" fill="none"/>"##);
            continue;
        }
        let mut d = String::new();
        for (k, (x, y, _)) in run.points.iter().enumerate() {
            let cmd = if k == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.1} {:.1} ", sx(*x), sy(*y));
        }
        let _ = writeln!(
            out,
            r##"<path class="run" d="{}" fill="none" stroke="{}" stroke-width="2"{}/>"##,
            d.trim_end(),
            RUN_STROKES[i % RUN_STROKES.len()],
            if i % 2 == 1 { r##" stroke-dasharray="6 3""## } else { "" }
        );
        for (x, y, context) in &run.points {
            let _ = writeln!(
                out,
                r##"<circle class="ctx" cx="{:.1}" cy="{:.1}" r="2" fill="{}"/>"##,
                sx(*x),
                sy(*y),
                context_color(context)
            );
        }
        if let Some((x, y)) = run.social_goal {
            let _ = writeln!(
                out,
                r##"<circle class="social-goal" cx="{:.1}" cy="{:.1}" r="{:.1}" fill="none" stroke="#d62728" stroke-width="2" stroke-dasharray="4 2"/>"##,
                sx(x),
                sy(y),
                0.25 * PX_PER_M
            );
        }
    }

    out.push_str("</svg>\n");
    out
}
