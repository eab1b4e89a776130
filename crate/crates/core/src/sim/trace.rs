//! Trace and metrics serialization: one CSV row per tick plus a JSON
//! metrics document. Output is plain text and stable across reruns.

use std::fmt::Write as _;

use crate::sim::{RunMetrics, TickRecord};
use crate::social::ObjectiveId;

/// Decimal with nine significant digits. Zero prints as `0.00000000` so the
/// column layout stays stable.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.8}", 0.0);
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (8 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// CSV with one row per tick. Objective columns follow the fixed
/// `ObjectiveId` order; inactive objectives leave their cell empty, as do
/// ticks without a scored candidate (recovery, terminal state).
pub fn render_trace(records: &[TickRecord]) -> String {
    let mut out = String::from("tick,x,y,theta,v,omega,context,fitness");
    for id in ObjectiveId::ALL {
        let _ = write!(out, ",obj:{}", id.as_str());
    }
    out.push_str(",min_person_dist,events\n");

    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.tick,
            fmt_sig(r.robot.x),
            fmt_sig(r.robot.y),
            fmt_sig(r.robot.theta),
            fmt_sig(r.command.v),
            fmt_sig(r.command.omega),
            r.context.as_str(),
            r.chosen_fitness.map(fmt_sig).unwrap_or_default(),
        );
        for id in ObjectiveId::ALL {
            let cell = r
                .active_objectives
                .iter()
                .position(|&a| a == id)
                .and_then(|i| r.objective_values.as_ref().map(|v| fmt_sig(v[i])))
                .unwrap_or_default();
            let _ = write!(out, ",{cell}");
        }
        let _ = writeln!(
            out,
            ",{},{}",
            r.min_person_distance.map(fmt_sig).unwrap_or_default(),
            r.events.join(";"),
        );
    }
    out
}

/// Pretty-printed JSON mirroring the `RunMetrics` field names.
pub fn render_metrics(metrics: &RunMetrics) -> String {
    let mut out =
        serde_json::to_string_pretty(metrics).expect("metrics are plain data");
    out.push('\n');
    out
}
