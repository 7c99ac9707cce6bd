//! SVG timeline of a run: one lane per core, one block per job.

use std::fmt::Write as _;
use std::path::Path;

use sensedag_core::{DagGraph, RunResult, TransferMode};

use crate::harness::HarnessError;

const WIDTH: f64 = 1000.0;
const LEFT: f64 = 60.0;
const TOP: f64 = 20.0;
const LANE_H: f64 = 36.0;
const BLOCK_H: f64 = 24.0;
const AXIS_H: f64 = 30.0;

const BRANCH_COLORS: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const SHARED_COLOR: &str = "#9e9e9e";

fn branch_color(branch: u32) -> &'static str {
    if branch == 0 {
        SHARED_COLOR
    } else {
        BRANCH_COLORS[(branch as usize - 1) % BRANCH_COLORS.len()]
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders the schedule of `result` on `graph`. Output depends only on the
/// inputs, so equal results give equal bytes.
pub fn render_gantt(graph: &DagGraph, result: &RunResult) -> String {
    let s = &result.schedule;
    let p = &s.placement;
    let horizon = s
        .makespan
        .max(result.releases_ms.iter().copied().fold(0.0, f64::max))
        .max(1.0);
    let scale = (WIDTH - LEFT - 20.0) / horizon;
    let x = |t: f64| LEFT + t * scale;
    let lanes_h = LANE_H * s.cores as f64;
    let height = TOP + lanes_h + AXIS_H;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="monospace" font-size="10">"#
    );
    let _ = writeln!(
        out,
        r#"<title>{} policy, makespan {} ms</title>"#,
        result.policy.kind.as_str(),
        s.makespan
    );
    for c in 0..s.cores {
        let y = TOP + LANE_H * c as f64;
        let fill = if c % 2 == 0 { "#f7f7f7" } else { "#efefef" };
        let _ = writeln!(
            out,
            r#"<rect class="lane" data-core="{c}" x="{LEFT}" y="{y:.2}" width="{:.2}" height="{LANE_H}" fill="{fill}"/>"#,
            WIDTH - LEFT - 20.0
        );
        let _ = writeln!(
            out,
            r#"<text x="4" y="{:.2}">core {c}</text>"#,
            y + LANE_H / 2.0 + 3.0
        );
    }
    for v in 0..graph.len() {
        let node = &graph.nodes()[v];
        let y = TOP + LANE_H * p.core[v] as f64 + (LANE_H - BLOCK_H) / 2.0;
        let (x0, x1) = (x(p.start[v]), x(p.finish[v]));
        let _ = writeln!(
            out,
            r##"<rect class="job" data-node="{v}" data-branch="{}" x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{BLOCK_H}" fill="{}" stroke="#333" stroke-width="0.5"><title>{} [{}, {}]</title></rect>"##,
            node.branch,
            x1 - x0,
            branch_color(node.branch),
            escape(&node.label),
            p.start[v],
            p.finish[v]
        );
    }
    // one marker per edge at the consumer's start
    for t in &p.transfers {
        let v = t.v.0;
        let cx = x(p.start[v]);
        let cy = TOP + LANE_H * p.core[v] as f64 + (LANE_H - BLOCK_H) / 2.0;
        match t.mode {
            TransferMode::OnChip => {
                let _ = writeln!(
                    out,
                    r##"<circle class="xfer on-chip" data-edge="{}-{}" cx="{cx:.2}" cy="{cy:.2}" r="2.5" fill="#222"/>"##,
                    t.u.0, v
                );
            }
            TransferMode::OffChip => {
                let _ = writeln!(
                    out,
                    r##"<path class="xfer off-chip" data-edge="{}-{}" d="M {:.2} {:.2} L {:.2} {:.2} L {:.2} {:.2} Z" fill="#fff" stroke="#222" stroke-width="0.8"/>"##,
                    t.u.0,
                    v,
                    cx - 3.0,
                    cy - 3.0,
                    cx + 3.0,
                    cy - 3.0,
                    cx,
                    cy + 3.0
                );
            }
        }
    }
    for (k, &r) in result.releases_ms.iter().enumerate() {
        let rx = x(r);
        let _ = writeln!(
            out,
            r##"<line class="release" data-band="{}" x1="{rx:.2}" y1="{TOP}" x2="{rx:.2}" y2="{:.2}" stroke="{}" stroke-width="1" stroke-dasharray="4 3"/>"##,
            k + 1,
            TOP + lanes_h,
            branch_color(k as u32 + 1)
        );
    }
    let ay = TOP + lanes_h + 14.0;
    let _ = writeln!(
        out,
        r#"<text x="{LEFT}" y="{ay:.2}">0</text><text x="{:.2}" y="{ay:.2}" text-anchor="end">{} ms</text>"#,
        x(horizon),
        horizon
    );
    out.push_str("</svg>\n");
    out
}

pub fn emit_gantt(graph: &DagGraph, result: &RunResult, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, render_gantt(graph, result)).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;
    use sensedag_core::graph::{DagNode, NodeId};
    use sensedag_core::sensing::SensingTrace;
    use sensedag_core::{radg, PolicyConfig, ReleaseVector};
    use std::collections::BTreeMap;

    fn count(svg: &str, class: &str) -> usize {
        svg.matches(&format!("class=\"{class}\"")).count()
    }

    fn three_jobs() -> (DagGraph, RunResult) {
        let node = |id: usize, branch: u32, d: f64| DagNode {
            id: NodeId(id),
            branch,
            label: format!("n{id}"),
            d_cmp: d,
            r_on: 0.1,
            w_on: 0.1,
            r_off: 2.0,
            w_off: 2.0,
        };
        let g = DagGraph::from_parts(
            vec![node(0, 1, 3.0), node(1, 2, 4.0), node(2, 0, 2.0)],
            vec![(NodeId(0), NodeId(2)), (NodeId(1), NodeId(2))],
            BTreeMap::from([(1, NodeId(0)), (2, NodeId(1))]),
        );
        let schedule = radg::schedule(&g, &ReleaseVector::zeros(3), 2).unwrap();
        let r = RunResult {
            policy: PolicyConfig::decoupled(),
            sensing: SensingTrace {
                activation: vec![],
                tau: vec![],
                x_final: vec![],
            },
            releases_ms: vec![0.0, 0.0],
            total_latency_ms: schedule.makespan,
            schedule,
            decision_log: vec![],
        };
        (g, r)
    }

    #[test]
    fn structural_counts() {
        let (g, r) = three_jobs();
        let svg = render_gantt(&g, &r);
        assert_eq!(count(&svg, "job"), 3);
        assert_eq!(count(&svg, "lane"), 2);
        assert_eq!(count(&svg, "release"), 2);
        assert_eq!(
            count(&svg, "xfer on-chip") + count(&svg, "xfer off-chip"),
            2
        );
        assert!(svg.contains(SHARED_COLOR));
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(render_gantt(&g, &r), svg);
    }

    #[test]
    fn decoupled_release_lines_coincide() {
        let cfg = ScenarioConfig {
            seed: 5,
            policy: PolicyConfig::decoupled(),
            ..ScenarioConfig::default()
        };
        let s = cfg.build_scenario().unwrap();
        let r = sensedag_core::run_policy(&s, &cfg.policy).unwrap();
        let svg = render_gantt(&s.graph, &r);
        let xs: Vec<&str> = svg
            .lines()
            .filter(|l| l.contains("class=\"release\""))
            .map(|l| l.split("x1=\"").nth(1).unwrap().split('"').next().unwrap())
            .collect();
        assert_eq!(xs.len(), 6);
        assert!(xs.iter().all(|x| *x == xs[0]));
        assert_eq!(count(&svg, "job"), 43);
        assert_eq!(count(&svg, "lane"), 4);
    }

    #[test]
    fn unwritable_path_errors() {
        let (g, r) = three_jobs();
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("missing").join("g.svg");
        assert!(emit_gantt(&g, &r, &bad).is_err());
        let ok = dir.path().join("g.svg");
        emit_gantt(&g, &r, &ok).unwrap();
        assert_eq!(std::fs::read_to_string(ok).unwrap(), render_gantt(&g, &r));
    }
}
