use std::fmt::Write;

use crate::pkg::ParameterizedKG;

/// Edge colors for posterior-mean buckets 1..=5 (0-0.2 up to 0.8-1.0), from
/// reliably known facts to reliably failed ones.
pub const BUCKET_COLORS: [&str; 5] = ["#1a9850", "#91cf60", "#fee08b", "#fc8d59", "#d73027"];
pub const DEAD_EDGE_COLOR: &str = "#9e9e9e";

/// Equal-width bucket (1-based) of a posterior failure mean.
pub fn posterior_bucket(mean: f64) -> usize {
    ((mean.clamp(0.0, 1.0) * 5.0).floor() as usize).min(4) + 1
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' | '\r' => out.push(' '),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz description of the graph, nodes and edges in id order.
pub fn export_pkg_dot(pkg: &ParameterizedKG) -> String {
    let mut out = String::from("digraph pkg {\n  node [shape=box];\n");
    for e in pkg.entities() {
        writeln!(out, "  {} [label={}];", quote(e.id.as_str()), quote(&e.label)).unwrap();
    }
    for edge in pkg.edges() {
        let label = pkg
            .predicate(&edge.predicate)
            .map(|p| p.label.as_str())
            .unwrap_or(edge.predicate.as_str());
        let mean = edge.posterior_mean();
        let style = if edge.active {
            format!("color={}", quote(BUCKET_COLORS[posterior_bucket(mean) - 1]))
        } else {
            format!("color={}, style=dashed", quote(DEAD_EDGE_COLOR))
        };
        let tooltip = format!("Beta({}, {}) mean {:.3}", edge.params.alpha, edge.params.beta, mean);
        writeln!(
            out,
            "  {} -> {} [id={}, label={}, {style}, tooltip={}];",
            quote(edge.subject.as_str()),
            quote(edge.object.as_str()),
            quote(edge.id.as_str()),
            quote(label),
            quote(&tooltip),
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
