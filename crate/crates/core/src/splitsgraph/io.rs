//! Text formats for split systems and splits graphs.

use std::fmt::Write as _;
use std::path::Path;

use super::cluster::StyleClusters;
use super::graph::{GraphEdge, SplitsGraph};
use crate::error::{Error, Result};
use crate::neighbornet::{CircularOrdering, Split, SplitSystem};

fn needs_quotes(label: &str) -> bool {
    label.is_empty() || label.chars().any(|c| c.is_whitespace() || c == '\'')
}

fn quote(label: &str) -> String {
    if needs_quotes(label) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

/// Space-separated labels, single-quoted where needed.
fn join_labels(labels: &[String]) -> String {
    labels.iter().map(|l| quote(l)).collect::<Vec<_>>().join(" ")
}

fn parse_labels(text: &str, line: usize) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| *c == ' ') {
            chars.next();
        }
        let Some(&c) = chars.peek() else { break };
        let mut label = String::new();
        if c == '\'' {
            chars.next();
            loop {
                match chars.next() {
                    Some('\'') if chars.peek() == Some(&'\'') => {
                        chars.next();
                        label.push('\'');
                    }
                    Some('\'') => break,
                    Some(ch) => label.push(ch),
                    None => return Err(Error::parse(line, "unterminated quoted label")),
                }
            }
        } else {
            while let Some(&ch) = chars.peek() {
                if ch == ' ' {
                    break;
                }
                label.push(ch);
                chars.next();
            }
        }
        out.push(label);
    }
    Ok(out)
}

/// Interchange text block:
///
/// ```text
/// #SPLITS
/// ntax=<n>
/// nsplits=<m>
/// cycle=<1-based taxa in cycle order>
/// labels=<taxon labels>
/// <weight> <comma-separated 1-based members of the side without taxon 1>
/// ```
///
/// Weights use the shortest decimal form that reads back to the same value.
pub fn format_interchange(s: &SplitSystem) -> String {
    let mut out = String::new();
    out.push_str("#SPLITS\n");
    let _ = writeln!(out, "ntax={}", s.n_taxa());
    let _ = writeln!(out, "nsplits={}", s.len());
    let cycle: Vec<String> = s.ordering().cycle().iter().map(|t| (t + 1).to_string()).collect();
    let _ = writeln!(out, "cycle={}", cycle.join(" "));
    let _ = writeln!(out, "labels={}", join_labels(s.labels()));
    for sp in s.splits() {
        let members: Vec<String> = sp.side().iter().map(|t| (t + 1).to_string()).collect();
        let _ = writeln!(out, "{} {}", sp.weight, members.join(","));
    }
    out
}

/// Reads [`format_interchange`] output. Without a `labels=` line taxa are
/// named `1..n`.
pub fn parse_interchange(text: &str) -> Result<SplitSystem> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, "#SPLITS")) => {}
        _ => return Err(Error::parse(1, "expected #SPLITS header")),
    }
    let mut ntax: Option<usize> = None;
    let mut nsplits: Option<usize> = None;
    let mut cycle: Option<Vec<usize>> = None;
    let mut labels: Option<Vec<String>> = None;
    let mut splits = Vec::new();
    let mut last_line = 1;
    for (no, line) in lines {
        last_line = no;
        if line.trim().is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            if splits.is_empty() && !key.contains(' ') {
                match key {
                    "ntax" => ntax = Some(parse_count(value, no)?),
                    "nsplits" => nsplits = Some(parse_count(value, no)?),
                    "cycle" => {
                        cycle = Some(
                            value
                                .split_whitespace()
                                .map(|t| parse_index(t, no))
                                .collect::<Result<_>>()?,
                        )
                    }
                    "labels" => labels = Some(parse_labels(value, no)?),
                    _ => return Err(Error::parse(no, format!("unknown header key '{key}'"))),
                }
                continue;
            }
        }
        let n = ntax.ok_or_else(|| Error::parse(no, "split line before ntax"))?;
        let (w, members) = line
            .split_once(' ')
            .ok_or_else(|| Error::parse(no, "expected '<weight> <members>'"))?;
        let weight: f64 = w
            .parse()
            .map_err(|_| Error::parse(no, format!("invalid weight '{w}'")))?;
        let side: Vec<usize> = members
            .trim()
            .split(',')
            .map(|t| parse_index(t.trim(), no))
            .collect::<Result<_>>()?;
        if side.contains(&0) {
            return Err(Error::parse(no, "split side must exclude taxon 1"));
        }
        let split = Split::new(side, n, weight).map_err(|e| Error::parse(no, e.to_string()))?;
        splits.push(split);
    }
    let n = ntax.ok_or_else(|| Error::parse(last_line, "missing ntax"))?;
    if let Some(m) = nsplits {
        if m != splits.len() {
            return Err(Error::parse(
                last_line,
                format!("nsplits={m} but {} split lines", splits.len()),
            ));
        }
    }
    let cycle = cycle.ok_or_else(|| Error::parse(last_line, "missing cycle"))?;
    if cycle.len() != n {
        return Err(Error::parse(last_line, "cycle length differs from ntax"));
    }
    let labels = labels.unwrap_or_else(|| (1..=n).map(|i| i.to_string()).collect());
    if labels.len() != n {
        return Err(Error::parse(last_line, "label count differs from ntax"));
    }
    let ordering = CircularOrdering::new(cycle)?;
    SplitSystem::new(labels, splits, ordering)
}

fn parse_count(v: &str, line: usize) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid count '{v}'")))
}

fn parse_index(v: &str, line: usize) -> Result<usize> {
    match v.parse::<usize>() {
        Ok(i) if i >= 1 => Ok(i - 1),
        _ => Err(Error::parse(line, format!("invalid taxon index '{v}'"))),
    }
}

pub fn read_interchange(path: impl AsRef<Path>) -> Result<SplitSystem> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_interchange(&text)
}

pub fn write_interchange(s: &SplitSystem, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_interchange(s)).map_err(|e| Error::io(path, e))
}

/// Line format for a built graph:
///
/// ```text
/// #SPLITSGRAPH
/// ntax=<n>
/// nnodes=<v>
/// labels=<taxon labels>
/// taxa=<node of each taxon>
/// <a> <b> <split> <length>
/// ```
pub fn format_graph(g: &SplitsGraph) -> String {
    let mut out = String::from("#SPLITSGRAPH\n");
    let _ = writeln!(out, "ntax={}", g.n_taxa());
    let _ = writeln!(out, "nnodes={}", g.n_nodes());
    let _ = writeln!(out, "labels={}", join_labels(g.labels()));
    let taxa: Vec<String> = g.taxon_nodes().iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "taxa={}", taxa.join(" "));
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {} {}", e.a, e.b, e.split, e.length);
    }
    out
}

pub fn parse_graph(text: &str) -> Result<SplitsGraph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, "#SPLITSGRAPH")) => {}
        _ => return Err(Error::parse(1, "expected #SPLITSGRAPH header")),
    }
    let mut header = |key: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((no, l)) => l
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .map(|v| (no, v.to_string()))
                .ok_or_else(|| Error::parse(no, format!("expected {key}="))),
            None => Err(Error::parse(0, format!("missing {key}="))),
        }
    };
    let (no, ntax) = header("ntax")?;
    let ntax = parse_count(&ntax, no)?;
    let (no, nnodes) = header("nnodes")?;
    let nnodes = parse_count(&nnodes, no)?;
    let (no, labels) = header("labels")?;
    let labels = parse_labels(&labels, no)?;
    let (no, taxa) = header("taxa")?;
    let taxon_node: Vec<usize> = taxa
        .split_whitespace()
        .map(|v| parse_count(v, no))
        .collect::<Result<_>>()?;
    if labels.len() != ntax || taxon_node.len() != ntax {
        return Err(Error::parse(no, "taxon count mismatch"));
    }
    let mut edges = Vec::new();
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(Error::parse(no, "expected '<a> <b> <split> <length>'"));
        }
        let length: f64 = f[3]
            .parse()
            .map_err(|_| Error::parse(no, format!("invalid length '{}'", f[3])))?;
        edges.push(GraphEdge {
            a: parse_count(f[0], no)?,
            b: parse_count(f[1], no)?,
            split: parse_count(f[2], no)?,
            length,
        });
    }
    SplitsGraph::new(labels, nnodes, edges, taxon_node)
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

fn cluster_color(c: usize) -> &'static str {
    PALETTE[(c.max(1) - 1) % PALETTE.len()]
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering; edges carry `split` and `len` attributes and node
/// positions are pinned when the graph has coordinates.
pub fn to_dot(g: &SplitsGraph, clusters: Option<&StyleClusters>) -> String {
    let mut out = String::from("graph splits {\n  node [shape=point];\n");
    for v in 0..g.n_nodes() {
        let taxa = g.taxa_at(v);
        let mut attrs = Vec::new();
        if !taxa.is_empty() {
            let names: Vec<&str> = taxa.iter().map(|&t| g.labels()[t].as_str()).collect();
            attrs.push(format!("label=\"{}\"", dot_escape(&names.join(","))));
            attrs.push("shape=plaintext".to_string());
            if let Some(c) = clusters {
                attrs.push(format!("fontcolor=\"{}\"", cluster_color(c.assignment[taxa[0]])));
            }
        }
        if let Some(p) = g.coords() {
            attrs.push(format!("pos=\"{:.6},{:.6}!\"", p[v].0, p[v].1));
        }
        if attrs.is_empty() {
            let _ = writeln!(out, "  n{v};");
        } else {
            let _ = writeln!(out, "  n{v} [{}];", attrs.join(", "));
        }
    }
    for e in g.edges() {
        let _ = writeln!(out, "  n{} -- n{} [split={}, len={}];", e.a, e.b, e.split, e.length);
    }
    out.push_str("}\n");
    out
}

pub(crate) fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// SVG drawing of a laid-out graph, taxa coloured by cluster when given.
pub fn to_svg(g: &SplitsGraph, clusters: Option<&StyleClusters>) -> Result<String> {
    let coords = g
        .coords()
        .ok_or_else(|| Error::Validation("graph has no layout coordinates".into()))?;
    let (size, margin) = (800.0, 80.0);
    let (mut x0, mut y0, mut x1, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &(x, y) in coords {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = (size - 2.0 * margin) / span;
    let map = |(x, y): (f64, f64)| (margin + (x - x0) * scale, size - margin - (y - y0) * scale);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g stroke=\"black\" stroke-width=\"1.5\">\n");
    for e in g.edges() {
        let (ax, ay) = map(coords[e.a]);
        let (bx, by) = map(coords[e.b]);
        let _ = writeln!(
            out,
            "<line x1=\"{ax:.2}\" y1=\"{ay:.2}\" x2=\"{bx:.2}\" y2=\"{by:.2}\" data-split=\"{}\"/>",
            e.split
        );
    }
    out.push_str("</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n");
    for t in 0..g.n_taxa() {
        let (x, y) = map(coords[g.taxon_node(t)]);
        let color = clusters.map_or("black", |c| cluster_color(c.assignment[t]));
        let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>");
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"{color}\">{}</text>",
            x + 5.0,
            y - 5.0,
            xml_escape(&g.labels()[t])
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
