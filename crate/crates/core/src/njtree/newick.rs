//! Newick serialisation of unrooted trees.
//!
//! Output is rooted at the last-created internal node (the midpoint of the
//! only edge for two-leaf trees); children are listed by the smallest leaf
//! index in their subtree, so reading and re-writing a tree reproduces the
//! same text.

use std::fs;
use std::path::Path;

use super::tree::{Edge, PhyloTree};
use crate::error::{Error, Result};

const META: &[char] = &['(', ')', '[', ']', '\'', ':', ';', ','];

fn quote_label(label: &str) -> String {
    if label.is_empty() || label.chars().any(|c| META.contains(&c) || c.is_whitespace()) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

fn format_length(len: f64, precision: usize) -> String {
    let s = format!("{len:.precision$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn to_newick(t: &PhyloTree, precision: usize) -> String {
    let n = t.n_leaves();
    if t.n_nodes() == 2 {
        let half = format_length(t.edges()[0].length / 2.0, precision);
        return format!(
            "({}:{half},{}:{half});",
            quote_label(&t.labels()[0]),
            quote_label(&t.labels()[1])
        );
    }
    let root = t.n_nodes() - 1;

    // Parent pointers and subtree minimum leaf, from the root.
    let mut parent = vec![usize::MAX; t.n_nodes()];
    let mut parent_edge = vec![usize::MAX; t.n_nodes()];
    let mut order = vec![root];
    parent[root] = root;
    let mut k = 0;
    while k < order.len() {
        let v = order[k];
        k += 1;
        for (w, e) in t.neighbors(v) {
            if parent[w] == usize::MAX {
                parent[w] = v;
                parent_edge[w] = e;
                order.push(w);
            }
        }
    }
    let mut min_leaf = vec![usize::MAX; t.n_nodes()];
    for &v in order.iter().rev() {
        if v < n {
            min_leaf[v] = v;
        }
        if v != root {
            let p = parent[v];
            min_leaf[p] = min_leaf[p].min(min_leaf[v]);
        }
    }
    let children = |v: usize| {
        let mut c: Vec<usize> = t.neighbors(v).map(|(w, _)| w).filter(|&w| parent[w] == v && w != root).collect();
        c.sort_by_key(|&w| min_leaf[w]);
        c
    };

    // Iterative pre/post traversal writing tokens.
    let mut out = String::new();
    enum Step {
        Enter(usize),
        Leave(usize),
        Comma,
    }
    let mut stack = vec![Step::Enter(root)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Comma => out.push(','),
            Step::Enter(v) if v < n => {
                out.push_str(&quote_label(&t.labels()[v]));
                out.push(':');
                out.push_str(&format_length(t.edges()[parent_edge[v]].length, precision));
            }
            Step::Enter(v) => {
                out.push('(');
                stack.push(Step::Leave(v));
                let kids = children(v);
                for (i, &w) in kids.iter().enumerate().rev() {
                    stack.push(Step::Enter(w));
                    if i > 0 {
                        stack.push(Step::Comma);
                    }
                }
            }
            Step::Leave(v) => {
                out.push(')');
                if v != root {
                    out.push(':');
                    out.push_str(&format_length(t.edges()[parent_edge[v]].length, precision));
                }
            }
        }
    }
    out.push(';');
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Comma,
    Colon,
    Semicolon,
    Word(String),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Token)>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '(' => out.push((i, Token::Open)),
            ')' => out.push((i, Token::Close)),
            ',' => out.push((i, Token::Comma)),
            ':' => out.push((i, Token::Colon)),
            ';' => out.push((i, Token::Semicolon)),
            '[' => {
                // comment
                while i < chars.len() && chars[i] != ']' {
                    i += 1;
                }
                if i == chars.len() {
                    return Err(Error::parse(1, "unterminated comment"));
                }
            }
            '\'' => {
                let start = i;
                let mut word = String::new();
                i += 1;
                loop {
                    if i >= chars.len() {
                        return Err(Error::parse(1, format!("unterminated quote at offset {start}")));
                    }
                    if chars[i] == '\'' {
                        if chars.get(i + 1) == Some(&'\'') {
                            word.push('\'');
                            i += 2;
                            continue;
                        }
                        break;
                    }
                    word.push(chars[i]);
                    i += 1;
                }
                out.push((start, Token::Word(word)));
            }
            c if c.is_whitespace() => {}
            _ => {
                let start = i;
                let mut word = String::new();
                while i < chars.len() && !META.contains(&chars[i]) && !chars[i].is_whitespace() {
                    word.push(chars[i]);
                    i += 1;
                }
                out.push((start, Token::Word(word)));
                continue;
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Rooted intermediate form: node → (children, label, length to parent).
struct Rooted {
    children: Vec<Vec<usize>>,
    label: Vec<Option<String>>,
    length: Vec<f64>,
}

fn parse_rooted(s: &str) -> Result<(Rooted, usize)> {
    let tokens = tokenize(s)?;
    let mut r = Rooted {
        children: Vec::new(),
        label: Vec::new(),
        length: Vec::new(),
    };
    let err = |pos: usize, msg: &str| Error::parse(1, format!("{msg} at offset {pos}"));
    let new_node = |r: &mut Rooted| {
        r.children.push(Vec::new());
        r.label.push(None);
        r.length.push(0.0);
        r.children.len() - 1
    };

    let mut stack: Vec<usize> = Vec::new();
    let mut current: Option<usize> = None;
    let mut root = None;
    let mut k = 0;
    while k < tokens.len() {
        let (pos, tok) = &tokens[k];
        match tok {
            Token::Open => {
                let v = new_node(&mut r);
                if let Some(&p) = stack.last() {
                    r.children[p].push(v);
                }
                stack.push(v);
                current = None;
            }
            Token::Comma => {
                if stack.is_empty() {
                    return Err(err(*pos, "comma outside parentheses"));
                }
                current = None;
            }
            Token::Close => {
                let v = stack.pop().ok_or_else(|| err(*pos, "unbalanced `)`"))?;
                current = Some(v);
                if stack.is_empty() {
                    root = Some(v);
                }
            }
            Token::Word(w) => match current {
                Some(v) if r.label[v].is_none() && !r.children[v].is_empty() => {
                    r.label[v] = Some(w.clone());
                }
                None => {
                    let v = new_node(&mut r);
                    r.label[v] = Some(w.clone());
                    match stack.last() {
                        Some(&p) => r.children[p].push(v),
                        None => root = Some(v),
                    }
                    current = Some(v);
                }
                _ => return Err(err(*pos, "unexpected label")),
            },
            Token::Colon => {
                let v = current.ok_or_else(|| err(*pos, "branch length without a node"))?;
                match tokens.get(k + 1) {
                    Some((p, Token::Word(num))) => {
                        r.length[v] = num
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| err(*p, "invalid branch length"))?;
                        k += 1;
                    }
                    _ => return Err(err(*pos, "missing branch length")),
                }
            }
            Token::Semicolon => {
                if !stack.is_empty() {
                    return Err(err(*pos, "unbalanced `(`"));
                }
                if k + 1 != tokens.len() {
                    return Err(err(*pos, "content after `;`"));
                }
                let root = root.ok_or_else(|| err(*pos, "empty tree"))?;
                return Ok((r, root));
            }
        }
        k += 1;
    }
    Err(Error::parse(1, "missing terminating `;`"))
}

/// Parses a Newick string into an unrooted tree. Leaves are numbered in
/// order of appearance; internal nodes in post-order with the root last.
/// Degree-2 nodes (including a bifurcating root) are suppressed by merging
/// their two edges. Internal labels are ignored.
pub fn parse_newick(s: &str) -> Result<PhyloTree> {
    let (r, root) = parse_rooted(s)?;

    // Post-order over the rooted form.
    let mut post = Vec::new();
    let mut stack = vec![(root, false)];
    while let Some((v, done)) = stack.pop() {
        if done {
            post.push(v);
        } else {
            stack.push((v, true));
            for &c in r.children[v].iter().rev() {
                stack.push((c, false));
            }
        }
    }

    let mut labels = Vec::new();
    let mut id = vec![usize::MAX; r.children.len()];
    for v in stack_preorder(&r, root) {
        if r.children[v].is_empty() {
            let label = r.label[v]
                .clone()
                .ok_or_else(|| Error::parse(1, "unlabelled leaf"))?;
            id[v] = labels.len();
            labels.push(label);
        }
    }
    let n = labels.len();
    if n < 2 {
        return Err(Error::parse(1, "a tree needs at least 2 leaves"));
    }

    // Collapse unary chains: each kept node gets an edge to its nearest kept
    // ancestor, with the lengths along the way summed.
    let keep = |v: usize| r.children[v].is_empty() || r.children[v].len() >= 2;
    let mut next = n;
    for &v in &post {
        if !r.children[v].is_empty() && keep(v) {
            id[v] = next;
            next += 1;
        }
    }
    let mut edges = Vec::new();
    // Walk top-down so each node knows the kept ancestor it attaches to.
    let mut stack = vec![(root, usize::MAX, 0.0)];
    while let Some((v, anchor, above)) = stack.pop() {
        let len_here = above + if v == root { 0.0 } else { r.length[v] };
        let (anchor, carry) = if keep(v) {
            if anchor != usize::MAX {
                edges.push(Edge { a: id[v], b: anchor, length: len_here });
            }
            (id[v], 0.0)
        } else {
            (anchor, len_here)
        };
        for &c in r.children[v].iter().rev() {
            stack.push((c, anchor, carry));
        }
    }

    // A bifurcating root leaves a degree-2 internal node: merge its edges.
    let root_id = id[root];
    let mut tree_edges = edges;
    let mut n_nodes = next;
    if keep(root) && root_id >= n {
        let incident: Vec<usize> = (0..tree_edges.len())
            .filter(|&e| tree_edges[e].a == root_id || tree_edges[e].b == root_id)
            .collect();
        if incident.len() == 2 {
            let (e1, e2) = (tree_edges[incident[0]], tree_edges[incident[1]]);
            let merged = Edge {
                a: e1.other(root_id),
                b: e2.other(root_id),
                length: e1.length + e2.length,
            };
            tree_edges.remove(incident[1]);
            tree_edges.remove(incident[0]);
            tree_edges.push(merged);
            n_nodes -= 1;
            // The root had the largest id, so no renumbering is needed.
            debug_assert_eq!(root_id, n_nodes);
        }
    }
    PhyloTree::new(labels, n_nodes, tree_edges).map_err(|e| Error::parse(1, e.to_string()))
}

fn stack_preorder(r: &Rooted, root: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        out.push(v);
        for &c in r.children[v].iter().rev() {
            stack.push(c);
        }
    }
    out
}

pub fn read_newick(path: impl AsRef<Path>) -> Result<PhyloTree> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_newick(text.trim())
}
