//! Text model formats.
//!
//! Three formats are supported and documented in `docs/formats.md`:
//!
//! * `.bn` Bayes nets: rv declarations with cardinalities, parent lists and
//!   energy tables in row-major parent-configuration order (first parent
//!   most significant, own value fastest).
//! * `.graph` edge lists: DIMACS-like `p edge N M` header and 1-based
//!   `e u v [w]` lines; the interaction kind is chosen by the caller.
//! * `.rbm` dense coupling matrix (rows = visible) plus two bias vectors.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::bayes::{BayesNet, BayesNode};
use super::{GraphModel, Interaction, ModelError, PairwiseModel, Rbm};
use crate::model::presets;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{path}:{line}: {msg}")]
    Syntax {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: {msg}")]
    Structure { path: String, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn syntax(path: &str, line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Which pairwise interpretation to give an edge-list file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeListKind {
    Ising,
    Potts { labels: u16 },
    Mis,
    MaxCut,
    MaxClique,
}

pub fn load_bayes_net(path: &Path) -> Result<GraphModel, ParseError> {
    let text = std::fs::read_to_string(path)?;
    parse_bayes_net(&text, &path.display().to_string())
}

pub fn parse_bayes_net(text: &str, path: &str) -> Result<GraphModel, ParseError> {
    let mut names: Vec<String> = Vec::new();
    let mut cards: Vec<u16> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut parents: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut tables: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut saw_header = false;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let key = tok.next().unwrap();
        match key {
            "bayesnet" => saw_header = true,
            "rv" => {
                let name = tok
                    .next()
                    .ok_or_else(|| syntax(path, lineno, "rv needs a name"))?;
                let card: u16 = tok
                    .next()
                    .ok_or_else(|| syntax(path, lineno, "rv needs a cardinality"))?
                    .parse()
                    .map_err(|e| syntax(path, lineno, format!("bad cardinality: {e}")))?;
                if ids.contains_key(name) {
                    return Err(syntax(path, lineno, format!("duplicate rv {name}")));
                }
                ids.insert(name.to_string(), names.len());
                names.push(name.to_string());
                cards.push(card);
            }
            "parents" => {
                let child = tok
                    .next()
                    .ok_or_else(|| syntax(path, lineno, "parents needs a child rv"))?;
                let child_id = *ids
                    .get(child)
                    .ok_or_else(|| syntax(path, lineno, format!("unknown rv {child}")))?;
                let mut ps = Vec::new();
                for p in tok {
                    let pid = *ids
                        .get(p)
                        .ok_or_else(|| syntax(path, lineno, format!("unknown rv {p}")))?;
                    ps.push(pid);
                }
                parents.insert(child_id, ps);
            }
            "table" => {
                let name = tok
                    .next()
                    .ok_or_else(|| syntax(path, lineno, "table needs an rv"))?;
                let id = *ids
                    .get(name)
                    .ok_or_else(|| syntax(path, lineno, format!("unknown rv {name}")))?;
                let mut vals = Vec::new();
                for v in tok {
                    let x: f64 = v
                        .parse()
                        .map_err(|e| syntax(path, lineno, format!("bad energy: {e}")))?;
                    vals.push(x);
                }
                tables.insert(id, vals);
            }
            other => return Err(syntax(path, lineno, format!("unknown directive {other}"))),
        }
    }

    if !saw_header {
        return Err(ParseError::Structure {
            path: path.to_string(),
            msg: "missing 'bayesnet' header".into(),
        });
    }
    let mut nodes = Vec::new();
    for id in 0..names.len() {
        let table = tables.remove(&id).ok_or_else(|| ParseError::Structure {
            path: path.to_string(),
            msg: format!("missing table for rv {}", names[id]),
        })?;
        nodes.push(BayesNode {
            cardinality: cards[id],
            parents: parents.remove(&id).unwrap_or_default(),
            table,
        });
    }
    Ok(GraphModel::BayesNet(BayesNet::new(nodes, names)?))
}

/// Serialize a Bayes net in the `.bn` format. Energies round-trip exactly
/// through the shortest-representation float formatting.
pub fn write_bayes_net(model: &GraphModel) -> Result<String, ModelError> {
    let GraphModel::BayesNet(net) = model else {
        return Err(ModelError::Invalid("not a bayes net".into()));
    };
    let mut out = String::new();
    out.push_str("# conditional energy tables (negative log probabilities)\n");
    out.push_str("bayesnet\n");
    for rv in 0..net.node_count() {
        let _ = writeln!(out, "rv {} {}", net.name(rv), net.cardinality(rv));
    }
    for rv in 0..net.node_count() {
        let node = net.node(rv);
        if !node.parents.is_empty() {
            let ps: Vec<&str> = node.parents.iter().map(|&p| net.name(p)).collect();
            let _ = writeln!(out, "parents {} {}", net.name(rv), ps.join(" "));
        }
    }
    for rv in 0..net.node_count() {
        let node = net.node(rv);
        let vals: Vec<String> = node.table.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "table {} {}", net.name(rv), vals.join(" "));
    }
    Ok(out)
}

pub fn load_edge_list(path: &Path, kind: EdgeListKind) -> Result<GraphModel, ParseError> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text, &path.display().to_string(), kind)
}

pub fn parse_edge_list(
    text: &str,
    path: &str,
    kind: EdgeListKind,
) -> Result<GraphModel, ParseError> {
    let (n, edges) = parse_edge_lines(text, path)?;
    let model = match kind {
        EdgeListKind::Ising => GraphModel::Pairwise(
            PairwiseModel::uniform_binary(n, &edges, Interaction::IsingSpin)?,
        ),
        EdgeListKind::Potts { labels } => {
            let pe: Vec<super::Edge> = edges
                .iter()
                .map(|&(u, v, weight)| super::Edge { u, v, weight })
                .collect();
            GraphModel::Pairwise(PairwiseModel::new(
                &vec![labels; n],
                vec![vec![0.0; labels as usize]; n],
                pe,
                Interaction::PottsMatch,
            )?)
        }
        EdgeListKind::Mis => presets::mis(n, &edges)?,
        EdgeListKind::MaxCut => presets::maxcut(n, &edges)?,
        EdgeListKind::MaxClique => presets::maxclique(n, &edges)?,
    };
    Ok(model)
}

/// Parse the `p edge N M` / `e u v [w]` body shared by all edge-list kinds.
/// Returns the vertex count and 0-based weighted edges.
pub fn parse_edge_lines(
    text: &str,
    path: &str,
) -> Result<(usize, Vec<(usize, usize, f64)>), ParseError> {
    let mut n: Option<usize> = None;
    let mut declared_m = 0usize;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next().unwrap() {
            "p" => {
                let _format = tok.next();
                let nv: usize = tok
                    .next()
                    .ok_or_else(|| syntax(path, lineno, "p line needs a vertex count"))?
                    .parse()
                    .map_err(|e| syntax(path, lineno, format!("bad vertex count: {e}")))?;
                declared_m = tok
                    .next()
                    .ok_or_else(|| syntax(path, lineno, "p line needs an edge count"))?
                    .parse()
                    .map_err(|e| syntax(path, lineno, format!("bad edge count: {e}")))?;
                n = Some(nv);
            }
            "e" => {
                let n = n.ok_or_else(|| syntax(path, lineno, "edge before p line"))?;
                let u: usize = tok
                    .next()
                    .ok_or_else(|| syntax(path, lineno, "edge needs two endpoints"))?
                    .parse()
                    .map_err(|e| syntax(path, lineno, format!("bad endpoint: {e}")))?;
                let v: usize = tok
                    .next()
                    .ok_or_else(|| syntax(path, lineno, "edge needs two endpoints"))?
                    .parse()
                    .map_err(|e| syntax(path, lineno, format!("bad endpoint: {e}")))?;
                let w: f64 = match tok.next() {
                    Some(t) => t
                        .parse()
                        .map_err(|e| syntax(path, lineno, format!("bad weight: {e}")))?,
                    None => 1.0,
                };
                if u == 0 || v == 0 || u > n || v > n {
                    return Err(syntax(
                        path,
                        lineno,
                        format!("endpoint out of range 1..={n}"),
                    ));
                }
                edges.push((u - 1, v - 1, w));
            }
            other => return Err(syntax(path, lineno, format!("unknown line kind {other}"))),
        }
    }
    let n = n.ok_or_else(|| ParseError::Structure {
        path: path.to_string(),
        msg: "missing p line".into(),
    })?;
    if edges.len() != declared_m {
        return Err(ParseError::Structure {
            path: path.to_string(),
            msg: format!("p line declares {declared_m} edges, found {}", edges.len()),
        });
    }
    Ok((n, edges))
}

pub fn write_edge_list(n: usize, edges: &[(usize, usize, f64)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p edge {} {}", n, edges.len());
    for &(u, v, w) in edges {
        if w == 1.0 {
            let _ = writeln!(out, "e {} {}", u + 1, v + 1);
        } else {
            let _ = writeln!(out, "e {} {} {}", u + 1, v + 1, w);
        }
    }
    out
}

pub fn load_rbm(path: &Path) -> Result<GraphModel, ParseError> {
    let text = std::fs::read_to_string(path)?;
    parse_rbm(&text, &path.display().to_string())
}

pub fn parse_rbm(text: &str, path: &str) -> Result<GraphModel, ParseError> {
    let mut visible = 0usize;
    let mut hidden = 0usize;
    let mut vbias: Option<Vec<f64>> = None;
    let mut hbias: Option<Vec<f64>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut saw_header = false;

    let parse_vec = |tok: std::str::SplitWhitespace<'_>, lineno: usize| -> Result<Vec<f64>, ParseError> {
        tok.map(|t| {
            t.parse::<f64>()
                .map_err(|e| syntax(path, lineno, format!("bad number: {e}")))
        })
        .collect()
    };

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next().unwrap() {
            "rbm" => saw_header = true,
            "visible" => {
                visible = tok
                    .next()
                    .ok_or_else(|| syntax(path, lineno, "visible needs a count"))?
                    .parse()
                    .map_err(|e| syntax(path, lineno, format!("bad count: {e}")))?;
            }
            "hidden" => {
                hidden = tok
                    .next()
                    .ok_or_else(|| syntax(path, lineno, "hidden needs a count"))?
                    .parse()
                    .map_err(|e| syntax(path, lineno, format!("bad count: {e}")))?;
            }
            "vbias" => vbias = Some(parse_vec(tok, lineno)?),
            "hbias" => hbias = Some(parse_vec(tok, lineno)?),
            "row" => rows.push(parse_vec(tok, lineno)?),
            other => return Err(syntax(path, lineno, format!("unknown directive {other}"))),
        }
    }
    if !saw_header {
        return Err(ParseError::Structure {
            path: path.to_string(),
            msg: "missing 'rbm' header".into(),
        });
    }
    let vbias = vbias.ok_or_else(|| ParseError::Structure {
        path: path.to_string(),
        msg: "missing vbias".into(),
    })?;
    let hbias = hbias.ok_or_else(|| ParseError::Structure {
        path: path.to_string(),
        msg: "missing hbias".into(),
    })?;
    if vbias.len() != visible || hbias.len() != hidden || rows.len() != visible {
        return Err(ParseError::Structure {
            path: path.to_string(),
            msg: format!(
                "inconsistent sizes: visible {visible}, hidden {hidden}, vbias {}, hbias {}, rows {}",
                vbias.len(),
                hbias.len(),
                rows.len()
            ),
        });
    }
    let mut weights = Vec::with_capacity(visible * hidden);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != hidden {
            return Err(ParseError::Structure {
                path: path.to_string(),
                msg: format!("row {i} has {} weights, expected {hidden}", row.len()),
            });
        }
        weights.extend_from_slice(row);
    }
    Ok(GraphModel::Rbm(Rbm::new(vbias, hbias, weights)?))
}

pub fn write_rbm(model: &GraphModel) -> Result<String, ModelError> {
    let GraphModel::Rbm(rbm) = model else {
        return Err(ModelError::Invalid("not an rbm".into()));
    };
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = String::new();
    out.push_str("rbm\n");
    let _ = writeln!(out, "visible {}", rbm.visible);
    let _ = writeln!(out, "hidden {}", rbm.hidden);
    let _ = writeln!(out, "vbias {}", join(&rbm.vbias));
    let _ = writeln!(out, "hbias {}", join(&rbm.hbias));
    for i in 0..rbm.visible {
        let row = &rbm.weights[i * rbm.hidden..(i + 1) * rbm.hidden];
        let _ = writeln!(out, "row {}", join(row));
    }
    Ok(out)
}
