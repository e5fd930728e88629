//! Layered branching programs for learning.
//!
//! A program of length m has m+1 layers; layer 0 holds the single start
//! vertex. Every non-leaf vertex carries one out-edge per sample (a,b) into
//! the next layer (edge order: a ascending, b = -1 before +1); stopping
//! behaviors are never modeled by missing edges. Leaves are labeled with a
//! guess x or a hypothesis over the rows, and may appear before the last
//! layer.

use crate::error::{Error, Result};
use crate::matrix::SignMatrix;
use std::io::{BufRead, Write};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LeafLabel {
    Guess(usize),
    Hypothesis(Vec<i8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexKind {
    Internal { edges: Vec<u32> },
    Leaf { label: LeafLabel },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchingProgram {
    pub num_rows: usize,
    pub width: usize,
    pub layers: Vec<Vec<VertexKind>>,
}

pub fn edge_index(a: usize, b: i8) -> usize {
    2 * a + usize::from(b > 0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Defect {
    pub layer: usize,
    pub vertex: Option<usize>,
    pub kind: String,
}

impl BranchingProgram {
    pub fn length(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn vertex(&self, layer: usize, idx: usize) -> &VertexKind {
        &self.layers[layer][idx]
    }

    pub fn total_vertices(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    /// Structural invariant checks; defects are data, not failures.
    pub fn validate(&self, num_rows: usize) -> Vec<Defect> {
        let mut defects = Vec::new();
        if self.num_rows != num_rows {
            defects.push(Defect {
                layer: 0,
                vertex: None,
                kind: format!("program built for {} rows, expected {num_rows}", self.num_rows),
            });
        }
        if self.layers.is_empty() {
            defects.push(Defect { layer: 0, vertex: None, kind: "no layers".into() });
            return defects;
        }
        if self.layers[0].len() != 1 {
            defects.push(Defect {
                layer: 0,
                vertex: None,
                kind: format!("start layer has {} vertices, expected 1", self.layers[0].len()),
            });
        }
        for (li, layer) in self.layers.iter().enumerate() {
            if layer.is_empty() {
                defects.push(Defect { layer: li, vertex: None, kind: "empty layer".into() });
            }
            if layer.len() > self.width {
                defects.push(Defect {
                    layer: li,
                    vertex: None,
                    kind: format!("width exceeded: {} > {}", layer.len(), self.width),
                });
            }
            for (vi, v) in layer.iter().enumerate() {
                match v {
                    VertexKind::Leaf { .. } => {}
                    VertexKind::Internal { edges } => {
                        if li + 1 == self.layers.len() {
                            defects.push(Defect {
                                layer: li,
                                vertex: Some(vi),
                                kind: "non-leaf in last layer".into(),
                            });
                            continue;
                        }
                        if edges.len() != 2 * num_rows {
                            defects.push(Defect {
                                layer: li,
                                vertex: Some(vi),
                                kind: format!(
                                    "incomplete out-edges: {} of {}",
                                    edges.len(),
                                    2 * num_rows
                                ),
                            });
                        }
                        let next = self.layers[li + 1].len();
                        for (e, &target) in edges.iter().enumerate() {
                            if target as usize >= next {
                                defects.push(Defect {
                                    layer: li,
                                    vertex: Some(vi),
                                    kind: format!("edge {e} targets missing vertex {target}"),
                                });
                            }
                        }
                    }
                }
            }
        }
        defects
    }

    /// Follow the computation path of a sample stream; returns the reached
    /// leaf as ((layer, index), label).
    pub fn run_stream<'a>(
        &'a self,
        m: &SignMatrix,
        x: usize,
        stream: &[(usize, i8)],
    ) -> Result<((usize, usize), &'a LeafLabel)> {
        let mut layer = 0usize;
        let mut idx = 0usize;
        loop {
            match &self.layers[layer][idx] {
                VertexKind::Leaf { label } => return Ok(((layer, idx), label)),
                VertexKind::Internal { edges } => {
                    let (a, b) = *stream.get(layer).ok_or_else(|| {
                        Error::LengthMismatch(format!(
                            "stream of length {} ended at layer {layer} before a leaf",
                            stream.len()
                        ))
                    })?;
                    if b != m.entry(a, x) {
                        return Err(Error::InconsistentStream { step: layer, a });
                    }
                    idx = edges[edge_index(a, b)] as usize;
                    layer += 1;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// BP1 file format
//
//   BP1
//   length=<m> width=<d> rows=<A>
//   layer <i> size=<v>
//   node <j> edges=<t,t,...>         (2|A| targets, a ascending, -1 before +1)
//   leaf <j> guess=<x>
//   leaf <j> hyp=<+-+...>            (one sign per row)
// ---------------------------------------------------------------------------

pub fn bp1_string(b: &BranchingProgram) -> String {
    let mut out = String::new();
    out.push_str("BP1\n");
    out.push_str(&format!(
        "length={} width={} rows={}\n",
        b.length(),
        b.width,
        b.num_rows
    ));
    for (li, layer) in b.layers.iter().enumerate() {
        out.push_str(&format!("layer {li} size={}\n", layer.len()));
        for (vi, v) in layer.iter().enumerate() {
            match v {
                VertexKind::Internal { edges } => {
                    let ts: Vec<String> = edges.iter().map(|t| t.to_string()).collect();
                    out.push_str(&format!("node {vi} edges={}\n", ts.join(",")));
                }
                VertexKind::Leaf { label: LeafLabel::Guess(x) } => {
                    out.push_str(&format!("leaf {vi} guess={x}\n"));
                }
                VertexKind::Leaf { label: LeafLabel::Hypothesis(h) } => {
                    let s: String = h.iter().map(|&v| if v > 0 { '+' } else { '-' }).collect();
                    out.push_str(&format!("leaf {vi} hyp={s}\n"));
                }
            }
        }
    }
    out
}

pub fn write_bp1<W: Write>(b: &BranchingProgram, w: &mut W) -> Result<()> {
    w.write_all(bp1_string(b).as_bytes())?;
    Ok(())
}

pub fn parse_bp1(text: &str) -> Result<BranchingProgram> {
    let fmt = |line: usize, msg: String| Error::Format { line, msg };
    let mut lines = text.lines().enumerate();
    let (ln, magic) = lines.next().ok_or(fmt(1, "empty file".into()))?;
    if magic.trim_end() != "BP1" {
        return Err(fmt(ln + 1, format!("expected BP1 magic, got {magic:?}")));
    }
    let (ln, header) = lines.next().ok_or(fmt(2, "missing header".into()))?;
    let mut length = None;
    let mut width = None;
    let mut rows = None;
    for field in header.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or(fmt(ln + 1, format!("bad header field {field:?}")))?;
        let v: usize = v.parse().map_err(|e| fmt(ln + 1, format!("bad {k}: {e}")))?;
        match k {
            "length" => length = Some(v),
            "width" => width = Some(v),
            "rows" => rows = Some(v),
            _ => return Err(fmt(ln + 1, format!("unknown header key {k:?}"))),
        }
    }
    let (length, width, rows) = match (length, width, rows) {
        (Some(l), Some(w), Some(r)) => (l, w, r),
        _ => return Err(fmt(ln + 1, "header must set length, width and rows".into())),
    };
    let mut layers: Vec<Vec<VertexKind>> = Vec::with_capacity(length + 1);
    let mut current: Option<Vec<VertexKind>> = None;
    for (ln, raw) in lines {
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("layer") => {
                if let Some(done) = current.take() {
                    layers.push(done);
                }
                let idx: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(fmt(ln + 1, "bad layer index".into()))?;
                if idx != layers.len() {
                    return Err(fmt(ln + 1, format!("layer {idx} out of order")));
                }
                current = Some(Vec::new());
            }
            Some("node") => {
                let cur = current.as_mut().ok_or(fmt(ln + 1, "node before any layer".into()))?;
                let idx: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(fmt(ln + 1, "bad node index".into()))?;
                if idx != cur.len() {
                    return Err(fmt(ln + 1, format!("node {idx} out of order")));
                }
                let edges_field = parts.next().ok_or(fmt(ln + 1, "node missing edges".into()))?;
                let list = edges_field
                    .strip_prefix("edges=")
                    .ok_or(fmt(ln + 1, "expected edges=".into()))?;
                let edges: Vec<u32> = list
                    .split(',')
                    .map(|t| t.parse::<u32>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| fmt(ln + 1, format!("bad edge target: {e}")))?;
                if edges.len() != 2 * rows {
                    return Err(fmt(ln + 1, format!("expected {} edges, got {}", 2 * rows, edges.len())));
                }
                cur.push(VertexKind::Internal { edges });
            }
            Some("leaf") => {
                let cur = current.as_mut().ok_or(fmt(ln + 1, "leaf before any layer".into()))?;
                let idx: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or(fmt(ln + 1, "bad leaf index".into()))?;
                if idx != cur.len() {
                    return Err(fmt(ln + 1, format!("leaf {idx} out of order")));
                }
                let label_field = parts.next().ok_or(fmt(ln + 1, "leaf missing label".into()))?;
                if let Some(g) = label_field.strip_prefix("guess=") {
                    let x: usize = g.parse().map_err(|e| fmt(ln + 1, format!("bad guess: {e}")))?;
                    cur.push(VertexKind::Leaf { label: LeafLabel::Guess(x) });
                } else if let Some(h) = label_field.strip_prefix("hyp=") {
                    let mut hyp = Vec::with_capacity(h.len());
                    for c in h.chars() {
                        match c {
                            '+' => hyp.push(1i8),
                            '-' => hyp.push(-1i8),
                            _ => return Err(fmt(ln + 1, format!("bad hypothesis sign {c:?}"))),
                        }
                    }
                    if hyp.len() != rows {
                        return Err(fmt(ln + 1, format!("hypothesis over {} rows, expected {rows}", hyp.len())));
                    }
                    cur.push(VertexKind::Leaf { label: LeafLabel::Hypothesis(hyp) });
                } else {
                    return Err(fmt(ln + 1, "leaf label must be guess= or hyp=".into()));
                }
            }
            Some(tok) => return Err(fmt(ln + 1, format!("unexpected token {tok:?}"))),
            None => {}
        }
    }
    if let Some(done) = current.take() {
        layers.push(done);
    }
    if layers.len() != length + 1 {
        return Err(Error::Format {
            line: text.lines().count(),
            msg: format!("expected {} layers, got {}", length + 1, layers.len()),
        });
    }
    Ok(BranchingProgram { num_rows: rows, width, layers })
}

pub fn read_bp1<R: BufRead>(r: &mut R) -> Result<BranchingProgram> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    parse_bp1(&text)
}

pub fn load_program(path: &std::path::Path) -> Result<BranchingProgram> {
    let f = std::fs::File::open(path)?;
    read_bp1(&mut std::io::BufReader::new(f))
}

pub fn save_program(b: &BranchingProgram, path: &std::path::Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    write_bp1(b, &mut f)
}
