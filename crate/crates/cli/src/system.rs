//! System files: TOML descriptions of a network and an optional metric.
//!
//! See `docs/system-file.md` for the grammar. Node ids in the file are
//! 1-based; the parsed graph is 0-based.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use netplace::DiGraph;
use serde::{Deserialize, Serialize};
use toml::Spanned;

/// Version tag every system file must carry.
pub const FORMAT: &str = "netplace-system/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Gramian,
    Modular,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Gramian => "gramian",
            MetricKind::Modular => "modular",
        }
    }
}

/// The `[metric]` table. Gramian metrics may set `horizon` and `epsilon`;
/// modular metrics need `weights` and may set `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricBlock {
    pub kind: MetricKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemFile {
    pub graph: DiGraph,
    pub labels: Option<Vec<String>>,
    pub metric: Option<MetricBlock>,
}

/// How [`SystemFile::to_toml`] writes the graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Matrix,
    Edges,
}

/// A parse or validation failure, with a 1-based position when known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

type EdgeList = Vec<Spanned<(usize, usize, f64)>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    format: Spanned<String>,
    n: Spanned<usize>,
    #[serde(default)]
    labels: Option<Spanned<Vec<String>>>,
    #[serde(default)]
    matrix: Option<Spanned<Vec<Spanned<Vec<f64>>>>>,
    #[serde(default)]
    edges: Option<Spanned<EdgeList>>,
    #[serde(default)]
    metric: Option<Spanned<MetricBlock>>,
}

#[derive(Serialize)]
struct RawOut<'a> {
    format: &'static str,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<&'a [String]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(usize, usize, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<&'a MetricBlock>,
}

struct Locator<'a> {
    text: &'a str,
}

impl Locator<'_> {
    fn error(&self, span: Option<Range<usize>>, message: impl Into<String>) -> ParseError {
        let (line, column) = match span {
            Some(span) => {
                let head = &self.text[..span.start.min(self.text.len())];
                let line = head.matches('\n').count() + 1;
                let column = head.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
                (Some(line), Some(column))
            }
            None => (None, None),
        };
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let at = Locator { text };
        let raw: RawSystem =
            toml::from_str(text).map_err(|e| at.error(e.span(), e.message().trim()))?;

        if raw.format.get_ref() != FORMAT {
            return Err(at.error(
                Some(raw.format.span()),
                format!(
                    "unsupported format {:?}, expected {FORMAT:?}",
                    raw.format.get_ref()
                ),
            ));
        }
        let n = *raw.n.get_ref();
        if n == 0 {
            return Err(at.error(Some(raw.n.span()), "n must be at least 1"));
        }

        let edges = match (raw.matrix, raw.edges) {
            (Some(m), Some(_)) => {
                return Err(at.error(Some(m.span()), "give either `matrix` or `edges`, not both"));
            }
            (None, None) => {
                return Err(at.error(None, "missing graph: add a `matrix` or an `edges` array"))
            }
            (Some(m), None) => matrix_edges(&at, n, m)?,
            (None, Some(e)) => list_edges(&at, n, e)?,
        };
        let graph = DiGraph::new(n, edges).map_err(|e| at.error(None, e.to_string()))?;

        let labels = match raw.labels {
            Some(l) if l.get_ref().len() != n => {
                return Err(at.error(
                    Some(l.span()),
                    format!("{} labels for {n} nodes", l.get_ref().len()),
                ));
            }
            other => other.map(Spanned::into_inner),
        };

        let metric = match raw.metric {
            Some(m) => {
                let span = m.span();
                let block = m.into_inner();
                validate_metric(&block, n).map_err(|msg| at.error(Some(span), msg))?;
                Some(block)
            }
            None => None,
        };

        Ok(SystemFile {
            graph,
            labels,
            metric,
        })
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Serializes back to the file format. Parsing the output yields a
    /// value equal to `self` for either layout.
    pub fn to_toml(&self, layout: Layout) -> String {
        let n = self.graph.node_count();
        let (matrix, edges) = match layout {
            Layout::Matrix => (Some(self.graph.adjacency_matrix().to_rows()), None),
            Layout::Edges => (
                None,
                Some(
                    self.graph
                        .edges()
                        .iter()
                        .map(|e| (e.source + 1, e.target + 1, e.weight))
                        .collect(),
                ),
            ),
        };
        let out = RawOut {
            format: FORMAT,
            n,
            labels: self.labels.as_deref(),
            matrix,
            edges,
            metric: self.metric.as_ref(),
        };
        toml::to_string(&out).expect("system files always serialize")
    }
}

fn matrix_edges(
    at: &Locator,
    n: usize,
    m: Spanned<Vec<Spanned<Vec<f64>>>>,
) -> Result<Vec<(usize, usize, f64)>, ParseError> {
    let span = m.span();
    let rows = m.into_inner();
    if rows.len() != n {
        return Err(at.error(
            Some(span),
            format!("matrix has {} rows, expected {n}", rows.len()),
        ));
    }
    let mut edges = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let values = row.get_ref();
        if values.len() != n {
            return Err(at.error(
                Some(row.span()),
                format!(
                    "matrix row {} has {} entries, expected {n}",
                    i + 1,
                    values.len()
                ),
            ));
        }
        for (j, &w) in values.iter().enumerate() {
            if !w.is_finite() {
                return Err(at.error(
                    Some(row.span()),
                    format!("matrix entry ({}, {}) is not finite", i + 1, j + 1),
                ));
            }
            if w != 0.0 {
                edges.push((j, i, w));
            }
        }
    }
    Ok(edges)
}

fn list_edges(
    at: &Locator,
    n: usize,
    e: Spanned<EdgeList>,
) -> Result<Vec<(usize, usize, f64)>, ParseError> {
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for entry in e.into_inner() {
        let span = entry.span();
        let (j, i, w) = entry.into_inner();
        for id in [j, i] {
            if id == 0 || id > n {
                return Err(at.error(Some(span), format!("node {id} outside 1..={n}")));
            }
        }
        if w == 0.0 || !w.is_finite() {
            return Err(at.error(
                Some(span),
                format!("edge {j} -> {i} needs a finite nonzero weight"),
            ));
        }
        if !seen.insert((j, i)) {
            return Err(at.error(Some(span), format!("edge {j} -> {i} listed twice")));
        }
        edges.push((j - 1, i - 1, w));
    }
    Ok(edges)
}

fn validate_metric(block: &MetricBlock, n: usize) -> Result<(), String> {
    let positive = |name: &str, v: Option<f64>| match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => {
            Err(format!("metric {name} must be positive, got {x}"))
        }
        _ => Ok(()),
    };
    match block.kind {
        MetricKind::Gramian => {
            if block.weights.is_some() || block.base.is_some() {
                return Err("gramian metric takes `horizon` and `epsilon` only".into());
            }
            positive("horizon", block.horizon)?;
            positive("epsilon", block.epsilon)
        }
        MetricKind::Modular => {
            if block.horizon.is_some() || block.epsilon.is_some() {
                return Err("modular metric takes `weights` and `base` only".into());
            }
            let weights = block
                .weights
                .as_ref()
                .ok_or("modular metric needs `weights`")?;
            check_weights(weights, n)?;
            match block.base {
                Some(b) if !b.is_finite() => Err("metric base must be finite".into()),
                _ => Ok(()),
            }
        }
    }
}

/// Modular weights: one finite nonnegative value per node.
pub fn check_weights(weights: &[f64], n: usize) -> Result<(), String> {
    if weights.len() != n {
        return Err(format!("{} weights for {n} nodes", weights.len()));
    }
    match weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        Some(w) => Err(format!("weight {w} is not a finite nonnegative number")),
        None => Ok(()),
    }
}
