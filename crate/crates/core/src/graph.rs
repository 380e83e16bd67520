//! Directed-graph model of the system matrix, strongly connected components,
//! and the accessibility test.
//!
//! Orientation follows the system matrix: a nonzero entry `A[i][j]` is the
//! directed edge `j -> i` (state `j` drives state `i`).

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::linalg::Matrix;
use crate::nodeset::NodeSet;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("adjacency matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: usize, to: usize },
    #[error("edge {from} -> {to} has zero or non-finite weight")]
    InvalidWeight { from: usize, to: usize },
    #[error("rank tolerance must be positive")]
    NonPositiveTolerance,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge<T> {
    pub source: usize,
    pub target: usize,
    pub weight: T,
}

/// Directed weighted graph on nodes `0..n`.
///
/// Weights are kept for numeric work (Gramians, rank tests); every
/// structural computation only looks at the edge pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct DiGraph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl<T: Scalar> DiGraph<T> {
    /// Builds a graph from `(source, target, weight)` triples. Edges are
    /// stored sorted by `(source, target)`, so equality ignores input order.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self, GraphError> {
        let mut seen = HashSet::new();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut list = Vec::new();
        for (source, target, weight) in edges {
            for node in [source, target] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if weight == T::zero() || !weight.is_finite() {
                return Err(GraphError::InvalidWeight {
                    from: source,
                    to: target,
                });
            }
            if !seen.insert((source, target)) {
                return Err(GraphError::DuplicateEdge {
                    from: source,
                    to: target,
                });
            }
            out_adj[source].push(target);
            in_adj[target].push(source);
            list.push(Edge {
                source,
                target,
                weight,
            });
        }
        for adj in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            adj.sort_unstable();
        }
        list.sort_unstable_by_key(|e| (e.source, e.target));
        Ok(DiGraph {
            n,
            edges: list,
            out_adj,
            in_adj,
        })
    }

    /// Edge `j -> i` for every nonzero `matrix[i][j]`.
    pub fn from_adjacency(matrix: &Matrix<T>) -> Result<Self, GraphError> {
        if !matrix.is_square() {
            return Err(GraphError::NonSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let n = matrix.rows();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let w = matrix[(i, j)];
                if w != T::zero() {
                    edges.push((j, i, w));
                }
            }
        }
        Self::new(n, edges)
    }

    /// Same as [`DiGraph::from_adjacency`] for nested rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, GraphError> {
        if let Some(r) = rows.iter().find(|r| r.len() != rows.len()) {
            return Err(GraphError::NonSquare {
                rows: rows.len(),
                cols: r.len(),
            });
        }
        let m = Matrix::from_rows(rows).expect("rows checked square");
        Self::from_adjacency(&m)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    /// Targets of edges leaving `v`, ascending.
    pub fn successors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    /// Sources of edges entering `v`, ascending.
    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.out_adj[source].binary_search(&target).is_ok()
    }

    /// The system matrix `A` with `A[i][j]` the weight of edge `j -> i`.
    pub fn adjacency_matrix(&self) -> Matrix<T> {
        let mut a = Matrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.target, e.source)] = e.weight;
        }
        a
    }

    /// Same pattern, new weights drawn from `weight(source, target)`.
    pub fn reweighted(
        &self,
        mut weight: impl FnMut(usize, usize) -> T,
    ) -> Result<Self, GraphError> {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| (e.source, e.target, weight(e.source, e.target)))
            .collect();
        Self::new(self.n, edges)
    }

    pub fn check_nodes(&self, s: &NodeSet) -> Result<(), GraphError> {
        match s.max() {
            Some(node) if node >= self.n => Err(GraphError::NodeOutOfRange { node, n: self.n }),
            _ => Ok(()),
        }
    }

    pub fn scc(&self) -> SccDecomposition {
        SccDecomposition::new(self)
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.n > 0 && self.scc().components.len() == 1
    }

    /// Nodes reachable from `s` (including `s` itself).
    pub fn reachable_from(&self, s: &NodeSet) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        for v in s.iter().filter(|&v| v < self.n) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &w in &self.out_adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Every node is reachable by a directed path from some node of `s`.
    pub fn is_accessible(&self, s: &NodeSet) -> bool {
        self.reachable_from(s).into_iter().all(|r| r)
    }

    /// Numerical controllability of `(A, diag(1(s)))` by the rank of the
    /// Krylov matrix `[B, AB, ..., A^{n-1}B]`.
    ///
    /// `A` is rescaled to unit max-entry and each Krylov column is
    /// normalized before the singular values are taken; neither step
    /// changes the rank. The rank counts singular values above
    /// `tol * sigma_max`.
    pub fn is_controllable_numeric(&self, s: &NodeSet, tol: T) -> Result<bool, GraphError> {
        if tol.is_nan() || tol <= T::zero() {
            return Err(GraphError::NonPositiveTolerance);
        }
        self.check_nodes(s)?;
        let n = self.n;
        if s.is_empty() || n == 0 {
            return Ok(n == 0);
        }
        let mut a = self.adjacency_matrix();
        let max = a.max_abs();
        if max > T::zero() {
            a = a.scale(max.recip());
        }
        let mut krylov: Vec<Vec<T>> = Vec::with_capacity(s.len() * n);
        for v in s.iter() {
            let mut col = vec![T::zero(); n];
            col[v] = T::one();
            for _ in 0..n {
                let norm = col.iter().map(|&x| x * x).sum::<T>().sqrt();
                if norm == T::zero() {
                    break;
                }
                krylov.push(col.iter().map(|&x| x / norm).collect());
                col = a.mul_vec(&col);
            }
        }
        let p = Matrix::from_rows(&krylov).expect("uniform Krylov rows");
        let sv = p.singular_values();
        let sigma_max = sv.first().copied().unwrap_or_else(T::zero);
        let rank = sv.iter().filter(|&&x| x > tol * sigma_max).count();
        Ok(rank == n)
    }
}

/// Strongly connected components of a [`DiGraph`].
///
/// Components are sorted internally and ordered by their smallest node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SccDecomposition {
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    /// Components with no edge entering from another component, ascending.
    pub source_components: Vec<usize>,
}

impl SccDecomposition {
    /// Kosaraju: finish order on `G`, then sweeps of the reverse graph.
    fn new<T: Scalar>(g: &DiGraph<T>) -> Self {
        let n = g.node_count();
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for root in 0..n {
            if visited[root] {
                continue;
            }
            visited[root] = true;
            let mut stack = vec![(root, 0usize)];
            while let Some(&mut (u, ref mut next)) = stack.last_mut() {
                let succ = g.successors(u);
                if *next < succ.len() {
                    let w = succ[*next];
                    *next += 1;
                    if !visited[w] {
                        visited[w] = true;
                        stack.push((w, 0));
                    }
                } else {
                    order.push(u);
                    stack.pop();
                }
            }
        }

        let mut raw_of = vec![usize::MAX; n];
        let mut raw: Vec<Vec<usize>> = Vec::new();
        for &root in order.iter().rev() {
            if raw_of[root] != usize::MAX {
                continue;
            }
            let id = raw.len();
            let mut members = vec![root];
            raw_of[root] = id;
            let mut stack = vec![root];
            while let Some(u) = stack.pop() {
                for &w in g.predecessors(u) {
                    if raw_of[w] == usize::MAX {
                        raw_of[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            raw.push(members);
        }

        // Renumber by smallest member for a presentation-independent order.
        let mut ids: Vec<usize> = (0..raw.len()).collect();
        ids.sort_by_key(|&c| raw[c][0]);
        let mut renumber = vec![0; raw.len()];
        for (new, &old) in ids.iter().enumerate() {
            renumber[old] = new;
        }
        let components: Vec<Vec<usize>> = ids.iter().map(|&c| raw[c].clone()).collect();
        let component_of: Vec<usize> = raw_of.iter().map(|&c| renumber[c]).collect();

        let mut has_incoming = vec![false; components.len()];
        for e in g.edges() {
            let (cs, ct) = (component_of[e.source], component_of[e.target]);
            if cs != ct {
                has_incoming[ct] = true;
            }
        }
        let source_components = (0..components.len())
            .filter(|&c| !has_incoming[c])
            .collect();
        SccDecomposition {
            components,
            component_of,
            source_components,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Number of source components.
    pub fn source_count(&self) -> usize {
        self.source_components.len()
    }

    pub fn component(&self, c: usize) -> NodeSet {
        self.components[c].iter().copied().collect()
    }

    /// Node sets of the source components, in order.
    pub fn source_sets(&self) -> Vec<NodeSet> {
        self.source_components
            .iter()
            .map(|&c| self.component(c))
            .collect()
    }

    /// The source component containing `v`, if `v` lies in one.
    pub fn source_component_of(&self, v: usize) -> Option<usize> {
        let c = self.component_of[v];
        self.source_components.contains(&c).then_some(c)
    }
}
