//! Auxiliary bipartite graph, maximum matching, and the dilation-freeness
//! membership tests built on them.
//!
//! For an actuator set `S` the bipartite graph has left nodes `V ∪ S''`
//! (originals, then one copy per actuator) and right nodes `V'`. A directed
//! edge `i -> j` becomes the undirected pair `(i, j')`, and each actuator
//! `k ∈ S` adds `(k'', k')`. `S` is dilation-free exactly when some
//! matching covers all of `V'`.

use std::collections::VecDeque;

use crate::graph::DiGraph;
use crate::nodeset::NodeSet;
use crate::scalar::Scalar;

/// A left vertex of the auxiliary bipartite graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LeftNode {
    /// Original node `v_i`.
    Original(usize),
    /// Actuator copy `v''_k`.
    Actuator(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxiliaryBipartite {
    n: usize,
    actuators: Vec<usize>,
    /// Right neighbours of each left vertex, ascending.
    adj: Vec<Vec<usize>>,
}

impl AuxiliaryBipartite {
    /// Left vertices are numbered `0..n` for originals and `n + k` for the
    /// copy of the `k`-th smallest actuator.
    pub fn new<T: Scalar>(g: &DiGraph<T>, s: &NodeSet) -> Self {
        let n = g.node_count();
        let mut adj: Vec<Vec<usize>> = (0..n).map(|v| g.successors(v).to_vec()).collect();
        adj.extend(s.iter().map(|k| vec![k]));
        AuxiliaryBipartite {
            n,
            actuators: s.as_slice().to_vec(),
            adj,
        }
    }

    pub fn left_count(&self) -> usize {
        self.adj.len()
    }

    pub fn right_count(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, left: usize) -> &[usize] {
        &self.adj[left]
    }

    pub fn left_node(&self, left: usize) -> LeftNode {
        if left < self.n {
            LeftNode::Original(left)
        } else {
            LeftNode::Actuator(self.actuators[left - self.n])
        }
    }

    /// Left index of the copy `v''_k`, if `k` is an actuator.
    pub fn actuator_index(&self, k: usize) -> Option<usize> {
        self.actuators.binary_search(&k).ok().map(|i| self.n + i)
    }

    /// All `(left, right)` pairs in left-major ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(l, rs)| rs.iter().map(move |&r| (l, r)))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// Copy with the edge `(left, right)` deleted.
    pub fn without_edge(&self, left: usize, right: usize) -> Self {
        let mut out = self.clone();
        out.adj[left].retain(|&r| r != right);
        out
    }
}

/// Build `H_b(s)` for graph `g`.
pub fn build_aux<T: Scalar>(g: &DiGraph<T>, s: &NodeSet) -> AuxiliaryBipartite {
    AuxiliaryBipartite::new(g, s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    left_to_right: Vec<Option<usize>>,
    right_to_left: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(left: usize, right: usize) -> Self {
        Matching {
            left_to_right: vec![None; left],
            right_to_left: vec![None; right],
        }
    }

    /// Maximum matching with the canonical (ascending) left order.
    pub fn maximum(b: &AuxiliaryBipartite) -> Self {
        let order: Vec<usize> = (0..b.left_count()).collect();
        Self::maximum_with_order(b, &order)
    }

    /// Hopcroft–Karp, visiting free left vertices in `order`.
    ///
    /// The size never depends on `order`; the witness does. `order` must
    /// be a permutation of the left vertices.
    pub fn maximum_with_order(b: &AuxiliaryBipartite, order: &[usize]) -> Self {
        let mut m = Self::empty(b.left_count(), b.right_count());
        m.augment_to_maximum(b, order);
        m
    }

    /// Grows `self` to a maximum matching of `b` by layered augmentation.
    pub fn augment_to_maximum(&mut self, b: &AuxiliaryBipartite, order: &[usize]) {
        debug_assert_eq!(order.len(), b.left_count());
        let left = b.left_count();
        let mut dist = vec![usize::MAX; left];
        let mut next = vec![0usize; left];
        loop {
            // Layer the graph from every free left vertex.
            let mut queue = VecDeque::new();
            for &u in order {
                if self.left_to_right[u].is_none() {
                    dist[u] = 0;
                    queue.push_back(u);
                } else {
                    dist[u] = usize::MAX;
                }
            }
            let mut found = false;
            while let Some(u) = queue.pop_front() {
                for &r in b.neighbors(u) {
                    match self.right_to_left[r] {
                        None => found = true,
                        Some(w) if dist[w] == usize::MAX => {
                            dist[w] = dist[u] + 1;
                            queue.push_back(w);
                        }
                        Some(_) => {}
                    }
                }
            }
            if !found {
                break;
            }
            next.iter_mut().for_each(|x| *x = 0);
            for &u in order {
                if self.left_to_right[u].is_none() {
                    self.augment_from(b, u, &mut dist, &mut next);
                }
            }
        }
    }

    /// One layered DFS from free left vertex `start`; flips the path if an
    /// exposed right vertex is reached.
    fn augment_from(
        &mut self,
        b: &AuxiliaryBipartite,
        start: usize,
        dist: &mut [usize],
        next: &mut [usize],
    ) -> bool {
        let mut stack = vec![start];
        let mut via: Vec<usize> = Vec::new();
        while let Some(&u) = stack.last() {
            let nbrs = b.neighbors(u);
            if next[u] < nbrs.len() {
                let r = nbrs[next[u]];
                next[u] += 1;
                match self.right_to_left[r] {
                    None => {
                        via.push(r);
                        for (&l, &rr) in stack.iter().zip(&via) {
                            self.left_to_right[l] = Some(rr);
                            self.right_to_left[rr] = Some(l);
                        }
                        return true;
                    }
                    Some(w) if dist[w] == dist[u].wrapping_add(1) => {
                        via.push(r);
                        stack.push(w);
                    }
                    Some(_) => {}
                }
            } else {
                dist[u] = usize::MAX;
                stack.pop();
                via.pop();
            }
        }
        false
    }

    pub fn size(&self) -> usize {
        self.right_to_left.iter().filter(|x| x.is_some()).count()
    }

    /// Every right vertex is covered.
    pub fn is_perfect(&self) -> bool {
        self.right_to_left.iter().all(Option::is_some)
    }

    pub fn right_of(&self, left: usize) -> Option<usize> {
        self.left_to_right[left]
    }

    pub fn left_of(&self, right: usize) -> Option<usize> {
        self.right_to_left[right]
    }

    pub fn contains(&self, left: usize, right: usize) -> bool {
        self.left_to_right.get(left) == Some(&Some(right))
    }

    /// Matched `(left, right)` pairs sorted by left vertex.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.left_to_right
            .iter()
            .enumerate()
            .filter_map(|(l, r)| r.map(|r| (l, r)))
            .collect()
    }

    /// Drops the pair `(left, right)` if present.
    pub fn unmatch(&mut self, left: usize, right: usize) {
        if self.contains(left, right) {
            self.left_to_right[left] = None;
            self.right_to_left[right] = None;
        }
    }
}

/// Maximum matching of `b`.
pub fn max_matching(b: &AuxiliaryBipartite) -> Matching {
    Matching::maximum(b)
}

/// Size of a maximum matching in `H_b(s)`.
pub fn matching_number<T: Scalar>(g: &DiGraph<T>, s: &NodeSet) -> usize {
    max_matching(&build_aux(g, s)).size()
}

/// `H_b(s)` has a perfect matching.
pub fn is_dilation_free<T: Scalar>(g: &DiGraph<T>, s: &NodeSet) -> bool {
    matching_number(g, s) == g.node_count()
}

/// `s` is a dilation-free set of exactly `k` actuators.
pub fn in_c_k<T: Scalar>(g: &DiGraph<T>, s: &NodeSet, k: usize) -> bool {
    s.len() == k && is_dilation_free(g, s)
}

/// `s` extends to a dilation-free set of `k` actuators:
/// `|s| <= k` and the matching number is at least `n - k + |s|`.
pub fn in_c_tilde_k<T: Scalar>(g: &DiGraph<T>, s: &NodeSet, k: usize) -> bool {
    let n = g.node_count();
    s.len() <= k && matching_number(g, s) + k >= n + s.len()
}

/// Fewest actuators that can make `g` dilation-free, lifted to at least one.
pub fn min_dilation_free_size<T: Scalar>(g: &DiGraph<T>) -> usize {
    let n = g.node_count();
    (n - matching_number(g, &NodeSet::new())).max(1)
}

/// Accessibility plus dilation-freeness for a nonempty `s`.
pub fn is_structurally_controllable<T: Scalar>(g: &DiGraph<T>, s: &NodeSet) -> bool {
    !s.is_empty()
        && s.max().is_some_and(|m| m < g.node_count())
        && g.is_accessible(s)
        && is_dilation_free(g, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star_graph() -> DiGraph<f64> {
        DiGraph::from_rows(&[
            vec![0.0, -0.5, -0.8, -0.6],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ])
        .unwrap()
    }

    fn labelled_edges(b: &AuxiliaryBipartite) -> Vec<(LeftNode, usize)> {
        b.edges().map(|(l, r)| (b.left_node(l), r)).collect()
    }

    #[test]
    fn aux_star_graph() {
        use LeftNode::*;
        let g = star_graph();
        let b = build_aux(&g, &NodeSet::new());
        assert_eq!(
            labelled_edges(&b),
            vec![
                (Original(0), 1),
                (Original(0), 2),
                (Original(0), 3),
                (Original(1), 0),
                (Original(2), 0),
                (Original(3), 0),
            ]
        );
        let b = build_aux(&g, &NodeSet::from([2, 3]));
        assert_eq!(b.left_count(), 6);
        assert_eq!(b.right_count(), 4);
        let e = labelled_edges(&b);
        assert_eq!(e.len(), 8);
        assert_eq!(&e[6..], &[(Actuator(2), 2), (Actuator(3), 3)]);
        assert_eq!(b.actuator_index(3), Some(5));
    }

    #[test]
    fn aux_empty_graph() {
        let g = DiGraph::<f64>::new(2, []).unwrap();
        let b = build_aux(&g, &NodeSet::from([0]));
        assert_eq!(labelled_edges(&b), vec![(LeftNode::Actuator(0), 0)]);
    }

    #[test]
    fn matching_sizes() {
        let g = star_graph();
        assert_eq!(max_matching(&build_aux(&g, &NodeSet::new())).size(), 2);
        let m = max_matching(&build_aux(&g, &NodeSet::from([2, 3])));
        assert_eq!(m.size(), 4);
        assert!(m.is_perfect());
        let none = DiGraph::<f64>::new(3, []).unwrap();
        assert_eq!(max_matching(&build_aux(&none, &NodeSet::new())).size(), 0);
    }

    #[test]
    fn matching_is_valid() {
        let g = star_graph();
        let b = build_aux(&g, &NodeSet::from([1, 3]));
        let m = max_matching(&b);
        let mut rights = std::collections::HashSet::new();
        for (l, r) in m.edges() {
            assert!(b.neighbors(l).contains(&r));
            assert!(rights.insert(r));
            assert_eq!(m.left_of(r), Some(l));
        }
    }

    #[test]
    fn membership_examples() {
        let g = star_graph();
        assert!(in_c_k(&g, &NodeSet::from([2, 3]), 2));
        assert!(!in_c_k(&g, &NodeSet::from([0, 1]), 2));
        assert!(!in_c_k(&g, &NodeSet::new(), 1));
        assert!(in_c_tilde_k(&g, &NodeSet::new(), 2));
        assert!(!in_c_tilde_k(&g, &NodeSet::new(), 1));
        assert!(!in_c_tilde_k(&g, &NodeSet::from([0]), 2));
        assert_eq!(matching_number(&g, &NodeSet::from([0])), 2);
        assert_eq!(matching_number(&g, &NodeSet::from([0, 1])), 3);
    }

    #[test]
    fn min_size_examples() {
        assert_eq!(min_dilation_free_size(&star_graph()), 2);
        let cycle = DiGraph::new(2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(min_dilation_free_size(&cycle), 1);
        let isolated = DiGraph::<f64>::new(4, []).unwrap();
        assert_eq!(min_dilation_free_size(&isolated), 4);
    }

    #[test]
    fn structural_controllability_examples() {
        let g = star_graph();
        assert!(is_structurally_controllable(&g, &NodeSet::from([2, 3])));
        assert!(!is_structurally_controllable(&g, &NodeSet::from([3])));
        assert!(!is_structurally_controllable(&g, &NodeSet::new()));
        assert_eq!(matching_number(&g, &NodeSet::from([3])), 3);
    }
}
