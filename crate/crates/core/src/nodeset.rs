use std::fmt;

/// A set of node ids kept as a sorted, duplicate-free vector.
///
/// Sorting gives every set a canonical form, so a `NodeSet` can key a
/// memoization cache and compares equal regardless of insertion order.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    pub fn new() -> Self {
        NodeSet(Vec::new())
    }

    /// All nodes `0..n`.
    pub fn full(n: usize) -> Self {
        NodeSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Inserts `v`, returning `false` if it was already present.
    pub fn insert(&mut self, v: usize) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, v);
                true
            }
        }
    }

    pub fn remove(&mut self, v: usize) -> bool {
        match self.0.binary_search(&v) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    /// Copy of `self` with `v` added.
    pub fn with(&self, v: usize) -> Self {
        let mut out = self.clone();
        out.insert(v);
        out
    }

    /// Copy of `self` with `v` removed.
    pub fn without(&self, v: usize) -> Self {
        let mut out = self.clone();
        out.remove(v);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn intersects(&self, other: &NodeSet) -> bool {
        self.iter().any(|v| other.contains(v))
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        self.iter().filter(|&v| other.contains(v)).collect()
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        self.iter().chain(other.iter()).collect()
    }

    /// Membership vector of length `n`.
    pub fn indicator(&self, n: usize) -> Vec<bool> {
        let mut out = vec![false; n];
        for v in self.iter().filter(|&v| v < n) {
            out[v] = true;
        }
        out
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }
}

impl From<Vec<usize>> for NodeSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl<const N: usize> From<[usize; N]> for NodeSet {
    fn from(v: [usize; N]) -> Self {
        v.into_iter().collect()
    }
}

impl From<NodeSet> for Vec<usize> {
    fn from(s: NodeSet) -> Self {
        s.0
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, usize>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}
