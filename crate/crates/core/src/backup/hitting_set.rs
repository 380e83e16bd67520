//! Minimum hitting set: smallest node set meeting every family.

use thiserror::Error;

use crate::nodeset::NodeSet;

/// Ground sets up to this size are solved exactly under [`SolverMode::Auto`].
pub const EXACT_GROUND_LIMIT: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverMode {
    Exact,
    Greedy,
    /// Exact for small ground sets, greedy above [`EXACT_GROUND_LIMIT`].
    #[default]
    Auto,
}

impl SolverMode {
    /// The concrete mode used for a ground set of `ground` elements.
    pub fn resolve(self, ground: usize) -> SolverMode {
        match self {
            SolverMode::Auto if ground <= EXACT_GROUND_LIMIT => SolverMode::Exact,
            SolverMode::Auto => SolverMode::Greedy,
            m => m,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HittingSetError {
    #[error("family {index} is empty")]
    EmptyFamily { index: usize },
    #[error("family {index} contains node {node} outside the ground set")]
    OutsideGround { index: usize, node: usize },
}

/// Smallest (exact) or greedily small set intersecting every family.
pub fn min_hitting_set(
    families: &[NodeSet],
    ground: &NodeSet,
    mode: SolverMode,
) -> Result<NodeSet, HittingSetError> {
    for (index, fam) in families.iter().enumerate() {
        if fam.is_empty() {
            return Err(HittingSetError::EmptyFamily { index });
        }
        if let Some(node) = fam.iter().find(|&v| !ground.contains(v)) {
            return Err(HittingSetError::OutsideGround { index, node });
        }
    }
    Ok(match mode.resolve(ground.len()) {
        SolverMode::Greedy => greedy(families),
        _ => exact(families),
    })
}

/// Repeatedly take the element hitting the most unhit families, lowest
/// index on ties.
fn greedy(families: &[NodeSet]) -> NodeSet {
    let mut hit = vec![false; families.len()];
    let mut chosen = NodeSet::new();
    while hit.iter().any(|h| !h) {
        let best = frequencies(families, &hit)
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(v, _)| v)
            .expect("unhit family has elements");
        chosen.insert(best);
        for (h, fam) in hit.iter_mut().zip(families) {
            *h |= fam.contains(best);
        }
    }
    chosen
}

/// `(element, number of unhit families containing it)`, ascending element.
fn frequencies(families: &[NodeSet], hit: &[bool]) -> Vec<(usize, usize)> {
    let mut counts = std::collections::BTreeMap::new();
    for fam in families
        .iter()
        .zip(hit)
        .filter(|(_, &h)| !h)
        .map(|(f, _)| f)
    {
        for v in fam.iter() {
            *counts.entry(v).or_insert(0usize) += 1;
        }
    }
    counts.into_iter().collect()
}

struct BranchAndBound<'a> {
    families: &'a [NodeSet],
    best: NodeSet,
}

impl BranchAndBound<'_> {
    /// Branch on the smallest unhit family; try its elements by descending
    /// coverage of the unhit families.
    fn search(&mut self, chosen: &mut Vec<usize>, hit: &mut Vec<bool>) {
        let unhit: Vec<usize> = (0..self.families.len()).filter(|&i| !hit[i]).collect();
        if unhit.is_empty() {
            if chosen.len() < self.best.len() {
                self.best = chosen.iter().copied().collect();
            }
            return;
        }
        if chosen.len() + self.packing_bound(&unhit) >= self.best.len() {
            return;
        }
        let pivot = *unhit
            .iter()
            .min_by_key(|&&i| (self.families[i].len(), i))
            .expect("nonempty");
        let freq = frequencies(self.families, hit);
        let mut options: Vec<(usize, usize)> = self.families[pivot]
            .iter()
            .map(|v| {
                (
                    v,
                    freq.iter().find(|&&(u, _)| u == v).map_or(0, |&(_, c)| c),
                )
            })
            .collect();
        options.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (v, _) in options {
            let newly: Vec<usize> = unhit
                .iter()
                .copied()
                .filter(|&i| self.families[i].contains(v))
                .collect();
            for &i in &newly {
                hit[i] = true;
            }
            chosen.push(v);
            self.search(chosen, hit);
            chosen.pop();
            for &i in &newly {
                hit[i] = false;
            }
        }
    }

    /// Number of pairwise disjoint unhit families found greedily; each
    /// needs its own element.
    fn packing_bound(&self, unhit: &[usize]) -> usize {
        let mut order = unhit.to_vec();
        order.sort_by_key(|&i| (self.families[i].len(), i));
        let mut used = NodeSet::new();
        let mut count = 0;
        for i in order {
            if !self.families[i].intersects(&used) {
                used = used.union(&self.families[i]);
                count += 1;
            }
        }
        count
    }
}

fn exact(families: &[NodeSet]) -> NodeSet {
    let mut bb = BranchAndBound {
        families,
        best: greedy(families),
    };
    let mut hit = vec![false; families.len()];
    bb.search(&mut Vec::new(), &mut hit);
    bb.best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(raw: &[&[usize]]) -> Vec<NodeSet> {
        raw.iter().map(|f| f.iter().copied().collect()).collect()
    }

    #[test]
    fn shared_element() {
        let fams = sets(&[&[1, 2], &[1, 3]]);
        for mode in [SolverMode::Exact, SolverMode::Greedy, SolverMode::Auto] {
            assert_eq!(
                min_hitting_set(&fams, &NodeSet::full(4), mode).unwrap(),
                NodeSet::from([1])
            );
        }
    }

    #[test]
    fn forced_and_disjoint() {
        let ground = NodeSet::full(6);
        assert_eq!(
            min_hitting_set(&sets(&[&[5]]), &ground, SolverMode::Exact).unwrap(),
            NodeSet::from([5])
        );
        assert_eq!(
            min_hitting_set(&sets(&[&[0], &[1]]), &ground, SolverMode::Exact).unwrap(),
            NodeSet::from([0, 1])
        );
        assert!(min_hitting_set(&[], &ground, SolverMode::Exact)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn greedy_can_be_suboptimal() {
        // Greedy grabs 0 (in three families) and then needs two more;
        // {1, 2} suffices.
        let fams = sets(&[&[0, 1], &[0, 2], &[1, 3], &[2, 4], &[0, 1, 2]]);
        let ground = NodeSet::full(5);
        let g = min_hitting_set(&fams, &ground, SolverMode::Greedy).unwrap();
        let e = min_hitting_set(&fams, &ground, SolverMode::Exact).unwrap();
        assert_eq!(e, NodeSet::from([1, 2]));
        assert_eq!(g.len(), 3);
    }

    #[test]
    fn errors() {
        let ground = NodeSet::full(3);
        assert_eq!(
            min_hitting_set(&sets(&[&[0], &[]]), &ground, SolverMode::Exact),
            Err(HittingSetError::EmptyFamily { index: 1 })
        );
        assert_eq!(
            min_hitting_set(&sets(&[&[7]]), &ground, SolverMode::Exact),
            Err(HittingSetError::OutsideGround { index: 0, node: 7 })
        );
    }

    #[test]
    fn auto_mode_switch() {
        assert_eq!(SolverMode::Auto.resolve(25), SolverMode::Exact);
        assert_eq!(SolverMode::Auto.resolve(26), SolverMode::Greedy);
        assert_eq!(SolverMode::Greedy.resolve(3), SolverMode::Greedy);
    }
}
