//! Backup actuators that keep the system structurally controllable when any
//! single primary actuator goes offline.
//!
//! For each essential actuator `v` the feasible replacement positions
//! `F(v)` are found by an alternating-path search over a perfect matching of
//! the auxiliary bipartite graph. A minimum set meeting every `F(v)` is the
//! backup set.

mod hitting_set;

use std::collections::VecDeque;

use thiserror::Error;

pub use hitting_set::{min_hitting_set, HittingSetError, SolverMode, EXACT_GROUND_LIMIT};

use crate::graph::{DiGraph, GraphError};
use crate::matching::{
    build_aux, is_dilation_free, is_structurally_controllable, AuxiliaryBipartite, Matching,
};
use crate::nodeset::NodeSet;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackupError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("actuator set {0:?} is not structurally controllable")]
    NotControllable(NodeSet),
    #[error("node {0} is not a primary actuator")]
    NotAnActuator(usize),
    #[error("actuator set {0:?} admits no perfect matching")]
    NotDilationFree(NodeSet),
    #[error("witness is not a perfect matching of the auxiliary graph")]
    InvalidWitness,
    #[error("no single backup position recovers actuator {actuator}")]
    Infeasible { actuator: usize },
    #[error("backup {backup} failed the structural re-check for actuator {actuator}")]
    CertificateFailed { actuator: usize, backup: usize },
    #[error(transparent)]
    HittingSet(#[from] HittingSetError),
}

/// Designated replacement for one primary actuator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub actuator: usize,
    /// `None` for non-essential actuators, which need no replacement.
    pub backup: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackupPlan {
    pub primary: NodeSet,
    pub essential: NodeSet,
    /// `(essential actuator, feasible backup positions)`, ascending actuator.
    pub families: Vec<(usize, NodeSet)>,
    pub chosen: NodeSet,
    /// The solver actually used (never `Auto`).
    pub mode: SolverMode,
    pub certificates: Vec<Certificate>,
}

fn require_controllable<T: Scalar>(g: &DiGraph<T>, s: &NodeSet) -> Result<(), BackupError> {
    g.check_nodes(s)?;
    if is_structurally_controllable(g, s) {
        Ok(())
    } else {
        Err(BackupError::NotControllable(s.clone()))
    }
}

/// Actuators whose loss breaks structural controllability.
pub fn essential_actuators<T: Scalar>(g: &DiGraph<T>, s: &NodeSet) -> Result<NodeSet, BackupError> {
    require_controllable(g, s)?;
    Ok(s.iter()
        .filter(|&v| !is_structurally_controllable(g, &s.without(v)))
        .collect())
}

/// Positions `v` for which `s \ {v_off} ∪ {v}` is dilation-free.
///
/// When `s \ {v_off}` is already dilation-free every node qualifies.
pub fn dfr_positions<T: Scalar>(
    g: &DiGraph<T>,
    s: &NodeSet,
    v_off: usize,
) -> Result<NodeSet, BackupError> {
    g.check_nodes(s)?;
    if !s.contains(v_off) {
        return Err(BackupError::NotAnActuator(v_off));
    }
    let aux = build_aux(g, s);
    let witness = Matching::maximum(&aux);
    dfr_positions_with_witness(g, s, v_off, &witness)
}

/// [`dfr_positions`] using a caller-supplied perfect matching of `H_b(s)`.
pub fn dfr_positions_with_witness<T: Scalar>(
    g: &DiGraph<T>,
    s: &NodeSet,
    v_off: usize,
    witness: &Matching,
) -> Result<NodeSet, BackupError> {
    g.check_nodes(s)?;
    if !s.contains(v_off) {
        return Err(BackupError::NotAnActuator(v_off));
    }
    let n = g.node_count();
    let aux = build_aux(g, s);
    if !is_perfect_matching_of(witness, &aux) {
        return if Matching::maximum(&aux).is_perfect() {
            Err(BackupError::InvalidWitness)
        } else {
            Err(BackupError::NotDilationFree(s.clone()))
        };
    }
    if is_dilation_free(g, &s.without(v_off)) {
        return Ok(NodeSet::full(n));
    }
    let copy = aux.actuator_index(v_off).expect("v_off is an actuator");
    // Losing dilation-freeness forces the witness to use (v''_off, v'_off).
    debug_assert!(witness.contains(copy, v_off));
    Ok(alternating_reach(&aux, witness, copy, v_off))
}

fn is_perfect_matching_of(m: &Matching, aux: &AuxiliaryBipartite) -> bool {
    m.is_perfect()
        && (0..aux.right_count()).all(|r| {
            m.left_of(r).is_some_and(|l| {
                l < aux.left_count() && aux.neighbors(l).contains(&r) && m.right_of(l) == Some(r)
            })
        })
}

/// Right vertices reachable from the exposed `v'_off` by alternating paths
/// (non-matching edge right→left, matching edge left→right) once the edge
/// `(v''_off, v'_off)` is dropped. Each reached `v'` is a recovery position,
/// since adding `v''` lets the path be flipped into a perfect matching.
fn alternating_reach(
    aux: &AuxiliaryBipartite,
    witness: &Matching,
    copy: usize,
    v_off: usize,
) -> NodeSet {
    let mut into_right: Vec<Vec<usize>> = vec![Vec::new(); aux.right_count()];
    for (l, r) in aux.edges() {
        if l != copy {
            into_right[r].push(l);
        }
    }
    let mut seen = vec![false; aux.right_count()];
    seen[v_off] = true;
    let mut queue = VecDeque::from([v_off]);
    while let Some(r) = queue.pop_front() {
        for &l in &into_right[r] {
            if witness.right_of(l) == Some(r) {
                continue;
            }
            // An exposed left vertex here would be an augmenting path, i.e.
            // dilation-freeness survived; the caller rules that out.
            if let Some(next) = witness.right_of(l) {
                if !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
    }
    seen.iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(v, _)| v)
        .collect()
}

/// DFR positions, restricted to `v_off`'s source component when `v_off` is
/// the only actuator there (otherwise that component would lose
/// accessibility).
pub fn feasible_positions<T: Scalar>(
    g: &DiGraph<T>,
    s: &NodeSet,
    v_off: usize,
) -> Result<NodeSet, BackupError> {
    require_controllable(g, s)?;
    let dfr = dfr_positions(g, s, v_off)?;
    let scc = g.scc();
    if let Some(c) = scc.source_component_of(v_off) {
        let component = scc.component(c);
        if s.intersection(&component) == NodeSet::from([v_off]) {
            return Ok(dfr.intersection(&component));
        }
    }
    Ok(dfr)
}

/// Minimal backup set for `s`, with every certificate re-checked.
pub fn backup_plan<T: Scalar>(
    g: &DiGraph<T>,
    s: &NodeSet,
    mode: SolverMode,
) -> Result<BackupPlan, BackupError> {
    let essential = essential_actuators(g, s)?;
    let mut families = Vec::with_capacity(essential.len());
    for v in essential.iter() {
        let fam = feasible_positions(g, s, v)?;
        if fam.is_empty() {
            return Err(BackupError::Infeasible { actuator: v });
        }
        families.push((v, fam));
    }
    let sets: Vec<NodeSet> = families.iter().map(|(_, f)| f.clone()).collect();
    let ground = sets.iter().fold(NodeSet::new(), |acc, f| acc.union(f));
    let mode = mode.resolve(ground.len());
    let chosen = min_hitting_set(&sets, &ground, mode)?;

    let mut certificates = Vec::with_capacity(s.len());
    for v in s.iter() {
        let backup = match families.iter().find(|(a, _)| *a == v) {
            Some((_, fam)) => {
                let b = chosen
                    .iter()
                    .find(|&b| fam.contains(b))
                    .expect("hitting set meets every family");
                if !is_structurally_controllable(g, &s.without(v).with(b)) {
                    return Err(BackupError::CertificateFailed {
                        actuator: v,
                        backup: b,
                    });
                }
                Some(b)
            }
            None => None,
        };
        certificates.push(Certificate {
            actuator: v,
            backup,
        });
    }
    Ok(BackupPlan {
        primary: s.clone(),
        essential,
        families,
        chosen,
        mode,
        certificates,
    })
}
