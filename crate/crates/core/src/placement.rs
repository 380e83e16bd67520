//! Greedy actuator placement under the dilation-freeness matroid constraint.
//!
//! * [`forward_greedy`] adds the best feasible node one at a time.
//! * [`initial_set`] seeds one actuator per source component so that
//!   accessibility holds on graphs that are not strongly connected.
//! * [`long_horizon_greedy`] scores each feasible node by the final value
//!   of a forward-greedy rollout started from it.
//! * [`place`] chains them.
//!
//! All argmin/argmax selections break ties toward the lowest node index,
//! treating values within [`TIE_TOLERANCE`] as equal.

use std::time::{Duration, Instant};

use log::warn;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::DiGraph;
use crate::matching::{in_c_k, in_c_tilde_k, is_structurally_controllable, min_dilation_free_size};
use crate::metrics::{MemoMetric, MetricError, SetMetric};
use crate::nodeset::NodeSet;
use crate::scalar::Scalar;

/// Absolute tolerance under which two metric values tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlacementError {
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("budget {k} exceeds node count {n}")]
    BudgetTooLarge { k: usize, n: usize },
    #[error("budget {k} is below the {min} actuators needed for dilation-freeness")]
    InfeasibleBudget { k: usize, min: usize },
    #[error("initial set {initial:?} cannot be extended to a dilation-free set of {k} actuators")]
    InfeasibleStart { initial: NodeSet, k: usize },
    #[error(
        "no feasible actuator in source component {component:?} given the current set {current:?}"
    )]
    EmptyCandidate {
        component: NodeSet,
        current: NodeSet,
    },
    #[error("metric covers {metric} nodes but graph has {graph}")]
    MetricSizeMismatch { metric: usize, graph: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Upper bound on forward-greedy additions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Depth {
    #[default]
    Unbounded,
    Steps(usize),
}

impl Depth {
    fn allows(self, additions: usize) -> bool {
        match self {
            Depth::Unbounded => true,
            Depth::Steps(d) => additions < d,
        }
    }
}

/// Rollout depth for the long-horizon greedy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Horizon {
    /// `K - |S⁰|`, measured when the search starts.
    #[default]
    Full,
    Steps(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    ForwardGreedy,
    LongHorizon,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LowestIndex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacementConfig {
    pub k: usize,
    pub method: Method,
    pub horizon: Horizon,
    pub depth: Depth,
    pub tie_break: TieBreak,
    /// Worker threads for candidate scoring; 0 or 1 runs serially.
    pub threads: usize,
}

impl PlacementConfig {
    pub fn new(k: usize, method: Method) -> Self {
        PlacementConfig {
            k,
            method,
            horizon: Horizon::Full,
            depth: Depth::Unbounded,
            tie_break: TieBreak::LowestIndex,
            threads: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep<T> {
    pub iteration: usize,
    pub node: usize,
    /// Candidates considered when `node` was chosen.
    pub candidates: usize,
    /// Nodes examined and found infeasible before `node` was accepted.
    pub rejected: Vec<usize>,
    /// Metric of the set after adding `node`.
    pub metric: T,
    /// Long-horizon only: final rollout value that selected `node`.
    pub rollout: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlacementResult<T> {
    pub initial: NodeSet,
    pub set: NodeSet,
    pub value: T,
    pub trace: Vec<TraceStep<T>>,
    pub in_c_k: bool,
    pub structurally_controllable: bool,
    pub warnings: Vec<String>,
    pub elapsed: Duration,
}

/// Shared state of one placement run: graph, budget, memoized metric and
/// optional worker pool.
struct Search<'a, T: Scalar, M: SetMetric<T> + ?Sized> {
    g: &'a DiGraph<T>,
    k: usize,
    metric: MemoMetric<'a, T, M>,
    pool: Option<rayon::ThreadPool>,
}

impl<'a, T: Scalar, M: SetMetric<T> + ?Sized> Search<'a, T, M> {
    fn new(g: &'a DiGraph<T>, k: usize, f: &'a M, threads: usize) -> Result<Self, PlacementError> {
        if f.ground_size() != g.node_count() {
            return Err(PlacementError::MetricSizeMismatch {
                metric: f.ground_size(),
                graph: g.node_count(),
            });
        }
        let pool = (threads > 1)
            .then(|| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .ok()
            })
            .flatten();
        Ok(Search {
            g,
            k,
            metric: MemoMetric::new(f),
            pool,
        })
    }

    fn eval(&self, s: &NodeSet) -> Result<T, PlacementError> {
        Ok(self.metric.evaluate(s)?)
    }

    fn feasible(&self, s: &NodeSet) -> bool {
        in_c_tilde_k(self.g, s, self.k)
    }

    /// Applies `score` to each candidate, in parallel when a pool exists.
    /// Results keep candidate order.
    fn score_all<R: Send>(
        &self,
        candidates: &[usize],
        score: impl Fn(usize) -> Result<R, PlacementError> + Sync,
    ) -> Result<Vec<R>, PlacementError> {
        match &self.pool {
            Some(pool) => pool.install(|| candidates.par_iter().map(|&v| score(v)).collect()),
            None => candidates.iter().map(|&v| score(v)).collect(),
        }
    }

    /// Forward greedy from `s0` with at most `depth` additions.
    fn forward(
        &self,
        s0: &NodeSet,
        depth: Depth,
    ) -> Result<(NodeSet, Vec<TraceStep<T>>), PlacementError> {
        let n = self.g.node_count();
        let mut set = s0.clone();
        let mut processed = s0.indicator(n);
        let mut trace = Vec::new();
        let mut additions = 0;
        while processed.iter().any(|p| !p) && set.len() < self.k && depth.allows(additions) {
            let candidates: Vec<usize> = (0..n).filter(|&v| !processed[v]).collect();
            let values = self.score_all(&candidates, |v| self.eval(&set.with(v)))?;
            // Best marginal decrease first; f(S) is common to all candidates.
            let mut remaining: Vec<(usize, T)> = candidates.iter().copied().zip(values).collect();
            let mut rejected = Vec::new();
            let mut accepted = None;
            while let Some(pos) = argmin_position(&remaining) {
                let (v, value) = remaining.remove(pos);
                processed[v] = true;
                let next = set.with(v);
                if self.feasible(&next) {
                    accepted = Some((v, value, next));
                    break;
                }
                rejected.push(v);
            }
            let Some((v, value, next)) = accepted else {
                break;
            };
            set = next;
            debug_assert!(self.feasible(&set));
            additions += 1;
            trace.push(TraceStep {
                iteration: additions,
                node: v,
                candidates: candidates.len(),
                rejected,
                metric: value,
                rollout: None,
            });
        }
        Ok((set, trace))
    }

    fn long_horizon(
        &self,
        s0: &NodeSet,
        horizon: usize,
    ) -> Result<(NodeSet, Vec<TraceStep<T>>), PlacementError> {
        let n = self.g.node_count();
        let mut set = s0.clone();
        let mut trace = Vec::new();
        while set.len() < self.k {
            let candidates: Vec<usize> = (0..n)
                .filter(|&v| !set.contains(v) && self.feasible(&set.with(v)))
                .collect();
            if candidates.is_empty() {
                return Err(PlacementError::EmptyCandidate {
                    component: NodeSet::full(n),
                    current: set,
                });
            }
            let rollouts = self.score_all(&candidates, |v| {
                let (end, _) = self.forward(&set.with(v), Depth::Steps(horizon))?;
                self.eval(&end)
            })?;
            let scored: Vec<(usize, T)> = candidates.iter().copied().zip(rollouts).collect();
            let pos = argmin_position(&scored).expect("nonempty candidates");
            let (v, rollout) = scored[pos];
            set.insert(v);
            trace.push(TraceStep {
                iteration: trace.len() + 1,
                node: v,
                candidates: candidates.len(),
                rejected: Vec::new(),
                metric: self.eval(&set)?,
                rollout: Some(rollout),
            });
        }
        Ok((set, trace))
    }

    fn initial(&self) -> Result<NodeSet, PlacementError> {
        let scc = self.g.scc();
        let mut set = NodeSet::new();
        for component in scc.source_sets() {
            let feasible: Vec<usize> = component
                .iter()
                .filter(|&v| !set.contains(v) && self.feasible(&set.with(v)))
                .collect();
            if feasible.is_empty() {
                return Err(PlacementError::EmptyCandidate {
                    component,
                    current: set,
                });
            }
            let values = self.score_all(&feasible, |v| self.eval(&set.with(v)))?;
            let scored: Vec<(usize, T)> = feasible.iter().copied().zip(values).collect();
            let pos = argmin_position(&scored).expect("nonempty candidates");
            set.insert(scored[pos].0);
        }
        Ok(set)
    }

    fn finish(
        &self,
        initial: NodeSet,
        set: NodeSet,
        trace: Vec<TraceStep<T>>,
        warnings: Vec<String>,
        started: Instant,
    ) -> Result<PlacementResult<T>, PlacementError> {
        Ok(PlacementResult {
            value: self.eval(&set)?,
            in_c_k: in_c_k(self.g, &set, self.k),
            structurally_controllable: is_structurally_controllable(self.g, &set),
            initial,
            set,
            trace,
            warnings,
            elapsed: started.elapsed(),
        })
    }

    fn check_start(&self, s0: &NodeSet) -> Result<(), PlacementError> {
        if s0.max().is_some_and(|m| m >= self.g.node_count()) || !self.feasible(s0) {
            return Err(PlacementError::InfeasibleStart {
                initial: s0.clone(),
                k: self.k,
            });
        }
        Ok(())
    }
}

/// Position of the smallest value; among values within the tie tolerance
/// of the minimum, the lowest node wins.
fn argmin_position<T: Scalar>(scored: &[(usize, T)]) -> Option<usize> {
    let min = scored
        .iter()
        .map(|&(_, v)| v)
        .fold(None, |m: Option<T>, v| {
            Some(match m {
                Some(m) if m <= v => m,
                _ => v,
            })
        })?;
    let tol = T::of(TIE_TOLERANCE);
    scored
        .iter()
        .enumerate()
        .filter(|(_, &(_, v))| v <= min + tol)
        .min_by_key(|(_, &(node, _))| node)
        .map(|(pos, _)| pos)
}

/// Forward greedy: repeatedly take the node with the largest marginal
/// decrease of `f`; keep it if the set stays extendable to a dilation-free
/// `k`-set, otherwise discard it for good.
///
/// Stops when every node has been examined, `|S| = k`, or `depth` nodes
/// have been added.
pub fn forward_greedy<T: Scalar, M: SetMetric<T> + ?Sized>(
    g: &DiGraph<T>,
    s0: &NodeSet,
    depth: Depth,
    k: usize,
    f: &M,
) -> Result<PlacementResult<T>, PlacementError> {
    let started = Instant::now();
    let search = Search::new(g, k, f, 0)?;
    search.check_start(s0)?;
    let (set, trace) = search.forward(s0, depth)?;
    search.finish(s0.clone(), set, trace, Vec::new(), started)
}

/// One actuator per source component, each the feasible node with the
/// lowest metric given the nodes already chosen.
pub fn initial_set<T: Scalar, M: SetMetric<T> + ?Sized>(
    g: &DiGraph<T>,
    k: usize,
    f: &M,
) -> Result<NodeSet, PlacementError> {
    Search::new(g, k, f, 0)?.initial()
}

/// Long-horizon greedy: at each step pick the feasible node whose
/// forward-greedy rollout of depth `horizon` ends at the lowest metric.
pub fn long_horizon_greedy<T: Scalar, M: SetMetric<T> + ?Sized>(
    g: &DiGraph<T>,
    s0: &NodeSet,
    horizon: Horizon,
    k: usize,
    f: &M,
) -> Result<PlacementResult<T>, PlacementError> {
    let started = Instant::now();
    let search = Search::new(g, k, f, 0)?;
    search.check_start(s0)?;
    let depth = resolve_horizon(horizon, k, s0);
    let (set, trace) = search.long_horizon(s0, depth)?;
    search.finish(s0.clone(), set, trace, Vec::new(), started)
}

fn resolve_horizon(horizon: Horizon, k: usize, s0: &NodeSet) -> usize {
    match horizon {
        Horizon::Full => k.saturating_sub(s0.len()),
        Horizon::Steps(d) => d,
    }
}

/// End-to-end placement of `cfg.k` actuators.
///
/// Strongly connected graphs start from the empty set; otherwise the
/// start is [`initial_set`]. The chosen greedy then fills the budget.
pub fn place<T: Scalar, M: SetMetric<T> + ?Sized>(
    g: &DiGraph<T>,
    f: &M,
    cfg: &PlacementConfig,
) -> Result<PlacementResult<T>, PlacementError> {
    let started = Instant::now();
    let n = g.node_count();
    let k = cfg.k;
    if k == 0 {
        return Err(PlacementError::ZeroBudget);
    }
    if k > n {
        return Err(PlacementError::BudgetTooLarge { k, n });
    }
    let min = min_dilation_free_size(g);
    if k < min {
        return Err(PlacementError::InfeasibleBudget { k, min });
    }
    let search = Search::new(g, k, f, cfg.threads)?;

    let mut warnings = Vec::new();
    let s0 = if g.is_strongly_connected() {
        NodeSet::new()
    } else {
        let sources = g.scc().source_count();
        if !(n > k && k >= min + sources) {
            let msg = format!(
                "budget {k} outside n > K >= k_min + sources ({n} > K >= {min} + {sources}); \
                 structural controllability of the result is not guaranteed"
            );
            warn!("{msg}");
            warnings.push(msg);
        }
        search.initial()?
    };
    search.check_start(&s0)?;

    let (set, trace) = match cfg.method {
        Method::ForwardGreedy => search.forward(&s0, cfg.depth)?,
        Method::LongHorizon => search.long_horizon(&s0, resolve_horizon(cfg.horizon, k, &s0))?,
    };
    search.finish(s0, set, trace, warnings, started)
}
