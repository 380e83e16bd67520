//! Set metrics `f: 2^V -> R` that placement minimizes.

use std::collections::HashMap;
use std::sync::Mutex;

use thiserror::Error;

use crate::linalg::{LinalgError, Matrix};
use crate::nodeset::NodeSet;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("horizon must be positive")]
    NonPositiveHorizon,
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("node {node} out of range for metric over {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("expected {expected} entries, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error(
        "Gramian plus epsilon shift is not numerically positive definite; raise epsilon ({0})"
    )]
    Factorization(LinalgError),
}

/// A deterministic set function over the ground set `0..ground_size()`.
pub trait SetMetric<T: Scalar>: Sync {
    fn ground_size(&self) -> usize;

    fn evaluate(&self, s: &NodeSet) -> Result<T, MetricError>;

    /// Declares `s ⊆ s'  =>  f(s') <= f(s)`. Not enforced.
    fn is_monotone(&self) -> bool {
        false
    }
}

impl<T: Scalar, M: SetMetric<T> + ?Sized> SetMetric<T> for &M {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }

    fn evaluate(&self, s: &NodeSet) -> Result<T, MetricError> {
        (**self).evaluate(s)
    }

    fn is_monotone(&self) -> bool {
        (**self).is_monotone()
    }
}

fn check_set(s: &NodeSet, n: usize) -> Result<(), MetricError> {
    match s.max() {
        Some(node) if node >= n => Err(MetricError::NodeOutOfRange { node, n }),
        _ => Ok(()),
    }
}

/// `e^M`; see [`Matrix::expm`].
pub fn matrix_exponential<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    m.expm()
}

/// Finite-horizon controllability Gramian
/// `W_T(s) = ∫₀ᵀ e^{Aτ} B Bᵀ e^{Aᵀτ} dτ` with `B = diag(1(s))`.
///
/// Computed from one exponential of the block matrix
/// `[[-A, BBᵀ], [0, Aᵀ]] T`: if `F` is that exponential, the Gramian is
/// `F₂₂ᵀ F₁₂`.
pub fn controllability_gramian<T: Scalar>(
    a: &Matrix<T>,
    s: &NodeSet,
    horizon: T,
) -> Result<Matrix<T>, MetricError> {
    if !a.is_square() {
        return Err(LinalgError::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        }
        .into());
    }
    if horizon.is_nan() || horizon <= T::zero() {
        return Err(MetricError::NonPositiveHorizon);
    }
    let n = a.rows();
    check_set(s, n)?;
    if s.is_empty() {
        return Ok(Matrix::zeros(n, n));
    }
    let mut block = Matrix::zeros(2 * n, 2 * n);
    block.set_block(0, 0, &a.scale(-horizon));
    for v in s.iter() {
        block[(v, n + v)] = horizon;
    }
    block.set_block(n, n, &a.transpose().scale(horizon));
    let f = block.expm()?;
    let f12 = f.block(0, n, n, n);
    let f22 = f.block(n, n, n, n);
    Ok(f22.transpose().matmul(&f12).symmetrized())
}

/// Average steering energy `F_ε(s) = trace((W_T(s) + εI)⁻¹)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramianMetric<T> {
    a: Matrix<T>,
    horizon: T,
    epsilon: T,
}

impl<T: Scalar> GramianMetric<T> {
    pub const DEFAULT_HORIZON: f64 = 1.0;
    pub const DEFAULT_EPSILON: f64 = 1e-12;

    pub fn new(a: Matrix<T>, horizon: T, epsilon: T) -> Result<Self, MetricError> {
        if !a.is_square() {
            return Err(LinalgError::NonSquare {
                rows: a.rows(),
                cols: a.cols(),
            }
            .into());
        }
        if horizon.is_nan() || horizon <= T::zero() {
            return Err(MetricError::NonPositiveHorizon);
        }
        if epsilon.is_nan() || epsilon <= T::zero() {
            return Err(MetricError::NonPositiveEpsilon);
        }
        Ok(GramianMetric {
            a,
            horizon,
            epsilon,
        })
    }

    /// `T = 1`, `ε = 1e-12`.
    pub fn with_defaults(a: Matrix<T>) -> Result<Self, MetricError> {
        Self::new(
            a,
            T::of(Self::DEFAULT_HORIZON),
            T::of(Self::DEFAULT_EPSILON),
        )
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn gramian(&self, s: &NodeSet) -> Result<Matrix<T>, MetricError> {
        controllability_gramian(&self.a, s, self.horizon)
    }
}

impl<T: Scalar> SetMetric<T> for GramianMetric<T> {
    fn ground_size(&self) -> usize {
        self.a.rows()
    }

    fn evaluate(&self, s: &NodeSet) -> Result<T, MetricError> {
        let n = self.a.rows();
        let shifted = self
            .gramian(s)?
            .add(&Matrix::identity(n).scale(self.epsilon));
        shifted
            .spd_trace_inverse()
            .map_err(MetricError::Factorization)
    }

    fn is_monotone(&self) -> bool {
        true
    }
}

/// `f(s) = base - Σ_{v ∈ s} weight[v]`, with nonnegative weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularTestMetric<T> {
    base: T,
    weights: Vec<T>,
}

impl<T: Scalar> ModularTestMetric<T> {
    /// Weights must be finite and nonnegative.
    pub fn new(base: T, weights: Vec<T>) -> Option<Self> {
        weights
            .iter()
            .all(|w| w.is_finite() && *w >= T::zero())
            .then_some(ModularTestMetric { base, weights })
    }

    /// Base chosen so that `f(V) = 0`.
    pub fn from_weights(weights: Vec<T>) -> Option<Self> {
        let base = weights.iter().copied().sum();
        Self::new(base, weights)
    }

    pub fn base(&self) -> T {
        self.base
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

impl<T: Scalar> SetMetric<T> for ModularTestMetric<T> {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn evaluate(&self, s: &NodeSet) -> Result<T, MetricError> {
        check_set(s, self.weights.len())?;
        Ok(s.iter().fold(self.base, |acc, v| acc - self.weights[v]))
    }

    fn is_monotone(&self) -> bool {
        true
    }
}

/// Caches evaluations of an inner metric, keyed by the canonical set.
///
/// Safe for concurrent use; concurrent misses on the same set may both
/// evaluate, which is harmless because evaluation is deterministic.
pub struct MemoMetric<'a, T, M: ?Sized> {
    inner: &'a M,
    cache: Mutex<HashMap<NodeSet, T>>,
}

impl<'a, T: Scalar, M: SetMetric<T> + ?Sized> MemoMetric<'a, T, M> {
    pub fn new(inner: &'a M) -> Self {
        MemoMetric {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn cached_len(&self) -> usize {
        self.cache.lock().expect("metric cache poisoned").len()
    }
}

impl<T: Scalar, M: SetMetric<T> + ?Sized> SetMetric<T> for MemoMetric<'_, T, M> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn evaluate(&self, s: &NodeSet) -> Result<T, MetricError> {
        if let Some(&v) = self.cache.lock().expect("metric cache poisoned").get(s) {
            return Ok(v);
        }
        let v = self.inner.evaluate(s)?;
        self.cache
            .lock()
            .expect("metric cache poisoned")
            .insert(s.clone(), v);
        Ok(v)
    }

    fn is_monotone(&self) -> bool {
        self.inner.is_monotone()
    }
}
