//! Full-rank node similarity.
//!
//! Two nodes are similar when they reach many common targets through
//! neighborhood patterns of equal length and equal in/out step sequence. The
//! count of such common targets for patterns of length `l` is `N_l`, where
//! `N_1 = A A^T + A^T A` and `N_{l+1} = Γ[N_l]` with the operator
//!
//! ```text
//! Γ[X] = A X A^T + A^T X A.
//! ```
//!
//! The similarity `S*` weights `N_l` by `β^(2(l-1))` and is the fixed point of
//! `S_{k+1} = S_1 + β² Γ[S_k]` started from `S_0 = 0`. In vectorized form
//! `Γ` is the symmetric matrix `A⊗A + (A⊗A)^T`, so the iteration contracts in
//! Frobenius norm whenever `β² ρ(A⊗A + (A⊗A)^T) < 1`. The cheaper sufficient
//! condition `β ≤ 1/ρ(A + A^T)` is what [`Beta`] enforces by default.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::matrix::DenseSymMatrix;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Fraction of the easy bound used when β is chosen automatically.
pub const AUTO_BETA_FACTOR: f64 = 0.9;

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 200_000;
const MAX_PATTERN_LENGTH: usize = 12;
const MAX_EXACT_BETA_DIM: usize = 4096;
const MAX_DIRECT_SOLVE_DIM: usize = 30;

/// The operator `X -> A X A^T + A^T X A` for a fixed graph.
#[derive(Debug, Clone)]
pub struct Gamma {
    a: DirectedGraph,
    at: DirectedGraph,
}

impl Gamma {
    pub fn new(a: &DirectedGraph) -> Self {
        Self {
            a: a.clone(),
            at: a.transpose(),
        }
    }

    pub fn dim(&self) -> usize {
        self.a.node_count()
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.a
    }

    /// Applies the operator and symmetrizes the result.
    ///
    /// `A (A X)^T = A X^T A^T`, which is the transpose of `A X A^T`; the
    /// final symmetrization makes the two interchangeable.
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let out = self.a.mul_dense(&self.a.mul_dense(x).transpose())
            + self.at.mul_dense(&self.at.mul_dense(x).transpose());
        let t = out.transpose();
        (out + t) * 0.5
    }

    /// `S_1 = A A^T + A^T A`, which is `Γ[I]`.
    pub fn s1(&self) -> DenseSymMatrix {
        DenseSymMatrix::symmetrize(self.apply(&DMatrix::identity(self.dim(), self.dim())))
    }
}

pub fn gamma_apply(a: &DirectedGraph, x: &DenseSymMatrix) -> Result<DenseSymMatrix> {
    if x.dim() != a.node_count() {
        return Err(Error::domain(format!(
            "graph has {} nodes but matrix is {}x{}",
            a.node_count(),
            x.dim(),
            x.dim()
        )));
    }
    Ok(DenseSymMatrix::symmetrize(
        Gamma::new(a).apply(x.as_matrix()),
    ))
}

/// Counts common targets over all `2^ell` in/out patterns of length `ell`.
///
/// Enumerates every word `W` over `{A, A^T}` of length `ell` and sums
/// `W W^T`. This is deliberately the slow route: it does not go through
/// [`Gamma`], so it can be used to check the iteration.
pub fn pattern_count(a: &DirectedGraph, ell: usize) -> Result<DenseSymMatrix> {
    if ell == 0 {
        return Err(Error::domain("pattern length must be at least 1"));
    }
    if ell > MAX_PATTERN_LENGTH {
        return Err(Error::Capability(format!(
            "pattern length {ell} exceeds {MAX_PATTERN_LENGTH}"
        )));
    }
    let dense = a.to_dense();
    let letters = [dense.clone(), dense.transpose()];
    let n = a.node_count();
    let mut acc = DMatrix::zeros(n, n);

    fn walk(
        prefix: &DMatrix<f64>,
        depth: usize,
        letters: &[DMatrix<f64>; 2],
        acc: &mut DMatrix<f64>,
    ) {
        if depth == 0 {
            *acc += prefix * prefix.transpose();
            return;
        }
        for letter in letters {
            walk(&(prefix * letter), depth - 1, letters, acc);
        }
    }
    walk(&DMatrix::identity(n, n), ell, &letters, &mut acc);
    Ok(DenseSymMatrix::symmetrize(acc))
}

/// Spectral radius of a symmetric entrywise non-negative linear operator by
/// power iteration from the all-ones start.
///
/// The estimate is `||M x||` for unit `x`, which converges to `ρ` even when
/// `-ρ` is also an eigenvalue (bipartite structure).
pub(crate) fn power_radius(
    shape: (usize, usize),
    mut apply: impl FnMut(&DMatrix<f64>) -> DMatrix<f64>,
) -> f64 {
    let mut x = DMatrix::from_element(shape.0, shape.1, 1.0);
    x /= x.norm();
    let mut prev = f64::NAN;
    let mut stable = 0;
    for _ in 0..POWER_MAX_ITER {
        let y = apply(&x);
        let est = y.norm();
        if est == 0.0 {
            return 0.0;
        }
        if (est - prev).abs() <= POWER_TOL * est {
            stable += 1;
            if stable >= 3 {
                return est;
            }
        } else {
            stable = 0;
        }
        prev = est;
        x = y / est;
    }
    log::warn!("power iteration did not reach tolerance, using last estimate {prev}");
    prev
}

/// `1 / ρ(A + A^T)`; infinite for the empty graph.
pub fn beta_max_easy(a: &DirectedGraph) -> f64 {
    if a.is_empty() {
        return f64::INFINITY;
    }
    let at = a.transpose();
    let rho = power_radius((a.node_count(), 1), |x| a.mul_dense(x) + at.mul_dense(x));
    1.0 / rho
}

/// `1 / sqrt(ρ(A⊗A + (A⊗A)^T))`, using `Γ` as the Kronecker operator so the
/// `n² × n²` matrix is never formed.
pub fn beta_max_exact(a: &DirectedGraph) -> Result<f64> {
    let n = a.node_count();
    if n * n > MAX_EXACT_BETA_DIM {
        return Err(Error::Capability(format!(
            "exact β bound needs n² ≤ {MAX_EXACT_BETA_DIM} (n = {n}); use beta_max_easy"
        )));
    }
    if a.is_empty() {
        return Ok(f64::INFINITY);
    }
    let gamma = Gamma::new(a);
    let rho = power_radius((n, n), |x| gamma.apply(x));
    Ok(1.0 / rho.sqrt())
}

/// The scaling parameter β, validated against a graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beta {
    value: f64,
    overridden: bool,
}

impl Beta {
    /// Accepts `value` only if it satisfies the easy bound for `a`.
    pub fn checked(value: f64, a: &DirectedGraph) -> Result<Self> {
        let beta = Self::with_override(value, a)?;
        if beta.overridden {
            return Err(Error::domain(format!(
                "β = {value} exceeds the convergence bound {}",
                beta_max_easy(a)
            )));
        }
        Ok(beta)
    }

    /// Accepts any positive `value`, recording whether it violates the bound.
    pub fn with_override(value: f64, a: &DirectedGraph) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::domain(format!("β must be positive, got {value}")));
        }
        let bound = beta_max_easy(a);
        Ok(Self {
            value,
            overridden: value > bound * (1.0 + 1e-12),
        })
    }

    /// `0.9 / ρ(A + A^T)`, or 1 for the empty graph.
    pub fn auto(a: &DirectedGraph) -> Self {
        let bound = beta_max_easy(a);
        let value = if bound.is_finite() {
            AUTO_BETA_FACTOR * bound
        } else {
            1.0
        };
        Self {
            value,
            overridden: false,
        }
    }

    /// `factor` times the easy bound (1 for the empty graph).
    pub fn scaled(a: &DirectedGraph, factor: f64) -> Result<Self> {
        let bound = beta_max_easy(a);
        let value = if bound.is_finite() {
            factor * bound
        } else {
            1.0
        };
        Self::with_override(value, a)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn squared(&self) -> f64 {
        self.value * self.value
    }

    /// True when the value was accepted despite exceeding the easy bound.
    pub fn is_overridden(&self) -> bool {
        self.overridden
    }
}

/// Residual history of a fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub iterations: usize,
    /// `residuals[k]` is the Frobenius norm of the change made by update `k + 1`.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

/// The sequence `S_1, S_2, ...` of `S_{k+1} = S_1 + β² Γ[S_k]` from `S_0 = 0`.
pub struct SimilarityIteration {
    gamma: Gamma,
    beta2: f64,
    s1: DMatrix<f64>,
    current: DMatrix<f64>,
}

impl SimilarityIteration {
    pub fn new(a: &DirectedGraph, beta: Beta) -> Self {
        let gamma = Gamma::new(a);
        let s1 = gamma.s1().into_matrix();
        let n = a.node_count();
        Self {
            gamma,
            beta2: beta.squared(),
            s1,
            current: DMatrix::zeros(n, n),
        }
    }
}

impl Iterator for SimilarityIteration {
    type Item = DenseSymMatrix;

    fn next(&mut self) -> Option<DenseSymMatrix> {
        let next = &self.s1 + self.gamma.apply(&self.current) * self.beta2;
        self.current = next;
        Some(DenseSymMatrix::symmetrize(self.current.clone()))
    }
}

/// Iterates to the fixed point `S* = S_1 + β² Γ[S*]`.
///
/// Stops when `||S_{k+1} - S_k||_F ≤ tol ||S_{k+1}||_F`. On hitting `max_iter`
/// the last iterate is returned with `converged = false`.
pub fn full_similarity(
    a: &DirectedGraph,
    beta: Beta,
    tol: f64,
    max_iter: usize,
) -> Result<(DenseSymMatrix, ConvergenceReport)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if beta.is_overridden() {
        log::warn!(
            "β = {} exceeds the easy convergence bound; iteration may diverge",
            beta.value()
        );
    }
    let gamma = Gamma::new(a);
    let s1 = gamma.s1().into_matrix();
    let beta2 = beta.squared();
    let mut s = DMatrix::zeros(a.node_count(), a.node_count());
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let next = &s1 + gamma.apply(&s) * beta2;
        let residual = (&next - &s).norm();
        let scale = next.norm();
        s = next;
        residuals.push(residual);
        if !residual.is_finite() || !scale.is_finite() {
            return Err(Error::Numerical(format!(
                "similarity iteration diverged after {} steps",
                residuals.len()
            )));
        }
        if residual <= tol * scale {
            converged = true;
            break;
        }
    }
    Ok((
        DenseSymMatrix::symmetrize(s),
        ConvergenceReport {
            iterations: residuals.len(),
            residuals,
            converged,
        },
    ))
}

/// `||S - S_1 - β² Γ[S]||_F`, the defining residual of the fixed point.
pub fn fixed_point_residual(a: &DirectedGraph, beta: f64, s: &DenseSymMatrix) -> f64 {
    let gamma = Gamma::new(a);
    let r = s.as_matrix() - gamma.s1().as_matrix() - gamma.apply(s.as_matrix()) * (beta * beta);
    r.norm()
}

pub(crate) fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij != 0.0 {
                out.view_mut((i * br, j * bc), (br, bc))
                    .copy_from(&(b * aij));
            }
        }
    }
    out
}

/// Solves `[I - β² (A⊗A + (A⊗A)^T)] vec(S) = vec(S_1)` directly.
///
/// Dense `n² × n²` system; intended as a reference for small graphs.
pub fn kronecker_direct_solve(a: &DirectedGraph, beta: f64) -> Result<DenseSymMatrix> {
    let n = a.node_count();
    if n > MAX_DIRECT_SOLVE_DIM {
        return Err(Error::Capability(format!(
            "direct solve limited to n ≤ {MAX_DIRECT_SOLVE_DIM} (n = {n})"
        )));
    }
    let bound = beta_max_exact(a)?;
    if beta >= bound * (1.0 - 1e-9) {
        return Err(Error::Numerical(format!(
            "β = {beta} is at or above the exact bound {bound}; system is singular or divergent"
        )));
    }
    let dense = a.to_dense();
    let aa = kron(&dense, &dense);
    let m = &aa + aa.transpose();
    let system = DMatrix::identity(n * n, n * n) - m * (beta * beta);
    let s1 = &dense * dense.transpose() + dense.transpose() * &dense;
    let rhs = DVector::from_column_slice(s1.as_slice());
    let sol = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("Kronecker system is singular".into()))?;
    Ok(DenseSymMatrix::symmetrize(DMatrix::from_column_slice(
        n,
        n,
        sol.as_slice(),
    )))
}
