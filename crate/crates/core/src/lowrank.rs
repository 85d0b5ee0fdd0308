//! Rank-`r` projected similarity iteration.
//!
//! The full iteration `S_{k+1} = S_1 + β² Γ[S_k]` fills in dense `n × n`
//! matrices. Here every iterate is kept as a factor `X_k` (`n × r`) with
//! `S_k ≈ X_k X_k^T`, and each step projects back onto the best rank-`r`
//! approximation:
//!
//! ```text
//! Y_k     = [X_1 | β A X_k | β A^T X_k]           (n × 3r)
//! Y_k     = Q_k R_k                                (thin QR)
//! R_k     ≈ U_k Ω_k V_k^T                          (rank-r truncated SVD)
//! X_{k+1} = Q_k U_k Ω_k
//! ```
//!
//! so that `X_{k+1} X_{k+1}^T = Π_r[Y_k Y_k^T]`. `X_1` is the rank-`r`
//! truncation of `S_1 = A A^T + A^T A`.
//!
//! Factors are normalized: columns are ordered by decreasing norm, are
//! mutually orthogonal, and each has its largest-magnitude entry positive.
//! Columns beyond the numerical rank are zero.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::exact::{Beta, ConvergenceReport, Gamma};
use crate::graph::DirectedGraph;
use crate::matrix::DenseSymMatrix;

/// Singular values below this fraction of the largest are dropped.
pub const RANK_COLLAPSE_RTOL: f64 = 1e-12;
/// Relative gap `(σ_r - σ_{r+1}) / σ_1` under which a tie is reported.
const TIE_RTOL: f64 = 1e-10;
const EIGEN_S1_MAX_DIM: usize = 2000;

/// An `n × r` factor `X` representing the PSD matrix `X X^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactor {
    x: DMatrix<f64>,
}

impl LowRankFactor {
    /// Wraps `x` as-is. Use [`LowRankFactor::normalized`] for arbitrary input.
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        if x.ncols() == 0 || x.nrows() == 0 {
            return Err(Error::domain("factor must be at least 1x1"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("factor has non-finite entries"));
        }
        Ok(Self { x })
    }

    pub fn zeros(n: usize, r: usize) -> Self {
        Self {
            x: DMatrix::zeros(n, r),
        }
    }

    /// Re-expresses `x x^T` as a normalized factor with `x.ncols()` columns.
    pub fn normalized(x: &DMatrix<f64>) -> Result<Self> {
        let r = x.ncols();
        let (t, _) = truncate_via_qr(x, r);
        Self::new(t)
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    /// The rank bound `r` (number of columns, including zero columns).
    pub fn rank_bound(&self) -> usize {
        self.x.ncols()
    }

    /// Number of nonzero columns.
    pub fn effective_rank(&self) -> usize {
        self.x
            .column_iter()
            .filter(|c| c.iter().any(|&v| v != 0.0))
            .count()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// `X^T X`, the `r × r` Gram matrix.
    pub fn gram(&self) -> DMatrix<f64> {
        self.x.transpose() * &self.x
    }

    /// `||X X^T||_F`, computed from the Gram matrix.
    pub fn similarity_norm(&self) -> f64 {
        self.gram().norm()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.x.row(i).dot(&self.x.row(j))
    }

    /// The dense `n × n` matrix `X X^T`.
    pub fn materialize(&self) -> DenseSymMatrix {
        DenseSymMatrix::symmetrize(&self.x * self.x.transpose())
    }

    /// `||X X^T - Z Z^T||_F` without forming `n × n` matrices.
    ///
    /// With `W = [X | Z] = Q R` and `D = diag(I, -I)`, the difference is
    /// `Q (R D R^T) Q^T`, so its norm is that of the small matrix `R D R^T`.
    /// Working with `R` avoids the cancellation of the squared-Gram formula.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "factor dimensions differ");
        let (n, r1, r2) = (self.dim(), self.rank_bound(), other.rank_bound());
        let mut w = DMatrix::zeros(n, r1 + r2);
        w.columns_mut(0, r1).copy_from(&self.x);
        w.columns_mut(r1, r2).copy_from(&other.x);
        let r = w.qr().r();
        let mut rd = r.clone();
        for mut col in rd.column_iter_mut().skip(r1) {
            col.neg_mut();
        }
        (rd * r.transpose()).norm()
    }
}

/// Keeps the top `r` of `values`, as indices into the original order.
///
/// Returns the selected indices (sorted by value, ties kept in input order,
/// values at or below the collapse threshold dropped) and whether the cut
/// falls inside a tie.
fn select_top(values: &[f64], r: usize) -> (Vec<usize>, bool) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let top = order.first().map_or(0.0, |&i| values[i]).max(0.0);
    let floor = RANK_COLLAPSE_RTOL * top;
    let tied = r < order.len()
        && values[order[r - 1]] > floor
        && values[order[r - 1]] - values[order[r]] <= TIE_RTOL * top;
    order.truncate(r);
    order.retain(|&i| values[i] > floor);
    (order, tied)
}

/// Flips each column so its largest-magnitude entry is positive.
fn fix_signs(x: &mut DMatrix<f64>) {
    for mut col in x.column_iter_mut() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
    }
}

/// Rank-`r` factor of `y y^T` via thin QR of `y` and SVD of the triangular
/// factor. Returns the `n × r` factor (zero-padded) and the tie flag.
fn truncate_via_qr(y: &DMatrix<f64>, r: usize) -> (DMatrix<f64>, bool) {
    let n = y.nrows();
    let qr = y.clone().qr();
    let q = qr.q();
    let rmat = qr.r();
    let svd = rmat.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma = svd.singular_values;
    let (keep, tied) = select_top(sigma.as_slice(), r);
    let mut x = DMatrix::zeros(n, r);
    for (c, &i) in keep.iter().enumerate() {
        let col = &q * u.column(i) * sigma[i];
        x.column_mut(c).copy_from(&col);
    }
    fix_signs(&mut x);
    (x, tied)
}

/// Rank-`r` truncation of the PSD matrix `s` by symmetric eigendecomposition.
fn truncate_psd(s: &DMatrix<f64>, r: usize) -> (DMatrix<f64>, bool) {
    let n = s.nrows();
    let eig = SymmetricEigen::new(s.clone());
    // eigenvalues of S_1 are squared singular values of [A | A^T]
    let sigma: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| if l > 0.0 { l.sqrt() } else { 0.0 })
        .collect();
    let (keep, tied) = select_top(&sigma, r);
    let mut x = DMatrix::zeros(n, r);
    for (c, &i) in keep.iter().enumerate() {
        x.column_mut(c)
            .copy_from(&(eig.eigenvectors.column(i) * sigma[i]));
    }
    fix_signs(&mut x);
    (x, tied)
}

fn check_rank(n: usize, r: usize) -> Result<()> {
    if r == 0 || r > n {
        return Err(Error::domain(format!("rank must be in 1..={n}, got {r}")));
    }
    Ok(())
}

/// Best rank-`r` approximation of `S_1 = A A^T + A^T A`, as a factor.
pub fn lowrank_s1(a: &DirectedGraph, r: usize) -> Result<LowRankFactor> {
    let n = a.node_count();
    check_rank(n, r)?;
    let (x, tied) = if n <= EIGEN_S1_MAX_DIM {
        truncate_psd(Gamma::new(a).s1().as_matrix(), r)
    } else {
        s1_factor_via_concat(a, r)
    };
    if tied {
        log::warn!("S_1 has no spectral gap at rank {r}; truncation is not unique");
    }
    LowRankFactor::new(x)
}

/// Same truncation from the singular vectors of `[A | A^T]` (`n × 2n`).
fn s1_factor_via_concat(a: &DirectedGraph, r: usize) -> (DMatrix<f64>, bool) {
    let n = a.node_count();
    let dense = a.to_dense();
    let mut cat = DMatrix::zeros(n, 2 * n);
    cat.columns_mut(0, n).copy_from(&dense);
    cat.columns_mut(n, n).copy_from(&dense.transpose());
    truncate_via_qr(&cat, r)
}

/// `Y_k = [X_1 | β A X_k | β A^T X_k]`.
pub fn assemble_y(
    a: &DirectedGraph,
    at: &DirectedGraph,
    beta: f64,
    xk: &LowRankFactor,
    x1: &LowRankFactor,
) -> DMatrix<f64> {
    let n = a.node_count();
    let (r1, rk) = (x1.rank_bound(), xk.rank_bound());
    let mut y = DMatrix::zeros(n, r1 + 2 * rk);
    y.columns_mut(0, r1).copy_from(x1.matrix());
    y.columns_mut(r1, rk)
        .copy_from(&(a.mul_dense(xk.matrix()) * beta));
    y.columns_mut(r1 + rk, rk)
        .copy_from(&(at.mul_dense(xk.matrix()) * beta));
    y
}

/// State for repeated projected steps on one graph.
pub struct LowRankIteration {
    a: DirectedGraph,
    at: DirectedGraph,
    beta: f64,
    x1: LowRankFactor,
    tie_reported: bool,
}

impl LowRankIteration {
    pub fn new(a: &DirectedGraph, r: usize, beta: Beta) -> Result<Self> {
        Ok(Self {
            a: a.clone(),
            at: a.transpose(),
            beta: beta.value(),
            x1: lowrank_s1(a, r)?,
            tie_reported: false,
        })
    }

    pub fn x1(&self) -> &LowRankFactor {
        &self.x1
    }

    /// One projected step `X_k -> X_{k+1}`.
    pub fn step(&mut self, xk: &LowRankFactor) -> Result<LowRankFactor> {
        if xk.dim() != self.a.node_count() || xk.rank_bound() != self.x1.rank_bound() {
            return Err(Error::domain(format!(
                "factor is {}x{}, expected {}x{}",
                xk.dim(),
                xk.rank_bound(),
                self.a.node_count(),
                self.x1.rank_bound()
            )));
        }
        let y = assemble_y(&self.a, &self.at, self.beta, xk, &self.x1);
        let (x, tied) = truncate_via_qr(&y, self.x1.rank_bound());
        if tied && !self.tie_reported {
            log::warn!(
                "no spectral gap at rank {}; projected iterate is not unique",
                self.x1.rank_bound()
            );
            self.tie_reported = true;
        }
        LowRankFactor::new(x)
    }
}

/// One step of the projected iteration from `xk`, with `x1` the truncation of `S_1`.
pub fn lowrank_step(
    a: &DirectedGraph,
    beta: Beta,
    xk: &LowRankFactor,
    x1: &LowRankFactor,
) -> Result<LowRankFactor> {
    let n = a.node_count();
    if xk.dim() != n || x1.dim() != n {
        return Err(Error::domain("factor dimension does not match graph"));
    }
    if xk.rank_bound() != x1.rank_bound() {
        return Err(Error::domain("factors have different rank bounds"));
    }
    let y = assemble_y(a, &a.transpose(), beta.value(), xk, x1);
    let (x, tied) = truncate_via_qr(&y, x1.rank_bound());
    if tied {
        log::warn!("no spectral gap at rank {}", x1.rank_bound());
    }
    LowRankFactor::new(x)
}

/// Runs the projected iteration from `X_0 = 0` to a fixed point.
///
/// Stops when `||X_{k+1} X_{k+1}^T - X_k X_k^T||_F ≤ tol ||X_k X_k^T||_F`.
pub fn lowrank_similarity(
    a: &DirectedGraph,
    r: usize,
    beta: Beta,
    tol: f64,
    max_iter: usize,
) -> Result<(LowRankFactor, ConvergenceReport)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut it = LowRankIteration::new(a, r, beta)?;
    let mut x = LowRankFactor::zeros(a.node_count(), r);
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let next = it.step(&x)?;
        let residual = next.distance(&x);
        let scale = x.similarity_norm();
        x = next;
        residuals.push(residual);
        if !residual.is_finite() {
            return Err(Error::Numerical(format!(
                "low-rank iteration diverged after {} steps",
                residuals.len()
            )));
        }
        if residual <= tol * scale {
            converged = true;
            break;
        }
    }
    let rank = x.effective_rank();
    if rank < r {
        log::info!("low-rank iterate has numerical rank {rank} < {r}");
    }
    Ok((
        x,
        ConvergenceReport {
            iterations: residuals.len(),
            residuals,
            converged,
        },
    ))
}
