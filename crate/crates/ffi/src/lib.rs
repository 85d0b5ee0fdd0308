//! C ABI for `rolesim`.
//!
//! Objects are opaque handles allocated by this library and released with the
//! matching `*_free` function. Every fallible call returns a [`RolesimStatus`];
//! on failure the message is available from [`rolesim_last_error_message`]
//! on the same thread. Output pointers are only written on success, except
//! that iteration results are also written with
//! `ROLESIM_STATUS_NOT_CONVERGED`.
//!
//! Matrices are copied out in row-major order.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rolesim::analysis::nmi;
use rolesim::benchgen::{generate, RoleModel, RolePreset};
use rolesim::exact::{full_similarity, Beta};
use rolesim::lowrank::lowrank_similarity;
use rolesim::roles::{extract_roles, RoleOptions};
use rolesim::{io, DenseSymMatrix, DirectedGraph, Error, LowRankFactor, Partition};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolesimStatus {
    Ok = 0,
    /// File could not be read, written or parsed.
    Io = 1,
    /// An argument violated a precondition.
    InvalidArgument = 2,
    /// A numerical routine failed.
    Numerical = 3,
    /// The iteration hit its limit; outputs hold the last iterate.
    NotConverged = 4,
    NullPointer = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Directed weighted graph.
pub struct RolesimGraph(DirectedGraph);
/// Dense symmetric similarity matrix.
pub struct RolesimMatrix(DenseSymMatrix);
/// Low-rank similarity factor `X`, representing `X X^T`.
pub struct RolesimFactor(LowRankFactor);
/// Node partition.
pub struct RolesimPartition(Partition);

/// Role graph presets for [`rolesim_generate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolesimPreset {
    Community = 0,
    Cycle = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(err: Error) -> RolesimStatus {
    let status = match err {
        Error::Io { .. } | Error::Parse { .. } => RolesimStatus::Io,
        Error::Domain(_) | Error::Capability(_) => RolesimStatus::InvalidArgument,
        Error::Numerical(_) => RolesimStatus::Numerical,
    };
    set_error(err.to_string());
    status
}

fn null(what: &str) -> RolesimStatus {
    set_error(format!("{what} is null"));
    RolesimStatus::NullPointer
}

fn guard(f: impl FnOnce() -> RolesimStatus) -> RolesimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RolesimStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, RolesimStatus> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path).to_str().map_err(|_| {
        set_error("path is not valid UTF-8");
        RolesimStatus::InvalidArgument
    })
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

fn resolve_beta(g: &DirectedGraph, beta: f64) -> Result<Beta, Error> {
    if beta <= 0.0 {
        Ok(Beta::auto(g))
    } else {
        Beta::checked(beta, g)
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
#[no_mangle]
pub unsafe extern "C" fn rolesim_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a graph from `m` parallel arrays of edges. `weights` may be null
/// for unit weights.
#[no_mangle]
pub unsafe extern "C" fn rolesim_graph_new(
    n: usize,
    src: *const usize,
    dst: *const usize,
    weights: *const f64,
    m: usize,
    out: *mut *mut RolesimGraph,
) -> RolesimStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        if m > 0 && (src.is_null() || dst.is_null()) {
            return null("edge array");
        }
        let edges = (0..m)
            .map(|k| {
                let w = if weights.is_null() {
                    1.0
                } else {
                    *weights.add(k)
                };
                (*src.add(k), *dst.add(k), w)
            })
            .collect();
        match DirectedGraph::new(n, edges) {
            Ok(g) => {
                *out = boxed(RolesimGraph(g));
                RolesimStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Loads an edge-list file.
#[no_mangle]
pub unsafe extern "C" fn rolesim_graph_load(
    path: *const c_char,
    out: *mut *mut RolesimGraph,
) -> RolesimStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match io::load_edge_list(path) {
            Ok(g) => {
                *out = boxed(RolesimGraph(g));
                RolesimStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn rolesim_graph_save(
    graph: *const RolesimGraph,
    path: *const c_char,
) -> RolesimStatus {
    guard(|| {
        let Some(g) = graph.as_ref() else {
            return null("graph");
        };
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match io::save_edge_list(&g.0, path) {
            Ok(()) => RolesimStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Node count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rolesim_graph_node_count(graph: *const RolesimGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

#[no_mangle]
pub unsafe extern "C" fn rolesim_graph_edge_count(graph: *const RolesimGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

#[no_mangle]
pub unsafe extern "C" fn rolesim_graph_free(graph: *mut RolesimGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Random graph with `k` planted roles of `role_size` nodes each.
#[no_mangle]
pub unsafe extern "C" fn rolesim_generate(
    preset: RolesimPreset,
    k: usize,
    role_size: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
    graph_out: *mut *mut RolesimGraph,
    truth_out: *mut *mut RolesimPartition,
) -> RolesimStatus {
    guard(|| {
        if graph_out.is_null() || truth_out.is_null() {
            return null("output pointer");
        }
        let kind = match preset {
            RolesimPreset::Community => RolePreset::Community,
            RolesimPreset::Cycle => RolePreset::Cycle,
        };
        let inst =
            RoleModel::preset(kind, k, role_size).and_then(|m| generate(&m, p_in, p_out, seed));
        match inst {
            Ok(inst) => {
                *graph_out = boxed(RolesimGraph(inst.graph));
                *truth_out = boxed(RolesimPartition(inst.truth));
                RolesimStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// `1 / ρ(A + A^T)`; infinity for a graph without edges, NaN for null.
#[no_mangle]
pub unsafe extern "C" fn rolesim_beta_max_easy(graph: *const RolesimGraph) -> f64 {
    graph
        .as_ref()
        .map_or(f64::NAN, |g| rolesim::exact::beta_max_easy(&g.0))
}

/// Full-rank similarity. `beta <= 0` selects the automatic value.
#[no_mangle]
pub unsafe extern "C" fn rolesim_full_similarity(
    graph: *const RolesimGraph,
    beta: f64,
    tol: f64,
    max_iter: usize,
    out: *mut *mut RolesimMatrix,
    iterations: *mut usize,
) -> RolesimStatus {
    guard(|| {
        let Some(g) = graph.as_ref() else {
            return null("graph");
        };
        if out.is_null() {
            return null("out");
        }
        let result = resolve_beta(&g.0, beta).and_then(|b| full_similarity(&g.0, b, tol, max_iter));
        match result {
            Ok((s, rep)) => {
                *out = boxed(RolesimMatrix(s));
                if !iterations.is_null() {
                    *iterations = rep.iterations;
                }
                if rep.converged {
                    RolesimStatus::Ok
                } else {
                    set_error(format!(
                        "no convergence after {} iterations",
                        rep.iterations
                    ));
                    RolesimStatus::NotConverged
                }
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn rolesim_matrix_dim(matrix: *const RolesimMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.dim())
}

/// Entry `(i, j)`, NaN when out of range or null.
#[no_mangle]
pub unsafe extern "C" fn rolesim_matrix_get(
    matrix: *const RolesimMatrix,
    i: usize,
    j: usize,
) -> f64 {
    match matrix.as_ref() {
        Some(m) if i < m.0.dim() && j < m.0.dim() => m.0.get(i, j),
        _ => f64::NAN,
    }
}

/// Copies the `n × n` entries row-major into `buf`, which must hold `len ≥ n²` values.
#[no_mangle]
pub unsafe extern "C" fn rolesim_matrix_copy(
    matrix: *const RolesimMatrix,
    buf: *mut f64,
    len: usize,
) -> RolesimStatus {
    guard(|| {
        let Some(m) = matrix.as_ref() else {
            return null("matrix");
        };
        if buf.is_null() {
            return null("buf");
        }
        let n = m.0.dim();
        if len < n * n {
            set_error(format!("buffer holds {len} values, need {}", n * n));
            return RolesimStatus::InvalidArgument;
        }
        for i in 0..n {
            for j in 0..n {
                *buf.add(i * n + j) = m.0.get(i, j);
            }
        }
        RolesimStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn rolesim_matrix_free(matrix: *mut RolesimMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Rank-`rank` similarity factor. `beta <= 0` selects the automatic value.
#[no_mangle]
pub unsafe extern "C" fn rolesim_lowrank_similarity(
    graph: *const RolesimGraph,
    rank: usize,
    beta: f64,
    tol: f64,
    max_iter: usize,
    out: *mut *mut RolesimFactor,
    iterations: *mut usize,
) -> RolesimStatus {
    guard(|| {
        let Some(g) = graph.as_ref() else {
            return null("graph");
        };
        if out.is_null() {
            return null("out");
        }
        let result =
            resolve_beta(&g.0, beta).and_then(|b| lowrank_similarity(&g.0, rank, b, tol, max_iter));
        match result {
            Ok((x, rep)) => {
                *out = boxed(RolesimFactor(x));
                if !iterations.is_null() {
                    *iterations = rep.iterations;
                }
                if rep.converged {
                    RolesimStatus::Ok
                } else {
                    set_error(format!(
                        "no convergence after {} iterations",
                        rep.iterations
                    ));
                    RolesimStatus::NotConverged
                }
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn rolesim_factor_dim(factor: *const RolesimFactor) -> usize {
    factor.as_ref().map_or(0, |f| f.0.dim())
}

/// Number of columns of the factor (the rank bound).
#[no_mangle]
pub unsafe extern "C" fn rolesim_factor_rank(factor: *const RolesimFactor) -> usize {
    factor.as_ref().map_or(0, |f| f.0.rank_bound())
}

/// Entry `(i, j)` of `X X^T`, NaN when out of range or null.
#[no_mangle]
pub unsafe extern "C" fn rolesim_factor_similarity(
    factor: *const RolesimFactor,
    i: usize,
    j: usize,
) -> f64 {
    match factor.as_ref() {
        Some(f) if i < f.0.dim() && j < f.0.dim() => f.0.entry(i, j),
        _ => f64::NAN,
    }
}

/// Copies `X` (`n × r`) row-major into `buf`, which must hold `len ≥ n r` values.
#[no_mangle]
pub unsafe extern "C" fn rolesim_factor_copy(
    factor: *const RolesimFactor,
    buf: *mut f64,
    len: usize,
) -> RolesimStatus {
    guard(|| {
        let Some(f) = factor.as_ref() else {
            return null("factor");
        };
        if buf.is_null() {
            return null("buf");
        }
        let x = f.0.matrix();
        let (n, r) = x.shape();
        if len < n * r {
            set_error(format!("buffer holds {len} values, need {}", n * r));
            return RolesimStatus::InvalidArgument;
        }
        for i in 0..n {
            for j in 0..r {
                *buf.add(i * r + j) = x[(i, j)];
            }
        }
        RolesimStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn rolesim_factor_free(factor: *mut RolesimFactor) {
    if !factor.is_null() {
        drop(Box::from_raw(factor));
    }
}

/// Top-level roles of `graph`. `rank == 0` uses the full-rank similarity;
/// `beta <= 0` selects the automatic value.
#[no_mangle]
pub unsafe extern "C" fn rolesim_extract_roles(
    graph: *const RolesimGraph,
    rank: usize,
    beta: f64,
    resolution: f64,
    seed: u64,
    out: *mut *mut RolesimPartition,
) -> RolesimStatus {
    guard(|| {
        let Some(g) = graph.as_ref() else {
            return null("graph");
        };
        if out.is_null() {
            return null("out");
        }
        let opts = RoleOptions {
            rank: (rank > 0).then_some(rank),
            beta: (beta > 0.0).then_some(beta),
            resolution,
            seed,
            ..RoleOptions::default()
        };
        match extract_roles(&g.0, &opts) {
            Ok(found) => {
                *out = boxed(RolesimPartition(found.hierarchy.top().clone()));
                RolesimStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Partition from `n` labels; label gaps are closed preserving order.
#[no_mangle]
pub unsafe extern "C" fn rolesim_partition_new(
    labels: *const usize,
    n: usize,
    out: *mut *mut RolesimPartition,
) -> RolesimStatus {
    guard(|| {
        if labels.is_null() || out.is_null() {
            return null("argument");
        }
        let raw = std::slice::from_raw_parts(labels, n);
        match Partition::from_raw(raw) {
            Ok(p) => {
                *out = boxed(RolesimPartition(p));
                RolesimStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn rolesim_partition_load(
    path: *const c_char,
    out: *mut *mut RolesimPartition,
) -> RolesimStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match io::load_partition(path) {
            Ok(p) => {
                *out = boxed(RolesimPartition(p));
                RolesimStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn rolesim_partition_len(partition: *const RolesimPartition) -> usize {
    partition.as_ref().map_or(0, |p| p.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn rolesim_partition_cluster_count(
    partition: *const RolesimPartition,
) -> usize {
    partition.as_ref().map_or(0, |p| p.0.cluster_count())
}

/// Copies the labels into `buf`, which must hold `len ≥ n` values.
#[no_mangle]
pub unsafe extern "C" fn rolesim_partition_copy(
    partition: *const RolesimPartition,
    buf: *mut usize,
    len: usize,
) -> RolesimStatus {
    guard(|| {
        let Some(p) = partition.as_ref() else {
            return null("partition");
        };
        if buf.is_null() {
            return null("buf");
        }
        let labels = p.0.labels();
        if len < labels.len() {
            set_error(format!("buffer holds {len} labels, need {}", labels.len()));
            return RolesimStatus::InvalidArgument;
        }
        ptr::copy_nonoverlapping(labels.as_ptr(), buf, labels.len());
        RolesimStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn rolesim_partition_free(partition: *mut RolesimPartition) {
    if !partition.is_null() {
        drop(Box::from_raw(partition));
    }
}

/// Normalized mutual information of two partitions of the same nodes.
#[no_mangle]
pub unsafe extern "C" fn rolesim_nmi(
    a: *const RolesimPartition,
    b: *const RolesimPartition,
    out: *mut f64,
) -> RolesimStatus {
    guard(|| {
        let (Some(a), Some(b)) = (a.as_ref(), b.as_ref()) else {
            return null("partition");
        };
        if out.is_null() {
            return null("out");
        }
        match nmi(&a.0, &b.0) {
            Ok(v) => {
                *out = v;
                RolesimStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
