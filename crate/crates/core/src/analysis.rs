//! Evaluation: normalized mutual information, rank sweeps and the
//! `(p_in, p_out)` experiment grid.

use rayon::prelude::*;

use crate::benchgen::{generate, RoleModel};
use crate::error::{Error, Result};
use crate::exact::{full_similarity, Beta, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::graph::{DirectedGraph, Partition};
use crate::lowrank::lowrank_similarity;
use crate::rng;
use crate::roles::{extract_roles, RoleOptions, DEFAULT_RANK};

/// Drop ratio a rank must exceed to count as a knee.
pub const KNEE_RATIO: f64 = 10.0;
const RANK_SWEEP_MAX_DIM: usize = 2000;
/// Step norms below this fraction of `||S*||_F` are treated as roundoff.
const STEP_NORM_FLOOR: f64 = 1e-13;

/// Normalized mutual information `2 I(a;b) / (H(a) + H(b))`, natural logs.
///
/// Two single-cluster partitions score 1; a single-cluster partition against
/// any other scores 0.
pub fn nmi(a: &Partition, b: &Partition) -> Result<f64> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::domain(format!(
            "partitions cover {} and {} nodes",
            n,
            b.len()
        )));
    }
    let (ka, kb) = (a.cluster_count(), b.cluster_count());
    let mut joint = vec![0usize; ka * kb];
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        joint[x * kb + y] += 1;
    }
    let nf = n as f64;
    let entropy = |sizes: &[usize]| -> f64 {
        sizes
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / nf;
                -p * p.ln()
            })
            .sum()
    };
    let (sa, sb) = (a.cluster_sizes(), b.cluster_sizes());
    let (ha, hb) = (entropy(&sa), entropy(&sb));
    match (ha == 0.0, hb == 0.0) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x * kb + y];
            if c > 0 {
                let c = c as f64;
                mi += c / nf * (c * nf / (sa[x] as f64 * sb[y] as f64)).ln();
            }
        }
    }
    Ok((2.0 * mi / (ha + hb)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSweepRow {
    pub r: usize,
    /// `||S* - S^(r)||_F`
    pub full_gap: f64,
    /// `||S^(r) - S^(r+1)||_F`
    pub step_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSweepReport {
    pub rows: Vec<RankSweepRow>,
    pub knee: Option<usize>,
    /// Ranks whose low-rank iteration hit `max_iter`.
    pub unconverged: Vec<usize>,
}

/// Smallest `r` maximizing `step_norm(r-1) / step_norm(r)`, if that maximum
/// exceeds [`KNEE_RATIO`]. Norms under `floor` count as `floor`.
pub fn detect_knee(rows: &[RankSweepRow], floor: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for pair in rows.windows(2) {
        let prev = pair[0].step_norm.max(floor);
        let cur = pair[1].step_norm.max(floor);
        let ratio = if cur > 0.0 { prev / cur } else { 0.0 };
        if best.is_none_or(|(_, b)| ratio > b) {
            best = Some((pair[1].r, ratio));
        }
    }
    best.filter(|&(_, ratio)| ratio > KNEE_RATIO)
        .map(|(r, _)| r)
}

/// Distance of the rank-`r` similarity to the full one, and between
/// consecutive ranks, for `r = 1..=r_max`.
pub fn rank_sweep(
    a: &DirectedGraph,
    r_max: usize,
    beta: Beta,
    tol: f64,
) -> Result<RankSweepReport> {
    let n = a.node_count();
    if n > RANK_SWEEP_MAX_DIM {
        return Err(Error::Capability(format!(
            "rank sweep needs the dense similarity; n = {n} exceeds {RANK_SWEEP_MAX_DIM}"
        )));
    }
    if r_max == 0 || r_max >= n {
        return Err(Error::domain(format!(
            "r_max must be in 1..{n} (needs rank r_max + 1 ≤ n), got {r_max}"
        )));
    }
    let (full, rep) = full_similarity(a, beta, tol, DEFAULT_MAX_ITER)?;
    if !rep.converged {
        return Err(Error::Numerical(format!(
            "full-rank similarity did not converge in {} steps",
            rep.iterations
        )));
    }
    let factors: Vec<_> = (1..=r_max + 1)
        .into_par_iter()
        .map(|r| lowrank_similarity(a, r, beta, tol, DEFAULT_MAX_ITER))
        .collect::<Result<_>>()?;

    let unconverged: Vec<usize> = factors
        .iter()
        .enumerate()
        .filter(|(_, (_, rep))| !rep.converged)
        .map(|(i, _)| i + 1)
        .collect();
    if !unconverged.is_empty() {
        log::warn!("low-rank iteration did not converge for ranks {unconverged:?}");
    }

    let rows: Vec<RankSweepRow> = (0..r_max)
        .map(|i| {
            let (x, _) = &factors[i];
            let (next, _) = &factors[i + 1];
            RankSweepRow {
                r: i + 1,
                full_gap: (full.as_matrix() - x.materialize().as_matrix()).norm(),
                step_norm: x.distance(next),
            }
        })
        .collect();
    let knee = detect_knee(&rows, STEP_NORM_FLOOR * full.frobenius_norm());
    Ok(RankSweepReport {
        rows,
        knee,
        unconverged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub step: f64,
    pub realizations: usize,
    pub rank: usize,
    pub seed_base: u64,
    pub resolution: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            step: 0.05,
            realizations: 20,
            rank: DEFAULT_RANK,
            seed_base: 0,
            resolution: 1.0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmiCell {
    pub p_in: f64,
    pub p_out: f64,
    pub nmi_full: f64,
    pub nmi_lowrank: f64,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmiGrid {
    pub step: f64,
    /// Ordered by `p_in`, then `p_out`.
    pub cells: Vec<NmiCell>,
}

/// Number of grid intervals when `step` divides 1.
pub fn grid_divisions(step: f64) -> Result<usize> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::domain(format!(
            "grid step must be in (0, 1], got {step}"
        )));
    }
    let m = (1.0 / step).round();
    if (m * step - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("grid step {step} does not divide 1")));
    }
    Ok(m as usize)
}

/// Seed for one realization of one grid cell.
pub fn cell_seed(seed_base: u64, in_index: usize, out_index: usize, realization: usize) -> u64 {
    rng::hash_words(&[
        seed_base,
        in_index as u64,
        out_index as u64,
        realization as u64,
    ])
}

/// Top-level NMI of the full-rank and rank-`r` pipelines on one instance.
pub fn realization_nmi(
    model: &RoleModel,
    p_in: f64,
    p_out: f64,
    seed: u64,
    cfg: &GridConfig,
) -> Result<(f64, f64)> {
    let inst = generate(model, p_in, p_out, seed)?;
    let base = RoleOptions {
        rank: None,
        beta: None,
        resolution: cfg.resolution,
        seed,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
    };
    let full = extract_roles(&inst.graph, &base)?;
    let low = extract_roles(
        &inst.graph,
        &RoleOptions {
            rank: Some(cfg.rank),
            ..base
        },
    )?;
    Ok((
        nmi(&inst.truth, full.hierarchy.top())?,
        nmi(&inst.truth, low.hierarchy.top())?,
    ))
}

/// Mean NMI of both pipelines against the planted roles over a square grid
/// of `(p_in, p_out)` values.
///
/// Realizations run in parallel on the current rayon pool; results are
/// reduced in a fixed order, so the output does not depend on scheduling.
pub fn nmi_grid(model: &RoleModel, cfg: &GridConfig) -> Result<NmiGrid> {
    let m = grid_divisions(cfg.step)?;
    if cfg.realizations == 0 {
        return Err(Error::domain("need at least one realization per cell"));
    }
    let p = |i: usize| i as f64 / m as f64;
    let jobs: Vec<(usize, usize, usize)> = (0..=m)
        .flat_map(|i| (0..=m).flat_map(move |j| (0..cfg.realizations).map(move |k| (i, j, k))))
        .collect();
    let scores: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(i, j, k)| {
            realization_nmi(model, p(i), p(j), cell_seed(cfg.seed_base, i, j, k), cfg)
        })
        .collect::<Result<_>>()?;

    let cells = scores
        .chunks(cfg.realizations)
        .zip(jobs.chunks(cfg.realizations))
        .map(|(chunk, ids)| {
            let count = chunk.len() as f64;
            let (f, l) = chunk
                .iter()
                .fold((0.0, 0.0), |(f, l), &(a, b)| (f + a, l + b));
            NmiCell {
                p_in: p(ids[0].0),
                p_out: p(ids[0].1),
                nmi_full: f / count,
                nmi_lowrank: l / count,
                realizations: chunk.len(),
            }
        })
        .collect();
    Ok(NmiGrid {
        step: cfg.step,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(labels: &[usize]) -> Partition {
        Partition::new(labels.to_vec()).unwrap()
    }

    #[test]
    fn nmi_examples() {
        let a = part(&[0, 0, 1, 1]);
        assert_eq!(nmi(&a, &a).unwrap(), 1.0);
        let b = part(&[0, 1, 0, 1]);
        assert!(nmi(&a, &b).unwrap().abs() < 1e-15);
        let one = part(&[0, 0, 0, 0]);
        assert_eq!(nmi(&one, &one).unwrap(), 1.0);
        assert_eq!(nmi(&one, &a).unwrap(), 0.0);
        assert_eq!(nmi(&a, &one).unwrap(), 0.0);
        assert!(nmi(&a, &part(&[0, 0, 1])).is_err());
    }

    #[test]
    fn nmi_hand_value() {
        // {0,1,2 | 3} against {0,1 | 2,3}
        let a = part(&[0, 0, 0, 1]);
        let b = part(&[0, 0, 1, 1]);
        let h_a = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        let h_b = 2f64.ln();
        // joint cells: (0,0)=2, (0,1)=1, (1,1)=1
        let mi = 0.5 * (2.0f64 * 4.0 / (3.0 * 2.0)).ln()
            + 0.25 * (1.0f64 * 4.0 / (3.0 * 2.0)).ln()
            + 0.25 * (1.0f64 * 4.0 / (1.0 * 2.0)).ln();
        let expected = 2.0 * mi / (h_a + h_b);
        assert!((nmi(&a, &b).unwrap() - expected).abs() < 1e-14);
    }

    fn row(r: usize, step: f64) -> RankSweepRow {
        RankSweepRow {
            r,
            full_gap: 0.0,
            step_norm: step,
        }
    }

    #[test]
    fn knee_detection() {
        let rows = [row(1, 10.0), row(2, 9.0), row(3, 0.5), row(4, 0.4)];
        assert_eq!(detect_knee(&rows, 0.0), Some(3));
        let flat = [row(1, 10.0), row(2, 8.0), row(3, 6.0)];
        assert_eq!(detect_knee(&flat, 0.0), None);
        let exact = [row(1, 5.0), row(2, 5.0), row(3, 0.0), row(4, 0.0)];
        assert_eq!(detect_knee(&exact, 1e-12), Some(3));
        assert_eq!(detect_knee(&[row(1, 1.0)], 0.0), None);
    }

    #[test]
    fn grid_step_validation() {
        assert_eq!(grid_divisions(0.05).unwrap(), 20);
        assert_eq!(grid_divisions(0.1).unwrap(), 10);
        assert_eq!(grid_divisions(1.0).unwrap(), 1);
        assert!(grid_divisions(0.3).is_err());
        assert!(grid_divisions(0.0).is_err());
    }
}
