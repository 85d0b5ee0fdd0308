//! Text file formats.
//!
//! * edge list: optional `#nodes N` line, then `src<TAB>dst[<TAB>weight]`
//! * partition: `node<TAB>label`
//! * dense matrix: `#dim n`, then one comma-separated row per line
//! * low-rank factor: `#dim n r`, then the `n` rows of `X`
//! * convergence trace: `#converged BOOL`, header `iteration,residual`
//! * rank sweep: `#knee R|none`, header `r,full_gap,step_norm`
//! * NMI grid: header `p_in,p_out,nmi_full,nmi_lowrank,n_realizations`
//! * hierarchy: one partition file per level plus an index file
//!
//! Lines starting with `#` are comments unless they carry one of the
//! directives above. Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::analysis::{NmiGrid, RankSweepReport};
use crate::error::{Error, Result};
use crate::exact::ConvergenceReport;
use crate::graph::{DirectedGraph, Partition};
use crate::lowrank::LowRankFactor;
use crate::matrix::DenseSymMatrix;
use crate::roles::Hierarchy;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Non-empty lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    field: &str,
    what: &str,
) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::parse(path, line, format!("invalid {what} {field:?}")))
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<DirectedGraph> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    for (no, line) in lines(&text) {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(count) = rest.trim().strip_prefix("nodes") {
                declared = Some(parse_field(path, no, count.trim(), "node count")?);
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::parse(
                path,
                no,
                format!("expected 2 or 3 fields, found {}", fields.len()),
            ));
        }
        let s: usize = parse_field(path, no, fields[0], "source index")?;
        let d: usize = parse_field(path, no, fields[1], "target index")?;
        let w: f64 = match fields.get(2) {
            Some(f) => parse_field(path, no, f, "weight")?,
            None => 1.0,
        };
        if !w.is_finite() {
            return Err(Error::parse(path, no, format!("non-finite weight {w}")));
        }
        if w < 0.0 {
            return Err(Error::Domain(format!(
                "{}:{no}: negative weight {w}",
                path.display()
            )));
        }
        edges.push((s, d, w));
    }
    let implied = edges
        .iter()
        .map(|&(s, d, _)| s.max(d) + 1)
        .max()
        .unwrap_or(0);
    let n = match declared {
        Some(n) if n < implied => {
            return Err(Error::Domain(format!(
                "{}: #nodes {n} but edges reference node {}",
                path.display(),
                implied - 1
            )))
        }
        Some(n) => n,
        None => implied,
    };
    DirectedGraph::new(n, edges).map_err(|e| match e {
        Error::Domain(msg) => Error::Domain(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn edge_list_string(g: &DirectedGraph) -> String {
    let mut out = format!("#nodes {}\n", g.node_count());
    for &(s, d, w) in g.edges() {
        writeln!(out, "{s}\t{d}\t{w}").unwrap();
    }
    out
}

pub fn save_edge_list(g: &DirectedGraph, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &edge_list_string(g))
}

/// Loads `node<TAB>label` lines. Every node in `0..n` must appear exactly
/// once; gaps in the label ids are closed with a warning.
pub fn load_partition(path: impl AsRef<Path>) -> Result<Partition> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut pairs = Vec::new();
    for (no, line) in lines(&text) {
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                path,
                no,
                format!("expected 2 fields, found {}", fields.len()),
            ));
        }
        let node: usize = parse_field(path, no, fields[0], "node index")?;
        let label: usize = parse_field(path, no, fields[1], "label")?;
        pairs.push((node, label, no));
    }
    let n = pairs.len();
    let mut raw = vec![usize::MAX; n];
    for &(node, label, no) in &pairs {
        if node >= n {
            return Err(Error::parse(
                path,
                no,
                format!("node {node} out of range for {n} nodes"),
            ));
        }
        if raw[node] != usize::MAX {
            return Err(Error::parse(path, no, format!("node {node} listed twice")));
        }
        raw[node] = label;
    }
    match Partition::new(raw.clone()) {
        Ok(p) => Ok(p),
        Err(_) if n > 0 => {
            log::warn!(
                "{}: cluster ids are not contiguous; relabeling",
                path.display()
            );
            Partition::from_raw(&raw)
        }
        Err(e) => Err(e),
    }
}

pub fn partition_string(p: &Partition) -> String {
    let mut out = String::new();
    for (i, l) in p.labels().iter().enumerate() {
        writeln!(out, "{i}\t{l}").unwrap();
    }
    out
}

pub fn save_partition(p: &Partition, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &partition_string(p))
}

fn parse_dim_header(path: &Path, text: &str, arity: usize) -> Result<Vec<usize>> {
    let Some((no, first)) = lines(text).next() else {
        return Err(Error::parse(path, 1, "missing #dim header"));
    };
    let Some(rest) = first.strip_prefix("#dim") else {
        return Err(Error::parse(path, no, "missing #dim header"));
    };
    let dims: Vec<usize> = rest
        .split_whitespace()
        .map(|f| parse_field(path, no, f, "dimension"))
        .collect::<Result<_>>()?;
    if dims.len() != arity {
        return Err(Error::parse(path, no, format!("#dim needs {arity} values")));
    }
    Ok(dims)
}

fn parse_rows(path: &Path, text: &str, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(rows, cols);
    let mut count = 0;
    for (no, line) in lines(text).filter(|(_, l)| !l.starts_with('#')) {
        if count == rows {
            return Err(Error::parse(path, no, "more rows than declared"));
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|f| parse_field(path, no, f.trim(), "number"))
            .collect::<Result<_>>()?;
        if values.len() != cols {
            return Err(Error::parse(
                path,
                no,
                format!("expected {cols} values, found {}", values.len()),
            ));
        }
        for (j, v) in values.into_iter().enumerate() {
            m[(count, j)] = v;
        }
        count += 1;
    }
    if count != rows {
        return Err(Error::parse(
            path,
            text.lines().count(),
            format!("expected {rows} rows, found {count}"),
        ));
    }
    Ok(m)
}

fn rows_string(m: &DMatrix<f64>, out: &mut String) {
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
}

pub fn dense_string(m: &DenseSymMatrix) -> String {
    let mut out = format!("#dim {}\n", m.dim());
    rows_string(m.as_matrix(), &mut out);
    out
}

pub fn save_dense(m: &DenseSymMatrix, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &dense_string(m))
}

pub fn load_dense(path: impl AsRef<Path>) -> Result<DenseSymMatrix> {
    let path = path.as_ref();
    let text = read(path)?;
    let n = parse_dim_header(path, &text, 1)?[0];
    DenseSymMatrix::new(parse_rows(path, &text, n, n)?)
}

pub fn factor_string(x: &LowRankFactor) -> String {
    let mut out = format!("#dim {} {}\n", x.dim(), x.rank_bound());
    rows_string(x.matrix(), &mut out);
    out
}

pub fn save_factor(x: &LowRankFactor, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &factor_string(x))
}

pub fn load_factor(path: impl AsRef<Path>) -> Result<LowRankFactor> {
    let path = path.as_ref();
    let text = read(path)?;
    let dims = parse_dim_header(path, &text, 2)?;
    LowRankFactor::new(parse_rows(path, &text, dims[0], dims[1])?)
}

pub fn convergence_string(rep: &ConvergenceReport) -> String {
    let mut out = format!("#converged {}\niteration,residual\n", rep.converged);
    for (k, r) in rep.residuals.iter().enumerate() {
        writeln!(out, "{},{r}", k + 1).unwrap();
    }
    out
}

pub fn save_convergence(rep: &ConvergenceReport, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &convergence_string(rep))
}

pub fn rank_sweep_string(rep: &RankSweepReport) -> String {
    let knee = rep.knee.map_or("none".to_string(), |k| k.to_string());
    let mut out = format!("#knee {knee}\nr,full_gap,step_norm\n");
    for row in &rep.rows {
        writeln!(out, "{},{},{}", row.r, row.full_gap, row.step_norm).unwrap();
    }
    out
}

pub fn save_rank_sweep(rep: &RankSweepReport, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &rank_sweep_string(rep))
}

pub fn nmi_grid_string(grid: &NmiGrid) -> String {
    let mut out = String::from("p_in,p_out,nmi_full,nmi_lowrank,n_realizations\n");
    for c in &grid.cells {
        writeln!(
            out,
            "{},{},{},{},{}",
            c.p_in, c.p_out, c.nmi_full, c.nmi_lowrank, c.realizations
        )
        .unwrap();
    }
    out
}

pub fn save_nmi_grid(grid: &NmiGrid, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &nmi_grid_string(grid))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<prefix>.level<i>.tsv` per level and the index `<prefix>.levels.tsv`.
/// Returns the index path.
pub fn save_hierarchy(h: &Hierarchy, prefix: impl AsRef<Path>) -> Result<PathBuf> {
    let prefix = prefix.as_ref();
    let mut index = String::from("#level\tfile\tclusters\n");
    for (i, level) in h.levels().iter().enumerate() {
        let path = with_suffix(prefix, &format!(".level{i}.tsv"));
        save_partition(level, &path)?;
        let name = path
            .file_name()
            .expect("prefix has a file name")
            .to_string_lossy();
        writeln!(index, "{i}\t{name}\t{}", level.cluster_count()).unwrap();
    }
    let index_path = with_suffix(prefix, ".levels.tsv");
    write(&index_path, &index)?;
    Ok(index_path)
}

/// Reads a hierarchy index; level files are resolved next to the index.
pub fn load_hierarchy(index: impl AsRef<Path>) -> Result<Hierarchy> {
    let index = index.as_ref();
    let text = read(index)?;
    let dir = index.parent().unwrap_or(Path::new(""));
    let mut levels = Vec::new();
    for (no, line) in lines(&text).filter(|(_, l)| !l.starts_with('#')) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(index, no, "expected level, file, clusters"));
        }
        let level: usize = parse_field(index, no, fields[0], "level")?;
        if level != levels.len() {
            return Err(Error::parse(
                index,
                no,
                format!("level {level} out of order"),
            ));
        }
        levels.push(load_partition(dir.join(fields[1]))?);
    }
    Hierarchy::new(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn edge_list_examples() {
        let dir = tmp();
        let p = dir.path().join("g.tsv");
        fs::write(&p, "0\t1\t1\n").unwrap();
        let g = load_edge_list(&p).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges(), &[(0, 1, 1.0)]);

        fs::write(&p, "#nodes 3\n").unwrap();
        let g = load_edge_list(&p).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 0));

        fs::write(&p, "# a comment\n0 1\n0 1\n").unwrap();
        assert!(matches!(load_edge_list(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn edge_list_errors() {
        let dir = tmp();
        let p = dir.path().join("g.tsv");
        fs::write(&p, "0\t1\n1\tx\n").unwrap();
        match load_edge_list(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&p, "0\t1\t-2\n").unwrap();
        assert!(matches!(load_edge_list(&p), Err(Error::Domain(_))));
        fs::write(&p, "#nodes 2\n0\t4\n").unwrap();
        assert!(load_edge_list(&p).is_err());
        fs::write(&p, "").unwrap();
        assert!(load_edge_list(&p).is_err());
        assert!(matches!(
            load_edge_list(dir.path().join("missing.tsv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn partition_round_trip_and_gaps() {
        let dir = tmp();
        let p = dir.path().join("p.tsv");
        let part = Partition::new(vec![0, 0, 1]).unwrap();
        save_partition(&part, &p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap().lines().count(), 3);
        assert_eq!(load_partition(&p).unwrap(), part);

        fs::write(&p, "0\t0\n1\t2\n").unwrap();
        assert_eq!(load_partition(&p).unwrap().labels(), &[0, 1]);
        fs::write(&p, "0\t0\n0\t1\n").unwrap();
        assert!(load_partition(&p).is_err());
    }

    #[test]
    fn weights_round_trip_exactly() {
        let dir = tmp();
        let p = dir.path().join("g.tsv");
        let w = 0.1 + 0.2;
        let g = DirectedGraph::new(3, vec![(0, 2, w), (2, 2, 1e-300), (1, 0, 7.0)]).unwrap();
        save_edge_list(&g, &p).unwrap();
        assert_eq!(load_edge_list(&p).unwrap(), g);
    }

    #[test]
    fn dense_and_factor_round_trip() {
        let dir = tmp();
        let m = DenseSymMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[1.0, 1.0 / 3.0, 1.0 / 3.0, 2.0],
        ))
        .unwrap();
        let p = dir.path().join("s.csv");
        save_dense(&m, &p).unwrap();
        assert!(fs::read_to_string(&p).unwrap().starts_with("#dim 2\n"));
        assert_eq!(load_dense(&p).unwrap(), m);

        let x = LowRankFactor::new(DMatrix::from_row_slice(
            3,
            2,
            &[1.5, 0.0, -0.25, 1e-7, 2.0, 3.0],
        ))
        .unwrap();
        let q = dir.path().join("x.csv");
        save_factor(&x, &q).unwrap();
        assert!(fs::read_to_string(&q).unwrap().starts_with("#dim 3 2\n"));
        assert_eq!(load_factor(&q).unwrap(), x);
    }

    #[test]
    fn hierarchy_round_trip() {
        let dir = tmp();
        let h = Hierarchy::new(vec![
            Partition::new(vec![0, 1, 2, 2]).unwrap(),
            Partition::new(vec![0, 0, 1, 1]).unwrap(),
        ])
        .unwrap();
        let index = save_hierarchy(&h, dir.path().join("roles")).unwrap();
        assert!(dir.path().join("roles.level1.tsv").exists());
        assert_eq!(load_hierarchy(&index).unwrap(), h);
    }
}
