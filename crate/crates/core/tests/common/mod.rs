//! Reference computations for integration tests. Plain `Vec` arithmetic only,
//! so they share no code path with the library kernels.

#![allow(dead_code, clippy::needless_range_loop)]

use rolesim::rng::uniform;
use rolesim::DirectedGraph;

pub type Dense = Vec<Vec<f64>>;

pub fn dense(g: &DirectedGraph) -> Dense {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for &(s, d, w) in g.edges() {
        a[s][d] = w;
    }
    a
}

pub fn to_rows(m: &nalgebra::DMatrix<f64>) -> Dense {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn transpose(a: &Dense) -> Dense {
    let n = a.len();
    let m = if n == 0 { 0 } else { a[0].len() };
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            if x != 0.0 {
                for j in 0..m {
                    c[i][j] += x * b[l][j];
                }
            }
        }
    }
    c
}

pub fn add_scaled(acc: &mut Dense, b: &Dense, s: f64) {
    for (ra, rb) in acc.iter_mut().zip(b) {
        for (x, y) in ra.iter_mut().zip(rb) {
            *x += s * y;
        }
    }
}

pub fn frob(a: &Dense) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn rel_diff(a: &Dense, b: &Dense) -> f64 {
    let mut diff = a.clone();
    add_scaled(&mut diff, b, -1.0);
    frob(&diff) / frob(b).max(f64::MIN_POSITIVE)
}

pub fn identity(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// `N_ℓ`: sum of `W W^T` over all words `W` in `{A, A^T}^ℓ`.
pub fn pattern_count_by_words(a: &Dense, ell: usize) -> Dense {
    let n = a.len();
    let at = transpose(a);
    let mut total = vec![vec![0.0; n]; n];
    for word in 0..(1usize << ell) {
        let mut w = identity(n);
        for bit in 0..ell {
            let factor = if word >> bit & 1 == 0 { a } else { &at };
            w = matmul(&w, factor);
        }
        add_scaled(&mut total, &matmul(&w, &transpose(&w)), 1.0);
    }
    total
}

/// Solves `(I - β² (A⊗A + A^T⊗A^T)) vec(S) = vec(A A^T + A^T A)` by Gaussian
/// elimination with partial pivoting.
pub fn direct_solve(a: &Dense, beta: f64) -> Dense {
    let n = a.len();
    let big = n * n;
    let b2 = beta * beta;
    let at = transpose(a);
    let s1 = {
        let mut s = matmul(a, &at);
        add_scaled(&mut s, &matmul(&at, a), 1.0);
        s
    };
    let mut m = vec![vec![0.0; big + 1]; big];
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                for l in 0..n {
                    let col = k * n + l;
                    let gamma = a[i][k] * a[j][l] + a[k][i] * a[l][j];
                    m[row][col] = if row == col { 1.0 } else { 0.0 } - b2 * gamma;
                }
            }
            m[row][big] = s1[i][j];
        }
    }
    for c in 0..big {
        let p = (c..big)
            .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
            .unwrap();
        m.swap(c, p);
        let pivot = m[c][c];
        assert!(pivot.abs() > 1e-14, "singular system");
        for r in c + 1..big {
            let f = m[r][c] / pivot;
            if f != 0.0 {
                for k in c..=big {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    let mut x = vec![0.0; big];
    for r in (0..big).rev() {
        let mut acc = m[r][big];
        for k in r + 1..big {
            acc -= m[r][k] * x[k];
        }
        x[r] = acc / m[r][r];
    }
    (0..n).map(|i| x[i * n..(i + 1) * n].to_vec()).collect()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvalues are
/// sorted descending; eigenvectors are the columns of the second result.
pub fn jacobi_eigen(s: &Dense) -> (Vec<f64>, Dense) {
    let n = s.len();
    let mut a = s.clone();
    let mut v = identity(n);
    let scale = frob(s).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - sn * vkq;
                    v[k][q] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n)
        .map(|k| order.iter().map(|&i| v[k][i]).collect())
        .collect();
    (values, vectors)
}

/// Directed graph with each off-diagonal edge present with probability `p`.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> DirectedGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && uniform(&[0xfeed, seed, i as u64, j as u64]) < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    DirectedGraph::new(n, edges).unwrap()
}

/// Mutual-information based NMI computed from an explicit contingency table.
pub fn nmi_reference(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0.0; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1.0;
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..kb).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let entropy = |c: &[f64]| -> f64 {
        c.iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| -(x / n) * (x / n).ln())
            .sum()
    };
    let (ha, hb) = (entropy(&rows), entropy(&cols));
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    if ha == 0.0 || hb == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for i in 0..ka {
        for j in 0..kb {
            let c = table[i][j];
            if c > 0.0 {
                mi += c / n * (c * n / (rows[i] * cols[j])).ln();
            }
        }
    }
    2.0 * mi / (ha + hb)
}
