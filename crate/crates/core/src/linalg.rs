//! Small dense vector helpers. Points and directions are plain `Vec<f64>`;
//! nalgebra is used only for factorizations.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += s * x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn to_matrix(rows: &[Vec<f64>], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// Solves the square system `rows * x = rhs`; `None` when the system is
/// numerically singular (smallest singular value below `1e-10` times the largest).
pub fn solve_square(rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    if rows.len() != n {
        return None;
    }
    if n == 0 {
        return Some(Vec::new());
    }
    let m = to_matrix(rows, n);
    let svd = m.clone().svd(false, false);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin <= 1e-10 * smax {
        return None;
    }
    let x = m.lu().solve(&DVector::from_column_slice(rhs))?;
    Some(x.iter().copied().collect())
}

/// Orthonormal basis of the null space of the `rows` matrix (each row has
/// `cols` entries). Singular values below `rel_tol * max(1, smax)` count as zero.
pub fn null_space(rows: &[Vec<f64>], cols: usize, rel_tol: f64) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return (0..cols)
            .map(|i| {
                let mut e = vec![0.0; cols];
                e[i] = 1.0;
                e
            })
            .collect();
    }
    // Pad to at least `cols` rows so the thin SVD yields a full V.
    let mut padded: Vec<Vec<f64>> = rows.to_vec();
    while padded.len() < cols {
        padded.push(vec![0.0; cols]);
    }
    let m = to_matrix(&padded, cols);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.max().max(1.0);
    let mut basis = Vec::new();
    for (k, s) in sv.iter().enumerate() {
        if *s <= rel_tol * smax {
            basis.push(v_t.row(k).iter().copied().collect());
        }
    }
    basis
}

/// Numerical rank of the row set.
pub fn rank(rows: &[Vec<f64>], cols: usize, rel_tol: f64) -> usize {
    cols - null_space(rows, cols, rel_tol).len()
}

/// Orthonormal basis of the row space (complement of [`null_space`]).
pub fn row_space(rows: &[Vec<f64>], cols: usize, rel_tol: f64) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let mut padded: Vec<Vec<f64>> = rows.to_vec();
    while padded.len() < cols {
        padded.push(vec![0.0; cols]);
    }
    let m = to_matrix(&padded, cols);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.max().max(1.0);
    sv.iter()
        .enumerate()
        .filter(|(_, s)| **s > rel_tol * smax)
        .map(|(k, _)| v_t.row(k).iter().copied().collect())
        .collect()
}

/// Iterates over all `k`-subsets of `0..n` in lexicographic order.
/// Lattice over the box `[lo, hi]` with spacing at most `h` per axis, both
/// ends included.
pub fn box_grid(lo: &[f64], hi: &[f64], h: f64) -> Vec<Vec<f64>> {
    let counts: Vec<usize> = lo
        .iter()
        .zip(hi)
        .map(|(l, u)| ((u - l) / h - 1e-9).ceil().max(0.0) as usize + 1)
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; lo.len()];
    loop {
        out.push(
            (0..lo.len())
                .map(|i| {
                    if counts[i] == 1 {
                        lo[i]
                    } else {
                        lo[i] + (hi[i] - lo[i]) * idx[i] as f64 / (counts[i] - 1) as f64
                    }
                })
                .collect(),
        );
        let mut k = 0;
        while k < lo.len() {
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == lo.len() {
            return out;
        }
    }
}

pub fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return;
            }
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc.min(usize::MAX as u128) as usize
}
