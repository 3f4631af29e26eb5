//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Matrix whose columns are the given vectors.
pub fn columns(cols: &[&[f64]]) -> DMatrix<f64> {
    let d = cols.first().map_or(0, |c| c.len());
    DMatrix::from_fn(d, cols.len(), |i, j| cols[j][i])
}

pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let sv = m.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > tol * top.max(1.0)).count()
}

/// Σ w_i x_i x_iᵀ.
pub fn weighted_gram(points: &[Vec<f64>], weights: &[f64], d: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(d, d);
    for (x, &w) in points.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let v = DVector::from_column_slice(&x[..d]);
        a.ger(w, &v, &v, 1.0);
    }
    a
}

/// Moore–Penrose pseudo-inverse of a symmetric PSD matrix via eigendecomposition.
pub fn sym_pinv(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cut = rel_tol * top.max(f64::MIN_POSITIVE);
    let n = a.nrows();
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let l = eig.eigenvalues[k];
        if l > cut {
            let v = eig.eigenvectors.column(k);
            out.ger(1.0 / l, &v, &v, 1.0);
        }
    }
    out
}

/// ‖y‖²_M for symmetric M.
pub fn quad(m: &DMatrix<f64>, y: &[f64]) -> f64 {
    let v = DVector::from_column_slice(y);
    v.dot(&(m * &v))
}

/// True if y lies in the column space of the PSD matrix `a` (relative residual test).
pub fn in_range(a: &DMatrix<f64>, pinv: &DMatrix<f64>, y: &[f64], tol: f64) -> bool {
    let v = DVector::from_column_slice(y);
    let proj = a * (pinv * &v);
    (proj - &v).norm() <= tol * v.norm().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_rank_deficient() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let p = sym_pinv(&a, 1e-12);
        assert!((p[(0, 0)] - 0.5).abs() < 1e-12);
        assert_eq!(p[(1, 1)], 0.0);
        assert!(in_range(&a, &p, &[1.0, 0.0], 1e-9));
        assert!(!in_range(&a, &p, &[0.0, 1.0], 1e-9));
    }

    #[test]
    fn rank_counts() {
        assert_eq!(rank(&[vec![1.0, 0.0], vec![2.0, 0.0]], 1e-10), 1);
        assert_eq!(rank(&[vec![1.0, 0.0], vec![0.0, 3.0]], 1e-10), 2);
    }
}
