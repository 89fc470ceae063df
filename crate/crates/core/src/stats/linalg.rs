//! Householder least squares with in-order rank detection.

use alloc::vec;
use alloc::vec::Vec;

/// Column norm ratio below which a column counts as linearly dependent on the
/// columns before it.
const RANK_TOLERANCE: f64 = 1e-10;

pub(crate) struct LeastSquares {
    /// Indices of the design columns that were kept, in order.
    pub kept: Vec<usize>,
    /// Coefficients of the kept columns.
    pub coefficients: Vec<f64>,
    /// Diagonal of `(X'X)^-1` restricted to the kept columns.
    pub inverse_gram_diag: Vec<f64>,
}

/// Solves `min |X b - y|` for a design given as columns of length `n`.
///
/// Columns whose component orthogonal to the previously kept columns is
/// negligible are dropped; callers that require full rank compare
/// `kept.len()` against the number of columns.
#[allow(clippy::needless_range_loop)]
pub(crate) fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> LeastSquares {
    let n = y.len();
    let p = columns.len();
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut rhs = y.to_vec();
    let mut kept = Vec::new();
    let mut rank = 0;

    for k in 0..p {
        if rank >= n {
            break;
        }
        let original = libm::sqrt(columns[k].iter().map(|v| v * v).sum::<f64>());
        let tail = libm::sqrt(a[k][rank..].iter().map(|v| v * v).sum::<f64>());
        if original == 0.0 || tail <= RANK_TOLERANCE * original {
            continue;
        }
        let alpha = if a[k][rank] > 0.0 { -tail } else { tail };
        let mut v: Vec<f64> = a[k][rank..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |col: &mut [f64]| {
            let s: f64 = v.iter().zip(&col[rank..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * s / vnorm2;
            for (c, vi) in col[rank..].iter_mut().zip(&v) {
                *c -= f * vi;
            }
        };
        for col in a.iter_mut().skip(k + 1) {
            reflect(col);
        }
        reflect(&mut rhs);
        a[k][rank] = alpha;
        for x in a[k][rank + 1..].iter_mut() {
            *x = 0.0;
        }
        kept.push(k);
        rank += 1;
    }

    // R is rank x rank upper triangular: R[i][j] = a[kept[j]][i].
    let r = |i: usize, j: usize| a[kept[j]][i];
    let mut coefficients = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut s = rhs[i];
        for j in i + 1..rank {
            s -= r(i, j) * coefficients[j];
        }
        coefficients[i] = s / r(i, i);
    }

    // Rows of R^-1; diag((X'X)^-1) = row norms squared of R^-1.
    let mut inv = vec![vec![0.0; rank]; rank];
    for j in 0..rank {
        inv[j][j] = 1.0 / r(j, j);
        for i in (0..j).rev() {
            let mut s = 0.0;
            for m in i + 1..=j {
                s += r(i, m) * inv[m][j];
            }
            inv[i][j] = -s / r(i, i);
        }
    }
    let inverse_gram_diag = inv
        .iter()
        .map(|row| row.iter().map(|v| v * v).sum())
        .collect();

    LeastSquares {
        kept,
        coefficients,
        inverse_gram_diag,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_square_system() {
        // [1 1; 1 2] b = [3; 5] -> b = (1, 2)
        let cols = vec![vec![1.0, 1.0], vec![1.0, 2.0]];
        let ls = least_squares(&cols, &[3.0, 5.0]);
        assert_eq!(ls.kept, vec![0, 1]);
        assert!((ls.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((ls.coefficients[1] - 2.0).abs() < 1e-12);
        // (X'X)^-1 = [5 -3; -3 2]
        assert!((ls.inverse_gram_diag[0] - 5.0).abs() < 1e-10);
        assert!((ls.inverse_gram_diag[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn drops_dependent_columns() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let cols = vec![vec![1.0; 4], x.clone(), x.iter().map(|v| 2.0 * v).collect()];
        let ls = least_squares(&cols, &[1.0, 3.0, 5.0, 7.0]);
        assert_eq!(ls.kept, vec![0, 1]);
        assert!((ls.coefficients[0] + 1.0).abs() < 1e-12);
        assert!((ls.coefficients[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_column_dropped() {
        let cols = vec![vec![0.0; 3], vec![1.0, 1.0, 1.0]];
        let ls = least_squares(&cols, &[2.0, 2.0, 2.0]);
        assert_eq!(ls.kept, vec![1]);
        assert!((ls.coefficients[0] - 2.0).abs() < 1e-12);
    }
}
