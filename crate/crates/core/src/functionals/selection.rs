//! Finite form of the row-selection argument behind the compactness
//! diagonal: a nonnegative matrix with bounded column sums has a row that is
//! small on many columns.

use crate::{Error, Result};

/// How many small columns a selection is guaranteed to find.
///
/// A column summing to at most `k_bound` has at most `ceil(k_bound/eps) - 1`
/// entries above `eps`, so the matrix holds at most
/// `cols * (ceil(k_bound/eps) - 1)` large entries and the best row carries at
/// most the floor of their average. Everything else in that row is small.
pub fn selection_guarantee(rows: usize, cols: usize, k_bound: f64, eps: f64) -> usize {
    if rows == 0 {
        return 0;
    }
    let per_col = ((k_bound / eps).ceil() as usize).saturating_sub(1);
    cols.saturating_sub(cols * per_col / rows)
}

/// Finds a row `j0` and at least `min_card` columns on which
/// `a[j0][k] <= eps`. Picks the row with the most small entries
/// (lowest index on ties).
///
/// Errors with `HypothesisFailed` when some column sum exceeds `k_bound`,
/// and with `SelectionInfeasible` when even the best row has fewer than
/// `min_card` small entries, which can only happen when `min_card` exceeds
/// [`selection_guarantee`].
pub fn select_small_row(
    a: &[Vec<f64>],
    k_bound: f64,
    eps: f64,
    min_card: usize,
) -> Result<(usize, Vec<usize>)> {
    if a.is_empty() || a[0].is_empty() {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let cols = a[0].len();
    for (j, row) in a.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::InvalidParameter(format!("row {j} has ragged length")));
        }
        if row.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidParameter(format!("row {j} has a negative entry")));
        }
    }
    for k in 0..cols {
        let sum: f64 = a.iter().map(|row| row[k]).sum();
        if sum > k_bound * (1.0 + 1e-12) {
            return Err(Error::HypothesisFailed {
                col: k,
                sum,
                bound: k_bound,
            });
        }
    }
    let mut best_row = 0usize;
    let mut best_count = 0usize;
    for (j, row) in a.iter().enumerate() {
        let count = row.iter().filter(|&&v| v <= eps).count();
        if count > best_count {
            best_row = j;
            best_count = count;
        }
    }
    if best_count < min_card {
        return Err(Error::SelectionInfeasible {
            best: best_count,
            requested: min_card,
        });
    }
    let cols_found: Vec<usize> = a[best_row]
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= eps)
        .map(|(k, _)| k)
        .collect();
    Ok((best_row, cols_found))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_takes_first_row_and_all_columns() {
        let a = vec![vec![0.0; 5]; 4];
        let (j0, cols) = select_small_row(&a, 1.0, 0.5, 5).unwrap();
        assert_eq!(j0, 0);
        assert_eq!(cols, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn identity_like_matrix_spares_the_diagonal() {
        let n = 6;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..n).map(|k| if j == k { 1.0 } else { 0.0 }).collect())
            .collect();
        let (j0, cols) = select_small_row(&a, 1.0, 0.5, n - 1).unwrap();
        assert_eq!(cols.len(), n - 1);
        assert!(!cols.contains(&j0));
    }

    #[test]
    fn violated_column_sum_is_reported() {
        let a = vec![vec![0.7, 0.0], vec![0.6, 0.0]];
        let err = select_small_row(&a, 1.0, 0.5, 1).unwrap_err();
        assert!(matches!(err, Error::HypothesisFailed { col: 0, .. }));
    }
}
