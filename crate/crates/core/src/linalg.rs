use nalgebra::{DMatrix, DVector};

/// Right singular vector of `a` for its smallest singular value, with that
/// singular value. Wide matrices are zero-padded to square so the null
/// direction is part of the decomposition.
pub(crate) fn smallest_right_singular(a: &DMatrix<f64>) -> (DVector<f64>, f64) {
    let cols = a.ncols();
    let a = if a.nrows() < cols {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.rows_mut(0, a.nrows()).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(k, s)| (k, *s))
        .expect("non-empty matrix");
    (v_t.row(k).transpose(), s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn null_vector_of_rank_deficient() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0]);
        let (v, s) = smallest_right_singular(&a);
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[2].abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn wide_matrix_is_padded() {
        let a = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let (v, s) = smallest_right_singular(&a);
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(3.0 * v[0] + 4.0 * v[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
    }
}
