//! Dense symmetric linear algebra backed by nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, DrlError, Result};
use crate::matrix::Matrix;

/// Eigenpairs of a symmetric matrix, eigenvalues descending. Column `i` of
/// `vectors` pairs with `values[i]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

fn to_dmatrix(a: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

fn check_square(a: &Matrix) -> Result<()> {
    if a.rows() != a.cols() || a.rows() == 0 {
        return Err(DrlError::ShapeMismatch {
            expected: "non-empty square matrix".into(),
            found: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    if !a.is_finite() {
        return Err(DrlError::NonFinite("symmetric matrix"));
    }
    Ok(())
}

/// Full eigendecomposition. Each eigenvector is normalized so that its
/// largest-magnitude component is positive (lowest index wins ties).
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    check_square(a)?;
    let n = a.rows();
    let eig = nalgebra::SymmetricEigen::new(to_dmatrix(a));

    let mut order: Vec<usize> = (0..n).collect();
    // Stable: equal eigenvalues keep the solver's order.
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let mut vectors = Matrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (out_col, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let mut pivot = 0;
        for r in 1..n {
            if col[r].abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors.set(r, out_col, sign * col[r]);
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Largest over smallest eigenvalue; infinite when not positive definite.
pub fn condition_number(eigenvalues: &[f64]) -> f64 {
    let max = eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min = eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `A x = b` for symmetric positive definite `A`, rejecting systems
/// whose condition number exceeds `max_condition`.
pub fn solve_spd(a: &Matrix, b: &[f64], max_condition: f64) -> Result<Vec<f64>> {
    check_square(a)?;
    if b.len() != a.rows() {
        return Err(invalid(format!("right-hand side has {} entries, expected {}", b.len(), a.rows())));
    }
    let dm = to_dmatrix(a);
    let values = nalgebra::SymmetricEigen::new(dm.clone()).eigenvalues;
    let condition = condition_number(values.as_slice());
    if !(condition <= max_condition) {
        return Err(DrlError::IllConditioned { condition });
    }
    let chol = dm.cholesky().ok_or(DrlError::IllConditioned { condition: f64::INFINITY })?;
    Ok(chol.solve(&DVector::from_column_slice(b)).iter().copied().collect())
}
