//! Thomas-algorithm solver for tridiagonal systems.
//!
//! The discrete flux operators assembled in this crate are diagonally
//! dominant M-matrices, for which elimination without pivoting is
//! backward stable; the solver checks pivots anyway and reports a
//! singular system rather than dividing by ~0.

use crate::error::{CoreError, Result};

/// Solves the system with sub-diagonal `lower` (length n−1), diagonal
/// `diag` (length n) and super-diagonal `upper` (length n−1) in place of
/// `rhs`.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
) -> Result<()> {
    let n = diag.len();
    assert_eq!(lower.len(), n - 1);
    assert_eq!(upper.len(), n - 1);
    assert_eq!(rhs.len(), n);

    let mut c = vec![0.0; n - 1];
    let mut pivot = diag[0];
    if pivot.abs() < f64::MIN_POSITIVE * 4.0 {
        return Err(CoreError::SingularSystem {
            detail: "zero pivot at row 0".to_string(),
        });
    }
    c[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot.abs() < f64::MIN_POSITIVE * 4.0 {
            return Err(CoreError::SingularSystem {
                detail: format!("zero pivot at row {i}"),
            });
        }
        if i < n - 1 {
            c[i] = upper[i] / pivot;
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}
