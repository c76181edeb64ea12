//! Dense symmetric positive-definite solves via Cholesky.

use num_traits::Float;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CholeskyError {
    /// Index of the first non-positive pivot.
    pub pivot: usize,
}

impl std::fmt::Display for CholeskyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "matrix not positive definite (pivot {} non-positive)", self.pivot)
    }
}

impl std::error::Error for CholeskyError {}

/// Solve `A X = B` for symmetric positive-definite `A` (row-major `n×n`)
/// and `nrhs` right-hand sides (row-major `n×nrhs`). Returns `X` row-major.
///
/// Only the lower triangle of `A` is read, which doubles as a symmetry
/// contract: callers must pass a symmetric matrix.
pub fn cholesky_solve<T: Float>(
    a: &[T],
    n: usize,
    b: &[T],
    nrhs: usize,
) -> Result<Vec<T>, CholeskyError> {
    assert_eq!(a.len(), n * n, "matrix size mismatch");
    assert_eq!(b.len(), n * nrhs, "rhs size mismatch");

    // L such that A = L Lᵀ, stored in the lower triangle.
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum = sum - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= T::zero() {
                    return Err(CholeskyError { pivot: i });
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }

    let mut x = b.to_vec();
    // forward: L y = b
    for i in 0..n {
        for r in 0..nrhs {
            let mut sum = x[i * nrhs + r];
            for k in 0..i {
                sum = sum - l[i * n + k] * x[k * nrhs + r];
            }
            x[i * nrhs + r] = sum / l[i * n + i];
        }
    }
    // backward: Lᵀ x = y
    for i in (0..n).rev() {
        for r in 0..nrhs {
            let mut sum = x[i * nrhs + r];
            for k in i + 1..n {
                sum = sum - l[k * n + i] * x[k * nrhs + r];
            }
            x[i * nrhs + r] = sum / l[i * n + i];
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        // A = [[4,1],[1,3]], b = [1, 2] → x = (1/11)·[1, 7]
        let a = [4.0, 1.0, 1.0, 3.0];
        let b = [1.0, 2.0];
        let x = cholesky_solve(&a, 2, &b, 1).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-12);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0]; // eigenvalues 3, -1
        let err = cholesky_solve(&a, 2, &[1.0, 1.0], 1).unwrap_err();
        assert_eq!(err.pivot, 1);
    }

    #[test]
    fn multiple_rhs_f32() {
        let a: [f32; 4] = [2.0, 0.0, 0.0, 5.0];
        let b: [f32; 4] = [2.0, 4.0, 5.0, 10.0];
        let x = cholesky_solve(&a, 2, &b, 2).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-6);
        assert!((x[1] - 2.0).abs() < 1e-6);
        assert!((x[2] - 1.0).abs() < 1e-6);
        assert!((x[3] - 2.0).abs() < 1e-6);
    }
}
