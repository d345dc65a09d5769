//! `Σ = D·Λ·Dᵀ` factorization with unit-lower-triangular `D`.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LdlFactors<T> {
    /// Unit lower triangular factor.
    pub d: Matrix<T>,
    /// Diagonal of `Λ`.
    pub lambda: Vec<T>,
}

/// LDL-decomposes a symmetric positive-definite matrix.
///
/// A pivot at or below `tol·trace(Σ)/q` (`tol` = [`Scalar::singular_tol`])
/// is reported as [`Error::NotPositiveDefinite`].
pub fn ldl<T: Scalar>(sigma: &Matrix<T>) -> Result<LdlFactors<T>> {
    if !sigma.is_square() || sigma.rows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "LDL needs a non-empty square matrix, got {}x{}",
            sigma.rows(),
            sigma.cols()
        )));
    }
    if !sigma.all_finite() {
        return Err(Error::InvalidArgument("LDL input has non-finite entries".into()));
    }
    let q = sigma.rows();
    let scale = sigma.max_abs();
    let asym = sigma.asymmetry();
    if asym > T::symmetry_tol() * scale.max(T::one()) {
        return Err(Error::NotSymmetric(asym.as_f64()));
    }
    let threshold = T::singular_tol() * sigma.trace().abs() / T::of(q as f64);

    let mut d = Matrix::identity(q);
    let mut lambda = vec![T::zero(); q];
    for j in 0..q {
        let mut pivot = sigma[(j, j)];
        for k in 0..j {
            pivot -= d[(j, k)] * d[(j, k)] * lambda[k];
        }
        if !(pivot > threshold) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: pivot.as_f64() });
        }
        lambda[j] = pivot;
        for i in (j + 1)..q {
            let mut v = sigma[(i, j)];
            for k in 0..j {
                v -= d[(i, k)] * d[(j, k)] * lambda[k];
            }
            d[(i, j)] = v / pivot;
        }
    }
    Ok(LdlFactors { d, lambda })
}

impl<T: Scalar> LdlFactors<T> {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// Solves `D·y = b` by forward substitution.
    pub fn forward(&self, b: &[T]) -> Vec<T> {
        let q = self.dim();
        let mut y = b.to_vec();
        for i in 0..q {
            for k in 0..i {
                let step = self.d[(i, k)] * y[k];
                y[i] -= step;
            }
        }
        y
    }

    /// Solves `Σ·x = b` for `Σ = D·Λ·Dᵀ`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let q = self.dim();
        let mut x = self.forward(b);
        for (xi, &l) in x.iter_mut().zip(&self.lambda) {
            *xi /= l;
        }
        for i in (0..q).rev() {
            for k in (i + 1)..q {
                let step = self.d[(k, i)] * x[k];
                x[i] -= step;
            }
        }
        x
    }

    /// `D·diag(Λ)·Dᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let dl = self.d.matmul(&Matrix::diagonal(&self.lambda)).expect("square factors");
        dl.matmul(&self.d.transpose()).expect("square factors")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factors_trivially() {
        let f = ldl(&Matrix::<f64>::identity(3)).unwrap();
        assert_eq!(f.d, Matrix::identity(3));
        assert_eq!(f.lambda, vec![1.0; 3]);
    }

    #[test]
    fn two_by_two_example() {
        let s = Matrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]]).unwrap();
        let f = ldl(&s).unwrap();
        assert_eq!(f.d, Matrix::from_rows(&[[1.0, 0.0], [0.5, 1.0]]).unwrap());
        assert_eq!(f.lambda, vec![4.0, 2.0]);
        assert_eq!(f.reconstruct(), s);
    }

    #[test]
    fn rank_one_is_rejected() {
        let s = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(ldl(&s), Err(Error::NotPositiveDefinite { index: 1, .. })));
    }

    #[test]
    fn asymmetric_is_rejected() {
        let s = Matrix::from_rows(&[[1.0, 0.5], [0.4, 1.0]]).unwrap();
        assert!(matches!(ldl(&s), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn solve_matches_direct() {
        let s = Matrix::<f64>::from_rows(&[[4.0, 2.0, 0.4], [2.0, 3.0, 0.5], [0.4, 0.5, 2.0]]).unwrap();
        let f = ldl(&s).unwrap();
        let x = f.solve(&[1.0, -2.0, 0.5]);
        let back = s.mul_vec(&x).unwrap();
        for (a, b) in back.iter().zip([1.0, -2.0, 0.5]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn single_precision_rank_deficiency_detected() {
        let s = Matrix::<f32>::from_rows(&[[2.0, 2.0], [2.0, 2.0 + 1e-7]]).unwrap();
        assert!(ldl(&s).is_err());
    }
}
