//! Range- and matrix-CUSUM self-normalized statistics.

use crate::error::{Error, Result};
use crate::ldl::ldl;
use crate::matrix::Matrix;
use crate::result::{StatFamily, TestResult};
use crate::scalar::Scalar;
use crate::series::{cusum, cusum_of, CusumPath, TransformedSeries};

/// Whether the one-step statistics insist on `tau == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HorizonCheck {
    #[default]
    Enforce,
    /// Apply at any horizon; the result carries a warning when `tau > 1`.
    Override,
}

/// `sup_k T(k/n) − inf_k T(k/n)` over `k = 0..n`, with `T(0) = 0` included.
pub fn adjusted_range<T: Scalar>(path: &CusumPath<T>) -> Result<T> {
    if path.q() != 1 {
        return Err(Error::NotScalar(path.q()));
    }
    Ok(range_with_origin(path.points.as_slice().iter().copied()))
}

fn range_with_origin<T: Scalar>(points: impl Iterator<Item = T>) -> T {
    let (lo, hi) = points.fold((T::zero(), T::zero()), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// `n·Z̄²/R²` for a scalar series.
pub fn q_scalar<T: Scalar>(series: &TransformedSeries<T>) -> Result<TestResult<T>> {
    let stat = range_statistic(series)?;
    Ok(TestResult::new(stat, StatFamily::ScalarMultistep, 1, series.horizon(), series.n()))
}

fn range_statistic<T: Scalar>(series: &TransformedSeries<T>) -> Result<T> {
    if series.q() != 1 {
        return Err(Error::NotScalar(series.q()));
    }
    let path = cusum(series);
    let range = adjusted_range(&path)?;
    if range <= T::zero() {
        return Err(Error::DegenerateRange { coordinate: None });
    }
    let n = T::of(series.n() as f64);
    let mean = path.mean[0];
    Ok(n * mean * mean / (range * range))
}

/// `U = n^{-1} Σ_{k=1..n} T(k/n)·T(k/n)ᵀ`.
pub fn matrix_normalizer<T: Scalar>(path: &CusumPath<T>) -> Matrix<T> {
    let q = path.q();
    let mut u = Matrix::zeros(q, q);
    for p in path.points.iter_rows() {
        for i in 0..q {
            for j in 0..=i {
                u[(i, j)] += p[i] * p[j];
            }
        }
    }
    let n = T::of(path.n() as f64);
    for i in 0..q {
        for j in 0..=i {
            let v = u[(i, j)] / n;
            u[(i, j)] = v;
            u[(j, i)] = v;
        }
    }
    u
}

/// Solves `A·x = b` for a symmetric positive semidefinite `A`, refusing when
/// the eigenvalue ratio falls below [`Scalar::singular_tol`].
pub(crate) fn spd_solve<T: Scalar>(a: &Matrix<T>, b: &[T]) -> std::result::Result<Vec<T>, f64> {
    let (eig, _) = a.symmetric_eigen().map_err(|_| 0.0)?;
    let (min, max) = (eig[0], eig[eig.len() - 1]);
    if !(max > T::zero()) || min <= T::singular_tol() * max {
        let ratio = if max > T::zero() { (min / max).as_f64() } else { 0.0 };
        return Err(ratio);
    }
    let f = ldl(a).map_err(|_| (min / max).as_f64())?;
    Ok(f.solve(b))
}

/// `n·Z̄ᵀ·U⁻¹·Z̄`, computed by factorizing `U` rather than inverting it.
pub fn q_vector<T: Scalar>(series: &TransformedSeries<T>) -> Result<TestResult<T>> {
    let path = cusum(series);
    let u = matrix_normalizer(&path);
    let x = spd_solve(&u, &path.mean).map_err(|ratio| Error::SingularNormalizer { ratio })?;
    let quad: T = x.iter().zip(&path.mean).map(|(&a, &b)| a * b).sum();
    let stat = (T::of(series.n() as f64) * quad).max(T::zero());
    Ok(TestResult::new(stat, StatFamily::VectorMultistep, series.q(), series.horizon(), series.n()))
}

fn check_horizon<T: Scalar>(series: &TransformedSeries<T>, check: HorizonCheck) -> Result<Vec<String>> {
    match (series.horizon(), check) {
        (1, _) => Ok(Vec::new()),
        (tau, HorizonCheck::Enforce) => Err(Error::HorizonMismatch(tau)),
        (tau, HorizonCheck::Override) => Ok(vec![format!(
            "one-step statistic applied at horizon tau = {tau}; its null limit assumes a martingale difference sequence"
        )]),
    }
}

/// Scalar one-step statistic. Same formula as [`q_scalar`], different family tag.
pub fn q_scalar_onestep<T: Scalar>(series: &TransformedSeries<T>, check: HorizonCheck) -> Result<TestResult<T>> {
    let warnings = check_horizon(series, check)?;
    let stat = range_statistic(series)?;
    let mut res = TestResult::new(stat, StatFamily::ScalarOneStep, 1, series.horizon(), series.n());
    res.warnings = warnings;
    Ok(res)
}

/// Multivariate one-step statistic.
///
/// Decorrelates with the LDL factor of the uncentered second moment
/// `n^{-1} Σ Z_t Z_tᵀ`, then sums the squared range-normalized means of the
/// decorrelated coordinates.
pub fn q_vector_onestep<T: Scalar>(series: &TransformedSeries<T>, check: HorizonCheck) -> Result<TestResult<T>> {
    let warnings = check_horizon(series, check)?;
    let z = series.values();
    let (n, q) = (series.n(), series.q());

    let mut sigma = Matrix::zeros(q, q);
    for r in z.iter_rows() {
        for i in 0..q {
            for j in 0..=i {
                sigma[(i, j)] += r[i] * r[j];
            }
        }
    }
    let nf = T::of(n as f64);
    for i in 0..q {
        for j in 0..=i {
            let v = sigma[(i, j)] / nf;
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    let factors = ldl(&sigma)?;

    let mut u = Matrix::zeros(n, q);
    for (t, r) in z.iter_rows().enumerate() {
        u.row_mut(t).copy_from_slice(&factors.forward(r));
    }
    let path = cusum_of(&u);
    let mut stat = T::zero();
    for j in 0..q {
        let range = range_with_origin((0..n).map(|k| path.points[(k, j)]));
        if range <= T::zero() {
            return Err(Error::DegenerateRange { coordinate: Some(j) });
        }
        let ratio = path.mean[j] / range;
        stat += ratio * ratio;
    }
    let mut res = TestResult::new(nf * stat, StatFamily::VectorOneStep, q, series.horizon(), n);
    res.warnings = warnings;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(z: &[f64], tau: usize) -> TransformedSeries<f64> {
        TransformedSeries::scalar(z, tau).unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn adjusted_range_examples() {
        let r = adjusted_range(&cusum(&scalar(&[1.0, 2.0, 3.0], 2))).unwrap();
        assert!(rel_close(r, 3f64.sqrt().recip(), 1e-15));
        assert_eq!(adjusted_range(&cusum(&scalar(&[1.0, -1.0, 1.0, -1.0], 2))).unwrap(), 0.5);
        assert_eq!(adjusted_range(&cusum(&scalar(&[2.0, 2.0, 2.0], 2))).unwrap(), 0.0);
    }

    #[test]
    fn adjusted_range_needs_scalar_path() {
        let z = TransformedSeries::new(Matrix::from_rows(&[[1.0, 2.0], [3.0, 5.0]]).unwrap(), 2).unwrap();
        assert_eq!(adjusted_range(&cusum(&z)), Err(Error::NotScalar(2)));
    }

    #[test]
    fn q_scalar_examples() {
        let r = q_scalar(&scalar(&[1.0, 2.0, 3.0], 2)).unwrap();
        assert!(rel_close(r.statistic, 36.0, 1e-13));
        assert_eq!(r.family, StatFamily::ScalarMultistep);
        assert_eq!(q_scalar(&scalar(&[1.0, -1.0, 1.0, -1.0], 2)).unwrap().statistic, 0.0);
        assert_eq!(q_scalar(&scalar(&[4.0; 3], 2)), Err(Error::DegenerateRange { coordinate: None }));
    }

    #[test]
    fn matrix_normalizer_examples() {
        let u = matrix_normalizer(&cusum(&scalar(&[1.0, 2.0, 3.0], 2)));
        assert!(rel_close(u[(0, 0)], 2.0 / 9.0, 1e-14));
        let u0 = matrix_normalizer(&cusum(&scalar(&[5.0; 4], 2)));
        assert_eq!(u0[(0, 0)], 0.0);
    }

    #[test]
    fn matrix_normalizer_two_by_two() {
        // Z = [[2,0],[0,1],[0,0]]: mean (2/3, 1/3); T(1/3) = (4/3, -1/3)/√3,
        // T(2/3) = (2/3, 1/3)/√3, T(1) = 0, so U = (1/9)·Σ S·Sᵀ.
        let z = TransformedSeries::new(Matrix::from_rows(&[[2.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap(), 2)
            .unwrap();
        let u = matrix_normalizer(&cusum(&z));
        let expect: [[f64; 2]; 2] = [[20.0 / 81.0, -2.0 / 81.0], [-2.0 / 81.0, 2.0 / 81.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((u[(i, j)] - expect[i][j]).abs() < 1e-15, "U[{i},{j}]");
            }
        }
    }

    #[test]
    fn q_vector_examples() {
        let r = q_vector(&scalar(&[1.0, 2.0, 3.0], 2)).unwrap();
        assert!(rel_close(r.statistic, 54.0, 1e-13));
        assert_eq!(q_vector(&scalar(&[1.0, -1.0, 1.0, -1.0], 2)).unwrap().statistic, 0.0);
        let dup = Matrix::from_rows(&[[1.0, 1.0], [0.3, 0.3], [-2.0, -2.0], [0.7, 0.7]]).unwrap();
        let z = TransformedSeries::new(dup, 2).unwrap();
        assert!(matches!(q_vector(&z), Err(Error::SingularNormalizer { .. })));
    }

    #[test]
    fn onestep_scalar_matches_multistep_formula() {
        for z in [&[1.0, 2.0, 3.0][..], &[1.0, -1.0, 1.0, -1.0][..]] {
            let a = q_scalar(&scalar(z, 1)).unwrap();
            let b = q_scalar_onestep(&scalar(z, 1), HorizonCheck::Enforce).unwrap();
            assert_eq!(a.statistic, b.statistic);
            assert_eq!(b.family, StatFamily::ScalarOneStep);
        }
        assert!(matches!(
            q_scalar_onestep(&scalar(&[1.0; 3], 1), HorizonCheck::Enforce),
            Err(Error::DegenerateRange { .. })
        ));
    }

    #[test]
    fn onestep_horizon_check() {
        let z = scalar(&[1.0, 2.0, 3.0], 3);
        assert_eq!(q_scalar_onestep(&z, HorizonCheck::Enforce), Err(Error::HorizonMismatch(3)));
        let r = q_scalar_onestep(&z, HorizonCheck::Override).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(q_vector_onestep(&z, HorizonCheck::Enforce).is_err());
    }

    #[test]
    fn onestep_vector_q1_reduces_to_scalar() {
        let z = scalar(&[0.4, -1.3, 2.2, 0.1, 0.9], 1);
        let a = q_scalar_onestep(&z, HorizonCheck::Enforce).unwrap().statistic;
        let b = q_vector_onestep(&z, HorizonCheck::Enforce).unwrap().statistic;
        assert!(rel_close(a, b, 1e-13));
    }

    #[test]
    fn onestep_vector_uncorrelated_columns_sum() {
        // Cross moment Σ Z1·Z2 is exactly zero, so D = I.
        let rows = [[1.0, 2.0], [2.0, -1.0], [-1.0, 2.0], [3.0, 1.0], [1.0, -1.0]];
        let cross: f64 = rows.iter().map(|r| r[0] * r[1]).sum();
        assert_eq!(cross, 0.0);
        let z = TransformedSeries::new(Matrix::from_rows(&rows).unwrap(), 1).unwrap();
        let joint = q_vector_onestep(&z, HorizonCheck::Enforce).unwrap().statistic;
        let sum: f64 = (0..2)
            .map(|j| q_scalar_onestep(&scalar(&z.values().column(j), 1), HorizonCheck::Enforce).unwrap().statistic)
            .sum();
        assert!(rel_close(joint, sum, 1e-13));
    }

    #[test]
    fn onestep_vector_duplicated_columns() {
        let z = TransformedSeries::new(Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [-0.5, -0.5]]).unwrap(), 1).unwrap();
        assert!(matches!(q_vector_onestep(&z, HorizonCheck::Enforce), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn single_precision_matches_double() {
        let z64 = [0.4, -1.3, 2.2, 0.1, 0.9, 1.7];
        let z32: Vec<f32> = z64.iter().map(|&v| v as f32).collect();
        let a = q_scalar(&scalar(&z64, 2)).unwrap().statistic;
        let b = q_scalar(&TransformedSeries::scalar(&z32, 2).unwrap()).unwrap().statistic;
        assert!((a - b as f64).abs() < 1e-5 * a.max(1.0));
    }
}
