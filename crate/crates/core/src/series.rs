use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// The `n×q` transformed loss differential `Z_t = h_t·ΔL_t` over the
/// evaluation sample.
///
/// Rows are forecast origins, columns are test-function coordinates. The
/// horizon and origin are metadata: they route critical-value lookup and
/// label results but never enter a formula.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSeries<T> {
    values: Matrix<T>,
    horizon: usize,
    origin: i64,
}

impl<T: Scalar> TransformedSeries<T> {
    pub fn new(values: Matrix<T>, horizon: usize) -> Result<Self> {
        Self::with_origin(values, horizon, 0)
    }

    pub fn with_origin(values: Matrix<T>, horizon: usize, origin: i64) -> Result<Self> {
        if values.rows() < 2 {
            return Err(Error::TooShort(format!("need n >= 2 observations, got {}", values.rows())));
        }
        if values.cols() == 0 {
            return Err(Error::DimensionMismatch("series has no columns".into()));
        }
        if horizon == 0 {
            return Err(Error::InvalidArgument("forecast horizon must be at least 1".into()));
        }
        check_finite(&values)?;
        Ok(Self { values, horizon, origin })
    }

    /// Scalar series (`q = 1`) from a slice.
    pub fn scalar(values: &[T], horizon: usize) -> Result<Self> {
        Self::new(Matrix::column_vector(values), horizon)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.values.cols()
    }

    #[inline]
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    #[inline]
    pub fn origin(&self) -> i64 {
        self.origin
    }

    #[inline]
    pub fn values(&self) -> &Matrix<T> {
        &self.values
    }

    pub fn column_means(&self) -> Vec<T> {
        column_means(&self.values)
    }
}

pub(crate) fn check_finite<T: Scalar>(m: &Matrix<T>) -> Result<()> {
    for (row, r) in m.iter_rows().enumerate() {
        if let Some(col) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput { row, col });
        }
    }
    Ok(())
}

pub(crate) fn column_means<T: Scalar>(m: &Matrix<T>) -> Vec<T> {
    let mut mean = vec![T::zero(); m.cols()];
    for r in m.iter_rows() {
        for (acc, &v) in mean.iter_mut().zip(r) {
            *acc += v;
        }
    }
    let n = T::of(m.rows() as f64);
    mean.iter_mut().for_each(|v| *v /= n);
    mean
}

/// Forms `Z_t = h_t · ΔL_t` row by row.
pub fn transform<T: Scalar>(loss_diff: &[T], test_fn: &Matrix<T>, horizon: usize) -> Result<TransformedSeries<T>> {
    if loss_diff.len() != test_fn.rows() {
        return Err(Error::DimensionMismatch(format!(
            "loss differential has {} rows, test function has {}",
            loss_diff.len(),
            test_fn.rows()
        )));
    }
    if let Some(row) = loss_diff.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { row, col: 0 });
    }
    check_finite(test_fn)?;
    let mut values = test_fn.clone();
    for (i, &dl) in loss_diff.iter().enumerate() {
        values.row_mut(i).iter_mut().for_each(|v| *v *= dl);
    }
    TransformedSeries::new(values, horizon)
}

/// Centered, `√n`-scaled partial-sum path.
///
/// Row `k-1` of `points` holds `T(k/n) = n^{-1/2} Σ_{j≤k} (Z_j − Z̄)` for
/// `k = 1..n`; `T(0) = 0` is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct CusumPath<T> {
    pub points: Matrix<T>,
    pub mean: Vec<T>,
}

impl<T: Scalar> CusumPath<T> {
    #[inline]
    pub fn n(&self) -> usize {
        self.points.rows()
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.points.cols()
    }

    /// Coordinate `j` of the path, `T(1/n)..T(1)`.
    pub fn coordinate(&self, j: usize) -> Vec<T> {
        self.points.column(j)
    }
}

pub fn cusum<T: Scalar>(series: &TransformedSeries<T>) -> CusumPath<T> {
    cusum_of(series.values())
}

pub(crate) fn cusum_of<T: Scalar>(values: &Matrix<T>) -> CusumPath<T> {
    let mean = column_means(values);
    let scale = T::of(values.rows() as f64).sqrt().recip();
    let mut points = Matrix::zeros(values.rows(), values.cols());
    let mut acc = vec![T::zero(); values.cols()];
    for (k, r) in values.iter_rows().enumerate() {
        for ((a, &v), &m) in acc.iter_mut().zip(r).zip(&mean) {
            *a += v - m;
        }
        for (p, &a) in points.row_mut(k).iter_mut().zip(&acc) {
            *p = a * scale;
        }
    }
    CusumPath { points, mean }
}
