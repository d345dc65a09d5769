//! HAC-based Diebold–Mariano and Giacomini–White benchmarks, and the
//! Shao-type self-normalized DM statistic.
//!
//! The long-run covariance estimator is the Bartlett-kernel (Newey–West)
//! sum of demeaned sample autocovariances
//!
//! ```text
//! Ω̂ = Γ̂₀ + Σ_{j=1..L} (1 − j/(L+1)) (Γ̂_j + Γ̂_jᵀ),   Γ̂_j = n⁻¹ Σ_t e_t e_{t−j}ᵀ
//! ```
//!
//! with optional VAR(1) prewhitening and recoloring. The `NeweyWest1994`
//! bandwidth follows the plug-in rule used by R's `sandwich::bwNeweyWest`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf_inv;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::ldl::ldl;
use crate::matrix::Matrix;
use crate::result::{StatFamily, TestResult};
use crate::scalar::Scalar;
use crate::selfnorm::{matrix_normalizer, spd_solve};
use crate::series::{check_finite, column_means, cusum, TransformedSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Kernel {
    #[default]
    Bartlett,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Bandwidth {
    Fixed(usize),
    /// `L = floor(4·(n/100)^{2/9})`.
    #[default]
    Auto,
    /// Newey–West (1994) plug-in: pilot lag `floor(c·(n/100)^{2/9})` with
    /// `c = 3` after prewhitening and `4` otherwise, then
    /// `L = floor(1.1447·(ŝ₁/ŝ₀)^{2/3}·n^{1/3})`.
    NeweyWest1994,
    /// `L = τ − 1`, the lag of the MA(τ−1) overlap of τ-step forecast
    /// errors. Resolved by [`t_dm`] and [`t_gw`] from the series horizon;
    /// [`hac_lrv`] rejects it unresolved.
    HorizonMinusOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HacConfig {
    pub kernel: Kernel,
    pub bandwidth: Bandwidth,
    pub prewhiten: bool,
    /// Scale by `n/(n − q)`.
    pub small_sample_adjust: bool,
}

impl HacConfig {
    pub fn fixed(lag: usize) -> Self {
        Self { bandwidth: Bandwidth::Fixed(lag), ..Self::default() }
    }

    /// Bartlett kernel with lag `τ − 1`, no prewhitening.
    pub fn horizon_lag() -> Self {
        Self { bandwidth: Bandwidth::HorizonMinusOne, ..Self::default() }
    }

    /// Replaces a horizon-tied bandwidth by the fixed lag for `horizon`.
    pub fn for_horizon(&self, horizon: usize) -> Self {
        match self.bandwidth {
            Bandwidth::HorizonMinusOne => Self { bandwidth: Bandwidth::Fixed(horizon.saturating_sub(1)), ..*self },
            _ => *self,
        }
    }

    /// VAR(1) prewhitening with the Newey–West (1994) plug-in bandwidth,
    /// i.e. the defaults of R's `sandwich::NeweyWest`.
    pub fn sandwich_defaults() -> Self {
        Self {
            kernel: Kernel::Bartlett,
            bandwidth: Bandwidth::NeweyWest1994,
            prewhiten: true,
            small_sample_adjust: false,
        }
    }
}

/// Bartlett weights `w_j = 1 − j/(L+1)` for `j = 0..=L`.
pub fn bartlett_weights(lag: usize) -> Vec<f64> {
    (0..=lag).map(|j| 1.0 - j as f64 / (lag as f64 + 1.0)).collect()
}

pub fn auto_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Lag-`j` cross-product sum `Σ_{t≥j} u_t u_{t−j}ᵀ`.
fn cross_product<T: Scalar>(u: &Matrix<T>, lag: usize) -> Matrix<T> {
    let q = u.cols();
    let mut g = Matrix::zeros(q, q);
    for t in lag..u.rows() {
        let (a, b) = (u.row(t), u.row(t - lag));
        for i in 0..q {
            for j in 0..q {
                g[(i, j)] += a[i] * b[j];
            }
        }
    }
    g
}

fn newey_west_1994_lag<T: Scalar>(u: &Matrix<T>, prewhitened: bool) -> usize {
    let n = u.rows();
    let c = if prewhitened { 3.0 } else { 4.0 };
    let pilot = ((c * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize).min(n - 1);
    let hw: Vec<f64> = u.iter_rows().map(|r| r.iter().map(|v| v.as_f64()).sum()).collect();
    let sigma: Vec<f64> = (0..=pilot)
        .map(|j| hw[j..].iter().zip(&hw[..n - j]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect();
    let s0 = sigma[0] + 2.0 * sigma[1..].iter().sum::<f64>();
    let s1 = 2.0 * sigma.iter().enumerate().skip(1).map(|(j, s)| j as f64 * s).sum::<f64>();
    let rate = 1.0 / 3.0;
    let lag = 1.1447 * ((s1 / s0).powi(2)).powf(rate) * (n as f64).powf(rate);
    if lag.is_finite() {
        (lag.floor() as usize).min(n - 1)
    } else {
        0
    }
}

/// Bartlett-kernel long-run covariance of the rows of `series`.
///
/// Columns are demeaned internally. The result is symmetrized and repaired
/// to positive semidefinite by clipping negative eigenvalues at zero.
pub fn hac_lrv<T: Scalar>(series: &Matrix<T>, config: &HacConfig) -> Result<Matrix<T>> {
    check_finite(series)?;
    let (n, q) = (series.rows(), series.cols());
    if q == 0 {
        return Err(Error::DimensionMismatch("series has no columns".into()));
    }
    if let Bandwidth::Fixed(lag) = config.bandwidth {
        if n <= 2 * (lag + 1) {
            return Err(Error::TooShort(format!("HAC with lag {lag} needs n > {}, got {n}", 2 * (lag + 1))));
        }
    } else if config.bandwidth == Bandwidth::HorizonMinusOne {
        return Err(Error::InvalidArgument("horizon-tied bandwidth needs a horizon; use HacConfig::for_horizon".into()));
    } else if n < 4 {
        return Err(Error::TooShort(format!("HAC needs n >= 4, got {n}")));
    }

    let mean = column_means(series);
    let mut e = series.clone();
    for t in 0..n {
        for (v, &m) in e.row_mut(t).iter_mut().zip(&mean) {
            *v -= m;
        }
    }

    let (u, recolor) = if config.prewhiten { prewhiten(&e)? } else { (e, None) };
    let lag = match config.bandwidth {
        Bandwidth::Fixed(l) => l,
        Bandwidth::Auto => auto_bandwidth(n),
        Bandwidth::NeweyWest1994 => newey_west_1994_lag(&u, config.prewhiten),
        Bandwidth::HorizonMinusOne => unreachable!("rejected above"),
    }
    .min(u.rows() - 1);

    let mut omega = cross_product(&u, 0);
    for (j, &w) in bartlett_weights(lag).iter().enumerate().skip(1) {
        let g = cross_product(&u, j);
        let w = T::of(w);
        for a in 0..q {
            for b in 0..q {
                omega[(a, b)] += w * (g[(a, b)] + g[(b, a)]);
            }
        }
    }
    let mut scale = T::of(n as f64).recip();
    if config.small_sample_adjust {
        if n <= q {
            return Err(Error::TooShort("small-sample adjustment needs n > q".into()));
        }
        scale *= T::of(n as f64 / (n - q) as f64);
    }
    omega = omega.map(|v| v * scale);
    if let Some(d) = recolor {
        omega = d.matmul(&omega)?.matmul(&d.transpose())?;
    }
    omega.symmetrize();
    clip_psd(omega)
}

/// Fits `e_t = A e_{t−1} + r_t` by least squares (no intercept) and returns
/// the residuals with the recoloring matrix `(I − A)⁻¹`.
fn prewhiten<T: Scalar>(e: &Matrix<T>) -> Result<(Matrix<T>, Option<Matrix<T>>)> {
    let (n, q) = (e.rows(), e.cols());
    let mut sxx = Matrix::zeros(q, q);
    let mut syx = Matrix::zeros(q, q);
    for t in 1..n {
        let (y, x) = (e.row(t), e.row(t - 1));
        for i in 0..q {
            for j in 0..q {
                sxx[(i, j)] += x[i] * x[j];
                syx[(i, j)] += y[i] * x[j];
            }
        }
    }
    // A constant (or otherwise degenerate) series has nothing to whiten.
    let Ok(f) = ldl(&sxx) else {
        return Ok((e.clone(), None));
    };
    // A = Syx·Sxx⁻¹, so row i of A solves Sxx·a_i = (row i of Syx).
    let mut a = Matrix::zeros(q, q);
    for i in 0..q {
        let sol = f.solve(syx.row(i));
        a.row_mut(i).copy_from_slice(&sol);
    }
    let mut resid = Matrix::zeros(n - 1, q);
    for t in 1..n {
        let pred = a.mul_vec(e.row(t - 1))?;
        for ((r, &y), p) in resid.row_mut(t - 1).iter_mut().zip(e.row(t)).zip(pred) {
            *r = y - p;
        }
    }
    let i_minus_a = Matrix::identity(q).sub(&a)?;
    let d = i_minus_a.inverse().ok_or(Error::SingularHac)?;
    Ok((resid, Some(d)))
}

fn clip_psd<T: Scalar>(m: Matrix<T>) -> Result<Matrix<T>> {
    let (vals, vecs) = m.symmetric_eigen()?;
    if vals.iter().all(|&v| v >= T::zero()) {
        return Ok(m);
    }
    let clipped: Vec<T> = vals.iter().map(|&v| v.max(T::zero())).collect();
    let mut out = vecs.matmul(&Matrix::diagonal(&clipped))?.matmul(&vecs.transpose())?;
    out.symmetrize();
    Ok(out)
}

/// `t = √n·d̄/√Ω̂`, two-sided standard-normal reference.
pub fn t_dm<T: Scalar>(loss_diff: &[T], horizon: usize, config: &HacConfig) -> Result<TestResult<T>> {
    let series = TransformedSeries::scalar(loss_diff, horizon)?;
    let omega = hac_lrv(series.values(), &config.for_horizon(horizon))?[(0, 0)];
    if !(omega > T::zero()) {
        return Err(Error::SingularHac);
    }
    let n = T::of(series.n() as f64);
    let mean = series.column_means()[0];
    let t = n.sqrt() * mean / omega.sqrt();
    Ok(TestResult::new(t, StatFamily::HacDM, 1, horizon, series.n()))
}

/// `W = n·Z̄ᵀ·Ω̂⁻¹·Z̄`, `χ²_q` reference.
pub fn t_gw<T: Scalar>(series: &TransformedSeries<T>, config: &HacConfig) -> Result<TestResult<T>> {
    let omega = hac_lrv(series.values(), &config.for_horizon(series.horizon()))?;
    let mean = series.column_means();
    let x = spd_solve(&omega, &mean).map_err(|_| Error::SingularHac)?;
    let quad: T = x.iter().zip(&mean).map(|(&a, &b)| a * b).sum();
    let w = (T::of(series.n() as f64) * quad).max(T::zero());
    Ok(TestResult::new(w, StatFamily::HacGW, series.q(), series.horizon(), series.n()))
}

/// Unconditional self-normalized DM statistic `n·d̄² / (n⁻¹ Σ_k T(k/n)²)`,
/// the `q = 1`, `h ≡ 1` case of the matrix-CUSUM statistic.
pub fn t_sn<T: Scalar>(loss_diff: &[T], horizon: usize) -> Result<TestResult<T>> {
    let series = TransformedSeries::scalar(loss_diff, horizon)?;
    let path = cusum(&series);
    let u = matrix_normalizer(&path)[(0, 0)];
    if !(u > T::zero()) {
        return Err(Error::DegenerateNormalizer);
    }
    let mean = path.mean[0];
    let stat = T::of(series.n() as f64) * mean * mean / u;
    Ok(TestResult::new(stat, StatFamily::SnDM, 1, horizon, series.n()))
}

/// `χ²_q` quantile by safeguarded Newton iteration on the regularized lower
/// incomplete gamma function `P(q/2, x/2) = p`.
pub fn chi2_quantile(q: usize, p: f64) -> Result<f64> {
    if q == 0 {
        return Err(Error::InvalidArgument("chi-square degrees of freedom must be positive".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("probability {p} outside (0, 1)")));
    }
    let k = q as f64;
    let shape = k / 2.0;
    let cdf = |x: f64| gamma_lr(shape, x / 2.0);
    let ln_norm = shape * std::f64::consts::LN_2 + ln_gamma(shape);
    let pdf = |x: f64| ((shape - 1.0) * x.ln() - x / 2.0 - ln_norm).exp();

    // Wilson–Hilferty starting point.
    let z = std::f64::consts::SQRT_2 * erf_inv(2.0 * p - 1.0);
    let c = 2.0 / (9.0 * k);
    let mut x = (k * (1.0 - c + z * c.sqrt()).powi(3)).max(1e-8);

    let (mut lo, mut hi) = (0.0_f64, x.max(1.0));
    while cdf(hi) < p {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let f = cdf(x) - p;
        if f < 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let step = f / pdf(x);
        let mut next = x - step;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Two-sided standard-normal critical value `z_{1−α/2} = √χ²₁(1−α)`.
pub fn normal_two_sided_critical(alpha: f64) -> Result<f64> {
    Ok(chi2_quantile(1, 1.0 - alpha)?.sqrt())
}
