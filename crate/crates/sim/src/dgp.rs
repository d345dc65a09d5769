//! Synthetic evaluation samples.
//!
//! Both designs share the overlapping forecast error
//! `ε_{t+τ} = c·Σ_{j=0..τ−1} θ_j v_{t+τ−j}` with `θ₀ = 1`, `θ_j = θ` and
//! `c = (1 + θ²(τ−1))^{-1/2}`, so `Var(ε) = 1` and `ε` is MA(τ−1).
//!
//! * DGP 1: `x_t` is a stationary AR(1) rescaled to unit variance and
//!   `ΔL_t = δ·x_t + ε_{t+τ}`.
//! * DGP 2: `S_t ~ Bernoulli(p)` and `ΔL_t = d·(S_t − p) + ε_{t+τ}`.
//!
//! Draw order within a sample's stream: the predictor path first, then the
//! `n + τ − 1` innovations `v`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sncpa_core::Matrix;

use crate::error::{Error, Result};
use crate::rng::{substream, DGP_KEY};

pub const DEFAULT_THETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dgp1Config {
    pub rho: f64,
    pub delta: f64,
    pub tau: usize,
    pub n: usize,
    pub theta: f64,
}

impl Dgp1Config {
    pub fn new(rho: f64, delta: f64, tau: usize, n: usize) -> Self {
        Self { rho, delta, tau, n, theta: DEFAULT_THETA }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidConfig(format!("rho must lie in (-1, 1), got {}", self.rho)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig(format!("delta must be finite and >= 0, got {}", self.delta)));
        }
        check_common(self.tau, self.n, self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dgp2Config {
    pub p: f64,
    pub d: f64,
    pub tau: usize,
    pub n: usize,
    pub theta: f64,
}

impl Dgp2Config {
    pub fn new(p: f64, d: f64, tau: usize, n: usize) -> Self {
        Self { p, d, tau, n, theta: DEFAULT_THETA }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidConfig(format!("p must lie in (0, 1), got {}", self.p)));
        }
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidConfig(format!("d must be finite and >= 0, got {}", self.d)));
        }
        check_common(self.tau, self.n, self.theta)
    }
}

fn check_common(tau: usize, n: usize, theta: f64) -> Result<()> {
    if tau == 0 {
        return Err(Error::InvalidConfig("tau must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidConfig(format!("n must be at least 2, got {n}")));
    }
    if !theta.is_finite() {
        return Err(Error::InvalidConfig("theta must be finite".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truth {
    Null,
    /// Drift magnitude (`δ` or `d`).
    Alternative(f64),
}

impl Truth {
    fn of(drift: f64) -> Self {
        if drift == 0.0 {
            Truth::Null
        } else {
            Truth::Alternative(drift)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSample {
    pub loss_diff: Vec<f64>,
    /// `x_t` (DGP 1) or `S_t` (DGP 2).
    pub predictor: Vec<f64>,
    pub truth: Truth,
    pub tau: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestFunctionVariant {
    /// `h_t = predictor`.
    ScalarOnly,
    /// `h_t = (1, predictor)`.
    WithIntercept,
}

/// Normalizing constant of the MA(τ−1) error.
pub fn ma_scale(tau: usize, theta: f64) -> f64 {
    (1.0 + theta * theta * (tau as f64 - 1.0)).sqrt().recip()
}

fn overlapping_errors(rng: &mut ChaCha8Rng, n: usize, tau: usize, theta: f64) -> Vec<f64> {
    // v[i] holds v_{i+2}; ε for origin t (1-based) is c·(v_{t+τ} + θ·Σ_{j=1..τ−1} v_{t+τ−j}).
    let v: Vec<f64> = (0..n + tau - 1).map(|_| rng.sample(StandardNormal)).collect();
    let c = ma_scale(tau, theta);
    (0..n)
        .map(|t| {
            let lead = t + tau - 1;
            let tail: f64 = (1..tau).map(|j| v[lead - j]).sum();
            c * (v[lead] + theta * tail)
        })
        .collect()
}

/// DGP 1 sample drawn from `rng`.
pub fn dgp1_from(config: &Dgp1Config, rng: &mut ChaCha8Rng) -> Result<SimulatedSample> {
    config.validate()?;
    let rho = config.rho;
    let s = (1.0 - rho * rho).sqrt();
    let mut x: f64 = rng.sample::<f64, _>(StandardNormal) / s;
    let mut predictor = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        x = rho * x + rng.sample::<f64, _>(StandardNormal);
        predictor.push(s * x);
    }
    let eps = overlapping_errors(rng, config.n, config.tau, config.theta);
    let loss_diff = predictor.iter().zip(&eps).map(|(x, e)| config.delta * x + e).collect();
    Ok(SimulatedSample { loss_diff, predictor, truth: Truth::of(config.delta), tau: config.tau })
}

/// DGP 2 sample drawn from `rng`.
pub fn dgp2_from(config: &Dgp2Config, rng: &mut ChaCha8Rng) -> Result<SimulatedSample> {
    config.validate()?;
    let predictor: Vec<f64> =
        (0..config.n).map(|_| if rng.random::<f64>() < config.p { 1.0 } else { 0.0 }).collect();
    let eps = overlapping_errors(rng, config.n, config.tau, config.theta);
    let loss_diff = predictor.iter().zip(&eps).map(|(s, e)| config.d * (s - config.p) + e).collect();
    Ok(SimulatedSample { loss_diff, predictor, truth: Truth::of(config.d), tau: config.tau })
}

pub fn gen_dgp1(config: &Dgp1Config, seed: u64) -> Result<SimulatedSample> {
    dgp1_from(config, &mut substream(seed, DGP_KEY, 0))
}

pub fn gen_dgp2(config: &Dgp2Config, seed: u64) -> Result<SimulatedSample> {
    dgp2_from(config, &mut substream(seed, DGP_KEY, 0))
}

/// Test-function matrix of a sample (`n × 1` or `n × 2`).
pub fn test_function(sample: &SimulatedSample, variant: TestFunctionVariant) -> Matrix<f64> {
    let n = sample.predictor.len();
    match variant {
        TestFunctionVariant::ScalarOnly => Matrix::column_vector(&sample.predictor),
        TestFunctionVariant::WithIntercept => {
            let mut data = Vec::with_capacity(2 * n);
            for &x in &sample.predictor {
                data.push(1.0);
                data.push(x);
            }
            Matrix::from_vec(n, 2, data).expect("n × 2 buffer")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ma_scale_values() {
        assert_eq!(ma_scale(1, 0.5), 1.0);
        assert!((ma_scale(2, 0.5) - 0.894427190999916).abs() < 1e-15);
        assert!((ma_scale(3, 0.5) - 1.0 / 1.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn configs_validated() {
        assert!(gen_dgp1(&Dgp1Config::new(1.0, 0.0, 2, 50), 1).is_err());
        assert!(gen_dgp1(&Dgp1Config::new(0.5, -0.1, 2, 50), 1).is_err());
        assert!(gen_dgp1(&Dgp1Config::new(0.5, 0.0, 0, 50), 1).is_err());
        assert!(gen_dgp2(&Dgp2Config::new(0.0, 0.0, 2, 50), 1).is_err());
        assert!(gen_dgp2(&Dgp2Config::new(0.5, 0.0, 2, 50), 1).is_ok());
    }

    #[test]
    fn test_function_shapes() {
        let s = gen_dgp2(&Dgp2Config::new(0.3, 0.5, 2, 40), 9).unwrap();
        let h1 = test_function(&s, TestFunctionVariant::ScalarOnly);
        assert_eq!((h1.rows(), h1.cols()), (40, 1));
        assert!(h1.as_slice().iter().all(|v| *v == 0.0 || *v == 1.0));
        let h2 = test_function(&s, TestFunctionVariant::WithIntercept);
        assert_eq!((h2.rows(), h2.cols()), (40, 2));
        assert!(h2.column(0).iter().all(|v| *v == 1.0));
        assert_eq!(h2.column(1), s.predictor);
        assert_eq!(s.truth, Truth::Alternative(0.5));
    }

    #[test]
    fn tau_one_has_no_overlap() {
        // With τ = 1, ε_t = v_t exactly: the loss differential under the
        // null equals the innovations drawn after the predictor path.
        let cfg = Dgp1Config::new(0.5, 0.0, 1, 5);
        let s = gen_dgp1(&cfg, 4).unwrap();
        let mut rng = substream(4, DGP_KEY, 0);
        for _ in 0..6 {
            let _: f64 = rng.sample(StandardNormal);
        }
        let v: Vec<f64> = (0..5).map(|_| rng.sample(StandardNormal)).collect();
        assert_eq!(s.loss_diff, v);
    }
}
