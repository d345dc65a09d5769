use sncpa_sim::dgp::{gen_dgp1, gen_dgp2, ma_scale, Dgp1Config, Dgp2Config};

const BIG: usize = 1_000_000;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
}

fn autocorr(x: &[f64], lag: usize) -> f64 {
    let m = mean(x);
    let c: f64 = x.iter().zip(&x[lag..]).map(|(a, b)| (a - m) * (b - m)).sum::<f64>() / x.len() as f64;
    c / var(x)
}

#[test]
fn dgp1_unit_variance_and_persistence() {
    for rho in [0.2, 0.8] {
        let s = gen_dgp1(&Dgp1Config::new(rho, 0.0, 3, BIG), 101).unwrap();
        assert!((var(&s.predictor) - 1.0).abs() < 0.02, "Var(x) at rho={rho}");
        assert!((autocorr(&s.predictor, 1) - rho).abs() < 0.01);
        // δ = 0: ΔL is the forecast error itself.
        assert!((var(&s.loss_diff) - 1.0).abs() < 0.02);
        // Long-run variance of the MA(2) error: c²(1 + 2θ)² = 4/1.5.
        let se = (4.0f64 / 1.5).sqrt() / (BIG as f64).sqrt();
        assert!(mean(&s.loss_diff).abs() < 4.0 * se);
    }
}

#[test]
fn overlap_cuts_off_after_tau_minus_one() {
    for tau in [2usize, 3] {
        let s = gen_dgp1(&Dgp1Config::new(0.5, 0.0, tau, BIG), 7).unwrap();
        let c2 = ma_scale(tau, 0.5).powi(2);
        // Lag-1 autocorrelation of the MA(τ−1) error: c²(θ + θ²(τ−2)).
        let want = c2 * (0.5 + 0.25 * (tau as f64 - 2.0));
        assert!((autocorr(&s.loss_diff, 1) - want).abs() < 0.01);
        // Bartlett's formula for the standard error beyond the cutoff.
        let r2: f64 = (1..tau).map(|k| {
            let c: f64 = (0..tau - k).map(|j| if j == 0 { 0.5 } else { 0.25 }).sum();
            (c2 * c).powi(2)
        }).sum();
        let se = ((1.0 + 2.0 * r2) / BIG as f64).sqrt();
        for lag in tau..tau + 3 {
            assert!(autocorr(&s.loss_diff, lag).abs() < 3.0 * se, "lag {lag}");
        }
    }
}

#[test]
fn dgp1_drift_recovered_by_regression() {
    let s = gen_dgp1(&Dgp1Config::new(0.5, 0.2, 2, BIG), 3).unwrap();
    let (mx, my) = (mean(&s.predictor), mean(&s.loss_diff));
    let sxy: f64 = s.predictor.iter().zip(&s.loss_diff).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = s.predictor.iter().map(|x| (x - mx).powi(2)).sum();
    assert!((sxy / sxx - 0.2).abs() < 0.01 * 0.2);
}

#[test]
fn dgp2_unconditional_mean_zero_for_any_drift() {
    for d in [0.0, 0.5, 2.0] {
        let s = gen_dgp2(&Dgp2Config::new(0.3, d, 2, BIG), 11).unwrap();
        let sd = (d * d * 0.21 + 1.8).sqrt();
        assert!(mean(&s.loss_diff).abs() < 4.0 * sd / (BIG as f64).sqrt(), "d={d}");
        assert!((mean(&s.predictor) - 0.3).abs() < 4.0 * (0.21f64 / BIG as f64).sqrt());
    }
}

#[test]
fn dgp2_conditional_drift() {
    let s = gen_dgp2(&Dgp2Config::new(0.5, 0.5, 2, BIG), 12).unwrap();
    let ones: Vec<f64> = s.loss_diff.iter().zip(&s.predictor).filter(|(_, p)| **p == 1.0).map(|(l, _)| *l).collect();
    let se = (1.8f64 / ones.len() as f64).sqrt();
    assert!((mean(&ones) - 0.25).abs() < 4.0 * se);
}

#[test]
fn samples_are_reproducible() {
    let cfg = Dgp1Config::new(0.8, 0.2, 3, 300);
    assert_eq!(gen_dgp1(&cfg, 5).unwrap(), gen_dgp1(&cfg, 5).unwrap());
    assert_ne!(gen_dgp1(&cfg, 5).unwrap(), gen_dgp1(&cfg, 6).unwrap());
    let cfg = Dgp2Config::new(0.2, 0.5, 2, 300);
    assert_eq!(gen_dgp2(&cfg, 5).unwrap(), gen_dgp2(&cfg, 5).unwrap());
}
