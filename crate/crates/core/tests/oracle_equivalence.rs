//! Every statistic against the straight-line formulas in `sncpa-oracle`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sncpa_core::*;
use sncpa_oracle as oracle;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, q: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..q).map(|_| rng.random_range(-3.0..3.0)).collect()).collect()
}

fn series(rows: &[Vec<f64>], tau: usize) -> TransformedSeries<f64> {
    TransformedSeries::new(Matrix::from_rows(rows).unwrap(), tau).unwrap()
}

#[test]
fn small_inputs_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240917);
    for case in 0..300 {
        let q = rng.random_range(1..=2);
        // U has rank at most n - 1.
        let n = rng.random_range(q + 1..=8);
        let rows = random_rows(&mut rng, n, q);
        let z = series(&rows, 2);
        let tol = 1e-10;

        let q2 = q_vector(&z).unwrap().statistic;
        assert!(rel_err(q2, oracle::q2(&rows)) < tol, "case {case}: Q2 {q2} vs {}", oracle::q2(&rows));

        let z1 = series(&rows, 1);
        let v1 = q_vector_onestep(&z1, HorizonCheck::Enforce).unwrap().statistic;
        assert!(rel_err(v1, oracle::q_onestep_vector(&rows)) < tol, "case {case}: one-step vector");

        if q == 1 {
            let q1 = q_scalar(&z).unwrap().statistic;
            assert!(rel_err(q1, oracle::q1(&rows)) < tol, "case {case}: Q1");
            let d: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let sn = t_sn(&d, 2).unwrap().statistic;
            assert!(rel_err(sn, oracle::t_sn(&d)) < tol, "case {case}: T_SN");
        }

        for lag in 0..=2usize {
            if n <= 2 * (lag + 1) {
                continue;
            }
            let w = t_gw(&z, &HacConfig::fixed(lag)).unwrap().statistic;
            assert!(rel_err(w, oracle::t_gw(&rows, lag)) < tol, "case {case}: T_GW lag {lag}");
        }
    }
}

#[test]
fn normalizer_matches_riemann_sum() {
    let rows = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 0.0], vec![0.0, 4.0]];
    let u = matrix_normalizer(&cusum(&series(&rows, 2)));
    let want = oracle::normalizer(&rows);
    for i in 0..2 {
        for j in 0..2 {
            assert!((u[(i, j)] - want[i][j]).abs() < 1e-14);
        }
    }
}
