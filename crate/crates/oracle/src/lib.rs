//! Naive reference evaluations of every statistic, written as literal loops
//! over the defining sums with no shared code paths with `sncpa-core`.
//!
//! Inputs are row-major `&[Vec<f64>]` (one inner vector per observation).
//! Only `q <= 2` is supported where a matrix inverse is needed; the 2×2
//! inverse is the adjugate formula.

pub type Rows = [Vec<f64>];

fn dims(z: &Rows) -> (usize, usize) {
    (z.len(), z[0].len())
}

pub fn mean(z: &Rows) -> Vec<f64> {
    let (n, q) = dims(z);
    let mut m = vec![0.0; q];
    for row in z {
        for j in 0..q {
            m[j] += row[j];
        }
    }
    for v in m.iter_mut() {
        *v /= n as f64;
    }
    m
}

/// `T(k/n)` for `k = 0..=n`, evaluated from scratch for every `k`.
pub fn cusum_point(z: &Rows, k: usize) -> Vec<f64> {
    let (n, q) = dims(z);
    let m = mean(z);
    let mut out = vec![0.0; q];
    for j in 0..q {
        let mut s = 0.0;
        for t in 0..k {
            s += z[t][j] - m[j];
        }
        out[j] = s / (n as f64).sqrt();
    }
    out
}

pub fn range(z: &Rows, j: usize) -> f64 {
    let n = z.len();
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for k in 0..=n {
        let v = cusum_point(z, k)[j];
        if v > hi {
            hi = v;
        }
        if v < lo {
            lo = v;
        }
    }
    hi - lo
}

pub fn q1(z: &Rows) -> f64 {
    let n = z.len() as f64;
    let m = mean(z)[0];
    let r = range(z, 0);
    n * m * m / (r * r)
}

pub fn normalizer(z: &Rows) -> Vec<Vec<f64>> {
    let (n, q) = dims(z);
    let mut u = vec![vec![0.0; q]; q];
    for k in 1..=n {
        let p = cusum_point(z, k);
        for a in 0..q {
            for b in 0..q {
                u[a][b] += p[a] * p[b];
            }
        }
    }
    for row in u.iter_mut() {
        for v in row.iter_mut() {
            *v /= n as f64;
        }
    }
    u
}

pub fn inverse_2x2(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if m.len() == 1 {
        return vec![vec![1.0 / m[0][0]]];
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    vec![vec![m[1][1] / det, -m[0][1] / det], vec![-m[1][0] / det, m[0][0] / det]]
}

fn quadratic_form(v: &[f64], m: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for a in 0..v.len() {
        for b in 0..v.len() {
            s += v[a] * m[a][b] * v[b];
        }
    }
    s
}

pub fn q2(z: &Rows) -> f64 {
    let n = z.len() as f64;
    n * quadratic_form(&mean(z), &inverse_2x2(&normalizer(z)))
}

/// One-step vector statistic with the closed-form 2×2 LDL factor of the
/// uncentered second moment.
pub fn q_onestep_vector(z: &Rows) -> f64 {
    let (n, q) = dims(z);
    let mut s = vec![vec![0.0; q]; q];
    for row in z {
        for a in 0..q {
            for b in 0..q {
                s[a][b] += row[a] * row[b] / n as f64;
            }
        }
    }
    let u: Vec<Vec<f64>> = if q == 1 {
        z.to_vec()
    } else {
        let d21 = s[1][0] / s[0][0];
        z.iter().map(|r| vec![r[0], r[1] - d21 * r[0]]).collect()
    };
    let m = mean(&u);
    let mut stat = 0.0;
    for j in 0..q {
        let r = range(&u, j);
        stat += n as f64 * m[j] * m[j] / (r * r);
    }
    stat
}

/// Bartlett HAC with fixed lag on demeaned data, divisor `n`.
pub fn hac(z: &Rows, lag: usize) -> Vec<Vec<f64>> {
    let (n, q) = dims(z);
    let m = mean(z);
    let mut omega = vec![vec![0.0; q]; q];
    for j in 0..=lag {
        let w = 1.0 - j as f64 / (lag as f64 + 1.0);
        let mut g = vec![vec![0.0; q]; q];
        for t in j..n {
            for a in 0..q {
                for b in 0..q {
                    g[a][b] += (z[t][a] - m[a]) * (z[t - j][b] - m[b]) / n as f64;
                }
            }
        }
        for a in 0..q {
            for b in 0..q {
                omega[a][b] += if j == 0 { g[a][b] } else { w * (g[a][b] + g[b][a]) };
            }
        }
    }
    omega
}

pub fn t_gw(z: &Rows, lag: usize) -> f64 {
    let n = z.len() as f64;
    n * quadratic_form(&mean(z), &inverse_2x2(&hac(z, lag)))
}

pub fn t_dm(d: &[f64], lag: usize) -> f64 {
    let rows: Vec<Vec<f64>> = d.iter().map(|&v| vec![v]).collect();
    let n = d.len() as f64;
    n.sqrt() * mean(&rows)[0] / hac(&rows, lag)[0][0].sqrt()
}

pub fn t_sn(d: &[f64]) -> f64 {
    let rows: Vec<Vec<f64>> = d.iter().map(|&v| vec![v]).collect();
    let n = d.len() as f64;
    let m = mean(&rows)[0];
    n * m * m / normalizer(&rows)[0][0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_values() {
        let z: Vec<Vec<f64>> = vec![vec![1.0], vec![2.0], vec![3.0]];
        assert!((q1(&z) - 36.0).abs() < 1e-12);
        assert!((q2(&z) - 54.0).abs() < 1e-12);
        assert!((t_sn(&[1.0, 2.0, 3.0]) - 54.0).abs() < 1e-12);
    }
}
