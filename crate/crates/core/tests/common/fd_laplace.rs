//! Independent second-order finite-difference Laplace solver on the annulus
//! ε ≤ r ≤ 1 in log-polar coordinates (s = ln r, θ), where Δ becomes
//! u_ss + u_θθ. Each Fourier mode in θ leaves a tridiagonal system in s.

use std::f64::consts::PI;

use num_complex::Complex64;

pub struct FdSolution {
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    /// u[i][j] at (s_i, θ_j); rings i = 0 and i = n_s − 1 hold the data.
    pub u: Vec<Vec<f64>>,
}

fn dft(v: &[f64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|m| {
            v.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &x)| {
                acc + Complex64::from_polar(x, -2.0 * PI * (m * j % n) as f64 / n as f64)
            })
        })
        .collect()
}

fn idft(v: &[Complex64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|j| {
            v.iter()
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (m, &x)| {
                    acc + x * Complex64::from_polar(1.0, 2.0 * PI * (m * j % n) as f64 / n as f64)
                })
                .re
                / n as f64
        })
        .collect()
}

pub fn solve(epsilon: f64, n_s: usize, n_theta: usize, inner: &dyn Fn(f64) -> f64, outer: &dyn Fn(f64) -> f64) -> FdSolution {
    let s0 = epsilon.ln();
    let hs = -s0 / (n_s - 1) as f64;
    let ht = 2.0 * PI / n_theta as f64;
    let s: Vec<f64> = (0..n_s).map(|i| s0 + i as f64 * hs).collect();
    let theta: Vec<f64> = (0..n_theta).map(|j| j as f64 * ht).collect();
    let lo = dft(&theta.iter().map(|&t| inner(t)).collect::<Vec<_>>());
    let hi = dft(&theta.iter().map(|&t| outer(t)).collect::<Vec<_>>());
    let n_in = n_s - 2;
    let mut modes = vec![vec![Complex64::new(0.0, 0.0); n_theta]; n_s];
    modes[0] = lo.clone();
    modes[n_s - 1] = hi.clone();
    for m in 0..n_theta {
        let lam = 4.0 / (ht * ht) * (PI * m as f64 / n_theta as f64).sin().powi(2);
        // (u_{i−1} − (2 + λh²)u_i + u_{i+1}) = 0, Thomas algorithm
        let diag = -(2.0 + lam * hs * hs);
        let mut c = vec![0.0; n_in];
        let mut d = vec![Complex64::new(0.0, 0.0); n_in];
        for k in 0..n_in {
            let mut rhs = Complex64::new(0.0, 0.0);
            if k == 0 {
                rhs -= lo[m];
            }
            if k == n_in - 1 {
                rhs -= hi[m];
            }
            let denom = diag - if k > 0 { c[k - 1] } else { 0.0 };
            c[k] = 1.0 / denom;
            d[k] = (rhs - if k > 0 { d[k - 1] } else { Complex64::new(0.0, 0.0) }) / denom;
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n_in];
        for k in (0..n_in).rev() {
            x[k] = d[k] - if k + 1 < n_in { x[k + 1] * c[k] } else { Complex64::new(0.0, 0.0) };
        }
        for k in 0..n_in {
            modes[k + 1][m] = x[k];
        }
    }
    let u = modes.iter().map(|row| idft(row)).collect();
    FdSolution { s, theta, u }
}

/// Exact trace at r = ε of the harmonic function with piecewise-constant
/// data on the arcs D_k and the logarithmic centre term, from its Fourier
/// series.
pub fn inner_trace(values: &[f64], center: f64, epsilon: f64) -> impl Fn(f64) -> f64 + '_ {
    let kk = values.len();
    let kf = kk as f64;
    move |theta: f64| {
        let mut u = center;
        for n in 1..60 {
            let nf = n as f64;
            let (mut a, mut b) = (0.0, 0.0);
            for (k, &v) in values.iter().enumerate() {
                let k = (k + 1) as f64;
                let (p1, p2) = (2.0 * PI * (kf - k) / kf, 2.0 * PI * (kf - k + 1.0) / kf);
                a += v * ((nf * p2).sin() - (nf * p1).sin()) / (nf * PI);
                b -= v * ((nf * p2).cos() - (nf * p1).cos()) / (nf * PI);
            }
            u += epsilon.powi(n) * (a * (nf * theta).cos() + b * (nf * theta).sin());
        }
        u
    }
}

/// Average of piecewise-constant arc data over the node cell
/// [θ − h/2, θ + h/2], so jumps inside a cell enter with their exact weight.
pub fn cell_average_trace(values: &[f64], h: f64) -> impl Fn(f64) -> f64 + '_ {
    let kk = values.len();
    let w = 2.0 * PI / kk as f64;
    move |theta: f64| {
        let (a, b) = (theta - 0.5 * h, theta + 0.5 * h);
        let mut cuts = vec![a, b];
        for j in (a / w).floor() as i64..=(b / w).ceil() as i64 {
            let c = j as f64 * w;
            if c > a && c < b {
                cuts.push(c);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2)
            .map(|p| {
                // arc D_k covers (2π(K−k)/K, 2π(K−k+1)/K)
                let mid = (0.5 * (p[0] + p[1])).rem_euclid(2.0 * PI);
                let k = kk - ((mid / w).floor() as usize).min(kk - 1);
                (p[1] - p[0]) * values[k - 1]
            })
            .sum::<f64>()
            / h
    }
}
