//! Discrete energy on the log-polar grid and its first two derivatives.
//!
//! In (s, θ) = (ln r, θ) the Dirichlet energy keeps its form and the bulk
//! term picks up Ŵ = r²|f′|², so
//!
//!   E = h_s h_θ [ Σ ½(Δ_s p / h_s)² + Σ ½(Δ_θ p / h_θ)² + λ̄² Σ Ŵ f̃_b(p) ]
//!
//! with trapezoid weight ½ on the two Dirichlet rings. The residual
//! Δ_h p − λ̄² Ŵ (|p|² − s_b²) p equals −∇E / (h_s h_θ) at interior nodes.

use faer::sparse::{SparseColMat, Triplet};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::bulk_density;

use super::{Problem, SolutionField};

/// Node-wise residual of both components; ring entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub r11: Vec<f64>,
    pub r12: Vec<f64>,
}

impl Residual {
    /// Values at the unknowns, in solver ordering.
    pub fn unknowns(&self, problem: &Problem) -> Vec<f64> {
        let g = &problem.grid;
        let mut out = vec![0.0; g.n_unknowns()];
        for i in 1..g.n_r - 1 {
            for j in 0..g.n_theta {
                let n = g.node(i, j);
                out[g.unknown(i, j, 0)] = self.r11[n];
                out[g.unknown(i, j, 1)] = self.r12[n];
            }
        }
        out
    }
}

fn ring_weight(i: usize, n_r: usize) -> f64 {
    if i == 0 || i == n_r - 1 {
        0.5
    } else {
        1.0
    }
}

pub fn discrete_energy(field: &SolutionField, problem: &Problem, lambda_bar_sq: f64) -> f64 {
    let g = &problem.grid;
    let (cs, ct) = (0.5 / (g.h_s * g.h_s), 0.5 / (g.h_theta * g.h_theta));
    let (a, b) = (&field.p11, &field.p12);
    let mut radial = 0.0;
    let mut angular = 0.0;
    let mut bulk = 0.0;
    for i in 0..g.n_r {
        let w = ring_weight(i, g.n_r);
        for j in 0..g.n_theta {
            let n = g.node(i, j);
            let e = g.node(i, (j + 1) % g.n_theta);
            angular += w * ((a[e] - a[n]).powi(2) + (b[e] - b[n]).powi(2));
            if i + 1 < g.n_r {
                let u = g.node(i + 1, j);
                radial += (a[u] - a[n]).powi(2) + (b[u] - b[n]).powi(2);
            }
            bulk += w * g.weight_s[n] * bulk_density(field.tensor(n), &problem.mat);
        }
    }
    g.h_s * g.h_theta * (cs * radial + ct * angular + lambda_bar_sq * bulk)
}

pub fn residual(field: &SolutionField, problem: &Problem, lambda_bar_sq: f64) -> Residual {
    let g = &problem.grid;
    let s_b2 = problem.s_b().powi(2);
    let (is2, it2) = (1.0 / (g.h_s * g.h_s), 1.0 / (g.h_theta * g.h_theta));
    let (a, b) = (&field.p11, &field.p12);
    let mut r11 = vec![0.0; g.len()];
    let mut r12 = vec![0.0; g.len()];
    for i in 1..g.n_r - 1 {
        for j in 0..g.n_theta {
            let n = g.node(i, j);
            let (up, down) = (g.node(i + 1, j), g.node(i - 1, j));
            let (east, west) = (g.node(i, (j + 1) % g.n_theta), g.node(i, (j + g.n_theta - 1) % g.n_theta));
            let lap = |v: &[f64]| (v[up] - 2.0 * v[n] + v[down]) * is2 + (v[east] - 2.0 * v[n] + v[west]) * it2;
            let m = lambda_bar_sq * g.weight_s[n] * (a[n] * a[n] + b[n] * b[n] - s_b2);
            r11[n] = lap(a) - m * a[n];
            r12[n] = lap(b) - m * b[n];
        }
    }
    Residual { r11, r12 }
}

/// Max-norm over the interior nodes.
pub fn residual_norm(res: &Residual) -> f64 {
    res.r11.iter().chain(&res.r12).fold(0.0, |m, v| m.max(v.abs()))
}

/// ∇E at the unknowns.
pub fn gradient(field: &SolutionField, problem: &Problem, lambda_bar_sq: f64) -> Vec<f64> {
    let g = &problem.grid;
    let hh = g.h_s * g.h_theta;
    residual(field, problem, lambda_bar_sq)
        .unknowns(problem)
        .into_iter()
        .map(|v| -hh * v)
        .collect()
}

/// Entries of H − shift·I, H the Hessian of E in the unknowns.
pub fn hessian_triplets(
    field: &SolutionField,
    problem: &Problem,
    lambda_bar_sq: f64,
    shift: f64,
) -> Vec<Triplet<usize, usize, f64>> {
    let g = &problem.grid;
    let hh = g.h_s * g.h_theta;
    let s_b2 = problem.s_b().powi(2);
    let (cs, ct) = (hh / (g.h_s * g.h_s), hh / (g.h_theta * g.h_theta));
    let mut t = Vec::with_capacity(g.n_unknowns() * 6);
    for i in 1..g.n_r - 1 {
        for j in 0..g.n_theta {
            let n = g.node(i, j);
            let (a, b) = (field.p11[n], field.p12[n]);
            let lw = hh * lambda_bar_sq * g.weight_s[n];
            let q = a * a + b * b - s_b2;
            let (x, y) = (g.unknown(i, j, 0), g.unknown(i, j, 1));
            let diag = 2.0 * cs + 2.0 * ct - shift;
            t.push(Triplet::new(x, x, diag + lw * (q + 2.0 * a * a)));
            t.push(Triplet::new(y, y, diag + lw * (q + 2.0 * b * b)));
            t.push(Triplet::new(x, y, lw * 2.0 * a * b));
            t.push(Triplet::new(y, x, lw * 2.0 * a * b));
            for c in 0..2 {
                let me = g.unknown(i, j, c);
                for jj in [(j + 1) % g.n_theta, (j + g.n_theta - 1) % g.n_theta] {
                    t.push(Triplet::new(me, g.unknown(i, jj, c), -ct));
                }
                if i > 1 {
                    t.push(Triplet::new(me, g.unknown(i - 1, j, c), -cs));
                }
                if i + 2 < g.n_r {
                    t.push(Triplet::new(me, g.unknown(i + 1, j, c), -cs));
                }
            }
        }
    }
    t
}

pub fn hessian(
    field: &SolutionField,
    problem: &Problem,
    lambda_bar_sq: f64,
    shift: f64,
) -> Result<SparseColMat<usize, f64>> {
    let n = problem.grid.n_unknowns();
    SparseColMat::try_new_from_triplets(n, n, &hessian_triplets(field, problem, lambda_bar_sq, shift))
        .map_err(|e| Error::LinearSolve(format!("Hessian assembly: {e:?}")))
}

/// H·x without assembling H.
pub fn hessian_apply(field: &SolutionField, problem: &Problem, lambda_bar_sq: f64, x: &[f64]) -> Vec<f64> {
    let g = &problem.grid;
    let hh = g.h_s * g.h_theta;
    let s_b2 = problem.s_b().powi(2);
    let (cs, ct) = (hh / (g.h_s * g.h_s), hh / (g.h_theta * g.h_theta));
    let mut y = vec![0.0; x.len()];
    for i in 1..g.n_r - 1 {
        for j in 0..g.n_theta {
            let n = g.node(i, j);
            let (a, b) = (field.p11[n], field.p12[n]);
            let lw = hh * lambda_bar_sq * g.weight_s[n];
            let q = a * a + b * b - s_b2;
            let (ux, uy) = (g.unknown(i, j, 0), g.unknown(i, j, 1));
            y[ux] += lw * ((q + 2.0 * a * a) * x[ux] + 2.0 * a * b * x[uy]);
            y[uy] += lw * (2.0 * a * b * x[ux] + (q + 2.0 * b * b) * x[uy]);
            for c in 0..2 {
                let me = g.unknown(i, j, c);
                let mut acc = (2.0 * cs + 2.0 * ct) * x[me];
                acc -= ct * (x[g.unknown(i, (j + 1) % g.n_theta, c)] + x[g.unknown(i, (j + g.n_theta - 1) % g.n_theta, c)]);
                if i > 1 {
                    acc -= cs * x[g.unknown(i - 1, j, c)];
                }
                if i + 2 < g.n_r {
                    acc -= cs * x[g.unknown(i + 1, j, c)];
                }
                y[me] += acc;
            }
        }
    }
    y
}

/// Dense copy of the Hessian, for small grids.
pub fn dense_hessian(field: &SolutionField, problem: &Problem, lambda_bar_sq: f64) -> DMatrix<f64> {
    let n = problem.grid.n_unknowns();
    let mut m = DMatrix::zeros(n, n);
    for t in hessian_triplets(field, problem, lambda_bar_sq, 0.0) {
        m[(t.row, t.col)] += t.val;
    }
    m
}
