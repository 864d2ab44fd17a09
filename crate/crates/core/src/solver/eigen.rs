//! Smallest eigenvalue of the energy Hessian by shift-invert Lanczos.
//!
//! Every shift is certified to lie below the spectrum by a successful
//! Cholesky factorization of H − σI, so the dominant eigenvalue of
//! (H − σI)⁻¹ always belongs to μ_min.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

use super::energy::{hessian, hessian_apply};
use super::{Problem, SolutionField};

#[derive(Debug, Clone)]
pub struct HessianMode {
    pub mu_min: f64,
    /// Eigenvector as node arrays, zero on the rings.
    pub eta11: Vec<f64>,
    pub eta12: Vec<f64>,
    /// Unit eigenvector in solver ordering.
    pub vector: Vec<f64>,
    pub lanczos_steps: usize,
}

const MAX_STEPS: usize = 400;

fn certified(field: &SolutionField, problem: &Problem, lbs: f64, sigma: f64) -> Result<Option<Llt<usize, f64>>> {
    let h = hessian(field, problem, lbs, sigma)?;
    Ok(h.sp_cholesky(Side::Lower).ok())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Ritz {
    theta: f64,
    vector: Vec<f64>,
    steps: usize,
}

/// Dominant eigenpair of the symmetric positive operator x ↦ (H − σI)⁻¹x.
fn lanczos(llt: &Llt<usize, f64>, n: usize, rel_tol: f64, history: &mut Vec<f64>, sigma: f64) -> Result<Ritz> {
    let apply = |x: &[f64]| -> Vec<f64> {
        let b = Mat::<f64>::from_fn(n, 1, |i, _| x[i]);
        let y = llt.solve(&b);
        (0..n).map(|i| y[(i, 0)]).collect()
    };
    let mut q0: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (1.3 * i as f64).sin()).collect();
    let nrm = dot(&q0, &q0).sqrt();
    q0.iter_mut().for_each(|v| *v /= nrm);
    let mut basis = vec![q0];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let steps = MAX_STEPS.min(n);
    for m in 0..steps {
        let mut w = apply(&basis[m]);
        let a = dot(&w, &basis[m]);
        alpha.push(a);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = dot(&w, &w).sqrt();
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let top = eig.eigenvalues.iamax();
        let theta = eig.eigenvalues[top];
        let s = eig.eigenvectors.column(top);
        let resid = b * s[k - 1].abs();
        history.push(sigma + 1.0 / theta);
        if resid <= rel_tol * theta.abs() || b < 1e-300 || m + 1 == steps {
            if resid > rel_tol * theta.abs() && b >= 1e-300 {
                break;
            }
            let mut y = vec![0.0; n];
            for (c, q) in s.iter().zip(&basis) {
                y.iter_mut().zip(q).for_each(|(x, v)| *x += c * v);
            }
            return Ok(Ritz {
                theta,
                vector: y,
                steps: m + 1,
            });
        }
        beta.push(b);
        basis.push(w.into_iter().map(|x| x / b).collect());
    }
    Err(Error::EigenStagnation {
        history: std::mem::take(history),
    })
}

/// Smallest eigenvalue of the Hessian of the discrete energy with
/// homogeneous Dirichlet perturbations on both rings. `tol` bounds the
/// eigen-residual ‖Hy − μy‖ relative to the spectral scale.
pub fn hessian_min_eig(field: &SolutionField, problem: &Problem, lambda_bar_sq: f64, tol: f64) -> Result<HessianMode> {
    let g = &problem.grid;
    let n = g.n_unknowns();
    let hh = g.h_s * g.h_theta;
    let s_b2 = problem.s_b().powi(2);
    // H ≥ h_s h_θ (−L_h + min λ̄²Ŵ(|p|² − s_b²)) and −L_h > 0
    let mut q_min: f64 = 0.0;
    for i in 1..g.n_r - 1 {
        for j in 0..g.n_theta {
            let nd = g.node(i, j);
            let q = field.p11[nd].powi(2) + field.p12[nd].powi(2) - s_b2;
            q_min = q_min.min(lambda_bar_sq * g.weight_s[nd] * q);
        }
    }
    let scale = hh * (2.0 / (g.h_s * g.h_s) + 2.0 / (g.h_theta * g.h_theta));
    let sigma1 = hh * q_min - 1e-3 * hh;
    let mut history = Vec::new();
    let llt = certified(field, problem, lambda_bar_sq, sigma1)?
        .ok_or_else(|| Error::LinearSolve("lower spectral bound failed to certify".into()))?;
    let rough = lanczos(&llt, n, 1e-3, &mut history, sigma1)?;
    let mu_rough = sigma1 + 1.0 / rough.theta;

    // refine from a shift just below the estimate
    let mut gap = (1e-2 * (mu_rough - sigma1)).max(1e-9 * scale);
    let (sigma2, llt2) = loop {
        let s = mu_rough - gap;
        if s <= sigma1 {
            break (sigma1, llt);
        }
        if let Some(l) = certified(field, problem, lambda_bar_sq, s)? {
            break (s, l);
        }
        gap *= 4.0;
    };
    let fine = lanczos(&llt2, n, 1e-13, &mut history, sigma2)?;
    let y = fine.vector;
    let norm = dot(&y, &y).sqrt();
    let y: Vec<f64> = y.into_iter().map(|v| v / norm).collect();
    let hy = hessian_apply(field, problem, lambda_bar_sq, &y);
    let mu = dot(&y, &hy);
    let res = hy.iter().zip(&y).map(|(a, b)| (a - mu * b).powi(2)).sum::<f64>().sqrt();
    history.push(mu);
    if res > tol * scale.max(mu.abs()) {
        return Err(Error::EigenStagnation { history });
    }
    let mut eta11 = vec![0.0; g.len()];
    let mut eta12 = vec![0.0; g.len()];
    for i in 1..g.n_r - 1 {
        for j in 0..g.n_theta {
            eta11[g.node(i, j)] = y[g.unknown(i, j, 0)];
            eta12[g.node(i, j)] = y[g.unknown(i, j, 1)];
        }
    }
    Ok(HessianMode {
        mu_min: mu,
        eta11,
        eta12,
        vector: y,
        lanczos_steps: rough.steps + fine.steps,
    })
}
