//! Damped Newton iteration on the discrete Euler–Lagrange system.

use faer::linalg::solvers::Solve;
use faer::sparse::SparseColMat;
use faer::{Mat, Side};

use crate::error::{Error, Result};

use super::energy::{discrete_energy, hessian, residual, residual_norm};
use super::{Convergence, Problem, SolutionField};

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Max-norm of the log-polar residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Full steps are taken once the residual drops below this.
    pub full_step_below: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 50,
            full_step_below: 1e-6,
        }
    }
}

enum Factor {
    /// H positive definite: the Newton direction descends the energy.
    Descent(faer::sparse::linalg::solvers::Llt<usize, f64>),
    Indefinite(faer::sparse::linalg::solvers::Lu<usize, f64>),
}

fn factor(h: &SparseColMat<usize, f64>) -> Result<Factor> {
    if let Ok(llt) = h.sp_cholesky(Side::Lower) {
        return Ok(Factor::Descent(llt));
    }
    h.sp_lu()
        .map(Factor::Indefinite)
        .map_err(|e| Error::LinearSolve(format!("sparse LU: {e:?}")))
}

fn solve(f: &Factor, rhs: &[f64]) -> Vec<f64> {
    let b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    let x = match f {
        Factor::Descent(l) => l.solve(&b),
        Factor::Indefinite(l) => l.solve(&b),
    };
    (0..rhs.len()).map(|i| x[(i, 0)]).collect()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// How an accepted iterate was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Backtracking on the energy; the Hessian was positive definite.
    EnergyDescent,
    /// Backtracking on the residual norm.
    ResidualDescent,
    /// Undamped step close to the solution.
    Full,
}

/// Newton's method from `initial`, whose ring values are kept. Steps are
/// damped by backtracking on the energy while the Hessian is positive
/// definite and on the residual norm otherwise.
pub fn newton_solve(
    initial: &SolutionField,
    problem: &Problem,
    lambda_bar_sq: f64,
    opts: &NewtonOptions,
) -> Result<SolutionField> {
    newton_observed(initial, problem, lambda_bar_sq, opts, &mut |_, _| {})
}

/// As [`newton_solve`], reporting every accepted iterate.
pub fn newton_observed(
    initial: &SolutionField,
    problem: &Problem,
    lambda_bar_sq: f64,
    opts: &NewtonOptions,
    observer: &mut dyn FnMut(&SolutionField, StepKind),
) -> Result<SolutionField> {
    let g = &problem.grid;
    let hh = g.h_s * g.h_theta;
    let mut field = initial.clone();
    field.lambda_bar_sq = lambda_bar_sq;
    let mut trace = Vec::new();
    for it in 0..=opts.max_iter {
        let res = residual(&field, problem, lambda_bar_sq);
        let norm = residual_norm(&res);
        trace.push(norm);
        if !norm.is_finite() {
            break;
        }
        if norm < opts.tol {
            field.convergence = Convergence {
                iterations: it,
                residual: norm,
            };
            return Ok(field);
        }
        if it == opts.max_iter {
            break;
        }
        let r = res.unknowns(problem);
        let h = hessian(&field, problem, lambda_bar_sq, 0.0)?;
        let fac = factor(&h)?;
        // H δ = h_s h_θ R, i.e. δ = −H⁻¹∇E
        let rhs: Vec<f64> = r.iter().map(|v| hh * v).collect();
        let delta = solve(&fac, &rhs);
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::LinearSolve("Newton step is not finite".into()));
        }
        let x0 = field.unknowns(g);
        let trial = |alpha: f64| {
            let mut f = field.clone();
            let x: Vec<f64> = x0.iter().zip(&delta).map(|(x, d)| x + alpha * d).collect();
            f.set_unknowns(g, &x);
            f
        };
        if norm < opts.full_step_below {
            field = trial(1.0);
            observer(&field, StepKind::Full);
            continue;
        }
        let mut alpha = 1.0;
        let accepted = match fac {
            Factor::Descent(_) => {
                let e0 = discrete_energy(&field, problem, lambda_bar_sq);
                let n0 = l2(&r);
                // ∇E·δ = −h_s h_θ R·δ
                let slope = -hh * r.iter().zip(&delta).map(|(a, b)| a * b).sum::<f64>();
                loop {
                    let f = trial(alpha);
                    if discrete_energy(&f, problem, lambda_bar_sq) <= e0 + 1e-4 * alpha * slope {
                        break Some((f, StepKind::EnergyDescent));
                    }
                    // near a minimizer the energy decrease drowns in rounding
                    let n1 = l2(&residual(&f, problem, lambda_bar_sq).unknowns(problem));
                    if n1 <= (1.0 - 1e-4 * alpha) * n0 {
                        break Some((f, StepKind::ResidualDescent));
                    }
                    alpha *= 0.5;
                    if alpha < 1e-8 {
                        break None;
                    }
                }
            }
            Factor::Indefinite(_) => {
                let n0 = l2(&r);
                loop {
                    let f = trial(alpha);
                    let n1 = l2(&residual(&f, problem, lambda_bar_sq).unknowns(problem));
                    if n1 <= (1.0 - 1e-4 * alpha) * n0 {
                        break Some((f, StepKind::ResidualDescent));
                    }
                    alpha *= 0.5;
                    if alpha < 1e-8 {
                        break None;
                    }
                }
            }
        };
        match accepted {
            Some((f, kind)) => {
                field = f;
                observer(&field, kind);
            }
            None => break,
        }
    }
    Err(Error::NewtonNoConvergence { trace })
}
