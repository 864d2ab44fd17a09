//! Full nonlinear equilibria on the mapped annulus: discrete energy,
//! Newton iteration, Hessian spectrum and λ̄² continuation.

pub mod branches;
pub mod continuation;
pub mod diagnostics;
pub mod eigen;
pub mod energy;
pub mod grid;
pub mod newton;

pub use branches::{plan_branches, BranchPlan, SeedKind};
pub use continuation::{continuation_sweep, log_schedule, BranchEntry, BranchRecord, EntryStatus, SweepOptions};
pub use diagnostics::{bend_signature, defect_summary, diagnostics, DefectSummary, DiagWeights, Diagnostics};
pub use eigen::{hessian_min_eig, HessianMode};
pub use energy::{dense_hessian, discrete_energy, gradient, hessian, hessian_apply, residual, residual_norm, Residual};
pub use grid::AnnulusGrid;
pub use newton::{newton_observed, newton_solve, NewtonOptions, StepKind};

use crate::error::{Error, Result};
use crate::largelimit::LargeLimit;
use crate::model::{
    boundary_value, tensor_from_director, BoundaryLocation, BoundarySpec, MaterialParams, PTensor, PolygonSpec,
};
use crate::smalllimit::SmallLimit;

/// Grid plus the material and Dirichlet data of one boundary-value problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: AnnulusGrid,
    pub mat: MaterialParams,
    pub gamma_star: f64,
    pub sigma: f64,
    /// Far-field tensor on ring 0.
    pub inner: PTensor,
    /// Boundary tensor on the outer ring, one per θ_j.
    pub outer: Vec<PTensor>,
}

impl Problem {
    /// Dirichlet data from the homeotropic boundary condition; `spec`
    /// carries the far-field angle in the original frame.
    pub fn new(grid: AnnulusGrid, spec: &PolygonSpec, bspec: &BoundarySpec, mat: &MaterialParams) -> Result<Self> {
        if spec.sides != grid.sides {
            return Err(Error::Domain("polygon and grid disagree on the number of sides".into()));
        }
        let outer = grid
            .theta
            .iter()
            .map(|&t| boundary_value(spec, bspec, mat, BoundaryLocation::MappedAngle(t)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            inner: tensor_from_director(mat.s_b(), spec.gamma_star),
            grid,
            mat: *mat,
            gamma_star: spec.gamma_star,
            sigma: bspec.sigma,
            outer,
        })
    }

    /// Arbitrary ring data, mainly for tests.
    pub fn with_rings(grid: AnnulusGrid, mat: &MaterialParams, inner: PTensor, outer: Vec<PTensor>) -> Result<Self> {
        if outer.len() != grid.n_theta {
            return Err(Error::Domain(format!(
                "outer ring needs {} values, got {}",
                grid.n_theta,
                outer.len()
            )));
        }
        let gamma_star = 0.5 * inner.p12.atan2(inner.p11);
        Ok(Self {
            grid,
            mat: *mat,
            gamma_star,
            sigma: 0.0,
            inner,
            outer,
        })
    }

    pub fn s_b(&self) -> f64 {
        self.mat.s_b()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Convergence {
    pub iterations: usize,
    pub residual: f64,
}

/// Node values of (p11, p12), rings included.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub p11: Vec<f64>,
    pub p12: Vec<f64>,
    pub lambda_bar_sq: f64,
    pub convergence: Convergence,
}

impl SolutionField {
    /// Samples `f(r, θ)` on the interior rings and imposes the ring data.
    pub fn from_fn<F: Fn(f64, f64) -> Result<PTensor>>(problem: &Problem, f: F) -> Result<Self> {
        let g = &problem.grid;
        let mut p11 = vec![0.0; g.len()];
        let mut p12 = vec![0.0; g.len()];
        for i in 0..g.n_r {
            for j in 0..g.n_theta {
                let p = if i == 0 {
                    problem.inner
                } else if i == g.n_r - 1 {
                    problem.outer[j]
                } else {
                    f(g.r[i], g.theta[j])?
                };
                let n = g.node(i, j);
                p11[n] = p.p11;
                p12[n] = p.p12;
            }
        }
        Ok(Self {
            p11,
            p12,
            lambda_bar_sq: 0.0,
            convergence: Convergence::default(),
        })
    }

    pub fn uniform(problem: &Problem) -> Self {
        let p = problem.inner;
        Self::from_fn(problem, |_, _| Ok(p)).expect("constant sampler cannot fail")
    }

    /// Seed from the λ → 0 limiting profile with ε = ε_ann.
    pub fn from_small_limit(problem: &Problem, spec: &PolygonSpec, bspec: &BoundarySpec) -> Result<Self> {
        let lim = SmallLimit::new(spec, bspec, &problem.mat, problem.grid.epsilon_ann)?;
        Self::from_fn(problem, |r, t| lim.mapped(r, t))
    }

    /// Seed from a λ → ∞ limiting profile.
    pub fn from_large_limit(problem: &Problem, lim: &LargeLimit) -> Result<Self> {
        Self::from_fn(problem, |r, t| lim.mapped(r, t))
    }

    pub fn tensor(&self, n: usize) -> PTensor {
        PTensor::new(self.p11[n], self.p12[n])
    }

    /// Bilinear interpolant at a mapped point.
    pub fn interpolate(&self, grid: &AnnulusGrid, r: f64, theta: f64) -> PTensor {
        PTensor::new(grid.interpolate(&self.p11, r, theta), grid.interpolate(&self.p12, r, theta))
    }

    /// Interior unknowns in solver ordering.
    pub fn unknowns(&self, grid: &AnnulusGrid) -> Vec<f64> {
        let mut x = vec![0.0; grid.n_unknowns()];
        for i in 1..grid.n_r - 1 {
            for j in 0..grid.n_theta {
                let n = grid.node(i, j);
                x[grid.unknown(i, j, 0)] = self.p11[n];
                x[grid.unknown(i, j, 1)] = self.p12[n];
            }
        }
        x
    }

    pub fn set_unknowns(&mut self, grid: &AnnulusGrid, x: &[f64]) {
        for i in 1..grid.n_r - 1 {
            for j in 0..grid.n_theta {
                let n = grid.node(i, j);
                self.p11[n] = x[grid.unknown(i, j, 0)];
                self.p12[n] = x[grid.unknown(i, j, 1)];
            }
        }
    }
}
