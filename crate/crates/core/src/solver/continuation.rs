//! Natural-parameter continuation in λ̄² with warm-started Newton solves.

use crate::conformal::SCMap;
use crate::error::{Error, Result};

use super::diagnostics::{bend_signature, diagnostics, DiagWeights};
use super::eigen::hessian_min_eig;
use super::newton::{newton_solve, NewtonOptions};
use super::{Problem, SolutionField};

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub newton: NewtonOptions,
    /// Relative jump in (m11, m12) between neighbouring points that counts
    /// as leaving the branch.
    pub jump_threshold: f64,
    /// Treat a change of the boundary bend vertices as leaving the branch;
    /// points where the signature is undetermined are skipped.
    pub track_bends: bool,
    /// Bend vertices the first point must show, if any.
    pub expected_bends: Option<Vec<usize>>,
    pub eig_tol: f64,
    /// λ̄² values whose converged fields are kept.
    pub snapshots: Vec<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            jump_threshold: 0.25,
            track_bends: true,
            expected_bends: None,
            eig_tol: 1e-8,
            snapshots: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntryStatus {
    Converged,
    /// Newton did not converge; the message holds the cause.
    NewtonFailed(String),
    /// Newton converged, but to a different state than the branch.
    Escaped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchEntry {
    pub lambda_bar_sq: f64,
    pub status: EntryStatus,
    pub energy: f64,
    /// NaN when the eigensolver failed.
    pub mu_min: f64,
    pub m11: f64,
    pub m12: f64,
    pub n_point_defects: usize,
    pub n_line_defects: usize,
    pub iterations: usize,
    pub residual: f64,
    pub bends: Vec<usize>,
}

impl BranchEntry {
    fn failed(lambda_bar_sq: f64, msg: String) -> Self {
        Self {
            lambda_bar_sq,
            status: EntryStatus::NewtonFailed(msg),
            energy: f64::NAN,
            mu_min: f64::NAN,
            m11: f64::NAN,
            m12: f64::NAN,
            n_point_defects: 0,
            n_line_defects: 0,
            iterations: 0,
            residual: f64::NAN,
            bends: Vec::new(),
        }
    }

    pub fn converged(&self) -> bool {
        self.status == EntryStatus::Converged
    }

    pub fn stable(&self) -> bool {
        self.converged() && self.mu_min > 0.0
    }
}

#[derive(Debug, Clone)]
pub struct BranchRecord {
    pub label: String,
    /// Entries in schedule order; the last one may be a failure.
    pub entries: Vec<BranchEntry>,
    pub snapshots: Vec<(f64, SolutionField)>,
}

impl BranchRecord {
    pub fn converged(&self) -> impl Iterator<Item = &BranchEntry> {
        self.entries.iter().filter(|e| e.converged())
    }

    pub fn at(&self, lambda_bar_sq: f64) -> Option<&BranchEntry> {
        self.converged().find(|e| e.lambda_bar_sq == lambda_bar_sq)
    }

    /// Smallest λ̄² reached on the branch.
    pub fn lowest(&self) -> Option<f64> {
        self.converged().map(|e| e.lambda_bar_sq).min_by(f64::total_cmp)
    }

    pub fn highest(&self) -> Option<f64> {
        self.converged().map(|e| e.lambda_bar_sq).max_by(f64::total_cmp)
    }
}

fn strictly_monotone(s: &[f64]) -> bool {
    s.windows(2).all(|w| w[1] > w[0]) || s.windows(2).all(|w| w[1] < w[0])
}

/// Follows one branch along `schedule`, warm-starting each solve from the
/// previous converged field. The sweep stops at the first Newton failure
/// or basin escape; both are recorded as the final entry.
pub fn continuation_sweep(
    label: &str,
    seed: &SolutionField,
    schedule: &[f64],
    problem: &Problem,
    map: &SCMap,
    weights: &DiagWeights,
    opts: &SweepOptions,
) -> Result<BranchRecord> {
    if schedule.is_empty() || !strictly_monotone(schedule) || schedule.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::Config("λ̄² schedule must be non-negative and strictly monotone".into()));
    }
    let mut record = BranchRecord {
        label: label.to_string(),
        entries: Vec::new(),
        snapshots: Vec::new(),
    };
    let mut current = seed.clone();
    let mut previous: Option<BranchEntry> = None;
    // last determined bend signature
    let mut last_bends: Vec<usize> = Vec::new();
    for &lbs in schedule {
        let field = match newton_solve(&current, problem, lbs, &opts.newton) {
            Ok(f) => f,
            Err(e) => {
                record.entries.push(BranchEntry::failed(lbs, e.to_string()));
                break;
            }
        };
        let d = diagnostics(&field, problem, map, weights)?;
        let mu_min = hessian_min_eig(&field, problem, lbs, opts.eig_tol).map_or(f64::NAN, |m| m.mu_min);
        let bends = bend_signature(&field, &problem.grid);
        let mut entry = BranchEntry {
            lambda_bar_sq: lbs,
            status: EntryStatus::Converged,
            energy: d.energy,
            mu_min,
            m11: d.m11,
            m12: d.m12,
            n_point_defects: d.defects.n_point,
            n_line_defects: d.defects.n_line,
            iterations: field.convergence.iterations,
            residual: field.convergence.residual,
            bends,
        };
        match &previous {
            None => {
                if let Some(want) = &opts.expected_bends {
                    if *want != entry.bends {
                        entry.status = EntryStatus::Escaped(format!("bend vertices {:?}, expected {want:?}", entry.bends));
                    }
                }
            }
            Some(prev) => {
                let norm = prev.m11.hypot(prev.m12).max(1e-12);
                let jump = (entry.m11 - prev.m11).hypot(entry.m12 - prev.m12) / norm;
                if jump > opts.jump_threshold {
                    entry.status = EntryStatus::Escaped(format!("moment jump {jump:.3}"));
                } else if opts.track_bends && !entry.bends.is_empty() && !last_bends.is_empty() && entry.bends != last_bends {
                    entry.status = EntryStatus::Escaped(format!("bend vertices {last_bends:?} -> {:?}", entry.bends));
                }
            }
        }
        let done = !entry.converged();
        record.entries.push(entry.clone());
        if done {
            break;
        }
        if opts.snapshots.contains(&lbs) {
            record.snapshots.push((lbs, field.clone()));
        }
        if !entry.bends.is_empty() {
            last_bends = entry.bends.clone();
        }
        previous = Some(entry);
        current = field;
    }
    Ok(record)
}

/// n log-spaced values from a to b inclusive.
pub fn log_schedule(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > 0.0) || n < 2 || a == b {
        return Err(Error::Config(format!("log schedule needs 0 < a ≠ b and n ≥ 2, got {a}:{b}:{n}")));
    }
    let (la, lb) = (a.ln(), b.ln());
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                a
            } else if i == n - 1 {
                b
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}
