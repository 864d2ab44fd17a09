//! Which branches to follow for a given polygon and far field, and how to
//! seed them.

use crate::conformal::SCMap;
use crate::error::Result;
use crate::largelimit::{best_lifts, classify_states, enumerate_assignments, BendAssignment, ClassKind, LargeLimit};
use crate::model::{BoundarySpec, PolygonSpec};

use super::continuation::{continuation_sweep, BranchRecord, SweepOptions};
use super::diagnostics::DiagWeights;
use super::{Problem, SolutionField};

#[derive(Debug, Clone, PartialEq)]
pub enum SeedKind {
    /// λ → 0 profile, followed upward.
    SmallLimit,
    /// λ → ∞ profile of one bend assignment, followed downward.
    LargeLimit { assignment: BendAssignment, lift: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPlan {
    pub label: String,
    pub seed: SeedKind,
}

/// The unique small-λ branch ("St" when the square carries that class)
/// plus one downward branch per class representative and director lift.
pub fn plan_branches(spec: &PolygonSpec) -> Result<Vec<BranchPlan>> {
    let Some(k) = spec.sides.count() else {
        return Ok(vec![BranchPlan {
            label: "unique".into(),
            seed: SeedKind::SmallLimit,
        }]);
    };
    let classes = classify_states(&enumerate_assignments(k)?, spec.gamma_star)?;
    let unique = classes
        .iter()
        .find(|c| c.kind == ClassKind::SmallLambdaBranch)
        .map_or("unique".to_string(), |c| c.label.clone());
    let mut plans = vec![BranchPlan {
        label: unique,
        seed: SeedKind::SmallLimit,
    }];
    for c in classes.iter().filter(|c| c.kind == ClassKind::Orbit) {
        let lifts = best_lifts(&c.representative, spec.gamma_star);
        for (i, &lift) in lifts.iter().enumerate() {
            let label = if lifts.len() > 1 {
                format!("{}{}", c.label, (b'a' + i as u8) as char)
            } else {
                c.label.clone()
            };
            plans.push(BranchPlan {
                label,
                seed: SeedKind::LargeLimit {
                    assignment: c.representative.clone(),
                    lift,
                },
            });
        }
    }
    Ok(plans)
}

impl BranchPlan {
    pub fn upward(&self) -> bool {
        self.seed == SeedKind::SmallLimit
    }

    pub fn seed_field(&self, problem: &Problem, spec: &PolygonSpec, bspec: &BoundarySpec) -> Result<SolutionField> {
        match &self.seed {
            SeedKind::SmallLimit => SolutionField::from_small_limit(problem, spec, bspec),
            SeedKind::LargeLimit { assignment, lift } => {
                let lim = LargeLimit::new(assignment, *lift, problem.grid.epsilon_ann, &problem.mat)?;
                SolutionField::from_large_limit(problem, &lim)
            }
        }
    }

    /// Sweep options for this branch: class branches must keep their bend
    /// vertices; the small-λ branch is only watched through its moments.
    pub fn options(&self, base: &SweepOptions) -> SweepOptions {
        let mut o = base.clone();
        match &self.seed {
            SeedKind::SmallLimit => {
                o.track_bends = false;
                o.expected_bends = None;
            }
            SeedKind::LargeLimit { assignment, .. } => {
                o.track_bends = true;
                o.expected_bends = Some(vec![assignment.bend_pair.0, assignment.bend_pair.1]);
            }
        }
        o
    }

    /// Runs the branch over `schedule` (ascending), in the branch's own
    /// direction.
    #[allow(clippy::too_many_arguments)]
    pub fn run(
        &self,
        schedule: &[f64],
        problem: &Problem,
        map: &SCMap,
        weights: &DiagWeights,
        spec: &PolygonSpec,
        bspec: &BoundarySpec,
        base: &SweepOptions,
    ) -> Result<BranchRecord> {
        let seed = self.seed_field(problem, spec, bspec)?;
        let mut sched = schedule.to_vec();
        if !self.upward() {
            sched.reverse();
        }
        continuation_sweep(&self.label, &seed, &sched, problem, map, weights, &self.options(base))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn labels(k: usize, g: f64) -> Vec<String> {
        plan_branches(&PolygonSpec::polygon(k, g).unwrap())
            .unwrap()
            .into_iter()
            .map(|p| p.label)
            .collect()
    }

    #[test]
    fn square_plans() {
        assert_eq!(labels(4, 0.0), ["unique", "D1", "D2a", "D2b", "R"]);
        assert_eq!(labels(4, PI / 4.0), ["St", "D", "R1", "R2a", "R2b"]);
    }

    #[test]
    fn hexagon_plan_covers_six_classes() {
        let l = labels(6, PI / 6.0);
        for c in ["Para1", "Para2", "Meta1", "Meta2", "Ortho1", "Ortho2"] {
            assert!(l.iter().any(|x| x.starts_with(c)), "{c} missing from {l:?}");
        }
        assert_eq!(l[0], "unique");
    }

    #[test]
    fn disc_has_only_the_unique_branch() {
        let p = plan_branches(&PolygonSpec::disc(0.2)).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p[0].upward());
    }
}
