use std::f64::consts::PI;

use proptest::prelude::*;

use nemext::conformal::SCMap;
use nemext::model::{BoundarySpec, MaterialParams, PolygonSpec};
use nemext::smalllimit::{locate_point_defects, poisson_solve, ArcData, HarmonicSpec, PolarScan, SmallLimit};
use nemext::solver::{
    log_schedule, newton_solve, plan_branches, AnnulusGrid, DiagWeights, NewtonOptions, Problem,
    SolutionField, SweepOptions,
};

fn sb() -> f64 {
    MaterialParams::default().s_b()
}

fn limit(k: usize, g: f64, sigma: f64, eps: f64) -> SmallLimit {
    let spec = PolygonSpec::polygon(k, g).unwrap();
    SmallLimit::new(&spec, &BoundarySpec::new(sigma).unwrap(), &MaterialParams::default(), eps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn boundary_order_parameter_stays_positive(k in 5usize..13, sigma in 0.01f64..0.5, t in 0.0f64..2.0 * PI) {
        let l = limit(k, 0.0, sigma, 1e-6);
        let p = l.mapped(1.0, t).unwrap();
        // normalized distance from the arc midpoint
        let w = PI / k as f64;
        let d = ((t.rem_euclid(2.0 * w) - w).abs() / w).min(1.0);
        let a = d.powf(1.0 / sigma);
        let want = sb() * sb() * ((a * a - 2.0 * a) * (2.0 * PI / k as f64).sin().powi(2) + 1.0);
        prop_assert!((p.order().powi(2) - want).abs() < 1e-12);
        prop_assert!(want >= sb() * sb() * (2.0 * PI / k as f64).cos().powi(2) - 1e-12);
    }

    #[test]
    fn centre_value_is_the_far_field(k in 3usize..9, g in 0.0f64..PI, t in 0.0f64..2.0 * PI, sigma in prop::sample::select(vec![0.0, 0.2, 0.5])) {
        let eps = 1e-7;
        let l = limit(k, g, sigma, eps);
        let p = l.mapped(eps, t).unwrap();
        let c = l.center();
        prop_assert!((p.p11 - c.p11).abs() < 1e-5 && (p.p12 - c.p12).abs() < 1e-5);
    }
}

#[test]
fn poisson_solution_is_discretely_harmonic() {
    for k in [3usize, 5] {
        let vals: Vec<f64> = (1..=k).map(|j| (j as f64 * 1.3).sin()).collect();
        let spec = HarmonicSpec::new(ArcData::Constant(vals), 0.2, 1e-3).unwrap();
        let u = |s: f64, t: f64| poisson_solve(&spec, s.exp(), t).unwrap();
        for &(s, t) in &[(-1.0, 0.4), (-0.5, 2.0), (-3.0, 5.1)] {
            let lap = |h: f64| (u(s + h, t) + u(s - h, t) + u(s, t + h) + u(s, t - h) - 4.0 * u(s, t)) / (h * h);
            let (a, b) = (lap(0.02).abs(), lap(0.01).abs());
            assert!(b < 1e-3 && a / b > 3.5, "K={k} ({s},{t}): {a:e} {b:e}");
        }
    }
}

#[test]
fn defects_avoid_the_sectors_next_to_the_first_vertex() {
    let scan = PolarScan {
        n_r: 80,
        n_theta: 240,
        ..PolarScan::for_epsilon(1e-6)
    };
    for k in [5usize, 6, 7, 8] {
        let kf = k as f64;
        for g in [0.0, PI / (2.0 * kf), PI / kf] {
            let l = limit(k, g, 0.0, 1e-6);
            let rep = locate_point_defects(&|r, t| l.mapped(r, t).unwrap(), &scan, None).unwrap();
            let pts: Vec<_> = rep.interior_points().collect();
            assert_eq!(pts.len(), 2, "K={k} γ*={g}");
            for p in pts {
                assert_eq!(p.winding, -0.5);
                let t = p.theta.rem_euclid(2.0 * PI);
                let banned = (PI - PI / kf..=PI).contains(&t) || t >= 2.0 * PI - PI / kf;
                assert!(!banned, "K={k} γ*={g}: defect at θ = {t}");
            }
        }
    }
}

fn square(g: f64, n_r: usize, n_t: usize) -> (SCMap, Problem, PolygonSpec) {
    let spec = PolygonSpec::polygon(4, g).unwrap();
    let map = SCMap::for_spec(&spec, 1e-14).unwrap();
    let grid = AnnulusGrid::build(&map, n_r, n_t, 10.0).unwrap();
    let pr = Problem::new(grid, &spec, &BoundarySpec::default(), &MaterialParams::default()).unwrap();
    (map, pr, spec)
}

#[test]
fn solutions_keep_the_square_symmetries() {
    let (map, pr, spec) = square(0.0, 32, 64);
    let w = DiagWeights::build(&map, &pr.grid, 9.0).unwrap();
    let seed = SolutionField::from_small_limit(&pr, &spec, &BoundarySpec::default()).unwrap();
    let opts = SweepOptions {
        snapshots: vec![50.0],
        ..SweepOptions::default()
    };
    let schedule = log_schedule(0.1, 50.0, 12).unwrap();
    let rec = nemext::solver::continuation_sweep("unique", &seed, &schedule, &pr, &map, &w, &opts).unwrap();
    let f = &rec.snapshots[0].1;
    let g = &pr.grid;
    let n = g.n_theta;
    for i in 0..g.n_r {
        for j in 0..n {
            let (a, anti, mirror) = (g.node(i, j), g.node(i, (j + n / 2) % n), g.node(i, (n - j) % n));
            assert!((f.p11[a] - f.p11[anti]).abs() < 1e-8 && (f.p12[a] - f.p12[anti]).abs() < 1e-8);
            assert!((f.p11[a] - f.p11[mirror]).abs() < 1e-6 && (f.p12[a] + f.p12[mirror]).abs() < 1e-6);
        }
    }
}

#[test]
fn every_seed_reaches_the_same_solution_at_small_size() {
    let (_, pr, spec) = square(0.0, 24, 48);
    let bspec = BoundarySpec::default();
    let solve = |seed: &SolutionField| newton_solve(seed, &pr, 0.1, &NewtonOptions::default()).unwrap();
    let plans = plan_branches(&spec).unwrap();
    let reference = solve(&plans[0].seed_field(&pr, &spec, &bspec).unwrap());
    for p in &plans[1..] {
        let f = solve(&p.seed_field(&pr, &spec, &bspec).unwrap());
        let d = (0..pr.grid.len())
            .map(|n| (f.p11[n] - reference.p11[n]).abs().max((f.p12[n] - reference.p12[n]).abs()))
            .fold(0.0, f64::max);
        assert!(d < 1e-6, "{}: {d:e}", p.label);
    }
}

#[test]
fn square_branches_are_separated_by_moments_and_energy() {
    let (map, pr, spec) = square(0.0, 48, 64);
    let w = DiagWeights::build(&map, &pr.grid, 9.0).unwrap();
    let bspec = BoundarySpec::default();
    let schedule = log_schedule(200.0, 400.0, 3).unwrap();
    let mut sig = Vec::new();
    for p in plan_branches(&spec).unwrap().iter().filter(|p| !p.upward()) {
        let rec = p.run(&schedule, &pr, &map, &w, &spec, &bspec, &SweepOptions::default()).unwrap();
        let e = rec.at(200.0).unwrap_or_else(|| panic!("{} lost before 200", p.label));
        sig.push((p.label.clone(), e.m12, e.energy));
    }
    for (i, a) in sig.iter().enumerate() {
        for b in &sig[i + 1..] {
            let gap = (a.1 - b.1).abs().max((a.2 - b.2).abs());
            assert!(gap > 1e-6, "{a:?} vs {b:?}");
        }
    }
}
