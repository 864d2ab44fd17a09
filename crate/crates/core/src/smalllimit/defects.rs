//! Zeros of (p11, p12): point defects located by plaquette winding and
//! recursive subdivision, and the line defects of the square at γ* = π/4.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::conformal::SCMap;
use crate::error::{Error, Result};
use crate::model::PTensor;

use super::poisson::log_weight;
use super::profile::SmallLimit;

#[derive(Debug, Clone, PartialEq)]
pub struct PointDefect {
    pub r: f64,
    pub theta: f64,
    /// Physical image f(r e^{iθ}) when a map was supplied.
    pub w: Option<Complex64>,
    /// Director winding: tensor winding / 2.
    pub winding: f64,
    /// Found in a plaquette touching the inner or outer scan ring.
    pub on_boundary: bool,
}

impl PointDefect {
    pub fn z(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineDefect {
    /// Samples (r*(θ), θ) in the mapped disc.
    pub mapped: Vec<(f64, f64)>,
    pub physical: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DefectReport {
    pub points: Vec<PointDefect>,
    pub lines: Vec<LineDefect>,
    /// max |p| over the reported defect set.
    pub residual: f64,
}

impl DefectReport {
    pub fn interior_points(&self) -> impl Iterator<Item = &PointDefect> {
        self.points.iter().filter(|p| !p.on_boundary)
    }
}

/// Polar sampling lattice for the winding scan: `n_r` rings uniformly
/// spaced in [r_min, r_max] and `n_theta` periodic angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarScan {
    pub n_r: usize,
    pub n_theta: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl PolarScan {
    pub fn for_epsilon(epsilon: f64) -> Self {
        Self {
            n_r: 160,
            n_theta: 384,
            r_min: epsilon.max(1e-4),
            r_max: 1.0 - 1e-4,
        }
    }
}

const CELL_TOL: f64 = 1e-11;
const MAX_EDGE_SPLITS: usize = 24;

fn wrapped(d: f64) -> f64 {
    let mut d = d.rem_euclid(2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    }
    d
}

fn angle(p: PTensor) -> f64 {
    p.p12.atan2(p.p11)
}

/// Change of the tensor angle along the straight (r, θ) segment a → b,
/// subdividing wherever consecutive samples turn by more than π/3.
fn segment_turn<F: Fn(f64, f64) -> PTensor>(field: &F, a: (f64, f64), b: (f64, f64), pa: PTensor, pb: PTensor, depth: usize) -> f64 {
    let d = wrapped(angle(pb) - angle(pa));
    if d.abs() <= PI / 3.0 || depth >= MAX_EDGE_SPLITS {
        return d;
    }
    let m = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
    let pm = field(m.0, m.1);
    segment_turn(field, a, m, pa, pm, depth + 1) + segment_turn(field, m, b, pm, pb, depth + 1)
}

/// Tensor winding (an integer) around the cell [r0, r1] × [t0, t1],
/// traversed counter-clockwise.
fn cell_winding<F: Fn(f64, f64) -> PTensor>(field: &F, r0: f64, r1: f64, t0: f64, t1: f64, corners: [PTensor; 4]) -> i64 {
    let pts = [(r0, t0), (r1, t0), (r1, t1), (r0, t1)];
    let mut total = 0.0;
    for i in 0..4 {
        let j = (i + 1) % 4;
        total += segment_turn(field, pts[i], pts[j], corners[i], corners[j], 0);
    }
    (total / (2.0 * PI)).round() as i64
}

fn refine<F: Fn(f64, f64) -> PTensor>(field: &F, r0: f64, r1: f64, t0: f64, t1: f64, out: &mut Vec<(f64, f64, i64)>, depth: usize) {
    let rm = 0.5 * (r0 + r1);
    let tm = 0.5 * (t0 + t1);
    let size = (r1 - r0).max(rm * (t1 - t0));
    let corners = [field(r0, t0), field(r1, t0), field(r1, t1), field(r0, t1)];
    let w = cell_winding(field, r0, r1, t0, t1, corners);
    if w == 0 {
        return;
    }
    if size < CELL_TOL || depth > 60 {
        out.push((rm, tm, w));
        return;
    }
    let before = out.len();
    for (a, b, c, d) in [(r0, rm, t0, tm), (rm, r1, t0, tm), (rm, r1, tm, t1), (r0, rm, tm, t1)] {
        refine(field, a, b, c, d, out, depth + 1);
    }
    let found: i64 = out[before..].iter().map(|x| x.2).sum();
    if out.len() == before || found != w {
        // the zero sits on a sub-cell edge; report this cell's centre
        out.truncate(before);
        out.push((rm, tm, w));
    }
}

/// Scans the annulus for nonzero-winding plaquettes and localizes each
/// defect by recursive subdivision.
pub fn locate_point_defects<F: Fn(f64, f64) -> PTensor>(field: &F, scan: &PolarScan, map: Option<&SCMap>) -> Result<DefectReport> {
    if scan.n_r < 2 || scan.n_theta < 3 || !(scan.r_min > 0.0 && scan.r_min < scan.r_max && scan.r_max <= 1.0) {
        return Err(Error::Domain(format!("invalid defect scan {scan:?}")));
    }
    let rs: Vec<f64> = (0..scan.n_r)
        .map(|i| scan.r_min + (scan.r_max - scan.r_min) * i as f64 / (scan.n_r - 1) as f64)
        .collect();
    let dt = 2.0 * PI / scan.n_theta as f64;
    // offset keeps symmetry axes, where defects tend to sit, off the lattice
    let offset = dt / PI;
    let ts: Vec<f64> = (0..=scan.n_theta).map(|j| offset + j as f64 * dt).collect();
    let values: Vec<Vec<PTensor>> = rs
        .iter()
        .map(|&r| ts.iter().map(|&t| field(r, t)).collect())
        .collect();
    let mut report = DefectReport::default();
    for i in 0..scan.n_r - 1 {
        for j in 0..scan.n_theta {
            let corners = [values[i][j], values[i + 1][j], values[i + 1][j + 1], values[i][j + 1]];
            let w = cell_winding(field, rs[i], rs[i + 1], ts[j], ts[j + 1], corners);
            if w == 0 {
                continue;
            }
            let on_boundary = i == 0 || i + 1 == scan.n_r - 1;
            let mut found = Vec::new();
            if on_boundary {
                found.push((0.5 * (rs[i] + rs[i + 1]), 0.5 * (ts[j] + ts[j + 1]), w));
            } else {
                refine(field, rs[i], rs[i + 1], ts[j], ts[j + 1], &mut found, 0);
            }
            for (r, t, w) in found {
                let p = field(r, t);
                report.residual = report.residual.max(p.order());
                report.points.push(PointDefect {
                    r,
                    theta: t,
                    w: map.map(|m| m.forward(Complex64::from_polar(r, t))),
                    winding: 0.5 * w as f64,
                    on_boundary,
                });
            }
        }
    }
    Ok(report)
}

/// Line defects of the square at γ* ≡ π/4 (mod π/2): on each ray of the
/// open quadrants (0, π/2) and (π, 3π/2) of the reduced problem, the unique
/// zero of p12 (p11 vanishes identically).
pub fn trace_line_defects(limit: &SmallLimit, n_samples: usize, map: Option<&SCMap>) -> Result<DefectReport> {
    let spec = &limit.spec;
    if spec.sides.count() != Some(4) || (spec.reduced_gamma_star - PI / 4.0).abs() > 1e-9 {
        return Err(Error::Domain(
            "line defects exist only for the square with far-field angle π/4 (mod π/2)".into(),
        ));
    }
    if n_samples < 2 {
        return Err(Error::Domain("at least two samples per curve are required".into()));
    }
    let reduced_spec = crate::model::PolygonSpec::polygon(4, PI / 4.0)?;
    let reduced = SmallLimit::new(&reduced_spec, &limit.bspec, &limit.mat, limit.epsilon)?;
    let mut report = DefectReport::default();
    for start in [0.0, PI] {
        let mut line = LineDefect {
            mapped: Vec::with_capacity(n_samples),
            physical: Vec::new(),
        };
        for i in 0..n_samples {
            // Chebyshev spacing clusters samples toward the quadrant ends,
            // where the curves run into the vertices
            let x = 0.5 * (1.0 - (PI * (i as f64 + 0.5) / n_samples as f64).cos());
            let theta = start + 0.5 * PI * x;
            let r = line_defect_radius(&reduced, theta)?;
            let img = spec.unreduce(r, theta, reduced.mapped(r, theta)?);
            report.residual = report.residual.max(img.p.order());
            line.mapped.push((r, img.theta.rem_euclid(2.0 * PI)));
            if let Some(m) = map {
                line.physical.push(m.forward(Complex64::from_polar(r, img.theta)));
            }
        }
        report.lines.push(line);
    }
    Ok(report)
}

/// Zero of p12 on the ray θ of the square problem at γ* = π/4, found by
/// bisection on [ε, 1].
pub fn line_defect_radius(limit: &SmallLimit, theta: f64) -> Result<f64> {
    let g = |r: f64| -> Result<f64> { Ok(limit.mapped(r, theta)?.p12) };
    let (mut lo, mut hi) = (limit.epsilon, 1.0);
    if !(g(lo)? > 0.0 && g(hi)? < 0.0) {
        return Err(Error::Bracket { theta });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// p12 − s_b sin(2γ*) c(r) along a ray; the part of p12 produced by the
/// boundary data alone.
pub fn boundary_part_p12(limit: &SmallLimit, r: f64, theta: f64) -> Result<f64> {
    let p = limit.mapped(r, theta)?;
    Ok(p.p12 - limit.center().p12 * log_weight(r, limit.epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BoundarySpec, MaterialParams, PolygonSpec};

    fn limit(k: usize, g: f64) -> SmallLimit {
        SmallLimit::new(
            &PolygonSpec::polygon(k, g).unwrap(),
            &BoundarySpec::default(),
            &MaterialParams::default(),
            1e-6,
        )
        .unwrap()
    }

    fn scan_of(l: &SmallLimit) -> DefectReport {
        let f = |r: f64, t: f64| l.mapped(r, t).unwrap();
        let scan = PolarScan {
            n_r: 60,
            n_theta: 120,
            ..PolarScan::for_epsilon(1e-6)
        };
        locate_point_defects(&f, &scan, None).unwrap()
    }

    #[test]
    fn synthetic_vortex_is_localized() {
        let c = Complex64::from_polar(0.4, 1.0);
        let f = |r: f64, t: f64| PTensor::from_complex(Complex64::from_polar(r, t) - c);
        let scan = PolarScan {
            n_r: 20,
            n_theta: 40,
            r_min: 0.01,
            r_max: 0.99,
        };
        let rep = locate_point_defects(&f, &scan, None).unwrap();
        assert_eq!(rep.points.len(), 1);
        assert!((rep.points[0].z() - c).norm() < 1e-9);
        assert_eq!(rep.points[0].winding, 0.5);
    }

    #[test]
    fn triangle_defect_on_axis() {
        let rep = scan_of(&limit(3, 0.0));
        let pts: Vec<_> = rep.interior_points().collect();
        assert_eq!(pts.len(), 1, "{pts:?}");
        let t = pts[0].theta.rem_euclid(2.0 * PI);
        assert!(t.min(2.0 * PI - t) < 1e-8);
    }

    #[test]
    fn square_without_point_defects() {
        for g in [0.0, PI / 8.0] {
            assert_eq!(scan_of(&limit(4, g)).interior_points().count(), 0);
        }
    }

    #[test]
    fn hexagon_pair_of_half_defects() {
        let rep = scan_of(&limit(6, 0.0));
        let pts: Vec<_> = rep.interior_points().collect();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.winding == -0.5));
    }

    #[test]
    fn square_line_defects_reach_vertices() {
        let l = limit(4, PI / 4.0);
        let rep = trace_line_defects(&l, 64, None).unwrap();
        assert_eq!(rep.lines.len(), 2);
        assert!(rep.residual < 1e-10);
        let second = &rep.lines[1];
        assert!(second.mapped.first().unwrap().0 > 0.9 && second.mapped.last().unwrap().0 > 0.9);
        // roots approach the circle as θ → π⁺ and θ → 3π/2⁻
        for end in [PI, 1.5 * PI] {
            let side = if end == PI { 1.0 } else { -1.0 };
            let radii: Vec<f64> = [1e-2, 1e-4, 1e-6, 1e-8]
                .iter()
                .map(|d| line_defect_radius(&l, end + side * d).unwrap())
                .collect();
            assert!(radii.windows(2).all(|w| w[1] > w[0]), "{radii:?}");
            assert!(1.0 - radii[3] < 1e-3, "{radii:?}");
        }
        assert!(trace_line_defects(&limit(4, 0.0), 8, None).is_err());
    }

    #[test]
    fn quadrant_monotonicity_and_vanishing_on_axis() {
        let l = limit(4, PI / 4.0);
        for j in 1..20 {
            let t = PI + 0.5 * PI * j as f64 / 20.0;
            let mut prev = f64::INFINITY;
            for i in 1..50 {
                let v = boundary_part_p12(&l, i as f64 / 50.0, t).unwrap();
                assert!(v < prev);
                prev = v;
            }
        }
        for i in 1..20 {
            assert!(boundary_part_p12(&l, i as f64 / 20.0, PI).unwrap().abs() < 1e-14);
        }
    }
}
