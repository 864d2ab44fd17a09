//! Scalar summaries of a solution: energy, the weighted moments
//! m = ∫P(1 + x + y/2) dA over {|w| ≤ R_diag}, boundary bend signature
//! and a defect count.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::conformal::SCMap;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::smalllimit::{locate_point_defects, PointDefect, PolarScan};

use super::energy::discrete_energy;
use super::grid::AnnulusGrid;
use super::{Problem, SolutionField};

const GL_ORDER: usize = 6;
const GRADING_LEVELS: usize = 14;
const SIGNATURE_RADIUS: f64 = 0.8;

/// Node weights c with m11 = Σ c·p11 and m12 = Σ c·p12 for the bilinear
/// interpolant of the node values.
#[derive(Debug, Clone)]
pub struct DiagWeights {
    pub r_diag: f64,
    pub c: Vec<f64>,
}

/// Splits [a, b] geometrically toward the flagged ends.
fn graded(a: f64, b: f64, to_a: bool, to_b: bool, out: &mut Vec<(f64, f64)>) {
    if to_a && to_b {
        let m = 0.5 * (a + b);
        graded(a, m, true, false, out);
        graded(m, b, false, true, out);
        return;
    }
    if !to_a && !to_b {
        out.push((a, b));
        return;
    }
    let mut cuts = vec![a, b];
    for l in 1..=GRADING_LEVELS {
        let f = 0.5f64.powi(l as i32);
        cuts.push(if to_a { a + f * (b - a) } else { b - f * (b - a) });
    }
    cuts.sort_by(f64::total_cmp);
    out.extend(cuts.windows(2).map(|w| (w[0], w[1])));
}

fn push_rule(a: f64, b: f64, gl: &(Vec<f64>, Vec<f64>), out: &mut Vec<(f64, f64)>) {
    let (h, m) = (0.5 * (b - a), 0.5 * (a + b));
    out.extend(gl.0.iter().zip(&gl.1).map(|(x, w)| (m + h * x, h * w)));
}

impl DiagWeights {
    pub fn build(map: &SCMap, grid: &AnnulusGrid, r_diag: f64) -> Result<Self> {
        if !(r_diag > 1.0 && r_diag <= grid.r_max) {
            return Err(Error::Domain(format!(
                "R_diag must lie in (1, R_max = {}], got {r_diag}",
                grid.r_max
            )));
        }
        let gl = gauss_legendre(GL_ORDER);
        let two_pi = 2.0 * PI;
        let corners: Vec<f64> = match map.k() {
            Some(k) => (0..=k).map(|m| two_pi * m as f64 / k as f64).collect(),
            None => Vec::new(),
        };
        let is_corner = |t: f64| corners.iter().any(|c| (c - t).abs() < 1e-12);
        let mut breaks: Vec<f64> = (0..=grid.n_theta).map(|j| j as f64 * grid.h_theta).collect();
        breaks.extend(&corners);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        let mut theta_rule = Vec::new();
        for w in breaks.windows(2) {
            let mut pieces = Vec::new();
            graded(w[0], w[1], is_corner(w[0]), is_corner(w[1]), &mut pieces);
            for (a, b) in pieces {
                push_rule(a, b, &gl, &mut theta_rule);
            }
        }

        let s0 = grid.epsilon_ann.ln();
        let s_last = grid.s(grid.n_r - 2);
        let mut c = vec![0.0; grid.len()];
        for &(t, wt) in &theta_rule {
            let modulus = |s: f64| map.forward(Complex64::from_polar(s.exp(), t)).norm();
            if modulus(s0) < r_diag {
                return Err(Error::Domain(format!("R_diag = {r_diag} reaches the inner ring at θ = {t}")));
            }
            let (mut lo, mut hi) = (s0, 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if modulus(mid) > r_diag {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            let s_cut = 0.5 * (lo + hi);
            let mut sb: Vec<f64> = vec![s_cut];
            sb.extend((0..grid.n_r).map(|i| grid.s(i)).filter(|&s| s > s_cut && s < s_last + 1e-14));
            let mut pieces = Vec::new();
            for w in sb.windows(2) {
                pieces.push((w[0], w[1]));
            }
            graded(sb[sb.len() - 1].max(s_cut), 0.0, false, true, &mut pieces);
            let mut s_rule = Vec::new();
            for (a, b) in pieces {
                push_rule(a, b, &gl, &mut s_rule);
            }
            for (s, ws) in s_rule {
                let z = Complex64::from_polar(s.exp(), t);
                let w = map.forward(z);
                let jac = z.norm_sqr() * map.derivative(z).norm_sqr();
                let q = wt * ws * jac * (1.0 + w.re + 0.5 * w.im);
                let x = ((s - s0) / grid.h_s).clamp(0.0, (grid.n_r - 1) as f64);
                let i = (x.floor() as usize).min(grid.n_r - 2);
                let a = x - i as f64;
                let y = t.rem_euclid(two_pi) / grid.h_theta;
                let j = (y.floor() as usize).min(grid.n_theta - 1);
                let b = y - j as f64;
                let j1 = (j + 1) % grid.n_theta;
                c[grid.node(i, j)] += q * (1.0 - a) * (1.0 - b);
                c[grid.node(i, j1)] += q * (1.0 - a) * b;
                c[grid.node(i + 1, j)] += q * a * (1.0 - b);
                c[grid.node(i + 1, j1)] += q * a * b;
            }
        }
        Ok(Self { r_diag, c })
    }

    /// (m11, m12).
    pub fn moments(&self, field: &SolutionField) -> (f64, f64) {
        let m11 = self.c.iter().zip(&field.p11).map(|(c, p)| c * p).sum();
        let m12 = self.c.iter().zip(&field.p12).map(|(c, p)| c * p).sum();
        (m11, m12)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DefectSummary {
    pub n_point: usize,
    pub n_line: usize,
    pub points: Vec<PointDefect>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub energy: f64,
    pub m11: f64,
    pub m12: f64,
    pub defects: DefectSummary,
}

/// Line defects arise when one component vanishes identically; they are
/// counted as angular clusters of rays along which the other one changes
/// sign.
fn line_clusters(grid: &AnnulusGrid, comp: &[f64]) -> usize {
    let scale = comp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = 1e-9 * scale.max(1e-300);
    let marked: Vec<bool> = (0..grid.n_theta)
        .map(|j| {
            let mut last = 0.0;
            for i in 1..grid.n_r - 1 {
                let v = comp[grid.node(i, j)];
                if v.abs() <= tiny {
                    continue;
                }
                if last != 0.0 && v.signum() != last {
                    return true;
                }
                last = v.signum();
            }
            false
        })
        .collect();
    let n = marked.len();
    if marked.iter().all(|&m| m) {
        return 1;
    }
    (0..n).filter(|&j| marked[j] && !marked[(j + n - 1) % n]).count()
}

pub fn defect_summary(field: &SolutionField, problem: &Problem, map: &SCMap) -> Result<DefectSummary> {
    let g = &problem.grid;
    let s_b = problem.s_b();
    let interior_max = |v: &[f64]| {
        (g.n_theta..g.len() - g.n_theta).fold(0.0f64, |m, n| m.max(v[n].abs()))
    };
    for (flat, other) in [(&field.p11, &field.p12), (&field.p12, &field.p11)] {
        if interior_max(flat) < 1e-6 * s_b && interior_max(other) > 1e-3 * s_b {
            return Ok(DefectSummary {
                n_point: 0,
                n_line: line_clusters(g, other),
                points: Vec::new(),
            });
        }
    }
    let scan = PolarScan {
        n_r: 2 * g.n_r,
        n_theta: 2 * g.n_theta,
        r_min: g.r[1],
        r_max: g.r[g.n_r - 2],
    };
    let report = locate_point_defects(&|r, t| field.interpolate(g, r, t), &scan, Some(map))?;
    let points: Vec<PointDefect> = report.interior_points().cloned().collect();
    Ok(DefectSummary {
        n_point: points.len(),
        n_line: 0,
        points,
    })
}

pub fn diagnostics(field: &SolutionField, problem: &Problem, map: &SCMap, weights: &DiagWeights) -> Result<Diagnostics> {
    let (m11, m12) = weights.moments(field);
    Ok(Diagnostics {
        energy: discrete_energy(field, problem, field.lambda_bar_sq),
        m11,
        m12,
        defects: defect_summary(field, problem, map)?,
    })
}

/// Bend vertices read off the director near the boundary: walking the
/// ring closest to r = 0.8 from the middle of one arc D_k to the next,
/// the director turns by about 2π/K across a splay vertex and 2π/K − π
/// across a bend vertex. Returns the sorted vertex indices (1-based),
/// or nothing when the director is not continuous along the ring.
pub fn bend_signature(field: &SolutionField, grid: &AnnulusGrid) -> Vec<usize> {
    let Some(k) = grid.sides.count() else {
        return Vec::new();
    };
    let ring = (0..grid.n_r)
        .min_by(|&a, &b| (grid.r[a] - SIGNATURE_RADIUS).abs().total_cmp(&(grid.r[b] - SIGNATURE_RADIUS).abs()))
        .unwrap_or(grid.n_r - 2);
    let r = grid.r[ring];
    let kf = k as f64;
    let arc = 2.0 * PI / kf;
    let steps = 4 * grid.n_theta / k + 8;
    let director = |t: f64| {
        let p = field.interpolate(grid, r, t);
        0.5 * p.p12.atan2(p.p11)
    };
    let mut bends = Vec::new();
    for edge in 1..=k {
        let start = arc * (kf - edge as f64 + 0.5);
        let mut prev = director(start);
        let mut turn = 0.0;
        for m in 1..=steps {
            let g = director(start - arc * m as f64 / steps as f64);
            let mut d = (g - prev).rem_euclid(PI);
            if d > 0.5 * PI {
                d -= PI;
            }
            if d.abs() > 0.45 * PI {
                // the director flips across a line defect; no signature
                return Vec::new();
            }
            turn += d;
            prev = g;
        }
        if turn < arc - 0.5 * PI {
            bends.push(edge % k + 1);
        }
    }
    bends.sort_unstable();
    bends
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::largelimit::{BendAssignment, LargeLimit};
    use crate::model::{BoundarySpec, MaterialParams, PolygonSpec, Sides};

    fn setup(k: usize, g: f64, n_r: usize, n_t: usize) -> (SCMap, Problem) {
        let map = SCMap::build(Sides::Polygon(k), 1e-14).unwrap();
        let grid = AnnulusGrid::build(&map, n_r, n_t, 10.0).unwrap();
        let spec = PolygonSpec::polygon(k, g).unwrap();
        let pr = Problem::new(grid, &spec, &BoundarySpec::default(), &MaterialParams::default()).unwrap();
        (map, pr)
    }

    #[test]
    fn uniform_field_moments_match_the_area_integral() {
        for (k, g) in [(4, 0.3), (6, PI / 6.0), (3, 1.0)] {
            let (map, pr) = setup(k, g, 48, 24 * k);
            let n_t = pr.grid.n_theta;
            let pr = Problem::with_rings(pr.grid, &pr.mat, pr.inner, vec![pr.inner; n_t]).unwrap();
            let w = DiagWeights::build(&map, &pr.grid, 9.0).unwrap();
            let f = SolutionField::uniform(&pr);
            let (m11, m12) = w.moments(&f);
            let kf = k as f64;
            let area = PI * 81.0 - 0.5 * kf * (2.0 * PI / kf).sin();
            let s_b = pr.s_b();
            assert!((m12 - s_b * (2.0 * g).sin() * area).abs() < 1e-6, "K={k}: {m12}");
            assert!((m11 - s_b * (2.0 * g).cos() * area).abs() < 1e-6, "K={k}: {m11}");
        }
    }

    fn mirrored(f: &SolutionField, g: &AnnulusGrid) -> SolutionField {
        // (x, y) ↦ (x, −y) is θ ↦ −θ in the mapped disc; p12 changes sign
        let mut m = f.clone();
        for i in 0..g.n_r {
            for j in 0..g.n_theta {
                let jm = (g.n_theta - j) % g.n_theta;
                m.p11[g.node(i, j)] = f.p11[g.node(i, jm)];
                m.p12[g.node(i, j)] = -f.p12[g.node(i, jm)];
            }
        }
        m
    }

    #[test]
    fn reflection_acts_on_the_moments() {
        let (map, pr) = setup(4, 0.0, 32, 64);
        let w = DiagWeights::build(&map, &pr.grid, 9.0).unwrap();
        let field = |h: &dyn Fn(Complex64) -> f64| {
            SolutionField::from_fn(&pr, |r, t| {
                let z = map.forward(Complex64::from_polar(r, t));
                Ok(crate::model::PTensor::new(0.5 + 0.01 * z.re, h(z)))
            })
            .unwrap()
        };
        // y-even p12: the mirror negates it, and the y/2 term cancels in the sum
        let f = field(&|z| 0.2 + 0.05 * z.re);
        let (a11, a12) = w.moments(&f);
        let (b11, b12) = w.moments(&mirrored(&f, &pr.grid));
        assert!((a11 - b11).abs() < 1e-9 * a11.abs());
        assert!((a12 + b12).abs() < 1e-9 * a12.abs(), "{a12} {b12}");
        // y-odd p12 is mirror invariant and only the y/2 term survives
        let f = field(&|z| 0.02 * z.im);
        let (_, a12) = w.moments(&f);
        let (_, b12) = w.moments(&mirrored(&f, &pr.grid));
        assert!((a12 - b12).abs() < 1e-9 * a12.abs());
        assert!(a12 > 0.0);
    }

    #[test]
    fn bend_signature_reads_the_large_limit_seed() {
        let (_, pr) = setup(4, 0.0, 48, 64);
        for (a, b) in [(1, 3), (2, 4), (1, 2), (2, 3), (3, 4), (1, 4)] {
            let asg = BendAssignment::new(4, a, b).unwrap();
            let lim = LargeLimit::new(&asg, 0.0, pr.grid.epsilon_ann, &MaterialParams::default()).unwrap();
            let f = SolutionField::from_large_limit(&pr, &lim).unwrap();
            assert_eq!(bend_signature(&f, &pr.grid), vec![a, b]);
        }
    }

    #[test]
    fn line_defects_are_counted_when_a_component_vanishes() {
        let (map, pr) = setup(4, 0.0, 32, 64);
        let f = SolutionField::from_fn(&pr, |_, t| Ok(crate::model::PTensor::new(0.0, (2.0 * t).cos()))).unwrap();
        let s = defect_summary(&f, &pr, &map).unwrap();
        assert_eq!((s.n_point, s.n_line), (0, 0));
        let f = SolutionField::from_fn(&pr, |r, t| {
            Ok(crate::model::PTensor::new(0.0, if t < PI { r - 0.5 } else { 0.7 }))
        })
        .unwrap();
        let s = defect_summary(&f, &pr, &map).unwrap();
        assert_eq!((s.n_point, s.n_line), (0, 1));
    }
}
