//! Domain types shared by every other module: material constants, the
//! reduced order tensor, polygon geometry and homeotropic boundary data.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bulk and elastic constants plus the dimensionless size λ̄² = 2Cλ²/L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub b: f64,
    pub c: f64,
    pub l: f64,
    pub lambda_bar_sq: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            b: 0.64e4,
            c: 0.35e4,
            l: 1.0,
            lambda_bar_sq: 0.0,
        }
    }
}

impl MaterialParams {
    pub fn new(b: f64, c: f64, l: f64, lambda_bar_sq: f64) -> Result<Self> {
        if !(b > 0.0 && c > 0.0 && l > 0.0) {
            return Err(Error::Domain(format!(
                "material constants must be positive (B={b}, C={c}, L={l})"
            )));
        }
        if !(lambda_bar_sq >= 0.0) || !lambda_bar_sq.is_finite() {
            return Err(Error::Domain(format!(
                "lambda_bar_sq must be a finite non-negative number, got {lambda_bar_sq}"
            )));
        }
        Ok(Self {
            b,
            c,
            l,
            lambda_bar_sq,
        })
    }

    /// Boundary order parameter B/(2C).
    pub fn s_b(&self) -> f64 {
        self.b / (2.0 * self.c)
    }

    /// Far-field tensor magnitude B/C.
    pub fn s_plus(&self) -> f64 {
        self.b / self.c
    }
}

/// Independent components of a symmetric traceless 2×2 tensor.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PTensor {
    pub p11: f64,
    pub p12: f64,
}

impl PTensor {
    pub fn new(p11: f64, p12: f64) -> Self {
        Self { p11, p12 }
    }

    pub fn order(&self) -> f64 {
        self.p11.hypot(self.p12)
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.p11, self.p12)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }

    /// Rotates (p11, p12) as a vector by `angle`; a director rotation by φ
    /// corresponds to `angle = 2φ`.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.p11 - s * self.p12, s * self.p11 + c * self.p12)
    }
}

/// Director description of a tensor; `defect` marks the nodal set s = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Director {
    pub s: f64,
    pub gamma: f64,
    pub defect: bool,
}

pub fn tensor_from_director(s: f64, gamma: f64) -> PTensor {
    let (sin2, cos2) = (2.0 * gamma).sin_cos();
    PTensor::new(s * cos2, s * sin2)
}

pub fn director_from_tensor(p: PTensor) -> Director {
    let s = p.order();
    if s == 0.0 {
        return Director {
            s: 0.0,
            gamma: 0.0,
            defect: true,
        };
    }
    let mut gamma = 0.5 * p.p12.atan2(p.p11);
    if gamma < 0.0 {
        gamma += PI;
    }
    if gamma >= PI {
        gamma -= PI;
    }
    Director {
        s,
        gamma,
        defect: false,
    }
}

/// Normalized bulk density ¼(|p|² − s_b²)², zero exactly on |p| = s_b.
pub fn bulk_density(p: PTensor, mat: &MaterialParams) -> f64 {
    let sb = mat.s_b();
    let q = p.p11 * p.p11 + p.p12 * p.p12 - sb * sb;
    0.25 * q * q
}

/// Number of polygon edges, or the disc limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sides {
    Polygon(usize),
    Disc,
}

impl Sides {
    pub fn count(&self) -> Option<usize> {
        match self {
            Sides::Polygon(k) => Some(*k),
            Sides::Disc => None,
        }
    }
}

/// A symmetry of the mapped limiting problem relating the field at
/// (r, θ, γ*) to the field at transformed arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymOp {
    /// θ ↦ θ + angle, γ* ↦ γ* − angle, tensor rotated by −2·angle.
    Rotation { angle: f64 },
    /// θ ↦ −θ, γ* ↦ −γ*, p12 ↦ −p12.
    Reflection,
}

impl SymOp {
    pub fn inverse(&self) -> SymOp {
        match *self {
            SymOp::Rotation { angle } => SymOp::Rotation { angle: -angle },
            SymOp::Reflection => SymOp::Reflection,
        }
    }
}

/// Field value at a mapped point together with the far-field angle it
/// belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricImage {
    pub r: f64,
    pub theta: f64,
    pub gamma_star: f64,
    pub p: PTensor,
}

/// Transports a field value under a symmetry: if `p` is the field at
/// (r, θ) for far-field angle γ*, the result holds the field value at the
/// image point for the image far-field angle.
pub fn apply_symmetry(op: SymOp, r: f64, theta: f64, gamma_star: f64, p: PTensor) -> SymmetricImage {
    match op {
        SymOp::Rotation { angle } => SymmetricImage {
            r,
            theta: theta + angle,
            gamma_star: gamma_star - angle,
            p: p.rotated(-2.0 * angle),
        },
        SymOp::Reflection => SymmetricImage {
            r,
            theta: -theta,
            gamma_star: -gamma_star,
            p: PTensor::new(p.p11, -p.p12),
        },
    }
}

/// Regular polygon with unit circumradius and a prescribed far-field angle.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonSpec {
    pub sides: Sides,
    /// Far-field director angle as supplied by the caller.
    pub gamma_star: f64,
    /// Representative of `gamma_star` in [0, π/K] (0 for the disc).
    pub reduced_gamma_star: f64,
    /// Operations taking the supplied problem to the reduced one, in order.
    pub reduction: Vec<SymOp>,
}

impl PolygonSpec {
    pub fn new(sides: Sides, gamma_star: f64) -> Result<Self> {
        if !gamma_star.is_finite() {
            return Err(Error::Domain(format!("gamma_star must be finite, got {gamma_star}")));
        }
        match sides {
            Sides::Polygon(k) if k < 3 => Err(Error::Domain(format!(
                "a polygon needs at least 3 sides, got {k}"
            ))),
            Sides::Polygon(k) => {
                let (reduced, reduction) = reduce_gamma_star(k, gamma_star);
                Ok(Self {
                    sides,
                    gamma_star,
                    reduced_gamma_star: reduced,
                    reduction,
                })
            }
            Sides::Disc => Ok(Self {
                sides,
                gamma_star,
                reduced_gamma_star: 0.0,
                reduction: vec![SymOp::Rotation { angle: gamma_star }],
            }),
        }
    }

    pub fn polygon(k: usize, gamma_star: f64) -> Result<Self> {
        Self::new(Sides::Polygon(k), gamma_star)
    }

    pub fn disc(gamma_star: f64) -> Self {
        Self::new(Sides::Disc, gamma_star).expect("finite angle")
    }

    /// Edge count; panics for the disc, which callers dispatch on first.
    pub fn k(&self) -> usize {
        self.sides.count().expect("polygon geometry requested for the disc")
    }

    /// Vertex w_k for any integer k (indices wrap modulo K).
    pub fn vertex(&self, k: i64) -> Complex64 {
        let kk = self.k() as i64;
        let idx = (k - 1).rem_euclid(kk) as f64;
        Complex64::from_polar(1.0, 2.0 * PI * idx / kk as f64)
    }

    pub fn vertices(&self) -> Vec<Complex64> {
        (1..=self.k() as i64).map(|k| self.vertex(k)).collect()
    }

    /// Edge C_k from w_k to w_{k+1}.
    pub fn edge(&self, k: i64) -> (Complex64, Complex64) {
        (self.vertex(k), self.vertex(k + 1))
    }

    pub fn edge_length(&self) -> f64 {
        2.0 * (PI / self.k() as f64).sin()
    }

    /// Mapped arc D_k as (lower, upper) angle; the upper end is the
    /// prevertex of w_k, the lower end that of w_{k+1}.
    pub fn arc(&self, k: usize) -> (f64, f64) {
        let kk = self.k() as f64;
        let k = k as f64;
        (2.0 * PI * (kk - k) / kk, 2.0 * PI * (kk - k + 1.0) / kk)
    }

    /// Strictly inside the closed polygon.
    pub fn contains(&self, w: Complex64) -> bool {
        match self.sides {
            Sides::Disc => w.norm() < 1.0,
            Sides::Polygon(k) => {
                let apothem = (PI / k as f64).cos();
                (1..=k).all(|j| {
                    let normal = Complex64::from_polar(1.0, (2 * j - 1) as f64 * PI / k as f64);
                    (w * normal.conj()).re < apothem
                })
            }
        }
    }

    /// Euclidean distance from `w` to the polygon boundary.
    pub fn boundary_distance(&self, w: Complex64) -> f64 {
        match self.sides {
            Sides::Disc => (w.norm() - 1.0).abs(),
            Sides::Polygon(k) => (1..=k as i64)
                .map(|j| {
                    let (a, b) = self.edge(j);
                    segment_distance(w, a, b)
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Maps a field value of the reduced problem back to the supplied one.
    pub fn unreduce(&self, r: f64, theta: f64, p: PTensor) -> SymmetricImage {
        let mut img = SymmetricImage {
            r,
            theta,
            gamma_star: self.reduced_gamma_star,
            p,
        };
        for op in self.reduction.iter().rev() {
            img = apply_symmetry(op.inverse(), img.r, img.theta, img.gamma_star, img.p);
        }
        img
    }
}

pub fn segment_distance(w: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = ((w - a) * d.conj()).re / d.norm_sqr();
    let t = t.clamp(0.0, 1.0);
    (w - (a + d * t)).norm()
}

fn reduce_gamma_star(k: usize, gamma_star: f64) -> (f64, Vec<SymOp>) {
    let kf = k as f64;
    let tol = 1e-12;
    for reflect in [false, true] {
        let g = if reflect { -gamma_star } else { gamma_star };
        for n in 0..k {
            let shift = 2.0 * PI * n as f64 / kf;
            let red = (g - shift).rem_euclid(PI);
            let red = if red > PI - tol { red - PI } else { red };
            if red <= PI / kf + tol && red >= -tol {
                let mut ops = Vec::new();
                if reflect {
                    ops.push(SymOp::Reflection);
                }
                if n != 0 {
                    ops.push(SymOp::Rotation { angle: shift });
                }
                return (red.max(0.0), ops);
            }
        }
    }
    unreachable!("rotations and one reflection cover [0, π)")
}

/// Interpolation width of the boundary data; σ = 0 is piecewise constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub sigma: f64,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        Self { sigma: 0.0 }
    }
}

impl BoundarySpec {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&sigma) {
            return Err(Error::Domain(format!("sigma must lie in [0, 1/2], got {sigma}")));
        }
        Ok(Self { sigma })
    }

    /// a(d, σ) = d^(1/σ) for normalized distance d ∈ [0, 1] from the edge
    /// midpoint; the σ = 0 limit is 0 away from vertices and 1 at d = 1.
    pub fn profile(&self, d: f64) -> f64 {
        let d = d.clamp(0.0, 1.0);
        if self.sigma == 0.0 {
            if d >= 1.0 {
                1.0
            } else {
                0.0
            }
        } else {
            d.powf(1.0 / self.sigma)
        }
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.sigma == 0.0
    }
}

/// Where on the boundary a value is requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryLocation {
    /// Angle on the unit circle of the mapped disc.
    MappedAngle(f64),
    /// Arclength `s` along edge C_k measured from w_k.
    ArcLength { edge: usize, s: f64 },
    /// Physical point on the polygon boundary.
    Point(Complex64),
}

/// Angle (2k−1)2π/K of the piecewise-constant tensor on edge k; the tensor
/// angle is twice the edge-normal director angle (2k−1)π/K.
pub fn edge_tensor_angle(k: i64, kk: usize) -> f64 {
    (2 * k - 1) as f64 * 2.0 * PI / kk as f64
}

/// Piecewise-constant data (α̂_k, β̂_k) on edge k.
pub fn edge_constant(k: i64, kk: usize, s_b: f64) -> PTensor {
    tensor_from_director(s_b, 0.5 * edge_tensor_angle(k, kk))
}

fn blended(k: i64, toward_next: bool, a: f64, kk: usize, s_b: f64) -> PTensor {
    let own = edge_constant(k, kk, s_b);
    let nb = edge_constant(if toward_next { k + 1 } else { k - 1 }, kk, s_b);
    PTensor::new(
        (1.0 - 0.5 * a) * own.p11 + 0.5 * a * nb.p11,
        (1.0 - 0.5 * a) * own.p12 + 0.5 * a * nb.p12,
    )
}

fn snap_unit(d: f64) -> f64 {
    if d > 1.0 - 1e-12 {
        1.0
    } else {
        d
    }
}

/// Locates a mapped angle on the arcs: returns (k, toward w_{k+1}, d) with d
/// the normalized angular distance from the arc midpoint.
pub fn mapped_arc_position(theta: f64, kk: usize) -> (usize, bool, f64) {
    let kf = kk as f64;
    let t = theta.rem_euclid(2.0 * PI);
    let j = ((t * kf / (2.0 * PI)).floor() as usize).min(kk - 1);
    let k = kk - j;
    let mid = 2.0 * PI * j as f64 / kf + PI / kf;
    let d = snap_unit((t - mid).abs() / (PI / kf));
    (k, t <= mid, d)
}

/// Homeotropic Dirichlet data at a boundary location.
pub fn boundary_value(
    spec: &PolygonSpec,
    bspec: &BoundarySpec,
    mat: &MaterialParams,
    location: BoundaryLocation,
) -> Result<PTensor> {
    let s_b = mat.s_b();
    let kk = match spec.sides {
        Sides::Disc => {
            return match location {
                BoundaryLocation::MappedAngle(theta) => Ok(tensor_from_director(s_b, -theta)),
                BoundaryLocation::Point(w) if (w.norm() - 1.0).abs() <= 1e-9 => {
                    Ok(tensor_from_director(s_b, w.arg()))
                }
                other => Err(Error::Domain(format!("{other:?} is not on the unit circle"))),
            }
        }
        Sides::Polygon(k) => k,
    };
    match location {
        BoundaryLocation::MappedAngle(theta) => {
            if !theta.is_finite() {
                return Err(Error::Domain("non-finite mapped angle".into()));
            }
            let (k, toward_next, d) = mapped_arc_position(theta, kk);
            Ok(blended(k as i64, toward_next, bspec.profile(d), kk, s_b))
        }
        BoundaryLocation::ArcLength { edge, s } => {
            let len = spec.edge_length();
            if edge < 1 || edge > kk || !(0.0..=len).contains(&s) {
                return Err(Error::Domain(format!(
                    "arclength {s} on edge {edge} is off the boundary"
                )));
            }
            let half = 0.5 * len;
            let d = snap_unit((s - half).abs() / half);
            Ok(blended(edge as i64, s >= half, bspec.profile(d), kk, s_b))
        }
        BoundaryLocation::Point(w) => {
            let tol = 1e-9;
            for k in 1..=kk as i64 {
                let (a, b) = spec.edge(k);
                if segment_distance(w, a, b) <= tol {
                    let s = ((w - a) * (b - a).conj()).re / (b - a).norm();
                    let s = s.clamp(0.0, spec.edge_length());
                    return boundary_value(
                        spec,
                        bspec,
                        mat,
                        BoundaryLocation::ArcLength { edge: k as usize, s },
                    );
                }
            }
            Err(Error::Domain(format!("point {w} is off the polygon boundary")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sb() -> f64 {
        MaterialParams::default().s_b()
    }

    #[test]
    fn director_examples() {
        let p = tensor_from_director(1.0, PI / 4.0);
        assert!((p.p11).abs() < 1e-15 && (p.p12 - 1.0).abs() < 1e-15);
        let a = tensor_from_director(0.5, PI);
        assert!((a.p11 - 0.5).abs() < 1e-15 && a.p12.abs() < 1e-15);
        let d = director_from_tensor(PTensor::new(-1.0, 0.0));
        assert!((d.s - 1.0).abs() < 1e-15 && (d.gamma - PI / 2.0).abs() < 1e-15);
        let z = director_from_tensor(PTensor::new(0.0, 0.0));
        assert!(z.defect && z.gamma == 0.0);
    }

    #[test]
    fn default_constants() {
        let m = MaterialParams::default();
        assert!((m.s_b() - 32.0 / 35.0).abs() < 1e-15);
        assert!((m.s_plus() - 64.0 / 35.0).abs() < 1e-15);
        let f0 = bulk_density(PTensor::default(), &m);
        assert!((f0 - 0.25 * (32.0f64 / 35.0).powi(4)).abs() < 1e-15);
        assert_eq!(bulk_density(PTensor::new(m.s_b(), 0.0), &m), 0.0);
        assert!(MaterialParams::new(-1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn square_edges_have_vanishing_p11() {
        let spec = PolygonSpec::polygon(4, 0.0).unwrap();
        let m = MaterialParams::default();
        let b = BoundarySpec::default();
        for k in 1..=4 {
            let (lo, hi) = spec.arc(k);
            let p = boundary_value(&spec, &b, &m, BoundaryLocation::MappedAngle(0.5 * (lo + hi))).unwrap();
            assert!(p.p11.abs() < 1e-15);
            assert!((p.p12.abs() - sb()).abs() < 1e-15);
        }
    }

    #[test]
    fn triangle_second_edge_midpoint() {
        let spec = PolygonSpec::polygon(3, 0.0).unwrap();
        let m = MaterialParams::default();
        let b = BoundarySpec::new(0.3).unwrap();
        let len = spec.edge_length();
        let p = boundary_value(&spec, &b, &m, BoundaryLocation::ArcLength { edge: 2, s: 0.5 * len }).unwrap();
        assert!((p.p11 - sb()).abs() < 1e-14 && p.p12.abs() < 1e-14);
    }

    #[test]
    fn vertex_value_is_edge_average() {
        let m = MaterialParams::default();
        for kk in 3..=8usize {
            let spec = PolygonSpec::polygon(kk, 0.0).unwrap();
            for sigma in [0.0, 0.25] {
                let b = BoundarySpec::new(sigma).unwrap();
                for k in 1..=kk as i64 {
                    let want = {
                        let a = edge_constant(k, kk, sb());
                        let c = edge_constant(k + 1, kk, sb());
                        PTensor::new(0.5 * (a.p11 + c.p11), 0.5 * (a.p12 + c.p12))
                    };
                    let at_point = boundary_value(&spec, &b, &m, BoundaryLocation::Point(spec.vertex(k + 1))).unwrap();
                    let (lo, _) = spec.arc(k as usize);
                    let mapped = boundary_value(&spec, &b, &m, BoundaryLocation::MappedAngle(lo)).unwrap();
                    for p in [at_point, mapped] {
                        assert!((p.p11 - want.p11).abs() < 1e-14 && (p.p12 - want.p12).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn off_boundary_is_rejected() {
        let spec = PolygonSpec::polygon(5, 0.0).unwrap();
        let m = MaterialParams::default();
        let b = BoundarySpec::default();
        assert!(boundary_value(&spec, &b, &m, BoundaryLocation::Point(Complex64::new(3.0, 0.0))).is_err());
        assert!(boundary_value(&spec, &b, &m, BoundaryLocation::ArcLength { edge: 6, s: 0.1 }).is_err());
        assert!(boundary_value(&spec, &b, &m, BoundaryLocation::ArcLength { edge: 1, s: 5.0 }).is_err());
    }

    #[test]
    fn sum_rules() {
        for kk in 3..=12usize {
            let (sa, sbeta) = (1..=kk as i64).fold((0.0, 0.0), |acc, k| {
                let p = edge_constant(k, kk, 1.0);
                (acc.0 + p.p11, acc.1 + p.p12)
            });
            assert!(sa.abs() < 1e-13 && sbeta.abs() < 1e-13, "K={kk}");
        }
    }

    #[test]
    fn gamma_star_reduction() {
        let cases = [(3usize, PI / 3.0 + 0.1), (4, 3.0 * PI / 4.0), (6, -0.2), (5, 2.0)];
        for (kk, g) in cases {
            let spec = PolygonSpec::polygon(kk, g).unwrap();
            let red = spec.reduced_gamma_star;
            assert!((0.0..=PI / kk as f64 + 1e-12).contains(&red), "K={kk} g={g} red={red}");
            let img = spec.unreduce(0.5, 0.3, PTensor::new(1.0, 0.0));
            assert!(((img.gamma_star - g) / PI - ((img.gamma_star - g) / PI).round()).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn round_trip_director(s in 1e-6f64..10.0, gamma in 0.0f64..PI) {
            let d = director_from_tensor(tensor_from_director(s, gamma));
            prop_assert!((d.s - s).abs() <= 1e-12 * s);
            let diff = (d.gamma - gamma).rem_euclid(PI);
            prop_assert!(diff.min(PI - diff) < 1e-10);
        }

        #[test]
        fn bulk_density_rotation_invariant(p11 in -2.0f64..2.0, p12 in -2.0f64..2.0, a in -7.0f64..7.0) {
            let m = MaterialParams::default();
            let p = PTensor::new(p11, p12);
            prop_assert!((bulk_density(p, &m) - bulk_density(p.rotated(a), &m)).abs() < 1e-12);
        }

        #[test]
        fn rotation_and_reflection_relations(kk in 3usize..13, n in 0i64..13, frac in 0.0f64..1.0, sigma in 0.0f64..0.5) {
            let m = MaterialParams::default();
            let spec = PolygonSpec::polygon(kk, 0.0).unwrap();
            let b = BoundarySpec::new(sigma).unwrap();
            let k = 1 + (frac * kk as f64).floor().min(kk as f64 - 1.0) as usize;
            let (lo, hi) = spec.arc(k);
            let t = lo + frac.fract() * (hi - lo);
            let p = boundary_value(&spec, &b, &m, BoundaryLocation::MappedAngle(t)).unwrap();
            // arc k+n sits 2πn/K lower in θ
            let q = boundary_value(&spec, &b, &m, BoundaryLocation::MappedAngle(t - 2.0 * PI * n as f64 / kk as f64)).unwrap();
            let c = (4.0 * PI * n as f64 / kk as f64).cos();
            let s = (4.0 * PI * n as f64 / kk as f64).sin();
            prop_assert!((q.p11 - (c * p.p11 - s * p.p12)).abs() < 1e-12);
            prop_assert!((q.p12 - (s * p.p11 + c * p.p12)).abs() < 1e-12);
            // arc K−k+1 is the mirror image θ ↦ 2π − θ
            let r = boundary_value(&spec, &b, &m, BoundaryLocation::MappedAngle(2.0 * PI - t)).unwrap();
            prop_assert!((r.p11 - p.p11).abs() < 1e-12 && (r.p12 + p.p12).abs() < 1e-12);
            prop_assert!(sigma > 0.0 || (p.order() - m.s_b()).abs() < 1e-12 || (t - lo).abs() < 1e-15);
        }
    }
}
