//! λ → ∞ limiting states: boundary director angles with two bend vertices,
//! their classification under the symmetries that fix the far-field
//! director line, and the harmonic director angle they generate.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::conformal::SCMap;
use crate::error::{Error, Result};
use crate::model::{tensor_from_director, MaterialParams, PTensor};
use crate::smalllimit::{poisson_solve, ArcData, HarmonicSpec};

/// Boundary angles γ_k on the edges C_k for one choice of bend vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct BendAssignment {
    pub k: usize,
    /// Bend vertex indices a < b in 1..=K.
    pub bend_pair: (usize, usize),
    pub gamma_edges: Vec<f64>,
    /// jumps[k−1] is the rotation across the vertex between C_k and C_{k+1}.
    pub jumps: Vec<f64>,
}

impl BendAssignment {
    pub fn new(k: usize, a: usize, b: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::Domain(format!("need K >= 3, got {k}")));
        }
        let (a, b) = (a.min(b), a.max(b));
        if a == b || a == 0 || b > k {
            return Err(Error::Domain(format!("invalid bend vertices ({a}, {b}) for K = {k}")));
        }
        let kf = k as f64;
        let mut gamma_edges = Vec::with_capacity(k);
        let mut jumps = Vec::with_capacity(k - 1);
        let mut g = PI / kf;
        gamma_edges.push(g);
        for edge in 1..k {
            let vertex = edge + 1;
            let jump = if vertex == a || vertex == b {
                2.0 * PI / kf - PI
            } else {
                2.0 * PI / kf
            };
            jumps.push(jump);
            g += jump;
            gamma_edges.push(g);
        }
        Ok(Self {
            k,
            bend_pair: (a, b),
            gamma_edges,
            jumps,
        })
    }

    /// Rotation across the closing vertex w_1, from C_K back to C_1.
    pub fn closing_jump(&self) -> f64 {
        let kf = self.k as f64;
        if self.bend_pair.0 == 1 {
            2.0 * PI / kf - PI
        } else {
            2.0 * PI / kf
        }
    }

    /// Total director rotation around the boundary loop.
    pub fn total_rotation(&self) -> f64 {
        self.jumps.iter().sum::<f64>() + self.closing_jump()
    }

    pub fn mean_angle(&self) -> f64 {
        self.gamma_edges.iter().sum::<f64>() / self.k as f64
    }

    /// Number of edges between the two bend vertices along the shorter way.
    pub fn vertex_distance(&self) -> usize {
        let d = self.bend_pair.1 - self.bend_pair.0;
        d.min(self.k - d)
    }

    /// Direction of the chord joining the bend vertices, in [0, π).
    pub fn chord_angle(&self) -> f64 {
        let v = |i: usize| Complex64::from_polar(1.0, 2.0 * PI * (i - 1) as f64 / self.k as f64);
        (v(self.bend_pair.1) - v(self.bend_pair.0)).arg().rem_euclid(PI)
    }
}

/// All C(K, 2) assignments, ordered lexicographically by bend pair.
pub fn enumerate_assignments(k: usize) -> Result<Vec<BendAssignment>> {
    if k < 3 {
        return Err(Error::Domain(format!("need K >= 3, got {k}")));
    }
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for a in 1..=k {
        for b in a + 1..=k {
            out.push(BendAssignment::new(k, a, b)?);
        }
    }
    Ok(out)
}

/// Dihedral element acting on vertex indices: rotation by 2πn/K or
/// reflection across the axis at angle mπ/K.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexMap {
    Rotation(usize),
    Reflection(usize),
}

impl VertexMap {
    pub fn apply(&self, v: usize, k: usize) -> usize {
        let i = (v - 1) as i64;
        let (k, j) = match *self {
            VertexMap::Rotation(n) => (k as i64, i + n as i64),
            VertexMap::Reflection(m) => (k as i64, m as i64 - i),
        };
        j.rem_euclid(k) as usize + 1
    }

    /// Physical point transformation.
    pub fn apply_point(&self, w: Complex64, k: usize) -> Complex64 {
        let kf = k as f64;
        match *self {
            VertexMap::Rotation(n) => w * Complex64::from_polar(1.0, 2.0 * PI * n as f64 / kf),
            VertexMap::Reflection(m) => w.conj() * Complex64::from_polar(1.0, 2.0 * PI * m as f64 / kf),
        }
    }

    /// Action on a director angle, up to multiples of π.
    pub fn apply_angle(&self, gamma: f64, k: usize) -> f64 {
        let kf = k as f64;
        match *self {
            VertexMap::Rotation(n) => gamma + 2.0 * PI * n as f64 / kf,
            VertexMap::Reflection(m) => 2.0 * PI * m as f64 / kf - gamma,
        }
    }
}

fn multiple_of(x: f64, period: f64) -> bool {
    let t = (x / period).round();
    (x - t * period).abs() < 1e-9
}

/// Elements of D_K mapping the line {±n*} at angle γ* to itself.
pub fn stabilizer(k: usize, gamma_star: f64) -> Vec<VertexMap> {
    let kf = k as f64;
    let mut out = Vec::new();
    for n in 0..k {
        if multiple_of(2.0 * PI * n as f64 / kf, PI) {
            out.push(VertexMap::Rotation(n));
        }
    }
    for m in 0..k {
        // the axis at mπ/K maps γ* to 2mπ/K − γ*
        if multiple_of(m as f64 * PI / kf - gamma_star, 0.5 * PI) {
            out.push(VertexMap::Reflection(m));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    /// An orbit of bend assignments.
    Orbit,
    /// The symmetric state continued from small λ, with no orbit of its own.
    SmallLambdaBranch,
}

#[derive(Debug, Clone)]
pub struct StateClass {
    pub label: String,
    pub kind: ClassKind,
    pub representative: BendAssignment,
    pub members: Vec<BendAssignment>,
}

/// Folded angle between the bend chord and n*, in [0, π/2].
fn chord_tilt(a: &BendAssignment, gamma_star: f64) -> f64 {
    let d = (a.chord_angle() - gamma_star).rem_euclid(PI);
    d.min(PI - d)
}

fn orbit_of(a: &BendAssignment, group: &[VertexMap]) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = group
        .iter()
        .map(|g| {
            let (x, y) = (g.apply(a.bend_pair.0, a.k), g.apply(a.bend_pair.1, a.k));
            (x.min(y), x.max(y))
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

fn named_family(k: usize, distance: usize) -> Option<&'static str> {
    match (k, distance) {
        (4, 2) => Some("D"),
        (4, 1) => Some("R"),
        (6, 3) => Some("Para"),
        (6, 2) => Some("Meta"),
        (6, 1) => Some("Ortho"),
        _ => None,
    }
}

/// Partition into orbits of the stabilizer of the far-field director line.
/// `gamma_star` is taken in the original (unreduced) frame.
pub fn classify_states(assignments: &[BendAssignment], gamma_star: f64) -> Result<Vec<StateClass>> {
    let Some(first) = assignments.first() else {
        return Ok(Vec::new());
    };
    let k = first.k;
    if assignments.iter().any(|a| a.k != k) {
        return Err(Error::Domain("assignments mix polygons with different K".into()));
    }
    let group = stabilizer(k, gamma_star);
    let mut seen = vec![false; assignments.len()];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for i in 0..assignments.len() {
        if seen[i] {
            continue;
        }
        let pairs = orbit_of(&assignments[i], &group);
        let members: Vec<usize> = (0..assignments.len())
            .filter(|&j| pairs.contains(&assignments[j].bend_pair))
            .collect();
        for &j in &members {
            seen[j] = true;
        }
        orbits.push(members);
    }

    // within one vertex distance, order orbits from most to least
    // perpendicular chord, ties by bend pair
    let tilt = |o: &Vec<usize>| chord_tilt(&assignments[o[0]], gamma_star);
    orbits.sort_by(|x, y| {
        let (ax, ay) = (&assignments[x[0]], &assignments[y[0]]);
        ay.vertex_distance()
            .cmp(&ax.vertex_distance())
            .then(tilt(y).total_cmp(&tilt(x)))
            .then(ax.bend_pair.cmp(&ay.bend_pair))
    });

    let mut classes = Vec::with_capacity(orbits.len() + 1);
    let mut idx = 0;
    while idx < orbits.len() {
        let d = assignments[orbits[idx][0]].vertex_distance();
        let group_end = idx + orbits[idx..]
            .iter()
            .take_while(|o| assignments[o[0]].vertex_distance() == d)
            .count();
        let n = group_end - idx;
        for (rank, orbit) in orbits[idx..group_end].iter().enumerate() {
            let label = match named_family(k, d) {
                Some(f) if n == 1 => f.to_string(),
                // perpendicular chord is the first class for K = 4 and the
                // second for K = 6
                Some(f) if n == 2 && k == 4 => format!("{f}{}", rank + 1),
                Some(f) if n == 2 => format!("{f}{}", 2 - rank),
                _ if n == 1 => format!("dist{d}"),
                _ => format!("dist{d}-{}", rank + 1),
            };
            let members: Vec<BendAssignment> = orbit.iter().map(|&j| assignments[j].clone()).collect();
            classes.push(StateClass {
                label,
                kind: ClassKind::Orbit,
                representative: members[0].clone(),
                members,
            });
        }
        idx = group_end;
    }

    if k == 4 && multiple_of(gamma_star - 0.25 * PI, 0.5 * PI) {
        classes.insert(
            0,
            StateClass {
                label: "St".into(),
                kind: ClassKind::SmallLambdaBranch,
                representative: BendAssignment::new(4, 2, 4)?,
                members: Vec::new(),
            },
        );
    }
    Ok(classes)
}

/// Lifts γ* + nπ closest to the mean boundary angle; two when tied.
pub fn best_lifts(assignment: &BendAssignment, gamma_star: f64) -> Vec<f64> {
    let mean = assignment.mean_angle();
    let n0 = ((mean - gamma_star) / PI).floor();
    let lo = gamma_star + n0 * PI;
    let hi = lo + PI;
    let (dl, dh) = (mean - lo, hi - mean);
    if (dl - dh).abs() < 1e-9 {
        vec![lo, hi]
    } else if dl < dh {
        vec![lo]
    } else {
        vec![hi]
    }
}

fn angle_spec(assignment: &BendAssignment, gamma_star: f64, epsilon: f64) -> Result<HarmonicSpec> {
    HarmonicSpec::new(ArcData::Constant(assignment.gamma_edges.clone()), gamma_star, epsilon)
}

/// Director angle at the mapped point (r, θ); `gamma_star` is used as the
/// centre value exactly as given.
pub fn harmonic_angle(assignment: &BendAssignment, gamma_star: f64, epsilon: f64, r: f64, theta: f64) -> Result<f64> {
    poisson_solve(&angle_spec(assignment, gamma_star, epsilon)?, r, theta)
}

/// P^∞ evaluator for one assignment and one lift of γ*.
#[derive(Debug, Clone)]
pub struct LargeLimit {
    pub assignment: BendAssignment,
    pub gamma_star: f64,
    pub s_b: f64,
    spec: HarmonicSpec,
}

impl LargeLimit {
    pub fn new(assignment: &BendAssignment, gamma_star: f64, epsilon: f64, mat: &MaterialParams) -> Result<Self> {
        Ok(Self {
            assignment: assignment.clone(),
            gamma_star,
            s_b: mat.s_b(),
            spec: angle_spec(assignment, gamma_star, epsilon)?,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon
    }

    pub fn angle(&self, r: f64, theta: f64) -> Result<f64> {
        poisson_solve(&self.spec, r, theta)
    }

    pub fn mapped(&self, r: f64, theta: f64) -> Result<PTensor> {
        Ok(tensor_from_director(self.s_b, self.angle(r, theta)?))
    }

    pub fn physical(&self, map: &SCMap, w: Complex64) -> Result<PTensor> {
        if map.k() != Some(self.assignment.k) {
            return Err(Error::Domain("map and assignment have different K".into()));
        }
        let z = map.inverse(w, 1e-13)?;
        if z.norm() < self.spec.epsilon {
            return Err(Error::Domain(format!("|f⁻¹(w)| below epsilon at {w}")));
        }
        self.mapped(z.norm().min(1.0), z.arg())
    }
}

pub fn limit_profile_infinity(
    assignment: &BendAssignment,
    gamma_star: f64,
    epsilon: f64,
    mat: &MaterialParams,
    map: &SCMap,
    w: Complex64,
) -> Result<PTensor> {
    LargeLimit::new(assignment, gamma_star, epsilon, mat)?.physical(map, w)
}
