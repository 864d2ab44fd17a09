//! Dirichlet problem on the unit disc with a regularized logarithmic
//! centre term: u = P[g] + (u0 − mean g)·ln r / ln ε.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::integrate;

pub type TraceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Boundary data on the K arcs D_k = (2π(K−k)/K, 2π(K−k+1)/K).
#[derive(Clone)]
pub enum ArcData {
    /// One constant per arc, indexed k = 1..K.
    Constant(Vec<f64>),
    /// A general trace g(θ) on the circle; `arcs` marks where g may kink.
    Trace { arcs: usize, f: TraceFn },
}

impl fmt::Debug for ArcData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArcData::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            ArcData::Trace { arcs, .. } => f.debug_struct("Trace").field("arcs", arcs).finish_non_exhaustive(),
        }
    }
}

impl ArcData {
    pub fn arcs(&self) -> usize {
        match self {
            ArcData::Constant(v) => v.len(),
            ArcData::Trace { arcs, .. } => *arcs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HarmonicSpec {
    pub arc_values: ArcData,
    pub center_value: f64,
    pub epsilon: f64,
}

impl HarmonicSpec {
    pub fn new(arc_values: ArcData, center_value: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if arc_values.arcs() == 0 {
            return Err(Error::Domain("at least one boundary arc is required".into()));
        }
        Ok(Self {
            arc_values,
            center_value,
            epsilon,
        })
    }

    /// Average of the boundary trace over the circle.
    pub fn boundary_mean(&self) -> Result<f64> {
        match &self.arc_values {
            ArcData::Constant(v) => Ok(v.iter().sum::<f64>() / v.len() as f64),
            ArcData::Trace { arcs, f } => {
                let mut total = 0.0;
                for k in 1..=*arcs {
                    let (lo, hi) = arc_bounds(k, *arcs);
                    total += integrate(|t| f(t), lo, hi, 1e-14, 1e-13)?;
                }
                Ok(total / (2.0 * PI))
            }
        }
    }
}

/// Decreases from 1 at r = ε to 0 at r = 1.
pub fn log_weight(r: f64, epsilon: f64) -> f64 {
    r.ln() / epsilon.ln()
}

/// Arc D_k on the circle, k = 1..K.
pub fn arc_bounds(k: usize, arcs: usize) -> (f64, f64) {
    let kf = arcs as f64;
    let k = k as f64;
    (2.0 * PI * (kf - k) / kf, 2.0 * PI * (kf - k + 1.0) / kf)
}

/// Harmonic measure at z (|z| < 1) of the counter-clockwise arc (φ1, φ2),
/// i.e. the Poisson integral of its indicator.
pub fn arc_harmonic_measure(z: Complex64, phi1: f64, phi2: f64) -> f64 {
    let a = Complex64::from_polar(1.0, phi1) - z;
    let b = Complex64::from_polar(1.0, phi2) - z;
    let sweep = (b * a.conj()).arg().rem_euclid(2.0 * PI);
    sweep / PI - (phi2 - phi1) / (2.0 * PI)
}

/// Harmonic measures of all K arcs D_k at the mapped point (r, θ), r < 1.
pub fn arc_measures(r: f64, theta: f64, arcs: usize) -> Vec<f64> {
    let z = Complex64::from_polar(r, theta);
    (1..=arcs)
        .map(|k| {
            let (lo, hi) = arc_bounds(k, arcs);
            arc_harmonic_measure(z, lo, hi)
        })
        .collect()
}

/// Value of piecewise-constant data at a boundary angle; junctions take the
/// average of the two neighbouring arcs.
pub fn constant_trace(values: &[f64], theta: f64) -> f64 {
    let kk = values.len();
    let kf = kk as f64;
    let t = theta.rem_euclid(2.0 * PI);
    let x = t * kf / (2.0 * PI);
    let j = (x.floor() as usize).min(kk - 1);
    let k = kk - j;
    let frac = x - j as f64;
    let tol = 1e-12;
    if frac < tol {
        // lower end of D_k, shared with D_{k+1}
        let next = if k == kk { 1 } else { k + 1 };
        0.5 * (values[k - 1] + values[next - 1])
    } else if frac > 1.0 - tol {
        let prev = if k == 1 { kk } else { k - 1 };
        0.5 * (values[k - 1] + values[prev - 1])
    } else {
        values[k - 1]
    }
}

fn check_radius(r: f64, epsilon: f64) -> Result<()> {
    if !(r >= epsilon * (1.0 - 1e-12) && r <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "radius {r} outside the annulus [{epsilon}, 1]"
        )));
    }
    Ok(())
}

fn poisson_kernel(r: f64, x: f64) -> f64 {
    (1.0 - r * r) / (1.0 - 2.0 * r * x.cos() + r * r)
}

/// Poisson integral of a general trace at (r, θ), r < 1, computed as
/// g(θ) + (1/2π)∫(g(φ) − g(θ))P(r, φ − θ)dφ with breakpoints at the arcs.
pub fn poisson_trace(f: &dyn Fn(f64) -> f64, arcs: usize, r: f64, theta: f64) -> Result<f64> {
    let g0 = f(theta);
    let mut cuts: Vec<f64> = (0..arcs)
        .map(|j| {
            let c = 2.0 * PI * j as f64 / arcs as f64;
            theta - PI + (c - (theta - PI)).rem_euclid(2.0 * PI)
        })
        .collect();
    cuts.push(theta - PI);
    cuts.push(theta);
    cuts.push(theta + PI);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate(|phi| (f(phi) - g0) * poisson_kernel(r, phi - theta), w[0], w[1], 1e-14, 1e-13)?;
    }
    Ok(g0 + total / (2.0 * PI))
}

/// Solution of the disc Dirichlet problem with the logarithmic centre
/// term at (r, θ), ε ≤ r ≤ 1.
pub fn poisson_solve(spec: &HarmonicSpec, r: f64, theta: f64) -> Result<f64> {
    check_radius(r, spec.epsilon)?;
    let c = log_weight(r.min(1.0), spec.epsilon);
    match &spec.arc_values {
        ArcData::Constant(values) => {
            if r >= 1.0 {
                return Ok(constant_trace(values, theta));
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let w = arc_measures(r, theta, values.len());
            let harmonic: f64 = values.iter().zip(&w).map(|(u, w)| u * w).sum();
            Ok(harmonic + (spec.center_value - mean) * c)
        }
        ArcData::Trace { arcs, f } => {
            if r >= 1.0 {
                return Ok(f(theta));
            }
            let mean = spec.boundary_mean()?;
            let harmonic = poisson_trace(f.as_ref(), *arcs, r, theta)?;
            Ok(harmonic + (spec.center_value - mean) * c)
        }
    }
}
