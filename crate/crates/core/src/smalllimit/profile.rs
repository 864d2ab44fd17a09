//! λ → 0 limiting tensor field: two Poisson problems on the mapped disc
//! with boundary data (ᾱ_k, β̄_k) and centre value s_b(cos 2γ*, sin 2γ*).

use std::sync::Arc;

use num_complex::Complex64;

use crate::conformal::SCMap;
use crate::error::{Error, Result};
use crate::model::{
    boundary_value, edge_constant, tensor_from_director, BoundaryLocation, BoundarySpec, MaterialParams, PTensor,
    PolygonSpec, Sides,
};

use super::poisson::{arc_measures, log_weight, poisson_solve, ArcData, HarmonicSpec};

#[derive(Debug, Clone)]
enum Data {
    Disc,
    Constant { alpha: Vec<f64>, beta: Vec<f64> },
    Trace { alpha: HarmonicSpec, beta: HarmonicSpec },
}

/// Evaluator of the limiting profile for one (polygon, γ*, σ, ε).
#[derive(Debug, Clone)]
pub struct SmallLimit {
    pub spec: PolygonSpec,
    pub bspec: BoundarySpec,
    pub mat: MaterialParams,
    pub epsilon: f64,
    center: PTensor,
    data: Data,
}

impl SmallLimit {
    pub fn new(spec: &PolygonSpec, bspec: &BoundarySpec, mat: &MaterialParams, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let s_b = mat.s_b();
        let center = tensor_from_director(s_b, spec.gamma_star);
        let data = match spec.sides {
            Sides::Disc => Data::Disc,
            Sides::Polygon(kk) if bspec.is_piecewise_constant() => {
                let (alpha, beta) = (1..=kk as i64)
                    .map(|k| {
                        let p = edge_constant(k, kk, s_b);
                        (p.p11, p.p12)
                    })
                    .unzip();
                Data::Constant { alpha, beta }
            }
            Sides::Polygon(kk) => {
                let component = |first: bool| -> ArcData {
                    let (s, b, m) = (spec.clone(), *bspec, *mat);
                    ArcData::Trace {
                        arcs: kk,
                        f: Arc::new(move |t| {
                            let p = boundary_value(&s, &b, &m, BoundaryLocation::MappedAngle(t))
                                .expect("mapped angles are always on the boundary");
                            if first {
                                p.p11
                            } else {
                                p.p12
                            }
                        }),
                    }
                };
                Data::Trace {
                    alpha: HarmonicSpec::new(component(true), center.p11, epsilon)?,
                    beta: HarmonicSpec::new(component(false), center.p12, epsilon)?,
                }
            }
        };
        Ok(Self {
            spec: spec.clone(),
            bspec: *bspec,
            mat: *mat,
            epsilon,
            center,
            data,
        })
    }

    /// Far-field tensor s_b(cos 2γ*, sin 2γ*).
    pub fn center(&self) -> PTensor {
        self.center
    }

    /// Profile at the mapped point r·e^{iθ}, ε ≤ r ≤ 1.
    pub fn mapped(&self, r: f64, theta: f64) -> Result<PTensor> {
        if !(r >= self.epsilon * (1.0 - 1e-12) && r <= 1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "radius {r} outside the annulus [{}, 1]",
                self.epsilon
            )));
        }
        let c = log_weight(r.min(1.0), self.epsilon);
        match &self.data {
            Data::Disc => {
                // P[e^{−2iφ}] = r² e^{−2iθ}, which has zero mean
                let s_b = self.mat.s_b();
                let z = Complex64::from_polar(r * r * s_b, -2.0 * theta) + self.center.as_complex() * c;
                Ok(PTensor::from_complex(z))
            }
            Data::Constant { alpha, beta } => {
                if r >= 1.0 {
                    return boundary_value(&self.spec, &self.bspec, &self.mat, BoundaryLocation::MappedAngle(theta));
                }
                let w = arc_measures(r, theta, alpha.len());
                let n = alpha.len() as f64;
                let (ma, mb) = (alpha.iter().sum::<f64>() / n, beta.iter().sum::<f64>() / n);
                let p11 = alpha.iter().zip(&w).map(|(a, w)| a * w).sum::<f64>() + (self.center.p11 - ma) * c;
                let p12 = beta.iter().zip(&w).map(|(b, w)| b * w).sum::<f64>() + (self.center.p12 - mb) * c;
                Ok(PTensor::new(p11, p12))
            }
            Data::Trace { alpha, beta } => Ok(PTensor::new(
                poisson_solve(alpha, r, theta)?,
                poisson_solve(beta, r, theta)?,
            )),
        }
    }

    /// Profile at a physical exterior point.
    pub fn physical(&self, map: &SCMap, w: Complex64) -> Result<PTensor> {
        if let Sides::Disc = self.spec.sides {
            // closed form in physical polar coordinates ρ, ψ
            let rho = w.norm();
            if rho < 1.0 {
                return Err(Error::InsidePolygon(w));
            }
            if rho.recip() < self.epsilon {
                return Err(Error::Domain(format!("|f⁻¹(w)| below epsilon at {w}")));
            }
            let psi = w.arg();
            let s_b = self.mat.s_b();
            let radial = Complex64::from_polar(s_b / (rho * rho), 2.0 * psi);
            let far = self.center.as_complex() * log_weight(rho.recip(), self.epsilon);
            return Ok(PTensor::from_complex(radial + far));
        }
        let z = map.inverse(w, 1e-13)?;
        if z.norm() < self.epsilon {
            return Err(Error::Domain(format!("|f⁻¹(w)| below epsilon at {w}")));
        }
        self.mapped(z.norm().min(1.0), z.arg())
    }
}

pub fn limit_profile_mapped(
    spec: &PolygonSpec,
    bspec: &BoundarySpec,
    mat: &MaterialParams,
    epsilon: f64,
    r: f64,
    theta: f64,
) -> Result<PTensor> {
    SmallLimit::new(spec, bspec, mat, epsilon)?.mapped(r, theta)
}

pub fn limit_profile_physical(
    spec: &PolygonSpec,
    bspec: &BoundarySpec,
    mat: &MaterialParams,
    epsilon: f64,
    map: &SCMap,
    w: Complex64,
) -> Result<PTensor> {
    SmallLimit::new(spec, bspec, mat, epsilon)?.physical(map, w)
}
