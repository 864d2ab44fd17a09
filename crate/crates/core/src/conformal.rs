//! Schwarz–Christoffel map from the unit disc onto the exterior of the
//! regular K-gon, f(z) = C(K)∫ x⁻²(1 − x^K)^{2/K} dx, with f(0) = ∞ and
//! f(1) = w_1.
//!
//! Writing t = z^K, f(z) = −C/z · F(t) with F = ₂F₁(−2/K, −1/K; 1 − 1/K; t).
//! The power series of F converges only like m^{−2−1/K} on |t| = 1, so it
//! is used for |t| ≤ 0.9; near t = 1 the connection formula
//!
//!   F(t) = A·t^{1/K} + B·(1 − t)^{1+2/K} ₂F₁(1 + 1/K, 1; 2 + 2/K; 1 − t)
//!
//! takes over, and the remaining boundary sector is reached by
//! Gauss–Legendre quadrature of f′ along a radial segment.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{PolygonSpec, Sides};
use crate::quadrature::gauss_legendre;

/// Value returned for f(0) and f′(0).
pub const INFINITY_SENTINEL: Complex64 = Complex64::new(f64::INFINITY, f64::INFINITY);

const SERIES_RADIUS: f64 = 0.9;
const RADIAL_NODES: usize = 24;

#[derive(Debug, Clone)]
pub struct SCMap {
    pub sides: Sides,
    /// C(K); negative for polygons, −1 for the disc so that f ~ −C/z.
    pub capacity: f64,
    /// Taylor coefficients of F(t).
    pub series_coeffs: Vec<f64>,
    /// Taylor coefficients of ₂F₁(1 + 1/K, 1; 2 + 2/K; u).
    pub connection_coeffs: Vec<f64>,
    /// Number of retained terms in each series.
    pub truncation_order: usize,
    conn_a: f64,
    conn_b: f64,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
    tol: f64,
}

fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// C(K) = −Γ(1 + 1/K) / (Γ(1 − 1/K)·Γ(1 + 2/K)), fixed by f(1) = 1.
pub fn capacity(k: usize) -> f64 {
    let kf = k as f64;
    -gamma(1.0 + 1.0 / kf) / (gamma(1.0 - 1.0 / kf) * gamma(1.0 + 2.0 / kf))
}

fn horner(coeffs: &[f64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

impl SCMap {
    pub fn build(sides: Sides, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
        }
        let tol_eff = tol.max(1e-16);
        let (gl_nodes, gl_weights) = gauss_legendre(RADIAL_NODES);
        let k = match sides {
            Sides::Disc => {
                return Ok(Self {
                    sides,
                    capacity: -1.0,
                    series_coeffs: vec![1.0],
                    connection_coeffs: Vec::new(),
                    truncation_order: 0,
                    conn_a: 1.0,
                    conn_b: 0.0,
                    gl_nodes,
                    gl_weights,
                    tol: tol_eff,
                })
            }
            Sides::Polygon(k) if k < 3 => {
                return Err(Error::Domain(format!("a polygon needs at least 3 sides, got {k}")))
            }
            Sides::Polygon(k) => k,
        };
        let kf = k as f64;
        // both coefficient sequences are bounded by 1, so the geometric tail
        // at radius 0.9 bounds the truncation error
        let m = ((tol_eff * 0.1 * (1.0 - SERIES_RADIUS)).ln() / SERIES_RADIUS.ln()).ceil() as usize;
        let (a, b, c) = (-2.0 / kf, -1.0 / kf, 1.0 - 1.0 / kf);
        let mut series = Vec::with_capacity(m + 1);
        let mut t = 1.0;
        for j in 0..=m {
            series.push(t);
            let jf = j as f64;
            t *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0));
        }
        let mut conn = Vec::with_capacity(m + 1);
        let mut g = 1.0;
        for j in 0..=m {
            conn.push(g);
            let jf = j as f64;
            g *= (1.0 + 1.0 / kf + jf) / (2.0 + 2.0 / kf + jf);
        }
        let conn_a = gamma(c) * gamma(c - a - b) / (gamma(c - a) * gamma(c - b));
        let conn_b = gamma(c) * gamma(a + b - c) / (gamma(a) * gamma(b));
        Ok(Self {
            sides,
            capacity: -1.0 / conn_a,
            series_coeffs: series,
            connection_coeffs: conn,
            truncation_order: m,
            conn_a,
            conn_b,
            gl_nodes,
            gl_weights,
            tol: tol_eff,
        })
    }

    pub fn for_spec(spec: &PolygonSpec, tol: f64) -> Result<Self> {
        Self::build(spec.sides, tol)
    }

    pub fn k(&self) -> Option<usize> {
        self.sides.count()
    }

    fn hyp_direct(&self, t: Complex64) -> Complex64 {
        horner(&self.series_coeffs, t)
    }

    fn hyp_connection(&self, t: Complex64, kf: f64) -> Complex64 {
        let u = Complex64::new(1.0, 0.0) - t;
        let tail = if u.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            u.powf(1.0 + 2.0 / kf) * horner(&self.connection_coeffs, u)
        };
        t.powf(1.0 / kf) * self.conn_a + tail * self.conn_b
    }

    /// Forward map for 0 < |z| ≤ 1; z = 0 yields [`INFINITY_SENTINEL`].
    pub fn forward(&self, z: Complex64) -> Complex64 {
        if z.norm() == 0.0 {
            return INFINITY_SENTINEL;
        }
        let k = match self.sides {
            Sides::Disc => return z.inv(),
            Sides::Polygon(k) => k,
        };
        let kf = k as f64;
        let t = z.powu(k as u32);
        let pre = -self.capacity / z;
        if t.norm() <= SERIES_RADIUS {
            return pre * self.hyp_direct(t);
        }
        if (Complex64::new(1.0, 0.0) - t).norm() <= SERIES_RADIUS {
            return pre * self.hyp_connection(t, kf);
        }
        // radial segment from |t| = 0.9 out to z; its distance to the nearest
        // prevertex is several times its length, so a fixed rule suffices
        let z0 = z * (SERIES_RADIUS.powf(1.0 / kf) / z.norm());
        let base = -self.capacity / z0 * self.hyp_direct(z0.powu(k as u32));
        let half = 0.5 * (z - z0);
        let mid = 0.5 * (z + z0);
        let integral = self
            .gl_nodes
            .iter()
            .zip(&self.gl_weights)
            .fold(Complex64::new(0.0, 0.0), |acc, (&x, &w)| acc + self.derivative(mid + half * x) * w);
        base + integral * half
    }

    /// f′(z) = C z⁻²(1 − z^K)^{2/K}, principal branch; zero at prevertices.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        if z.norm() == 0.0 {
            return INFINITY_SENTINEL;
        }
        match self.sides {
            Sides::Disc => -(z * z).inv(),
            Sides::Polygon(k) => {
                let one_minus = Complex64::new(1.0, 0.0) - z.powu(k as u32);
                if one_minus.norm() < 1e-14 {
                    return Complex64::new(0.0, 0.0);
                }
                one_minus.powf(2.0 / k as f64) * self.capacity / (z * z)
            }
        }
    }

    /// Preimage of an exterior point; `Error::InsidePolygon` if `w` lies
    /// inside the closed polygon interior.
    pub fn inverse(&self, w: Complex64, tol: f64) -> Result<Complex64> {
        let k = match self.sides {
            Sides::Disc => {
                if w.norm() < 1.0 {
                    return Err(Error::InsidePolygon(w));
                }
                return Ok(w.inv());
            }
            Sides::Polygon(k) => k,
        };
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(Error::Domain(format!("non-finite point {w}")));
        }
        let spec = PolygonSpec::polygon(k, 0.0)?;
        if spec.contains(w) && spec.boundary_distance(w) > 1e-13 {
            return Err(Error::InsidePolygon(w));
        }
        let tol = tol.max(self.tol);
        let seed = Complex64::new(-self.capacity, 0.0) / w;
        match self.newton(w, seed, tol) {
            Ok(z) => Ok(z),
            Err(_) => self.ray_continuation(w, tol),
        }
    }

    fn clamp_disc(z: Complex64) -> Complex64 {
        let n = z.norm();
        if n > 1.0 {
            z / n
        } else {
            z
        }
    }

    fn newton(&self, w: Complex64, seed: Complex64, tol: f64) -> Result<Complex64> {
        let scale = w.norm().max(1.0);
        let mut z = Self::clamp_disc(seed);
        let mut res = (self.forward(z) - w).norm();
        let max_iter = 80;
        for _ in 0..max_iter {
            if res <= tol * scale {
                return Ok(z);
            }
            let d = self.derivative(z);
            if d.norm() == 0.0 || !d.re.is_finite() {
                break;
            }
            let step = (self.forward(z) - w) / d;
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-6 {
                let cand = z - step * alpha;
                if cand.norm() <= 1.0 + 1e-15 && cand.norm() > 0.0 {
                    let r = (self.forward(cand) - w).norm();
                    if r < res {
                        z = cand;
                        res = r;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if res <= tol * scale {
            Ok(z)
        } else {
            Err(Error::InverseNoConvergence {
                best: z,
                residual: res,
                iterations: max_iter,
            })
        }
    }

    /// Follows the ray s·w from far away, where the leading-term seed is
    /// accurate, back to w.
    fn ray_continuation(&self, w: Complex64, tol: f64) -> Result<Complex64> {
        let s_far = (1e3 / w.norm()).max(2.0);
        let target = w;
        let mut s = s_far;
        let mut z = self.newton(w * s, Complex64::new(-self.capacity, 0.0) / (w * s), tol)?;
        let mut ds = 0.5 * (s - 1.0);
        let mut last_err = None;
        while s > 1.0 {
            let s_next = (s - ds).max(1.0);
            match self.newton(target * s_next, z, tol) {
                Ok(zn) => {
                    z = zn;
                    s = s_next;
                    ds *= 1.5;
                }
                Err(e) => {
                    ds *= 0.25;
                    if ds < 1e-12 {
                        last_err = Some(e);
                        break;
                    }
                }
            }
        }
        match last_err {
            None => Ok(z),
            Some(Error::InverseNoConvergence { best, residual, .. }) => Err(Error::InverseNoConvergence {
                best,
                residual,
                iterations: 0,
            }),
            Some(e) => Err(e),
        }
    }

    /// Physical boundary point of mapped angle θ.
    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        self.forward(Complex64::from_polar(1.0, theta))
    }

    /// Prevertex of w_k: e^{−2πi(k−1)/K}.
    pub fn prevertex(&self, k: i64) -> Complex64 {
        let kk = self.k().expect("prevertices exist for polygons only") as f64;
        Complex64::from_polar(1.0, -2.0 * PI * (k - 1) as f64 / kk)
    }
}
