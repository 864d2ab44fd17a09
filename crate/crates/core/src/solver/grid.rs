//! Log-polar discretization of the mapped annulus ε_ann ≤ r ≤ 1.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::conformal::SCMap;
use crate::error::{Error, Result};
use crate::model::Sides;

/// Nodes (r_i, θ_j) with s = ln r uniform and θ periodic. Ring 0 is the
/// inner (far-field) ring, ring n_r − 1 is the polygon boundary.
#[derive(Debug, Clone)]
pub struct AnnulusGrid {
    pub sides: Sides,
    pub n_r: usize,
    pub n_theta: usize,
    pub epsilon_ann: f64,
    pub r_max: f64,
    pub h_s: f64,
    pub h_theta: f64,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    /// |f′(z)|² per node.
    pub weight: Vec<f64>,
    /// r²|f′(z)|², the bulk weight in (s, θ) variables.
    pub weight_s: Vec<f64>,
    /// Physical images f(z).
    pub physical: Vec<Complex64>,
}

impl AnnulusGrid {
    pub fn build(map: &SCMap, n_r: usize, n_theta: usize, r_max: f64) -> Result<Self> {
        if !(r_max > 1.0) {
            return Err(Error::Domain(format!("R_max must exceed 1, got {r_max}")));
        }
        let min_theta = 3 * map.k().unwrap_or(4);
        if n_r < 8 || n_theta < min_theta {
            return Err(Error::Resolution(format!(
                "need N_r >= 8 and N_theta >= {min_theta}, got {n_r} x {n_theta}"
            )));
        }
        let epsilon_ann = map.capacity.abs() / r_max;
        if epsilon_ann >= 1.0 {
            return Err(Error::Domain(format!("R_max = {r_max} leaves an empty annulus")));
        }
        let s0 = epsilon_ann.ln();
        let h_s = -s0 / (n_r - 1) as f64;
        let h_theta = 2.0 * PI / n_theta as f64;
        let r: Vec<f64> = (0..n_r)
            .map(|i| if i == n_r - 1 { 1.0 } else { (s0 + i as f64 * h_s).exp() })
            .collect();
        let theta: Vec<f64> = (0..n_theta).map(|j| j as f64 * h_theta).collect();
        let mut weight = Vec::with_capacity(n_r * n_theta);
        let mut weight_s = Vec::with_capacity(n_r * n_theta);
        let mut physical = Vec::with_capacity(n_r * n_theta);
        for &ri in &r {
            for &tj in &theta {
                let z = Complex64::from_polar(ri, tj);
                let w2 = map.derivative(z).norm_sqr();
                weight.push(w2);
                weight_s.push(ri * ri * w2);
                physical.push(map.forward(z));
            }
        }
        Ok(Self {
            sides: map.sides,
            n_r,
            n_theta,
            epsilon_ann,
            r_max,
            h_s,
            h_theta,
            r,
            theta,
            weight,
            weight_s,
            physical,
        })
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    pub fn s(&self, i: usize) -> f64 {
        self.epsilon_ann.ln() + i as f64 * self.h_s
    }

    /// Number of unknowns: both components on the interior rings.
    pub fn n_unknowns(&self) -> usize {
        2 * (self.n_r - 2) * self.n_theta
    }

    /// Unknown index of component c at interior node (i, j), 1 ≤ i ≤ n_r − 2.
    pub fn unknown(&self, i: usize, j: usize, c: usize) -> usize {
        2 * ((i - 1) * self.n_theta + j) + c
    }

    /// Bilinear interpolation in (ln r, θ) of a node array.
    pub fn interpolate(&self, values: &[f64], r: f64, theta: f64) -> f64 {
        let x = ((r.ln() - self.epsilon_ann.ln()) / self.h_s).clamp(0.0, (self.n_r - 1) as f64);
        let i = (x.floor() as usize).min(self.n_r - 2);
        let a = x - i as f64;
        let y = theta.rem_euclid(2.0 * PI) / self.h_theta;
        let j = (y.floor() as usize).min(self.n_theta - 1);
        let b = y - j as f64;
        let j1 = (j + 1) % self.n_theta;
        let v = |ii: usize, jj: usize| values[self.node(ii, jj)];
        (1.0 - a) * ((1.0 - b) * v(i, j) + b * v(i, j1)) + a * ((1.0 - b) * v(i + 1, j) + b * v(i + 1, j1))
    }
}
