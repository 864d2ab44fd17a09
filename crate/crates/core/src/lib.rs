//! Nematic equilibria of the reduced Landau–de Gennes model in the exterior
//! of a regular K-gon.

pub mod cli;
pub mod conformal;
pub mod error;
pub mod largelimit;
pub mod model;
pub mod quadrature;
pub mod smalllimit;
pub mod solver;

pub use error::{Error, Result};
