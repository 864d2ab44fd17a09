//! λ → 0 limit: harmonic profiles on the mapped disc and their defects.

pub mod defects;
pub mod poisson;
pub mod profile;

pub use crate::model::apply_symmetry;
pub use defects::{locate_point_defects, trace_line_defects, DefectReport, LineDefect, PointDefect, PolarScan};
pub use poisson::{poisson_solve, ArcData, HarmonicSpec};
pub use profile::{limit_profile_mapped, limit_profile_physical, SmallLimit};
