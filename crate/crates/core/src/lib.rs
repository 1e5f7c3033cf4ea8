//! Solver library for scalar conservation laws with a downstream nonlocal
//! velocity: operators, Lagrangian and upwind schemes, a local Godunov
//! reference, and diagnostics for the structural properties of solutions.

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod godunov;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod nonlocal;
pub mod scenario;
pub mod solver;
pub mod velocity;

pub use error::{Error, Result};
pub use field::{field_from_datum, l1_distance, l1_distance_cross, total_variation, Datum, Field};
pub use grid::Grid;
pub use kernel::{Kernel, KernelShape, NormMode};
pub use nonlocal::{eval_w, NonlocalField};
pub use scenario::{PNorm, Scenario};
pub use velocity::VelocityModel;
