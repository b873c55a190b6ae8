//! Generic numerical services: ODE integration, root bracketing, crossing
//! detection on dense curves, and grid search with local refinement.

pub mod crossing;
pub mod grid;
pub mod ode;
pub mod roots;

pub use crossing::{first_crossing, Curve, Direction, FnCurve};
pub use grid::{grid_argopt, grid_argopt_by, Axis, GridOpt, GridSpec, Sense};
pub use ode::{integrate, integrate_until, DenseTrajectory, IntegratorConfig};
pub use roots::bisect;
