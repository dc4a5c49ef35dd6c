//! Classical matrix pseudodifferential operators on the circle.

pub mod ellipticity;
pub mod inverse;
pub mod operator;
pub mod projections;
pub mod reduction;
pub mod symbol;
pub mod trig;

pub use ellipticity::{check_ellipticity, principal_and_restricted};
pub use inverse::{restricted_inverse, PointwiseSolver};
pub use operator::{CircleOp, SmoothingKernel, DEFAULT_EXACT_MODES};
pub use symbol::{ClassicalSymbol, HomComponent};
pub use trig::TrigPoly;
