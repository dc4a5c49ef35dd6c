//! Finite-section discretization of circle operators and the numerical
//! checks built on it.

pub mod galerkin;
pub mod index;
pub mod instances;
pub mod spectral;
pub mod verify;
pub mod winding;

pub use galerkin::{galerkin_matrix, galerkin_rect, GalerkinMatrix};
pub use index::{numerical_index, IndexReport};
pub use spectral::{spectral_inverse, SpectralInverse, SpectralOptions};
pub use verify::{verify_suite, VerifyOptions, VerifyReport};
pub use winding::winding_oracle;
