//! Toeplitz subalgebras of pseudodifferential calculi.
//!
//! [`algebra`] holds the filtered-algebra contract and the constructions
//! written against it. [`circle`] and [`sg`] are the two concrete calculi,
//! and [`lab`] discretizes circle operators to check Fredholm data.

pub mod algebra;
pub mod certificate;
pub mod circle;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod scalar;
pub mod sg;

pub use error::{CalcError, Result};
