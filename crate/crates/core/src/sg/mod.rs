//! SG (scattering) calculus on the real line.

pub mod onevar;
pub mod parametrix;
pub mod principal;
pub mod symbol;

pub use onevar::{deg, Basis, Deg, OneVar};
pub use parametrix::{
    sg_ellipticity_and_parametrix, sg_order_reduction, sg_parametrix, SgAnalysis, SgReduction, SgReductions,
};
pub use principal::{line_grid, sg_check_ellipticity, three_symbols, ThreeSymbols};
pub use symbol::{BiOrder, SgSymbol};
