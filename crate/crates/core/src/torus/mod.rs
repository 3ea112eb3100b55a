//! Hodge theory of band-limited, possibly twisted, matrix-valued forms on
//! flat complex tori.

pub mod fft;
pub mod form;
pub mod frame;
pub mod geom;
pub mod ops;
pub mod product;
pub mod shift;

pub use form::LieForm;
pub use geom::{elliptic_curve, make_torus, make_torus_with_grid, square_product, GeometryFile, TorusGeom};
pub use ops::{
    adjoint, differential, green, hodge_decompose, laplacian, solve_ddbar, solve_ddbar_tol,
    twisted_harmonic_basis, Diff, HodgeSplit, Laplacian,
};
pub use product::{bracket, bracket_strict, bracket_with, wedge, wedge_product, Truncation};
pub use shift::FrequencyShift;
