//! Non-abelian de Rham and Dolbeault complexes: gauge maps, curvature,
//! twisting by flat line-bundle data and the Picard sector.

pub mod complex;
pub mod gauge;
pub mod identities;
mod pointwise;
pub mod twist;

pub use complex::{curvature, type_project, Curvature, FLAT_TOL};
pub use gauge::{check_crossed_hom, exp_nilpotent_form, Flavor, GaugeFactor, GaugeMap};
pub use twist::{
    chi_coefficients, k_reality_defect, make_twist, make_twist_from, picard_lift, picard_project,
    trivial_twist, Direction, TwistContext,
};
