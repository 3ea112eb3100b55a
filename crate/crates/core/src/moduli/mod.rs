//! Canonical forms of flat connections, the admissible harmonic cone and
//! its symmetries, gauge-equivalence decisions and holonomy.

pub mod admissible;
pub mod canonical;
pub mod equivalence;
pub mod holonomy;

pub use admissible::{admissible_set, coordinates, ConstraintTensor, ModuliDescription, Sample, Sector, Symmetry, CONE_TOL};
pub use canonical::{canonicalize, reconstruct, CanonicalForm, RigidityResiduals};
pub use equivalence::{equivalent, equivalent_harmonic, Decision, Equivalence, ACCEPT_TOL, REJECT_TOL};
pub use holonomy::{
    commutator_defect, constant_holonomy, generator_holonomies, holonomy, holonomy_character_check,
    CharacterCheck, Holonomy, REFINE_TOL,
};
