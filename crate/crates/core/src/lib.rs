//! Flat connections with values in solvable matrix groups over flat complex
//! tori: operator calculus, canonical forms, harmonic moduli and holonomy.

pub mod cli;
pub mod derham;
pub mod error;
pub mod io;
pub mod lie;
pub mod moduli;
pub mod linalg;
pub mod report;
pub mod sample;
pub mod suites;
pub mod torus;

pub use error::{Error, Result};
