//! Principal holomorphic torus bundles over tori, their complex structures
//! and real structures.
//!
//! The crate is organised bottom-up:
//!
//! - [`exact`] and [`poly`]: rational linear algebra and Sturm root counting
//! - [`lattice`]: the alternating form, the nilpotent group law, Pfaffians
//! - [`complex`]: Hodge subspaces, the integrability residual, the
//!   decomposition of the form and the cocycle
//! - [`real`]: involution data, condition checkers, eigenspace blocks
//! - [`orbifold`]: recovering involution data from conjugation data
//! - [`solver`]: case solvers, sampling and connectivity certificates
//! - [`io`]: the text input format

pub mod complex;
pub mod error;
pub mod exact;
pub mod io;
pub mod lattice;
pub mod orbifold;
pub mod poly;
pub mod real;
pub mod solver;

pub use error::{Error, Result};
