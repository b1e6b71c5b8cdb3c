//! Bookkeeping for the b-calculus on manifolds with corners, with numerical
//! cross-checks.
//!
//! * [`index_algebra`]: index sets and families, union / extended union / sum.
//! * [`corner_geometry`]: face lattices and blow-up of boundary faces.
//! * [`bmaps`]: exponent matrices, induced face maps, b-fibration check.
//! * [`transport`]: pull-back and push-forward of index families.
//! * [`b_calculus`]: indicial roots, model inverses, full-calculus descriptors.
//! * [`phg_numeric`]: quadrature, expansion fitting and other numeric oracles.

pub mod b_calculus;
pub mod bmaps;
pub mod corner_geometry;
pub mod error;
pub mod exponent;
pub mod index_algebra;
pub mod phg_numeric;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
pub use exponent::{Exponent, Q};
pub use index_algebra::{IndexEntry, IndexFamily, IndexSet, InfRe};
