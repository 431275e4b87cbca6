//! Spinor bilinears, the tetrads they induce, and the differential identities
//! of that tetrad geometry.
//!
//! Conventions used throughout:
//! - spinor components are ordered `(u_L, d_L, u_R, d_R)`;
//! - the Minkowski metric is `diag(1, -1, -1, -1)` and `eps^{0123} = +1`;
//! - a tetrad is stored as a matrix whose row `a` holds the contravariant
//!   coordinate components `e_(a)^mu`;
//! - frame indices are raised and lowered with the Minkowski metric, so any
//!   contraction over two lower frame indices carries a metric sign.

pub mod algebra;
pub mod bilinears;
pub mod error;
pub mod fieldgrid;
pub mod frames;
pub mod io;
pub mod lightfront;
pub mod lorentz;
pub mod manufactured;
pub mod radial;
pub mod report;
pub mod sampling;
pub mod suites;

pub use algebra::{ComplexMatrix4, DiracBasis, Spinor};
pub use error::{Error, Result};
pub use report::IdentityReport;
