//! Lifting bases of free modules over `Z/p^nu Z` to bases of free abelian
//! groups.
//!
//! Given rows `b_i` forming a basis of `(Z/qZ)^n` with `q = p^nu`, the
//! engines find integer rows `y_i` and units `u_i` with
//! `y_i = u_i b_i (mod q)` such that the `y_i` extend to a basis of `Z^n`.
//! [`finite`] handles finite matrices; [`stream`] processes row-finite
//! infinite matrices one row at a time. [`oracle`] certifies results
//! independently of both.
//!
//! ```
//! use basislift::{get_basis_finite, verify_lift, IntMatrix, Modulus};
//!
//! let q = Modulus::new(3, 2)?;
//! let a: IntMatrix = "2 2\n2 5\n-53 18\n".parse()?;
//! let lift = get_basis_finite(&a, &q)?;
//! assert!(verify_lift(&a, &lift)?.all_ok());
//! # Ok::<(), basislift::Error>(())
//! ```

pub mod arith;
pub mod cli;
pub mod error;
pub mod finite;
pub mod lattice;
pub mod matrix;
pub mod oracle;
pub mod stream;

pub use arith::Modulus;
pub use error::{Error, Result};
pub use finite::{get_basis_finite, replay_reduction, LiftResult};
pub use matrix::{ColumnPermutation, IntMatrix, RowStream, SparseRow};
pub use oracle::{verify_lift, LiftedBasis, VerificationReport};
pub use stream::{EliminationState, StreamLiftReport};
