//! Exact bit-string kinematics.
//!
//! Wavefunctions are finite ±1 strings, phases are signed permutations, and
//! every correlation is a dyadic rational computed without rounding.

use serde::{Deserialize, Serialize};

pub mod bitstring;
pub mod cli;
pub mod dyadic;
pub mod epr;
pub mod hypercomplex;
pub mod numeric;
pub mod qubits;
pub mod report;

pub use bitstring::{BitString, BitStringError, Spin};
pub use dyadic::{AngleCos, AnglePi, Dyadic, DyadicError, ExactCos, SinSign};
pub use hypercomplex::{HyperError, OperatorLabel, QuaternionTriple, SignedPermutation};

/// How to treat a quantity that is not representable at the requested level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Reject it.
    #[default]
    Strict,
    /// Round to the level's grid and flag the result.
    Permissive,
}
