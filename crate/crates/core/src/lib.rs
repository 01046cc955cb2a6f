//! Small fractional parts of polynomials and additive forms: exact Weyl sums,
//! mean-value counts, exponent tables, minimizers and rational recovery.
//!
//! Angles are dyadic fixed-point numbers modulo 1 ([`Angle`]); every
//! comparison that decides an answer is made in exact integer arithmetic.

pub mod arith;
pub mod config;
pub mod error;
pub mod experiment;
pub mod exponents;
pub mod meanvalue;
pub mod recovery;
pub mod report;
pub mod search;
pub(crate) mod serde_big;
pub mod weyl;

pub use arith::{Angle, FracDistance, NamedConstant, PowerBound};
pub use config::{default_precision, Limits};
pub use error::{Error, Result};
pub use experiment::{run, Artifact, Command, ExperimentSpec, OutputFormat};
pub use exponents::{ExponentRecord, Problem};
pub use meanvalue::MeanValueCount;
pub use recovery::{RationalApprox, RecoveryReport, Regime};
pub use report::Table;
pub use search::{Argmin, MinResult};
pub use weyl::{CoefficientVector, WeylSumValue};
