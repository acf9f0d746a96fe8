//! Exact computations with non-signalling correlations and their norms.
//!
//! Tensors are indexed `(x, a, y, b)`: Alice's input and output, then Bob's.
//! All arithmetic is over exact rationals.

pub mod constructions;
pub mod error;
pub mod games;
pub mod lp;
pub mod rational;
pub mod sampling;
pub mod tensor;
pub mod values;

pub use constructions::{AnsSplit, BmImage, NsgElement, NsgSplit};
pub use error::{Error, Result};
pub use games::{ExperimentReport, PermGame, XorDGame};
pub use lp::{LinearProgram, LpError, LpOutcome, LpStatus, Relation, Sense, SolverOptions};
pub use rational::Rational;
pub use tensor::{Dims, Marginals, Tensor4};
pub use values::{Budget, CorrelationMatrix, DeterministicStrategy, DnsCertificate};
