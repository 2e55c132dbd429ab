//! Mixed-norm inequalities for multilinear forms on `l_p` spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`exponents`] exact-rational exponent calculus (conjugates, the `delta`
//!   and `lambda` thresholds, admissibility of mixed exponent tuples);
//! * [`tensor`] dense coefficient tensors and nested mixed `l_q` norms;
//! * [`opnorm`] operator norms of multilinear forms: sign enumeration,
//!   the diagonal closed form, alternating Hölder ascent and the lift of
//!   `l_r`-valued operators to scalar forms;
//! * [`witness`] generators for diagonal, pinned, Hadamard and random sign
//!   families;
//! * [`experiments`] ratio tables, growth probes and the exhaustive search
//!   for the bilinear `(l_2, l_1)` constant.

pub mod error;
pub mod exponents;
pub mod experiments;
pub mod opnorm;
pub mod parallel;
pub mod scalar;
pub mod tensor;
pub mod witness;

pub use error::{Error, Result};
pub use exponents::{ExponentTuple, ExtExp, ProblemSpec};
pub use opnorm::{AscentOptions, Method, OpNormEstimate, VectorValuedOp};
pub use tensor::{CoefficientTensor, Field, MixedNormSpec};
