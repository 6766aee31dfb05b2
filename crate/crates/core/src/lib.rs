//! Exact and numerical tools for the binary trapdoor channel.
//!
//! * [`channel`]: the channel matrices `P_{n|s0}`, exact inverses and the
//!   exchange symmetry between the two initial states.
//! * [`enumerate`]: all feasible outputs of one input string, with exact
//!   likelihoods.
//! * [`entropy`]: conditional entropy vectors `h`, weighted vectors `ω`,
//!   the closed-form capacity upper bound and its Lagrange weights `d`.
//! * [`optimize`]: Blahut–Arimoto over the probability simplex.
//! * [`fractal`]: the shape representation of `P_{n|s0}` and its IFS.
//! * [`io`]: exact text formats, CSV/JSON/PGM/PNG writers.
//!
//! Matrix and optimization code is generic over the scalar; the aliases
//! below name the instantiations used throughout.

pub mod channel;
pub mod dyadic;
pub mod entropy;
pub mod enumerate;
pub mod error;
pub mod fractal;
pub mod io;
pub mod matrix;
pub mod optimize;
pub mod scalar;
pub mod verify;

pub use channel::{
    build_channel_matrix, disjoint_support_check, exchange_conjugate, invert_channel_matrix,
    invert_two_step, reverse_vector, ChannelMatrix, Limits, State,
};
pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Scalar;

/// Exact square matrix (inverses, products).
pub type DyadicMatrix = Matrix<Dyadic>;
/// Exact channel matrix; the default instantiation.
pub type ExactChannel = ChannelMatrix<Dyadic>;
/// Double-precision channel matrix for numerical work.
pub type FloatChannel = ChannelMatrix<f64>;
/// Single-precision channel matrix.
pub type FloatChannel32 = ChannelMatrix<f32>;
/// Arbitrary rationals, used as an independent exact oracle.
pub type Rational = num_rational::BigRational;
pub type RationalMatrix = Matrix<Rational>;
