//! ADMM decoding of non-binary LDPC codes over GF(2^m).
//!
//! Field elements are embedded into real vectors (see [`embedding`]); linear
//! programming decoding then runs over a relaxed code polytope described by
//! simplex and parity-polytope constraints. Two decoders are provided:
//!
//! * [`decoder_admm_lp`]: the LP decoder with a closed-form x-update.
//! * [`decoder_penalized`]: penalized decoding with an l2 penalty under the
//!   constant-weight embedding.
//!
//! [`sim`] runs Monte-Carlo error-rate simulations over an AWGN channel and
//! [`oracle`] holds the brute-force references used by the tests.

pub mod channel;
pub mod code_model;
pub mod embedding;
pub mod gf2m;
pub mod decoder_admm_lp;
pub mod decoder_penalized;
pub mod projections;
pub mod sim;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
