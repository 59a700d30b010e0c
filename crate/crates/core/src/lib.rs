//! Lab for the binary adversarial wiretap channel (AWTC).
//!
//! An AWTC adversary reads an arbitrary `rho_r` fraction of the transmitted
//! codeword and injects errors on a `rho_w` fraction of positions, knowing
//! only the code and the symbols it read. This crate provides:
//!
//! - [`bounds`]: the closed-form capacity bound calculator (achievable rate,
//!   converse, and the `f(p)` minimization behind it),
//! - [`code`]: bit-packed words, random codebooks and the binned stochastic
//!   code, nearest-neighbor decoding, Hamming-geometry queries,
//! - [`channel`]: adversary views, bounded-weight error application, and the
//!   BSC/BEC comparison channels,
//! - [`adversary`]: pluggable limited-view adversary strategies,
//! - [`secrecy`]: exact desk-scale equivocation, consistency counts, the
//!   counting bound, soft-covering divergence and the semantic-secrecy
//!   surrogate,
//! - [`harness`]: reproducible Monte Carlo experiments and file I/O.
//!
//! The bound math in [`bounds`] is generic over the scalar type via
//! `num_traits::Float`; everything downstream of a sampled codebook works in
//! `f64`.

pub mod adversary;
pub mod bounds;
pub mod channel;
pub mod code;
pub mod error;
pub mod harness;
pub mod secrecy;

pub use error::{Error, Result};

/// Default scalar for bound calculations.
pub type Real = f64;

/// `ChannelParams` at the default scalar.
pub type ChannelParams = bounds::ChannelParams<Real>;
/// `BoundsResult` at the default scalar.
pub type BoundsResult = bounds::BoundsResult<Real>;
