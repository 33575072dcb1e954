//! Treatment effect estimation with hypernetwork weight sharing.
//!
//! The crate trains classic meta-learners (S, T, DR, RA) and TARNet either
//! the usual way (independent weights per subnetwork) or with a shared
//! hypernetwork that generates every subnetwork's weights from a learned
//! per-network embedding. A synthetic data generator, a PEHE-based
//! evaluation harness, and gradient checking utilities round it out.

pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod hypernet;
pub mod learners;
pub mod nn;
pub mod seeds;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
