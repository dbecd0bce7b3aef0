//! Minwise and b-bit minwise hashing for large-scale linear learning.
//!
//! Sparse binary sets are sketched with `k` minwise hashes, each truncated to
//! its lowest `b` bits and one-hot expanded into a `2^b * k` dimensional
//! binary vector that linear SVMs and logistic regression consume directly.
//! Random projections and sign-hashed buckets are provided for comparison.

pub mod codec;
pub mod data;
pub mod error;
pub mod experiment;
pub mod learner;
pub mod projection;
pub mod rng;
pub mod sketch;

pub use error::{Error, Result};
