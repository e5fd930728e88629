//! exlab: a desk-scale laboratory for extractor-based memory-sample
//! tradeoffs in learning.
//!
//! The crate builds sign-matrix learning problems, certifies or falsifies
//! their two-source-extractor parameters with exact rational arithmetic,
//! simulates bounded-width branching-program learners, and audits the
//! truncated-path proof machinery numerically on small instances.

pub mod density;
pub mod error;
pub mod extract;
pub mod learner;
pub mod matrix;
pub mod num;
pub mod prng;
pub mod report;
pub mod truncation;

pub use error::{Error, Result};
