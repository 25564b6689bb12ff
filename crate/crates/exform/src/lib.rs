//! Exterior calculus on chart domains with boundary.
//!
//! The crate builds and verifies the machinery used to continue
//! differential forms across a boundary: adapted boundary charts, sign-flip
//! reflection of metrics and k-forms, the identities that reflection
//! preserves, vanishing-order estimation in 1-mean, and zero-set dimension
//! analysis for curl eigenfields and harmonic boundary forms.
//!
//! Scans over sample sets run data-parallel on rayon by default; build with
//! `--no-default-features` for the sequential fallback.

pub mod calculus;
pub mod chart;
pub mod domain;
pub mod error;
pub mod expr;
pub mod field;
pub mod index;
pub mod jet;
pub mod order;
pub mod par;
pub mod poly;
pub mod quad;
pub mod reflect;
pub mod report;
pub mod zeros;

pub use error::{Error, Result};
