//! Hidden-layer width bounds for single-hidden-layer sigmoid networks.
//!
//! The crate has two halves. [`bounds`] turns a sample count `r` and an
//! attribute count `n` into a finite bracket on the hidden width using
//! VC-dimension bounds. The rest of the crate exists to check that bracket
//! empirically: a two-layer sigmoid network ([`network`]), full-batch
//! gradient descent ([`train`]), curve and error measures ([`metrics`]),
//! UCI-style dataset ingestion ([`dataset`]) and the sweep / shatter
//! harness ([`harness`]).
//!
//! ```
//! use vcwidth::bounds::width_range;
//!
//! let b = width_range(14, 214).unwrap();
//! assert_eq!((b.lo, b.hi), (1, 31));
//! ```
//!
//! Independent jobs (sweep rows, shatter labelings) run on rayon when the
//! `parallel` feature is enabled and fall back to a sequential loop
//! otherwise; see [`exec`].

pub mod bounds;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod harness;
pub mod metrics;
pub mod network;
pub mod train;

pub use error::{Error, Result};
