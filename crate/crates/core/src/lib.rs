//! Classicality analysis of binarised multi-outcome measurements.
//!
//! Replacing an `N`-outcome measurement by `N` click/no-click detectors
//! turns a behavior into one with more inputs and binary outcomes. This
//! crate builds such behaviors (Bell, prepare-and-measure, steering), mixes
//! them with white noise, and computes the largest visibility that still
//! admits a classical model, together with a verifiable dual certificate.

pub mod classicality;
pub mod constructions;
pub mod error;
pub mod qcore;
pub mod scenarios;

pub use error::{Error, Result};
