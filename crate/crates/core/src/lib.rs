//! Exact reachability decisions for piecewise affine maps of an interval.
//!
//! Every computation runs on arbitrary-precision rationals. [`query`] is the
//! entry point; [`strategy`] holds the runtime-selectable decision procedures.

pub mod affine_orbit;
pub mod bijection;
pub mod decision;
pub mod error;
pub mod gap;
pub mod lab;
pub mod loop_dsl;
pub mod numerics;
pub mod pam;
pub mod query;
pub mod reduction;
pub mod strategy;

pub use error::{Error, Result};
