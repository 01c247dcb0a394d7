//! Material-point-method simulation of knife cutting on deformable food solids,
//! plus the planning, safety and instruction tooling used to generate cutting
//! episodes.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contact;
pub mod cutting;
pub mod error;
pub mod harness;
pub mod instructions;
pub mod mpm;
pub mod planner;
pub mod safety;

pub use error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
