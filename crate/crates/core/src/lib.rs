//! Adder-based approximate quantum Fourier transform.
//!
//! The crate builds the AQFT circuit from the textbook QFT through a fixed
//! sequence of rewrites, checks it by simulation at small widths, and counts
//! its Clifford+T cost at any width.

pub mod adders;
pub mod analysis;
pub mod angle;
pub mod circuit;
pub mod dag;
pub mod error;
pub mod json;
pub mod pipeline;
pub mod qasm;
pub mod qft;
pub mod sim;

pub use angle::{angle_add, classify_rz, DyadicAngle, RzClass};
pub use circuit::{Circuit, Gate, GateKind, Register, Role, Tag};
pub use dag::{layer_dag, t_depth, t_stages, LayeredDag, SynthModel};
pub use error::{Error, Result};
