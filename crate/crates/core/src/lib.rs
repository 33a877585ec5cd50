//! Finite-dimensional operator-valued frames and fusion frames: duals,
//! subspace gaps and perturbation bounds.

pub mod error;
pub mod fusion;
pub mod gap;
pub mod io;
pub mod linalg;
pub mod ovframe;
pub mod perturb;
pub mod random;
pub mod reproduce;
pub mod sweep;

pub use error::{FrameError, Result};
pub use linalg::{Matrix, Subspace, Tolerance, C64};
pub use ovframe::{DualParam, FrameReport, OvSequence};
