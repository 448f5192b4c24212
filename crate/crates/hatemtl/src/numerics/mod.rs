//! Dense-tensor reverse-mode automatic differentiation at desk scale.
//!
//! All tensors are two-dimensional, 64-bit, row-major. A [`Tape`] records
//! every primitive applied; [`Tape::backward`] accumulates gradients into
//! per-node buffers which callers copy back into their parameter stores.
//! [`adam::AdamState`] implements the bias-corrected Adam update and
//! [`check::finite_diff_check`] is the central-difference gradient oracle.

pub mod adam;
pub mod check;
pub mod tape;

pub use adam::{AdamConfig, AdamState};
pub use check::finite_diff_check;
pub use tape::{ParamTensor, Tape, Var};
