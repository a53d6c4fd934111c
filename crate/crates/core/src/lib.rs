//! Finite-dimensional verification toolkit for `Z₂ⁿ`-graded Lie theory:
//! sign calculus, color Lie algebras, graded adjoints, the enveloping
//! monoid with involution, extension of pre-representations, and the
//! GNS correspondence between cyclic unitary representations and
//! positive-definite functions.

pub mod catalog;
pub mod color_lie;
pub mod enveloping;
pub mod error;
pub mod gns;
pub mod graded_linear;
pub mod grading;
pub mod hc_rep;
pub mod linalg;
pub mod report;

pub use error::{Error, Result};
