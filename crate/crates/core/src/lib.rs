//! Numerical laboratory for the dynamical invariants of convex Anosov
//! representations of free groups: spectral radii, entropy, intersection,
//! renormalized intersection, cross-ratios and the pressure form.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod crossratio;
pub mod error;
pub mod families;
pub mod functional;
pub mod group;
pub mod kleinian;
pub mod orbit;
pub mod par;
pub mod polynomial;
pub mod rep;
pub mod spectral;
pub mod stats;
pub mod transfer;

pub use error::{ErrorKind, LabError, Result};
