//! Polynomial optimization with the moment-SOS lower-bound hierarchy, the
//! SOS-density upper-bound hierarchy, and orthonormal-basis (signed density,
//! Christoffel-Darboux kernel) views of the relaxation solutions.
//!
//! Layers, bottom up: [`polyring`] (polynomials), [`measures`] (reference
//! measures and moments), [`orthobasis`] (orthonormal polynomials),
//! [`momentmat`] (moment and localizing matrices), [`sdp`] (interior-point
//! solver), [`hierarchy`] (the bounds) and [`cli`] (batch runs).

// `!(a < b)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod hierarchy;
pub mod measures;
pub mod momentmat;
pub mod orthobasis;
pub mod polyring;
pub mod sdp;
