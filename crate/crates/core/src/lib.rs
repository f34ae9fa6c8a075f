//! RF matching and leaf-antenna design toolkit.
//!
//! Conventions: time dependence e^{+jωt}, so an inductor is +jωL and a
//! capacitor −j/(ωC). SI units throughout except leaf geometry (mm).

// `!(x > 0.0)` is used on purpose so NaN falls into the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discrete;
pub mod ladder;
pub mod leafgeom;
pub mod linksim;
pub mod rfcore;
pub mod synth;
pub mod touchstone;
pub mod units;
