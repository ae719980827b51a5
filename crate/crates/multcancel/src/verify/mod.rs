//! Verification harnesses: the moment identity, the cancellation ↔
//! vanishing-moments equivalence, Hardy maximal diagnostics, and the
//! weak-convergence demonstration.

pub mod equivalence;
pub mod maximal;
pub mod moments;
pub mod weakconv;

pub use equivalence::{equivalence_harness, holder_exponents, EquivalenceReport, MomentEntry};
pub use maximal::{hp_quasinorm, maximal, MaximalSpec};
pub use moments::{
    identity_check, moment_lhs, moment_passes, moment_rhs, moment_scale, MomentReport, MomentSide,
    QuadSpec, IDENTITY_REL_TOL,
};
pub use weakconv::{weakconv_demo, WeakConvReport};
