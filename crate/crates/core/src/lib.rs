//! Exact separation for single-arc unsplittable flow sets and a root cutting-plane loop for network design.
//!
//! [`separate`] takes one arc's set and a fractional point and returns either a membership
//! verdict or an integral valid inequality the point violates.

pub mod arcset;
pub mod closed_form;
pub mod io;
pub mod knapsack;
pub mod lp;
pub mod netdesign;
pub mod oracle;
pub mod refine;
pub mod rowgen;
pub mod separator;

pub use arcset::{
    ArcSetError, ArcSetInstance, CutInequality, FracPoint, IntCut, Provenance, Verdict, FEAS_TOL, VIOLATION_TOL,
};
pub use closed_form::{CaseId, ClosedFormCase};
pub use refine::{LiftOrder, ReducedCosts, ScalingPolicy};
pub use separator::{separate, SeparationError, SeparationReport, SeparatorOptions, Stage};
