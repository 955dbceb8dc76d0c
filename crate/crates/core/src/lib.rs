//! I-projections of a probability measure onto finite intersections of
//! convex sets, computed by cyclic projections with the correction step
//! that makes them converge on non-linear sets.
//!
//! Measures live on a fixed 1-D or 2-D midpoint grid ([`GridSpec`]). The
//! constraint catalog covers moment inequalities and equalities, fixed
//! marginals and marginal stochastic order. [`engine::run`] drives the
//! cyclic algorithm; [`oracle`] holds independent brute-force solvers used
//! to check it.

pub mod constraints;
pub mod dual_solve;
pub mod engine;
pub mod error;
pub mod measure;
pub mod oracle;
pub mod reduce;

pub use constraints::{pava, project, Constraint, DualIncrement, Feasibility, Projection};
pub use dual_solve::{tilt_solve, SignConstraint, TiltProblem, TiltSolution};
pub use engine::{
    adjust, dual_total, error_bound, run, CapPolicy, CycleRecord, Engine, EngineOptions, EngineState, Mode, Problem,
    Report, StepRecord, Termination,
};
pub use error::{Error, Result};
pub use measure::{
    integrate, kl_divergence, log_partition, normalize, Axis, AxisId, DensityVector, DiscreteMeasure, GridSpec,
};
