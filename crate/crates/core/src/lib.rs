#![allow(clippy::needless_range_loop)]
// NaN-rejecting checks read as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Space-time finite elements for quasi-static Biot poroelasticity with a
//! fixed-stress splitting solver.
//!
//! Flow uses mixed `RT_s × Q_s` elements, mechanics continuous `Q_{s+1}`,
//! both on quadrilaterals; time is discretized by cGP(r) or dG(r).

pub mod error;
pub mod fem;
pub mod mesh;
pub mod quadrature;
pub mod scenario;
pub mod solver;
pub mod sparse;
pub mod studies;
pub mod time;

pub use error::{Error, Result};
pub use mesh::{
    build_lshape_mesh, build_rectangle_mesh, refine_uniform, BoundaryTag, Mesh, Point, Rect,
};
pub use scenario::{
    benchmark_scenario, contraction_factor, lame_from_engineering, optimal_tuning,
    BoundaryCondition, BoundarySpec, FlowCondition, MaterialParams, MeshSpec, ScalarField,
    ScenarioConfig, Tuning, VectorField,
};
pub use solver::{
    contraction_estimate, error_norms, run_simulation, Discretization, DivergencePolicy,
    IterationReport, RunMode, RunResult, SlabState, Termination,
};
pub use studies::{best_omega, study, sweep_omega, StudyAxis, StudyRow, SweepRow};
pub use time::{build_cgp_basis, build_dg_basis, TimeScheme, TimeSlabBasis};
