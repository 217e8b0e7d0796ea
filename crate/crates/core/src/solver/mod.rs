//! Fixed-stress splitting, the monolithic reference solve and time marching.

mod discretization;
mod run;
mod slab;

pub use discretization::{Discretization, NodeLoads};
pub use run::{
    contraction_estimate, error_norms, relative_difference, run_discretized, run_simulation,
    ContractionEstimate, DivergencePolicy, ErrorNorms, RunMode, RunResult, SlabState, Snapshot,
};
pub use slab::{
    fixed_stress_slab, flow_half_step, mechanics_half_step, monolithic_slab, EndState,
    IterationReport, SlabFields, SlabInputs, Termination,
};
