//! Benchmark fixtures shared by the criterion benches.

use porosplit_core::{benchmark_scenario, ScenarioConfig};

/// L-shape benchmark at the given level with the lowest-order dG(0) scheme.
pub fn lshape(level: usize) -> ScenarioConfig {
    benchmark_scenario(level, 0.01, "dG(0)".parse().expect("scheme"), 0, 1.0)
        .expect("benchmark config")
}
