//! Time marching and post-processing of whole runs.

use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;
use crate::solver::discretization::Discretization;
use crate::solver::slab::{
    fixed_stress_slab, monolithic_slab, EndState, IterationReport, SlabFields, SlabInputs,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Split,
    Monolithic,
}

/// What to do when the fixed-stress loop fails on a slab.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergencePolicy {
    /// Abort the run with [`Error::Divergence`].
    Abort,
    /// Record the failed report, continue from the monolithic solution of
    /// that slab. Used by parameter sweeps.
    ContinueMonolithic,
}

/// Coefficients of one slab on all dofs (essential values included).
#[derive(Debug, Clone, PartialEq)]
pub struct SlabState {
    pub slab: usize,
    pub t_start: f64,
    pub pressure: Vec<Vec<f64>>,
    pub flux: Vec<Vec<f64>>,
    pub displacement: Vec<Vec<f64>>,
}

/// Fields at `t_n` (the left limit for dG), on all dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub pressure: Vec<f64>,
    pub flux: Vec<f64>,
    pub displacement: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub slabs: Vec<SlabState>,
    /// One per slab; empty in monolithic mode.
    pub reports: Vec<IterationReport>,
    pub snapshots: Vec<Snapshot>,
}

impl RunResult {
    pub fn converged(&self) -> bool {
        self.reports.iter().all(IterationReport::converged)
    }

    /// `Σ_n k_n`.
    pub fn total_iterations(&self) -> usize {
        self.reports.iter().map(|r| r.iterations).sum()
    }

    pub fn max_slab_iterations(&self) -> usize {
        self.reports.iter().map(|r| r.iterations).max().unwrap_or(0)
    }
}

fn full_state(disc: &Discretization, slab: usize, f: &SlabFields) -> SlabState {
    SlabState {
        slab,
        t_start: disc.slab_start(slab),
        pressure: f.pressure.clone(),
        flux: f.flux.iter().map(|q| disc.spaces.flux.expand(q)).collect(),
        displacement: f
            .displacement
            .iter()
            .map(|u| disc.spaces.displacement.expand(u))
            .collect(),
    }
}

/// Marches all slabs of `config`.
pub fn run_simulation(config: &ScenarioConfig, mode: RunMode) -> Result<RunResult> {
    let disc = Discretization::new(config)?;
    run_discretized(&disc, mode, DivergencePolicy::Abort)
}

pub fn run_discretized(
    disc: &Discretization,
    mode: RunMode,
    policy: DivergencePolicy,
) -> Result<RunResult> {
    let mut previous = EndState::zeros(disc);
    let mut result = RunResult {
        slabs: Vec::new(),
        reports: Vec::new(),
        snapshots: Vec::new(),
    };
    for slab in 1..=disc.num_slabs() {
        let inputs = SlabInputs::new(disc, slab, previous);
        let fields = match mode {
            RunMode::Monolithic => monolithic_slab(disc, &inputs).map_err(|e| e.at_slab(slab))?,
            RunMode::Split => match fixed_stress_slab(disc, &inputs) {
                Ok((fields, report)) => {
                    result.reports.push(report);
                    fields
                }
                Err(Error::Divergence { report, .. })
                    if policy == DivergencePolicy::ContinueMonolithic =>
                {
                    log::warn!(
                        "slab {slab}: fixed-stress iteration stopped ({:?} after {} iterations); continuing from the monolithic solution",
                        report.termination,
                        report.iterations
                    );
                    result.reports.push(*report);
                    monolithic_slab(disc, &inputs).map_err(|e| e.at_slab(slab))?
                }
                Err(e) => return Err(e.at_slab(slab)),
            },
        };
        let end = fields.end_state(disc);
        result.snapshots.push(Snapshot {
            time: disc.slab_end(slab),
            pressure: end.pressure.clone(),
            flux: disc.spaces.flux.expand(&end.flux),
            displacement: disc.spaces.displacement.expand(&end.displacement),
        });
        result.slabs.push(full_state(disc, slab, &fields));
        previous = end;
    }
    Ok(result)
}

/// Ratios of successive pressure increments and their geometric mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionEstimate {
    /// `ρ_k = ‖Δp‖_{k+1} / ‖Δp‖_k`, starting at `k = 1`.
    pub ratios: Vec<f64>,
    /// Geometric mean of the ratios from `k = 2` on (all ratios if only one).
    pub mean_ratio: f64,
}

pub fn contraction_estimate(report: &IterationReport) -> Result<ContractionEstimate> {
    if report.iterations < 3 {
        return Err(Error::InsufficientData(format!(
            "slab {} has {} iterations, at least 3 are needed",
            report.slab, report.iterations
        )));
    }
    let ratios = report.pressure_ratios();
    let tail: Vec<f64> = if ratios.len() > 1 {
        ratios[1..].to_vec()
    } else {
        ratios.clone()
    };
    let usable: Vec<f64> = tail
        .iter()
        .copied()
        .filter(|r| r.is_finite() && *r > 0.0)
        .collect();
    let mean_ratio = if usable.is_empty() {
        0.0
    } else {
        (usable.iter().map(|r| r.ln()).sum::<f64>() / usable.len() as f64).exp()
    };
    Ok(ContractionEstimate { ratios, mean_ratio })
}

/// Differences between two runs of the same discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `L²(Ω)` norms of `[p, q, u]` differences at the slab end.
    pub endpoint_l2: [f64; 3],
    /// `L²(I_n; L²(Ω))` norms over the slab.
    pub slab_l2: [f64; 3],
    /// Plain l² norms of the stacked coefficient differences.
    pub coefficient_l2: [f64; 3],
}

fn check_layout(a: &SlabState, b: &SlabState, disc: &Discretization) -> Result<()> {
    let nodes = disc.basis.num_nodes();
    let ok = [&a, &b].iter().all(|s| {
        s.pressure.len() == nodes
            && s.flux.len() == nodes
            && s.displacement.len() == nodes
            && s.pressure.iter().all(|v| v.len() == disc.n_pressure())
            && s.flux
                .iter()
                .all(|v| v.len() == disc.spaces.flux.num_dofs())
            && s.displacement
                .iter()
                .all(|v| v.len() == disc.spaces.displacement.num_dofs())
    });
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "slab states do not match the discretization layout".into(),
        ))
    }
}

fn diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(x, y)| x - y).collect())
        .collect()
}

fn mass_norm2(m: &crate::sparse::SparseMatrix, v: &[f64]) -> f64 {
    m.mul_vec(v)
        .iter()
        .zip(v)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        .max(0.0)
}

/// Mass-matrix weighted norms of `state_a − state_b`.
pub fn error_norms(
    disc: &Discretization,
    state_a: &SlabState,
    state_b: &SlabState,
) -> Result<ErrorNorms> {
    check_layout(state_a, state_b, disc)?;
    let v = &disc.spaces.flux;
    let h = &disc.spaces.displacement;
    let dp = diff(&state_a.pressure, &state_b.pressure);
    let dq: Vec<Vec<f64>> = diff(&state_a.flux, &state_b.flux)
        .iter()
        .map(|x| v.restrict(x))
        .collect();
    let du: Vec<Vec<f64>> = diff(&state_a.displacement, &state_b.displacement)
        .iter()
        .map(|x| h.restrict(x))
        .collect();
    let masses = [
        &disc.pressure_mass,
        &disc.flux_mass,
        &disc.displacement_mass,
    ];
    let fields = [&dp, &dq, &du];
    let phi = disc.basis.end_values();
    let rule = crate::quadrature::gauss_nodes(disc.basis.num_nodes() + 1).expect("nodes >= 1");
    let mut out = ErrorNorms {
        endpoint_l2: [0.0; 3],
        slab_l2: [0.0; 3],
        coefficient_l2: [0.0; 3],
    };
    for k in 0..3 {
        let end = crate::time::combine(fields[k], &phi);
        out.endpoint_l2[k] = mass_norm2(masses[k], &end).sqrt();
        let mut s = 0.0;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            s += w * disc.tau * mass_norm2(masses[k], &disc.basis.evaluate(fields[k], t));
        }
        out.slab_l2[k] = s.sqrt();
        out.coefficient_l2[k] = fields[k]
            .iter()
            .flatten()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
    }
    Ok(out)
}

/// Relative l² difference `‖a − b‖ / max(‖b‖, floor)` of stacked vectors.
pub fn relative_difference(a: &[Vec<f64>], b: &[Vec<f64>], floor: f64) -> f64 {
    let num: f64 = a
        .iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let den: f64 = b.iter().flatten().map(|y| y * y).sum();
    num.sqrt() / den.sqrt().max(floor)
}
