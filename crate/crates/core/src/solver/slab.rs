//! One time slab: the two half steps, the fixed-stress loop and the
//! monolithic solve.

use crate::error::{Error, Result};
use crate::solver::discretization::{Discretization, NodeLoads};

/// One coefficient vector per time node.
type NodeValues = Vec<Vec<f64>>;

/// Increments above this are treated as a blown-up iteration.
const BLOWUP: f64 = 1e150;

/// Field values at the end of a slab, on free dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct EndState {
    pub pressure: Vec<f64>,
    pub flux: Vec<f64>,
    pub displacement: Vec<f64>,
}

impl EndState {
    pub fn zeros(disc: &Discretization) -> Self {
        Self {
            pressure: vec![0.0; disc.n_pressure()],
            flux: vec![0.0; disc.n_flux()],
            displacement: vec![0.0; disc.n_displacement()],
        }
    }
}

/// Time-node coefficients `{P^j, Q^j, U^j}`, `j = 0..=r`, on free dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabFields {
    pub pressure: Vec<Vec<f64>>,
    pub flux: Vec<Vec<f64>>,
    pub displacement: Vec<Vec<f64>>,
}

impl SlabFields {
    /// Every node set to the given state.
    pub fn constant(state: &EndState, nodes: usize) -> Self {
        Self {
            pressure: vec![state.pressure.clone(); nodes],
            flux: vec![state.flux.clone(); nodes],
            displacement: vec![state.displacement.clone(); nodes],
        }
    }

    /// Evaluation at the right end of the slab.
    pub fn end_state(&self, disc: &Discretization) -> EndState {
        let phi = disc.basis.end_values();
        EndState {
            pressure: crate::time::combine(&self.pressure, &phi),
            flux: crate::time::combine(&self.flux, &phi),
            displacement: crate::time::combine(&self.displacement, &phi),
        }
    }
}

/// Data that enters a slab from outside: the previous end state and the
/// loads at every time node.
#[derive(Debug, Clone)]
pub struct SlabInputs {
    pub slab: usize,
    pub previous: EndState,
    pub loads: Vec<NodeLoads>,
}

impl SlabInputs {
    pub fn new(disc: &Discretization, slab: usize, previous: EndState) -> Self {
        let t0 = disc.slab_start(slab);
        let loads = (0..disc.basis.num_nodes())
            .map(|j| disc.loads(disc.basis.node_time(j, t0, disc.tau)))
            .collect();
        Self {
            slab,
            previous,
            loads,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
    /// Non-finite or exploding increments.
    Diverged,
}

/// Convergence history of the fixed-stress loop on one slab.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub slab: usize,
    pub iterations: usize,
    /// l² norms of the stacked increments `[p, q, u]`, one entry per iteration.
    pub increments: Vec<[f64; 3]>,
    /// `L²(I_n; L²(Ω))` norm of the pressure increment, evaluated with the
    /// slab quadrature and the pressure mass matrix.
    pub weighted_pressure_increments: Vec<f64>,
    pub termination: Termination,
}

impl IterationReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn final_increments(&self) -> [f64; 3] {
        self.increments.last().copied().unwrap_or([0.0; 3])
    }

    /// `‖Δp‖_{k+1} / ‖Δp‖_k` for consecutive iterations.
    pub fn pressure_ratios(&self) -> Vec<f64> {
        self.increments
            .windows(2)
            .map(|w| w[1][0] / w[0][0])
            .collect()
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    if a != 0.0 {
        y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
    }
}

fn coupling_transpose(disc: &Discretization, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; disc.n_pressure()];
    disc.coupling.mul_transpose_vec_add(1.0, u, &mut out);
    out
}

/// Known terms of the pressure rows that do not involve the current
/// iterate: sources, the cGP start values, and the dG upwind traces.
fn pressure_rhs_known(
    disc: &Discretization,
    inputs: &SlabInputs,
    start: &SlabFields,
    i: usize,
) -> Vec<f64> {
    let basis = &disc.basis;
    let inv_m = 1.0 / disc.config.material.biot_modulus;
    let mut rhs = vec![0.0; disc.n_pressure()];
    axpy(
        &mut rhs,
        disc.tau * basis.test_weights[i],
        &inputs.loads[i].flow,
    );
    let unknown = basis.unknown_nodes();
    for j in (0..basis.num_nodes()).filter(|j| !unknown.contains(j)) {
        let t = disc.storage(i, j);
        axpy(
            &mut rhs,
            -inv_m * t,
            &disc.pressure_mass.mul_vec(&start.pressure[j]),
        );
        axpy(
            &mut rhs,
            -t,
            &coupling_transpose(disc, &start.displacement[j]),
        );
    }
    if let Some(gamma) = &basis.gamma {
        let prev = &inputs.previous;
        axpy(
            &mut rhs,
            gamma[i] * inv_m,
            &disc.pressure_mass.mul_vec(&prev.pressure),
        );
        axpy(
            &mut rhs,
            gamma[i],
            &coupling_transpose(disc, &prev.displacement),
        );
    }
    rhs
}

/// Solves the flow problem of all unknown time nodes for the given
/// displacement iterate; the tuning term uses the pressure iterate.
/// Returns `(pressure, flux)` for every node, known nodes copied from
/// `iterate`.
pub fn flow_half_step(
    disc: &Discretization,
    inputs: &SlabInputs,
    iterate: &SlabFields,
) -> Result<(NodeValues, NodeValues)> {
    let (nw, nv) = (disc.n_pressure(), disc.n_flux());
    let unk: Vec<usize> = disc.basis.unknown_nodes().collect();
    let r = unk.len();
    let tuning = disc.tuning;
    let mp_p: Vec<Vec<f64>> = iterate
        .pressure
        .iter()
        .map(|p| disc.pressure_mass.mul_vec(p))
        .collect();
    let ct_u: Vec<Vec<f64>> = unk
        .iter()
        .map(|&j| coupling_transpose(disc, &iterate.displacement[j]))
        .collect();
    let mut rhs = vec![0.0; r * (nw + nv)];
    for (a, &i) in unk.iter().enumerate() {
        let known = pressure_rhs_known(disc, inputs, iterate, i);
        let block = &mut rhs[a * nw..(a + 1) * nw];
        block.copy_from_slice(&known);
        for (c, &j) in unk.iter().enumerate() {
            let t = disc.storage(i, j);
            axpy(block, tuning * t, &mp_p[j]);
            axpy(block, -t, &ct_u[c]);
        }
        rhs[r * nw + a * nv..r * nw + (a + 1) * nv].copy_from_slice(&inputs.loads[i].darcy);
    }
    let x = disc.flow_solver()?.solve(&rhs)?;
    let mut p = iterate.pressure.clone();
    let mut q = iterate.flux.clone();
    for (a, &i) in unk.iter().enumerate() {
        p[i] = x[a * nw..(a + 1) * nw].to_vec();
        q[i] = x[r * nw + a * nv..r * nw + (a + 1) * nv].to_vec();
    }
    Ok((p, q))
}

/// Elasticity at each unknown time node, loaded by `b⟨P^i, ∇·z⟩` and the
/// boundary and body loads; nodes are independent of each other.
pub fn mechanics_half_step(
    disc: &Discretization,
    inputs: &SlabInputs,
    pressure: &[Vec<f64>],
    known: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let solver = disc.mechanics_solver()?;
    let mut u = known.to_vec();
    for i in disc.basis.unknown_nodes() {
        let mut rhs = inputs.loads[i].mechanics.clone();
        disc.coupling.mul_vec_add(1.0, &pressure[i], &mut rhs);
        u[i] = solver.solve(&rhs)?;
    }
    Ok(u)
}

fn stacked_diff(disc: &Discretization, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    disc.basis
        .unknown_nodes()
        .flat_map(|j| a[j].iter().zip(&b[j]).map(|(x, y)| (x - y) * (x - y)))
        .sum::<f64>()
        .sqrt()
}

fn weighted_pressure_diff(disc: &Discretization, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    // L²(I_n; L²(Ω)) norm by a Gauss rule on the slab.
    let rule = crate::quadrature::gauss_nodes(disc.basis.num_nodes()).expect("nodes >= 1");
    let diff: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(x, y)| x - y).collect())
        .collect();
    let mut sum = 0.0;
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        let d = disc.basis.evaluate(&diff, s);
        let md = disc.pressure_mass.mul_vec(&d);
        sum += w * disc.tau * d.iter().zip(&md).map(|(x, y)| x * y).sum::<f64>();
    }
    sum.max(0.0).sqrt()
}

/// Fixed-stress iteration on one slab, starting from the previous end state
/// extended constantly in time. Convergence is checked from the second
/// iteration on; increments are absolute l² norms over all unknown nodes.
pub fn fixed_stress_slab(
    disc: &Discretization,
    inputs: &SlabInputs,
) -> Result<(SlabFields, IterationReport)> {
    let nodes = disc.basis.num_nodes();
    let tol = disc.config.tol_fixed;
    let mut current = SlabFields::constant(&inputs.previous, nodes);
    let mut report = IterationReport {
        slab: inputs.slab,
        iterations: 0,
        increments: Vec::new(),
        weighted_pressure_increments: Vec::new(),
        termination: Termination::MaxIters,
    };
    for k in 1..=disc.config.max_fixed_iters {
        let (p, q) = flow_half_step(disc, inputs, &current)?;
        let u = mechanics_half_step(disc, inputs, &p, &current.displacement)?;
        let inc = [
            stacked_diff(disc, &p, &current.pressure),
            stacked_diff(disc, &q, &current.flux),
            stacked_diff(disc, &u, &current.displacement),
        ];
        report
            .weighted_pressure_increments
            .push(weighted_pressure_diff(disc, &p, &current.pressure));
        report.increments.push(inc);
        report.iterations = k;
        current = SlabFields {
            pressure: p,
            flux: q,
            displacement: u,
        };
        if inc.iter().any(|v| !v.is_finite() || *v > BLOWUP) {
            report.termination = Termination::Diverged;
            break;
        }
        if k >= 2 && inc.iter().all(|&v| v < tol) {
            report.termination = Termination::Converged;
            break;
        }
    }
    log::debug!(
        "slab {}: {} iterations, {:?}, final increments {:?}",
        inputs.slab,
        report.iterations,
        report.termination,
        report.final_increments()
    );
    if report.converged() {
        Ok((current, report))
    } else {
        Err(Error::Divergence {
            slab: inputs.slab,
            report: Box::new(report),
        })
    }
}

/// Solves the coupled flow and mechanics system of one slab directly.
pub fn monolithic_slab(disc: &Discretization, inputs: &SlabInputs) -> Result<SlabFields> {
    let (nw, nv, nh) = (disc.n_pressure(), disc.n_flux(), disc.n_displacement());
    let unk: Vec<usize> = disc.basis.unknown_nodes().collect();
    let r = unk.len();
    let start = SlabFields::constant(&inputs.previous, disc.basis.num_nodes());
    let (q0, u0) = (r * nw, r * (nw + nv));
    let mut rhs = vec![0.0; r * (nw + nv + nh)];
    for (a, &i) in unk.iter().enumerate() {
        rhs[a * nw..(a + 1) * nw].copy_from_slice(&pressure_rhs_known(disc, inputs, &start, i));
        rhs[q0 + a * nv..q0 + (a + 1) * nv].copy_from_slice(&inputs.loads[i].darcy);
        rhs[u0 + a * nh..u0 + (a + 1) * nh].copy_from_slice(&inputs.loads[i].mechanics);
    }
    let x = disc.monolithic_solver()?.solve(&rhs)?;
    let mut out = start;
    for (a, &i) in unk.iter().enumerate() {
        out.pressure[i] = x[a * nw..(a + 1) * nw].to_vec();
        out.flux[i] = x[q0 + a * nv..q0 + (a + 1) * nv].to_vec();
        out.displacement[i] = x[u0 + a * nh..u0 + (a + 1) * nh].to_vec();
    }
    Ok(out)
}
