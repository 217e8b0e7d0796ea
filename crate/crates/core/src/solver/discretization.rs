//! Spaces, operators and factorizations shared by every slab of a run.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use crate::error::Result;
use crate::fem::{
    assemble_body_force, assemble_boundary_pressure, assemble_coupling, assemble_displacement_mass,
    assemble_div, assemble_elasticity, assemble_flux_mass, assemble_pressure_mass, assemble_source,
    assemble_traction, DisplacementConstraints, Spaces,
};
use crate::mesh::{BoundaryTag, Mesh};
use crate::scenario::{FlowCondition, ScenarioConfig};
use crate::sparse::{BlockAssembler, DirectSolver, SparseMatrix};
use crate::time::TimeSlabBasis;

/// Right-hand sides at one time instant, restricted to free dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLoads {
    /// `⟨f, w⟩`.
    pub flow: Vec<f64>,
    /// `−∫ p_D v·n` from prescribed boundary pressures.
    pub darcy: Vec<f64>,
    /// Tractions plus `ρ_b ⟨g, z⟩`.
    pub mechanics: Vec<f64>,
}

/// Everything about a scenario that does not change from slab to slab.
pub struct Discretization {
    pub config: ScenarioConfig,
    pub mesh: Arc<Mesh>,
    pub spaces: Spaces,
    pub basis: TimeSlabBasis,
    pub tau: f64,
    pub tuning: f64,
    /// Pressure mass `⟨p, w⟩`.
    pub pressure_mass: SparseMatrix,
    /// `⟨K⁻¹q, v⟩` on free flux dofs.
    pub flux_mass: SparseMatrix,
    /// `⟨∇·v, w⟩`, pressure rows by free flux columns.
    pub divergence: SparseMatrix,
    /// Elasticity on free displacement dofs.
    pub elasticity: SparseMatrix,
    /// `b⟨p, ∇·z⟩`, free displacement rows by pressure columns.
    pub coupling: SparseMatrix,
    /// `⟨u, z⟩` on free displacement dofs.
    pub displacement_mass: SparseMatrix,
    mechanics_solver: OnceLock<DirectSolver>,
    flow_solver: OnceLock<DirectSolver>,
    monolithic_solver: OnceLock<DirectSolver>,
}

impl std::fmt::Debug for Discretization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Discretization")
            .field("scheme", &self.basis.scheme)
            .field("cells", &self.mesh.num_cells())
            .field("pressure_dofs", &self.n_pressure())
            .field("flux_dofs", &self.n_flux())
            .field("displacement_dofs", &self.n_displacement())
            .finish()
    }
}

fn cached(
    cell: &OnceLock<DirectSolver>,
    build: impl FnOnce() -> Result<DirectSolver>,
) -> Result<&DirectSolver> {
    if let Some(s) = cell.get() {
        return Ok(s);
    }
    let solver = build()?;
    Ok(cell.get_or_init(|| solver))
}

impl Discretization {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let mesh = Arc::new(config.mesh.build()?);
        mesh.validate(config.space_degree + 5)?;
        let tags = mesh.tags();
        for tag in &tags {
            if !config.boundary.contains_key(tag) {
                return Err(crate::error::Error::InvalidBoundarySpec(format!(
                    "no boundary condition given for tag {tag}"
                )));
            }
        }
        let no_flow: BTreeSet<BoundaryTag> = config
            .boundary
            .iter()
            .filter(|(_, b)| matches!(b.flow, FlowCondition::NoFlow))
            .map(|(t, _)| t.clone())
            .collect();
        let dirichlet: DisplacementConstraints = config
            .boundary
            .iter()
            .filter(|(_, b)| b.fixed.iter().any(|&f| f))
            .map(|(t, b)| (t.clone(), b.fixed))
            .collect();
        let spaces = Spaces::new(mesh.clone(), config.space_degree, &no_flow, &dirichlet)?;
        let basis = config.scheme.basis()?;
        let m = &config.material;
        let (w, v, h) = (&spaces.pressure, &spaces.flux, &spaces.displacement);
        let all_w: Vec<usize> = (0..w.num_dofs()).collect();
        let pressure_mass = assemble_pressure_mass(w);
        let flux_mass =
            assemble_flux_mass(v, m.permeability)?.restrict(v.free_dofs(), v.free_dofs());
        let divergence = assemble_div(v, w).restrict(&all_w, v.free_dofs());
        let elasticity =
            assemble_elasticity(h, m.mu, m.lambda).restrict(h.free_dofs(), h.free_dofs());
        let coupling = assemble_coupling(w, h, m.biot_coefficient).restrict(h.free_dofs(), &all_w);
        let displacement_mass =
            assemble_displacement_mass(h).restrict(h.free_dofs(), h.free_dofs());
        Ok(Self {
            tau: config.time_step,
            tuning: config.tuning_value(),
            config: config.clone(),
            mesh,
            spaces,
            basis,
            pressure_mass,
            flux_mass,
            divergence,
            elasticity,
            coupling,
            displacement_mass,
            mechanics_solver: OnceLock::new(),
            flow_solver: OnceLock::new(),
            monolithic_solver: OnceLock::new(),
        })
    }

    pub fn n_pressure(&self) -> usize {
        self.spaces.pressure.num_dofs()
    }

    pub fn n_flux(&self) -> usize {
        self.spaces.flux.num_free()
    }

    pub fn n_displacement(&self) -> usize {
        self.spaces.displacement.num_free()
    }

    pub fn num_slabs(&self) -> usize {
        self.config.num_slabs()
    }

    pub fn slab_start(&self, slab: usize) -> f64 {
        self.slab_end(slab - 1)
    }

    pub fn slab_end(&self, slab: usize) -> f64 {
        slab as f64 * self.tau
    }

    /// Coefficient of the storage terms for unknown nodes `i`, `j`.
    pub(crate) fn storage(&self, i: usize, j: usize) -> f64 {
        self.basis.storage_matrix()[(i, j)]
    }

    pub fn mechanics_solver(&self) -> Result<&DirectSolver> {
        cached(&self.mechanics_solver, || {
            DirectSolver::new(
                self.elasticity.clone(),
                self.config.tol_mechanics,
                "mechanics",
            )
        })
    }

    /// Block system of the flow half step over all unknown time nodes:
    /// `[P_i | Q_i]` with rows
    /// `(1/M + L) Σ_j T_ij Mp P_j + τ w_i B Q_i` and `−Bᵀ P_i + Mq Q_i`.
    pub fn flow_solver(&self) -> Result<&DirectSolver> {
        cached(&self.flow_solver, || {
            let (nw, nv) = (self.n_pressure(), self.n_flux());
            let unk: Vec<usize> = self.basis.unknown_nodes().collect();
            let r = unk.len();
            let storage = 1.0 / self.config.material.biot_modulus + self.tuning;
            let mut asm = BlockAssembler::new(r * (nw + nv), r * (nw + nv));
            let q0 = r * nw;
            for (a, &i) in unk.iter().enumerate() {
                for (c, &j) in unk.iter().enumerate() {
                    asm.add(
                        a * nw,
                        c * nw,
                        storage * self.storage(i, j),
                        &self.pressure_mass,
                    );
                }
                asm.add(
                    a * nw,
                    q0 + a * nv,
                    self.tau * self.basis.test_weights[i],
                    &self.divergence,
                );
                asm.add_transpose(q0 + a * nv, a * nw, -1.0, &self.divergence);
                asm.add(q0 + a * nv, q0 + a * nv, 1.0, &self.flux_mass);
            }
            DirectSolver::new(asm.finish(), self.config.tol_flow, "flow")
        })
    }

    /// Fully coupled block system `[P_i | Q_i | U_i]` without the tuning term.
    pub fn monolithic_solver(&self) -> Result<&DirectSolver> {
        cached(&self.monolithic_solver, || {
            let (nw, nv, nh) = (self.n_pressure(), self.n_flux(), self.n_displacement());
            let unk: Vec<usize> = self.basis.unknown_nodes().collect();
            let r = unk.len();
            let inv_m = 1.0 / self.config.material.biot_modulus;
            let n = r * (nw + nv + nh);
            let (q0, u0) = (r * nw, r * (nw + nv));
            let mut asm = BlockAssembler::new(n, n);
            for (a, &i) in unk.iter().enumerate() {
                for (c, &j) in unk.iter().enumerate() {
                    let t = self.storage(i, j);
                    asm.add(a * nw, c * nw, inv_m * t, &self.pressure_mass);
                    asm.add_transpose(a * nw, u0 + c * nh, t, &self.coupling);
                }
                asm.add(
                    a * nw,
                    q0 + a * nv,
                    self.tau * self.basis.test_weights[i],
                    &self.divergence,
                );
                asm.add_transpose(q0 + a * nv, a * nw, -1.0, &self.divergence);
                asm.add(q0 + a * nv, q0 + a * nv, 1.0, &self.flux_mass);
                asm.add(u0 + a * nh, a * nw, -1.0, &self.coupling);
                asm.add(u0 + a * nh, u0 + a * nh, 1.0, &self.elasticity);
            }
            let tol = self.config.tol_flow.max(self.config.tol_mechanics);
            DirectSolver::new(asm.finish(), tol, "monolithic")
        })
    }

    /// Source, boundary pressure, traction and gravity loads at time `t`.
    pub fn loads(&self, t: f64) -> NodeLoads {
        let cfg = &self.config;
        let (w, v, h) = (
            &self.spaces.pressure,
            &self.spaces.flux,
            &self.spaces.displacement,
        );
        let flow = if cfg.source.is_zero() {
            vec![0.0; w.num_dofs()]
        } else {
            assemble_source(w, &|x| cfg.source.eval(x, t))
        };
        let mut darcy = vec![0.0; v.num_dofs()];
        let mut mech = if cfg.gravity.is_zero() || cfg.material.bulk_density == 0.0 {
            vec![0.0; h.num_dofs()]
        } else {
            let rho = cfg.material.bulk_density;
            assemble_body_force(h, &|x| {
                let g = cfg.gravity.eval(x, t);
                [rho * g[0], rho * g[1]]
            })
        };
        let mesh = &self.mesh;
        for (tag, bc) in &cfg.boundary {
            let pick = |f: usize| mesh.facets[f].tag.as_ref() == Some(tag);
            if let FlowCondition::Pressure(p) = &bc.flow {
                if !p.is_zero() {
                    let g = assemble_boundary_pressure(v, &pick, &|x| p.eval(x, t));
                    darcy.iter_mut().zip(g).for_each(|(a, b)| *a += b);
                }
            }
            if !bc.traction.is_zero() && !(bc.fixed[0] && bc.fixed[1]) {
                let g = assemble_traction(h, &pick, &|x, _| bc.traction.eval(x, t));
                mech.iter_mut().zip(g).for_each(|(a, b)| *a += b);
            }
        }
        NodeLoads {
            flow,
            darcy: v.restrict(&darcy),
            mechanics: h.restrict(&mech),
        }
    }
}
