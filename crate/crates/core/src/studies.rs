//! Parameter sweeps, robustness studies and manufactured-solution
//! convergence runs.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{displacement_l2_error, flux_l2_error, pressure_l2_error};
use crate::mesh::{BoundaryTag, Point, Rect};
use crate::scenario::{
    optimal_tuning, BoundaryCondition, BoundarySpec, FlowCondition, MaterialParams, MeshSpec,
    ScalarField, ScenarioConfig, Tuning, VectorField,
};
use crate::solver::{run_discretized, Discretization, DivergencePolicy, RunMode, RunResult};
use crate::time::TimeScheme;

/// One run of an ω-sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega: f64,
    pub tuning: f64,
    pub total_iters: usize,
    pub max_slab_iters: usize,
    pub converged: bool,
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker threads: {e}")))
}

/// Split run that keeps going past slabs where the iteration fails.
pub fn split_run(config: &ScenarioConfig) -> Result<RunResult> {
    let disc = Discretization::new(config)?;
    run_discretized(&disc, RunMode::Split, DivergencePolicy::ContinueMonolithic)
}

fn sweep_row(config: &ScenarioConfig, omega: f64) -> Result<SweepRow> {
    let result = split_run(config)?;
    Ok(SweepRow {
        omega,
        tuning: config.tuning_value(),
        total_iters: result.total_iterations(),
        max_slab_iters: result.max_slab_iterations(),
        converged: result.converged(),
    })
}

/// Runs `base` once per ω (tuning `ω · b²/(2λ)`), at most `jobs` at a time.
/// Rows come back sorted by ω.
pub fn sweep_omega(base: &ScenarioConfig, omegas: &[f64], jobs: usize) -> Result<Vec<SweepRow>> {
    if omegas.is_empty() {
        return Err(Error::InvalidInput("empty omega list".into()));
    }
    let configs: Vec<(f64, ScenarioConfig)> = omegas
        .iter()
        .map(|&w| {
            let mut c = base.clone();
            c.tuning = Tuning::Relative(w);
            c.validate().map(|_| (w, c))
        })
        .collect::<Result<_>>()?;
    let mut rows = thread_pool(jobs)?.install(|| {
        configs
            .par_iter()
            .map(|(w, c)| sweep_row(c, *w))
            .collect::<Result<Vec<_>>>()
    })?;
    rows.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    Ok(rows)
}

/// ω with the fewest total iterations among converged rows; ties go to the
/// smaller ω.
pub fn best_omega(rows: &[SweepRow]) -> Option<&SweepRow> {
    rows.iter().filter(|r| r.converged).min_by(|a, b| {
        a.total_iters
            .cmp(&b.total_iters)
            .then(a.omega.total_cmp(&b.omega))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyAxis {
    MeshLevel,
    TimeStep,
    SpaceDegree,
    TimeScheme,
}

impl FromStr for StudyAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "meshlevel" | "mesh" | "level" => Ok(StudyAxis::MeshLevel),
            "timestep" | "tau" | "step" => Ok(StudyAxis::TimeStep),
            "spacedegree" | "degree" => Ok(StudyAxis::SpaceDegree),
            "timescheme" | "scheme" => Ok(StudyAxis::TimeScheme),
            _ => Err(Error::InvalidInput(format!(
                "unknown study axis {s:?}; expected mesh-level, time-step, space-degree or time-scheme"
            ))),
        }
    }
}

impl std::fmt::Display for StudyAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StudyAxis::MeshLevel => "mesh-level",
            StudyAxis::TimeStep => "time-step",
            StudyAxis::SpaceDegree => "space-degree",
            StudyAxis::TimeScheme => "time-scheme",
        })
    }
}

/// `base` with one axis set to `value`.
pub fn vary(base: &ScenarioConfig, axis: StudyAxis, value: &str) -> Result<ScenarioConfig> {
    let bad = |what: &str| Error::InvalidInput(format!("invalid {what} value {value:?}"));
    let mut c = base.clone();
    match axis {
        StudyAxis::MeshLevel => {
            let level: usize = value.parse().map_err(|_| bad("mesh level"))?;
            match &mut c.mesh {
                MeshSpec::LShape { level: l } => *l = level,
                MeshSpec::Rectangle { .. } => {
                    return Err(Error::InvalidInput(
                        "mesh-level studies need an L-shape mesh".into(),
                    ))
                }
            }
        }
        StudyAxis::TimeStep => c.time_step = value.parse().map_err(|_| bad("time step"))?,
        StudyAxis::SpaceDegree => {
            c.space_degree = value.parse().map_err(|_| bad("space degree"))?
        }
        StudyAxis::TimeScheme => c.scheme = value.parse()?,
    }
    c.validate()?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub value: String,
    pub row: SweepRow,
}

/// One sweep per axis value; rows ordered by value (as given), then ω.
pub fn study(
    base: &ScenarioConfig,
    axis: StudyAxis,
    values: &[String],
    omegas: &[f64],
    jobs: usize,
) -> Result<Vec<StudyRow>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("empty value list".into()));
    }
    let mut out = Vec::new();
    for v in values {
        let config = vary(base, axis, v)?;
        for row in sweep_omega(&config, omegas, jobs)? {
            out.push(StudyRow {
                value: v.clone(),
                row,
            });
        }
    }
    Ok(out)
}

/// Discretization errors of one manufactured-solution run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsRow {
    /// Number of cells per side or number of slabs, depending on the study.
    pub refinement: usize,
    pub h: f64,
    pub tau: f64,
    /// `L²(Ω)` errors of `[p, q, u]` at the final time.
    pub errors: [f64; 3],
    /// Observed orders against the previous row; `None` on the first row.
    pub orders: Option<[f64; 3]>,
}

fn mms_material() -> MaterialParams {
    MaterialParams {
        biot_modulus: 1.0,
        biot_coefficient: 1.0,
        mu: 1.0,
        lambda: 1.0,
        permeability: [[1.0, 0.0], [0.0, 1.0]],
        bulk_density: 1.0,
    }
}

fn side(name: &str) -> BoundaryTag {
    BoundaryTag::Custom(name.into())
}

fn base_mms_config(
    cells: usize,
    slabs: usize,
    end_time: f64,
    scheme: TimeScheme,
    s: usize,
) -> ScenarioConfig {
    let material = mms_material();
    ScenarioConfig {
        mesh: MeshSpec::Rectangle {
            extent: Rect::unit(),
            cells: [cells, cells],
            side_tags: true,
        },
        material,
        end_time,
        time_step: end_time / slabs as f64,
        scheme,
        space_degree: s,
        source: ScalarField::Zero,
        gravity: VectorField::Zero,
        boundary: BoundarySpec::new(),
        tuning: Tuning::Explicit(optimal_tuning(&material)),
        tol_fixed: 1e-10,
        tol_flow: 1e-12,
        tol_mechanics: 1e-12,
        max_fixed_iters: 500,
    }
}

/// Exact fields of a manufactured solution.
#[derive(Clone)]
pub struct ExactSolution {
    pub pressure: Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>,
    pub flux: Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>,
    pub displacement: Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>,
}

/// Pressure `c(t)` and vertical strain `a(t)` of the uniaxial solution,
/// with their time derivatives.
#[derive(Clone, Copy)]
pub struct TimeProfile {
    pub c: fn(f64) -> f64,
    pub dc: fn(f64) -> f64,
    pub a: fn(f64) -> f64,
    pub da: fn(f64) -> f64,
}

/// Spatially trivial solution `p = c(t)`, `u = (0, a(t) y)`, `q = 0` on the
/// unit square: the pressure and displacement lie in every discrete space,
/// so only the time discretization contributes to the error.
///
/// `c`, `a` and their derivatives come from `profile`.
pub fn uniaxial_problem(
    cells: usize,
    slabs: usize,
    end_time: f64,
    scheme: TimeScheme,
    s: usize,
    profile: TimeProfile,
) -> (ScenarioConfig, ExactSolution) {
    let TimeProfile { c, dc, a, da } = profile;
    let mut config = base_mms_config(cells, slabs, end_time, scheme, s);
    let m = config.material;
    let (inv_m, b, mu, lambda) = (1.0 / m.biot_modulus, m.biot_coefficient, m.mu, m.lambda);
    config.source = ScalarField::Custom(Arc::new(move |_, t| inv_m * dc(t) + b * da(t)));
    let open = || FlowCondition::Pressure(ScalarField::Custom(Arc::new(move |_, t| c(t))));
    for name in ["left", "right"] {
        config.boundary.insert(
            side(name),
            BoundaryCondition::new(open(), [true, false], VectorField::Zero),
        );
    }
    config.boundary.insert(
        side("bottom"),
        BoundaryCondition::new(open(), [false, true], VectorField::Zero),
    );
    config.boundary.insert(
        side("top"),
        BoundaryCondition::new(
            open(),
            [false, false],
            VectorField::Custom(Arc::new(move |_, t| {
                [0.0, (2.0 * mu + lambda) * a(t) - b * c(t)]
            })),
        ),
    );
    let exact = ExactSolution {
        pressure: Arc::new(move |_, t| c(t)),
        flux: Arc::new(|_, _| [0.0, 0.0]),
        displacement: Arc::new(move |x, t| [0.0, a(t) * x[1]]),
    };
    (config, exact)
}

/// `p = t φ`, `u = t (φ, φ)` with `φ = sin(πx) sin(πy)` on the unit square,
/// homogeneous pressure and clamped displacement on the whole boundary.
/// Linear in time, so cGP(1) and dG(1) add no time error.
pub fn sine_problem(
    cells: usize,
    slabs: usize,
    end_time: f64,
    scheme: TimeScheme,
    s: usize,
) -> (ScenarioConfig, ExactSolution) {
    let mut config = base_mms_config(cells, slabs, end_time, scheme, s);
    let m = config.material;
    let (inv_m, b, mu, lambda, k) = (
        1.0 / m.biot_modulus,
        m.biot_coefficient,
        m.mu,
        m.lambda,
        m.permeability[0][0],
    );
    let phi = |x: Point| (PI * x[0]).sin() * (PI * x[1]).sin();
    let phi_x = |x: Point| PI * (PI * x[0]).cos() * (PI * x[1]).sin();
    let phi_y = |x: Point| PI * (PI * x[0]).sin() * (PI * x[1]).cos();
    let phi_xy = |x: Point| PI * PI * (PI * x[0]).cos() * (PI * x[1]).cos();
    config.source = ScalarField::Custom(Arc::new(move |x, t| {
        inv_m * phi(x) + b * (phi_x(x) + phi_y(x)) + 2.0 * PI * PI * k * t * phi(x)
    }));
    // −div σ for σ = 2με(u) + (λ div u − b p) I.
    config.gravity = VectorField::Custom(Arc::new(move |x, t| {
        let (f, fx, fy, fxy) = (phi(x), phi_x(x), phi_y(x), phi_xy(x));
        let lap = -PI * PI * f;
        let sx = 2.0 * mu * lap + lambda * (lap + fxy) - b * fx + mu * (fxy + lap);
        let sy = mu * (lap + fxy) + 2.0 * mu * lap + lambda * (fxy + lap) - b * fy;
        [-t * sx, -t * sy]
    }));
    for tag in ["left", "right", "bottom", "top"] {
        config.boundary.insert(
            side(tag),
            BoundaryCondition::new(
                FlowCondition::Pressure(ScalarField::Zero),
                [true, true],
                VectorField::Zero,
            ),
        );
    }
    let exact = ExactSolution {
        pressure: Arc::new(move |x, t| t * phi(x)),
        flux: Arc::new(move |x, t| [-k * t * phi_x(x), -k * t * phi_y(x)]),
        displacement: Arc::new(move |x, t| [t * phi(x), t * phi(x)]),
    };
    (config, exact)
}

/// End-time errors of a monolithic run against `exact`.
pub fn final_errors(config: &ScenarioConfig, exact: &ExactSolution) -> Result<[f64; 3]> {
    let disc = Discretization::new(config)?;
    let run = run_discretized(&disc, RunMode::Monolithic, DivergencePolicy::Abort)?;
    let last = run.snapshots.last().expect("at least one slab");
    let t = last.time;
    let sp = &disc.spaces;
    Ok([
        pressure_l2_error(&sp.pressure, &last.pressure, &|x| (exact.pressure)(x, t)),
        flux_l2_error(&sp.flux, &last.flux, &|x| (exact.flux)(x, t)),
        displacement_l2_error(&sp.displacement, &last.displacement, &|x| {
            (exact.displacement)(x, t)
        }),
    ])
}

fn with_orders(mut rows: Vec<MmsRow>, by_h: bool) -> Vec<MmsRow> {
    for i in 1..rows.len() {
        let (prev, cur) = (rows[i - 1], rows[i]);
        let ratio = if by_h {
            prev.h / cur.h
        } else {
            prev.tau / cur.tau
        };
        let mut o = [0.0; 3];
        for k in 0..3 {
            o[k] = (prev.errors[k] / cur.errors[k]).ln() / ratio.ln();
        }
        rows[i].orders = Some(o);
    }
    rows
}

fn time_profile() -> TimeProfile {
    TimeProfile {
        c: |t| (2.0 * t).sin(),
        dc: |t| 2.0 * (2.0 * t).cos(),
        a: |t| 1.0 - (3.0 * t).cos(),
        da: |t| 3.0 * (3.0 * t).sin(),
    }
}

/// Temporal convergence on `T = 1` with the given numbers of slabs.
pub fn mms_time_study(scheme: TimeScheme, s: usize, slab_counts: &[usize]) -> Result<Vec<MmsRow>> {
    let profile = time_profile();
    let rows = slab_counts
        .iter()
        .map(|&n| {
            let (config, exact) = uniaxial_problem(2, n, 1.0, scheme, s, profile);
            Ok(MmsRow {
                refinement: n,
                h: 0.5,
                tau: config.time_step,
                errors: final_errors(&config, &exact)?,
                orders: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(with_orders(rows, false))
}

/// Spatial convergence on meshes with the given cells per side, two slabs
/// on `T = 1`. Use a scheme exact for linear-in-time data (cGP(1), dG(1)).
pub fn mms_space_study(scheme: TimeScheme, s: usize, cells: &[usize]) -> Result<Vec<MmsRow>> {
    let rows = cells
        .iter()
        .map(|&n| {
            let (config, exact) = sine_problem(n, 2, 1.0, scheme, s);
            Ok(MmsRow {
                refinement: n,
                h: 1.0 / n as f64,
                tau: config.time_step,
                errors: final_errors(&config, &exact)?,
                orders: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(with_orders(rows, true))
}

/// Errors for a solution inside the discrete space: pressure and
/// displacement amplitudes are polynomials of degree `min(r, 1)` in time.
pub fn mms_exactness(scheme: TimeScheme, s: usize) -> Result<[f64; 3]> {
    let (config, exact) = if scheme.degree() >= 1 {
        uniaxial_problem(
            2,
            3,
            0.75,
            scheme,
            s,
            TimeProfile {
                c: |t| 2.0 * t,
                dc: |_| 2.0,
                a: |t| -0.5 * t,
                da: |_| -0.5,
            },
        )
    } else {
        uniaxial_problem(
            2,
            3,
            0.75,
            scheme,
            s,
            TimeProfile {
                c: |_| 0.0,
                dc: |_| 0.0,
                a: |_| 0.0,
                da: |_| 0.0,
            },
        )
    };
    final_errors(&config, &exact)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        assert_eq!(
            "mesh-level".parse::<StudyAxis>().unwrap(),
            StudyAxis::MeshLevel
        );
        assert_eq!(
            "TimeStep".parse::<StudyAxis>().unwrap(),
            StudyAxis::TimeStep
        );
        assert!("bogus".parse::<StudyAxis>().is_err());
    }

    #[test]
    fn best_omega_prefers_converged_minimum() {
        let row = |omega, total, converged| SweepRow {
            omega,
            tuning: omega,
            total_iters: total,
            max_slab_iters: 1,
            converged,
        };
        let rows = vec![row(0.5, 10, false), row(1.0, 20, true), row(2.0, 20, true)];
        assert_eq!(best_omega(&rows).unwrap().omega, 1.0);
    }
}
