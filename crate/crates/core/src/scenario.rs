//! Material data, boundary conditions and scenario files.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::assembly::spd_inverse;
use crate::mesh::{build_lshape_mesh, build_rectangle_mesh, BoundaryTag, Mesh, Point, Rect};
use crate::time::TimeScheme;

/// Physical coefficients of the poroelastic model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    /// `M`: inverse storage coefficient.
    pub biot_modulus: f64,
    /// `b`: coupling between pore pressure and volumetric strain.
    pub biot_coefficient: f64,
    pub mu: f64,
    pub lambda: f64,
    /// Permeability divided by fluid viscosity.
    pub permeability: [[f64; 2]; 2],
    #[serde(default = "one")]
    pub bulk_density: f64,
}

fn one() -> f64 {
    1.0
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("biot_modulus", self.biot_modulus),
            ("mu", self.mu),
            ("lambda", self.lambda),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidMaterial(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        // b = 0 is kept legal: it decouples flow and mechanics.
        if !(self.biot_coefficient >= 0.0 && self.biot_coefficient.is_finite()) {
            return Err(Error::InvalidMaterial(format!(
                "biot_coefficient must be non-negative, got {}",
                self.biot_coefficient
            )));
        }
        if !(self.bulk_density >= 0.0) {
            return Err(Error::InvalidMaterial(
                "bulk_density must be non-negative".into(),
            ));
        }
        spd_inverse(self.permeability)?;
        Ok(())
    }
}

/// `b² / (2λ)`, the tuning parameter with the smallest contraction bound.
pub fn optimal_tuning(material: &MaterialParams) -> f64 {
    material.biot_coefficient.powi(2) / (2.0 * material.lambda)
}

/// `L M / (L M + 1)`.
pub fn contraction_factor(material: &MaterialParams, tuning: f64) -> f64 {
    let lm = tuning * material.biot_modulus;
    lm / (lm + 1.0)
}

/// `(μ, λ)` from Young's modulus and Poisson's ratio.
pub fn lame_from_engineering(young: f64, poisson: f64) -> Result<(f64, f64)> {
    if !(young > 0.0) {
        return Err(Error::InvalidMaterial(format!(
            "Young's modulus must be positive, got {young}"
        )));
    }
    if !(poisson > -1.0 && poisson < 0.5) {
        return Err(Error::InvalidMaterial(format!(
            "Poisson's ratio must lie in (-1, 0.5), got {poisson}"
        )));
    }
    let mu = young / (2.0 * (1.0 + poisson));
    let lambda = young * poisson / ((1.0 - 2.0 * poisson) * (1.0 + poisson));
    Ok((mu, lambda))
}

pub type ScalarFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>;

/// `Σ c_k t^k`.
pub fn eval_poly(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

/// A scalar field of space and time. Files can only hold spatially
/// constant polynomials in time.
#[derive(Clone)]
pub enum ScalarField {
    Zero,
    TimePolynomial(Vec<f64>),
    Custom(ScalarFn),
}

impl ScalarField {
    pub fn eval(&self, x: Point, t: f64) -> f64 {
        match self {
            ScalarField::Zero => 0.0,
            ScalarField::TimePolynomial(c) => eval_poly(c, t),
            ScalarField::Custom(f) => f(x, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ScalarField::Zero => true,
            ScalarField::TimePolynomial(c) => c.iter().all(|&v| v == 0.0),
            ScalarField::Custom(_) => false,
        }
    }

    fn to_file(&self) -> Result<Vec<f64>> {
        match self {
            ScalarField::Zero => Ok(Vec::new()),
            ScalarField::TimePolynomial(c) => Ok(c.clone()),
            ScalarField::Custom(_) => Err(Error::InvalidScenario(
                "closure-defined fields cannot be written to a scenario file".into(),
            )),
        }
    }

    fn from_file(c: Vec<f64>) -> Self {
        if c.is_empty() {
            ScalarField::Zero
        } else {
            ScalarField::TimePolynomial(c)
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Zero => f.write_str("Zero"),
            ScalarField::TimePolynomial(c) => f.debug_tuple("TimePolynomial").field(c).finish(),
            ScalarField::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Clone)]
pub enum VectorField {
    Zero,
    /// Per-component polynomials in time.
    TimePolynomial([Vec<f64>; 2]),
    Custom(VectorFn),
}

impl VectorField {
    pub fn eval(&self, x: Point, t: f64) -> [f64; 2] {
        match self {
            VectorField::Zero => [0.0; 2],
            VectorField::TimePolynomial([a, b]) => [eval_poly(a, t), eval_poly(b, t)],
            VectorField::Custom(f) => f(x, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            VectorField::Zero => true,
            VectorField::TimePolynomial(c) => c.iter().flatten().all(|&v| v == 0.0),
            VectorField::Custom(_) => false,
        }
    }

    fn to_file(&self) -> Result<VectorFile> {
        match self {
            VectorField::Zero => Ok(VectorFile::default()),
            VectorField::TimePolynomial([x, y]) => Ok(VectorFile {
                x: x.clone(),
                y: y.clone(),
            }),
            VectorField::Custom(_) => Err(Error::InvalidScenario(
                "closure-defined fields cannot be written to a scenario file".into(),
            )),
        }
    }

    fn from_file(v: VectorFile) -> Self {
        if v.x.is_empty() && v.y.is_empty() {
            VectorField::Zero
        } else {
            VectorField::TimePolynomial([v.x, v.y])
        }
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Zero => f.write_str("Zero"),
            VectorField::TimePolynomial(c) => f.debug_tuple("TimePolynomial").field(c).finish(),
            VectorField::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum FlowCondition {
    /// `q·n = 0`.
    NoFlow,
    /// Prescribed pressure, imposed weakly through the Darcy equation.
    Pressure(ScalarField),
}

/// Conditions on one boundary tag.
#[derive(Debug, Clone)]
pub struct BoundaryCondition {
    pub flow: FlowCondition,
    /// Displacement components held at zero.
    pub fixed: [bool; 2],
    /// Applied traction; only acts on components that are not fixed.
    pub traction: VectorField,
}

impl BoundaryCondition {
    pub fn new(flow: FlowCondition, fixed: [bool; 2], traction: VectorField) -> Self {
        Self {
            flow,
            fixed,
            traction,
        }
    }
}

pub type BoundarySpec = BTreeMap<BoundaryTag, BoundaryCondition>;

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSpec {
    LShape {
        level: usize,
    },
    /// `side_tags` tags the four sides `left`, `right`, `bottom`, `top`
    /// instead of one default tag.
    Rectangle {
        extent: Rect,
        cells: [usize; 2],
        side_tags: bool,
    },
}

impl MeshSpec {
    pub fn build(&self) -> Result<Mesh> {
        match *self {
            MeshSpec::LShape { level } => build_lshape_mesh(level),
            MeshSpec::Rectangle {
                extent,
                cells,
                side_tags,
            } => {
                let mut mesh = build_rectangle_mesh(extent, cells[0], cells[1])?;
                if side_tags {
                    mesh.retag(|_, n| side_tag(n));
                }
                Ok(mesh)
            }
        }
    }
}

/// `left`, `right`, `bottom` or `top` from an outward normal of an
/// axis-aligned rectangle.
pub fn side_tag(n: [f64; 2]) -> BoundaryTag {
    let name = if n[0] < -0.5 {
        "left"
    } else if n[0] > 0.5 {
        "right"
    } else if n[1] < -0.5 {
        "bottom"
    } else {
        "top"
    };
    BoundaryTag::Custom(name.into())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tuning {
    Explicit(f64),
    /// Multiple of [`optimal_tuning`].
    Relative(f64),
}

/// Everything needed for one simulation run.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub mesh: MeshSpec,
    pub material: MaterialParams,
    pub end_time: f64,
    pub time_step: f64,
    pub scheme: TimeScheme,
    /// Pressure degree; the flux space is `RT_s` and displacement `Q_{s+1}`.
    pub space_degree: usize,
    pub source: ScalarField,
    pub gravity: VectorField,
    pub boundary: BoundarySpec,
    pub tuning: Tuning,
    pub tol_fixed: f64,
    pub tol_flow: f64,
    pub tol_mechanics: f64,
    pub max_fixed_iters: usize,
}

impl ScenarioConfig {
    pub fn tuning_value(&self) -> f64 {
        match self.tuning {
            Tuning::Explicit(l) => l,
            Tuning::Relative(w) => w * optimal_tuning(&self.material),
        }
    }

    pub fn num_slabs(&self) -> usize {
        (self.end_time / self.time_step).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        if !(self.end_time > 0.0) || !(self.time_step > 0.0) {
            return Err(Error::InvalidScenario(
                "end_time and time_step must be positive".into(),
            ));
        }
        let ratio = self.end_time / self.time_step;
        if ratio.round() < 1.0 || (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::InvalidScenario(format!(
                "end_time {} is not an integer multiple of time_step {}",
                self.end_time, self.time_step
            )));
        }
        for (name, v) in [
            ("tol_fixed", self.tol_fixed),
            ("tol_flow", self.tol_flow),
            ("tol_mechanics", self.tol_mechanics),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidScenario(format!("{name} must be positive")));
            }
        }
        match self.tuning {
            Tuning::Relative(w) if !(w > 0.0) => {
                return Err(Error::InvalidScenario(format!(
                    "omega must be positive, got {w}"
                )))
            }
            Tuning::Explicit(l) if !(l >= 0.0) => {
                return Err(Error::InvalidScenario(format!(
                    "tuning must be non-negative, got {l}"
                )))
            }
            _ => {}
        }
        if self.max_fixed_iters < 2 {
            return Err(Error::InvalidScenario(
                "max_fixed_iters must be at least 2".into(),
            ));
        }
        if let TimeScheme::Cgp(0) = self.scheme {
            return Err(Error::InvalidOrder("cGP requires degree r >= 1".into()));
        }
        Ok(())
    }

    /// Parses a scenario file; unknown keys are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        let config = file.into_config()?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        let file = ScenarioFile::from_config(self)?;
        toml::to_string(&file).map_err(|e| Error::InvalidScenario(e.to_string()))
    }
}

/// Traction `(0, h(t))` of the L-shape benchmark, `h(t) = −2560 t² (t − 1/2)²`.
pub fn benchmark_traction(t: f64) -> f64 {
    -2560.0 * t * t * (t - 0.5) * (t - 0.5)
}

/// Coefficients of [`benchmark_traction`] in increasing powers of `t`.
pub const BENCHMARK_TRACTION_COEFFS: [f64; 5] = [0.0, 0.0, -640.0, 2560.0, -2560.0];

/// The L-shape consolidation benchmark on `(0, 0.5]`.
pub fn benchmark_scenario(
    level: usize,
    time_step: f64,
    scheme: TimeScheme,
    space_degree: usize,
    omega: f64,
) -> Result<ScenarioConfig> {
    let (mu, lambda) = lame_from_engineering(100.0, 0.35)?;
    let material = MaterialParams {
        biot_modulus: 100.0,
        biot_coefficient: 100.0,
        mu,
        lambda,
        permeability: [[0.1, 0.0], [0.0, 0.1]],
        bulk_density: 1.0,
    };
    let free = || VectorField::Zero;
    let mut boundary = BoundarySpec::new();
    boundary.insert(
        BoundaryTag::TractionTop,
        BoundaryCondition::new(
            FlowCondition::Pressure(ScalarField::Zero),
            [false, false],
            VectorField::TimePolynomial([Vec::new(), BENCHMARK_TRACTION_COEFFS.to_vec()]),
        ),
    );
    boundary.insert(
        BoundaryTag::TractionFree,
        BoundaryCondition::new(FlowCondition::NoFlow, [false, false], free()),
    );
    boundary.insert(
        BoundaryTag::SymmetryX,
        BoundaryCondition::new(FlowCondition::NoFlow, [true, false], free()),
    );
    boundary.insert(
        BoundaryTag::SymmetryY,
        BoundaryCondition::new(FlowCondition::NoFlow, [false, true], free()),
    );
    let low_order = scheme.degree() + usize::from(!scheme.is_continuous()) <= 1;
    let config = ScenarioConfig {
        mesh: MeshSpec::LShape { level },
        material,
        end_time: 0.5,
        time_step,
        scheme,
        space_degree,
        source: ScalarField::Zero,
        gravity: VectorField::Zero,
        boundary,
        tuning: Tuning::Relative(omega),
        tol_fixed: 1e-8,
        tol_flow: if low_order { 1e-14 } else { 1e-12 },
        tol_mechanics: 1e-12,
        max_fixed_iters: 500,
    };
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    mesh: MeshFile,
    material: MaterialFile,
    time: TimeFile,
    space: SpaceFile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    source: Vec<f64>,
    #[serde(default, skip_serializing_if = "VectorFile::is_empty")]
    gravity: VectorFile,
    #[serde(default)]
    boundary: Vec<BoundaryFile>,
    #[serde(default)]
    solver: SolverFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshFile {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    extent: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cells: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "is_false")]
    side_tags: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialFile {
    biot_modulus: f64,
    biot_coefficient: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    young_modulus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    poisson_ratio: Option<f64>,
    permeability: [[f64; 2]; 2],
    #[serde(default = "one")]
    bulk_density: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeFile {
    end: f64,
    step: f64,
    scheme: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    degree: usize,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorFile {
    #[serde(default)]
    x: Vec<f64>,
    #[serde(default)]
    y: Vec<f64>,
}

impl VectorFile {
    fn is_empty(&self) -> bool {
        self.x.is_empty() && self.y.is_empty()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryFile {
    tag: String,
    /// `"no-flow"` or `"pressure"`.
    flow: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pressure: Vec<f64>,
    #[serde(default)]
    fixed: [bool; 2],
    #[serde(default, skip_serializing_if = "VectorFile::is_empty")]
    traction: VectorFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tuning: Option<f64>,
    #[serde(default = "default_tol_fixed")]
    tol_fixed: f64,
    #[serde(default = "default_tol_flow")]
    tol_flow: f64,
    #[serde(default = "default_tol_mechanics")]
    tol_mechanics: f64,
    #[serde(default = "default_max_iters")]
    max_fixed_iters: usize,
}

fn default_tol_fixed() -> f64 {
    1e-8
}
fn default_tol_flow() -> f64 {
    1e-12
}
fn default_tol_mechanics() -> f64 {
    1e-12
}
fn default_max_iters() -> usize {
    500
}

impl Default for SolverFile {
    fn default() -> Self {
        Self {
            omega: None,
            tuning: None,
            tol_fixed: default_tol_fixed(),
            tol_flow: default_tol_flow(),
            tol_mechanics: default_tol_mechanics(),
            max_fixed_iters: default_max_iters(),
        }
    }
}

impl ScenarioFile {
    fn into_config(self) -> Result<ScenarioConfig> {
        let mesh = match self.mesh.kind.as_str() {
            "lshape" => MeshSpec::LShape {
                level: self.mesh.level.ok_or_else(|| {
                    Error::InvalidScenario("mesh.level is required for kind = \"lshape\"".into())
                })?,
            },
            "rectangle" => {
                let e = self.mesh.extent.unwrap_or([0.0, 1.0, 0.0, 1.0]);
                MeshSpec::Rectangle {
                    extent: Rect::new(e[0], e[1], e[2], e[3]),
                    cells: self.mesh.cells.ok_or_else(|| {
                        Error::InvalidScenario(
                            "mesh.cells is required for kind = \"rectangle\"".into(),
                        )
                    })?,
                    side_tags: self.mesh.side_tags,
                }
            }
            other => {
                return Err(Error::InvalidScenario(format!(
                    "unknown mesh kind {other:?}"
                )))
            }
        };
        let m = &self.material;
        let (mu, lambda) = match (m.mu, m.lambda, m.young_modulus, m.poisson_ratio) {
            (Some(mu), Some(lambda), None, None) => (mu, lambda),
            (None, None, Some(e), Some(nu)) => lame_from_engineering(e, nu)?,
            _ => {
                return Err(Error::InvalidScenario(
                    "material needs either mu and lambda or young_modulus and poisson_ratio".into(),
                ))
            }
        };
        let material = MaterialParams {
            biot_modulus: m.biot_modulus,
            biot_coefficient: m.biot_coefficient,
            mu,
            lambda,
            permeability: m.permeability,
            bulk_density: m.bulk_density,
        };
        let scheme: TimeScheme = self.time.scheme.parse()?;
        let mut boundary = BoundarySpec::new();
        for b in self.boundary {
            let tag: BoundaryTag = b.tag.parse()?;
            let flow = match b.flow.as_str() {
                "no-flow" => {
                    if !b.pressure.is_empty() {
                        return Err(Error::InvalidScenario(format!(
                            "boundary {tag}: pressure given for a no-flow boundary"
                        )));
                    }
                    FlowCondition::NoFlow
                }
                "pressure" => FlowCondition::Pressure(ScalarField::from_file(b.pressure)),
                other => {
                    return Err(Error::InvalidScenario(format!(
                        "boundary {tag}: unknown flow condition {other:?}"
                    )))
                }
            };
            let cond = BoundaryCondition::new(flow, b.fixed, VectorField::from_file(b.traction));
            if boundary.insert(tag.clone(), cond).is_some() {
                return Err(Error::InvalidScenario(format!(
                    "boundary {tag} listed twice"
                )));
            }
        }
        let tuning = match (self.solver.omega, self.solver.tuning) {
            (Some(w), None) => Tuning::Relative(w),
            (None, Some(l)) => Tuning::Explicit(l),
            (None, None) => Tuning::Relative(1.0),
            (Some(_), Some(_)) => {
                return Err(Error::InvalidScenario(
                    "give either solver.omega or solver.tuning, not both".into(),
                ))
            }
        };
        Ok(ScenarioConfig {
            mesh,
            material,
            end_time: self.time.end,
            time_step: self.time.step,
            scheme,
            space_degree: self.space.degree,
            source: ScalarField::from_file(self.source),
            gravity: VectorField::from_file(self.gravity),
            boundary,
            tuning,
            tol_fixed: self.solver.tol_fixed,
            tol_flow: self.solver.tol_flow,
            tol_mechanics: self.solver.tol_mechanics,
            max_fixed_iters: self.solver.max_fixed_iters,
        })
    }

    fn from_config(c: &ScenarioConfig) -> Result<Self> {
        let mesh = match c.mesh {
            MeshSpec::LShape { level } => MeshFile {
                kind: "lshape".into(),
                level: Some(level),
                extent: None,
                cells: None,
                side_tags: false,
            },
            MeshSpec::Rectangle {
                extent,
                cells,
                side_tags,
            } => MeshFile {
                kind: "rectangle".into(),
                level: None,
                extent: Some([extent.x0, extent.x1, extent.y0, extent.y1]),
                cells: Some(cells),
                side_tags,
            },
        };
        let mut boundary = Vec::new();
        for (tag, b) in &c.boundary {
            let (flow, pressure) = match &b.flow {
                FlowCondition::NoFlow => ("no-flow".to_string(), Vec::new()),
                FlowCondition::Pressure(p) => ("pressure".to_string(), p.to_file()?),
            };
            boundary.push(BoundaryFile {
                tag: tag.to_string(),
                flow,
                pressure,
                fixed: b.fixed,
                traction: b.traction.to_file()?,
            });
        }
        let (omega, tuning) = match c.tuning {
            Tuning::Relative(w) => (Some(w), None),
            Tuning::Explicit(l) => (None, Some(l)),
        };
        Ok(ScenarioFile {
            mesh,
            material: MaterialFile {
                biot_modulus: c.material.biot_modulus,
                biot_coefficient: c.material.biot_coefficient,
                mu: Some(c.material.mu),
                lambda: Some(c.material.lambda),
                young_modulus: None,
                poisson_ratio: None,
                permeability: c.material.permeability,
                bulk_density: c.material.bulk_density,
            },
            time: TimeFile {
                end: c.end_time,
                step: c.time_step,
                scheme: c.scheme.to_string(),
            },
            space: SpaceFile {
                degree: c.space_degree,
            },
            source: c.source.to_file()?,
            gravity: c.gravity.to_file()?,
            boundary,
            solver: SolverFile {
                omega,
                tuning,
                tol_fixed: c.tol_fixed,
                tol_flow: c.tol_flow,
                tol_mechanics: c.tol_mechanics,
                max_fixed_iters: c.max_fixed_iters,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_material(b: f64, lambda: f64) -> MaterialParams {
        MaterialParams {
            biot_modulus: 1.0,
            biot_coefficient: b,
            mu: 1.0,
            lambda,
            permeability: [[1.0, 0.0], [0.0, 1.0]],
            bulk_density: 1.0,
        }
    }

    #[test]
    fn tuning_formulas() {
        assert!((optimal_tuning(&unit_material(1.0, 0.5)) - 1.0).abs() < 1e-15);
        let l = optimal_tuning(&unit_material(100.0, 86.42));
        assert!((l - 57.857).abs() < 1e-3);
        let l2 = optimal_tuning(&unit_material(200.0, 86.42));
        assert!((l2 - 4.0 * l).abs() < 1e-12);
        let mut m = unit_material(1.0, 1.0);
        assert!((contraction_factor(&m, 1.0) - 0.5).abs() < 1e-15);
        m.biot_modulus = 100.0;
        assert!((contraction_factor(&m, l) - 0.999827).abs() < 1e-6);
        assert!(contraction_factor(&m, 2.0) > contraction_factor(&m, 1.0));
    }

    #[test]
    fn engineering_constants() {
        let (mu, lambda) = lame_from_engineering(100.0, 0.35).unwrap();
        assert!((mu - 37.037).abs() < 1e-3);
        assert!((lambda - 86.42).abs() < 1e-2);
        assert_eq!(lame_from_engineering(1.0, 0.0).unwrap(), (0.5, 0.0));
        let (mu, lambda) = lame_from_engineering(2.0, 0.25).unwrap();
        assert!((mu - 0.8).abs() < 1e-15 && (lambda - 0.8).abs() < 1e-15);
        assert!(matches!(
            lame_from_engineering(1.0, 0.5),
            Err(Error::InvalidMaterial(_))
        ));
    }

    #[test]
    fn material_validation() {
        assert!(unit_material(1.0, 1.0).validate().is_ok());
        assert!(unit_material(0.0, 1.0).validate().is_ok());
        assert!(unit_material(1.0, 0.0).validate().is_err());
        let mut m = unit_material(1.0, 1.0);
        m.permeability = [[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(m.validate(), Err(Error::InvalidMaterial(_))));
    }

    #[test]
    fn benchmark_traction_values() {
        assert!((benchmark_traction(0.25) + 10.0).abs() < 1e-12);
        assert_eq!(benchmark_traction(0.0), 0.0);
        assert_eq!(benchmark_traction(0.5), 0.0);
        for t in [0.1, 0.25, 0.33] {
            assert!(
                (eval_poly(&BENCHMARK_TRACTION_COEFFS, t) - benchmark_traction(t)).abs() < 1e-12
            );
        }
    }

    #[test]
    fn benchmark_tolerances_and_round_trip() {
        let c = benchmark_scenario(1, 0.05, TimeScheme::Dg(0), 0, 1.0).unwrap();
        assert_eq!(c.tol_fixed, 1e-8);
        assert_eq!(c.tol_flow, 1e-14);
        assert_eq!(c.tol_mechanics, 1e-12);
        assert_eq!(c.num_slabs(), 10);
        let c2 = benchmark_scenario(1, 0.05, TimeScheme::Cgp(2), 1, 1.0).unwrap();
        assert_eq!(c2.tol_flow, 1e-12);
        let text = c.to_toml_string().unwrap();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(back.to_toml_string().unwrap(), text);
        assert!((back.tuning_value() - c.tuning_value()).abs() == 0.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let c = benchmark_scenario(1, 0.05, TimeScheme::Dg(0), 0, 1.0).unwrap();
        let text = c
            .to_toml_string()
            .unwrap()
            .replace("[time]", "[time]\nbogus = 1");
        assert!(matches!(
            ScenarioConfig::from_toml_str(&text),
            Err(Error::InvalidScenario(_))
        ));
    }

    #[test]
    fn step_must_divide_interval() {
        let mut c = benchmark_scenario(1, 0.05, TimeScheme::Dg(0), 0, 1.0).unwrap();
        c.time_step = 0.03;
        assert!(c.validate().is_err());
    }
}
