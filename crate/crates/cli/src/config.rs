//! Run configuration: a single TOML file with explicit keys. Unknown keys
//! are hard errors, defaults fill everything optional, and the parsed
//! configuration converts into the core geometry/solver types.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use cuspflow_core::{
    CuspCharacteristic, Formulation, GeometryConfig, MeshShape, ScalarField, SingularMesh,
    SolverTolerances, TimePartition,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    #[serde(default)]
    pub discretization: DiscretizationSection,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub shape: String,
    pub t_len: f64,
    pub circumference: f64,
    pub cusp: CuspSection,
    pub singular_radius: f64,
    pub beta: f64,
    pub blend_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CuspSection {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationSection {
    pub n_t: usize,
    pub n_theta: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub residual_tol: f64,
    pub newton_max_iter: usize,
    pub delta_schedule: Vec<f64>,
    pub eig_tol: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell_budget: Option<usize>,
}

impl Default for DiscretizationSection {
    fn default() -> Self {
        let tol = SolverTolerances::default();
        Self {
            n_t: 64,
            n_theta: 64,
            cg_tol: tol.cg_tol,
            cg_max_iter: tol.cg_max_iter,
            residual_tol: tol.residual_tol,
            newton_max_iter: tol.newton_max_iter,
            delta_schedule: cuspflow_core::resolvent::default_delta_schedule(),
            eig_tol: 1e-9,
            seed: 42,
            cell_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub n: f64,
    pub formulation: String,
    pub t_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    pub lambda: f64,
    pub initial: InitialSection,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            n: 2.0,
            formulation: "pme1".to_string(),
            t_final: 0.5,
            steps: Some(50),
            breakpoints: None,
            lambda: 0.1,
            initial: InitialSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            kind: "gaussian_bump".to_string(),
            value: None,
            center: Some([0.6, std::f64::consts::PI]),
            width: Some(0.2),
            height: Some(1.0),
            path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub refinement_levels: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub corpus_size: usize,
    pub sample_pairs: usize,
    pub c_m: f64,
    pub rate_tolerance: f64,
    pub smallness_factor: f64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            refinement_levels: vec![32, 64],
            lambda_grid: vec![0.01, 0.1, 1.0, 10.0],
            corpus_size: 100,
            sample_pairs: 50,
            c_m: 1.0,
            rate_tolerance: 0.1,
            smallness_factor: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    pub dump_fields: bool,
    pub jobs: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: "results".to_string(), dump_fields: false, jobs: 1 }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometrySection {
                shape: "wedge_cylinder".to_string(),
                t_len: 1.0,
                circumference: std::f64::consts::TAU,
                cusp: CuspSection { kind: "cone".to_string(), k: None, samples: None },
                singular_radius: 0.5,
                beta: 1.0,
                blend_width: 0.1,
            },
            discretization: DiscretizationSection::default(),
            problem: ProblemSection::default(),
            experiment: ExperimentSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn cusp(&self) -> Result<CuspCharacteristic, CliError> {
        let section = &self.geometry.cusp;
        match section.kind.as_str() {
            "cone" => Ok(CuspCharacteristic::cone()),
            "power" => {
                let k = section.k.ok_or_else(|| {
                    CliError::Config("geometry.cusp.k is required for kind = \"power\"".into())
                })?;
                CuspCharacteristic::power(k).map_err(CliError::Geometry)
            }
            "tabulated" => {
                let samples = section.samples.clone().ok_or_else(|| {
                    CliError::Config(
                        "geometry.cusp.samples is required for kind = \"tabulated\"".into(),
                    )
                })?;
                CuspCharacteristic::tabulated(samples.iter().map(|s| (s[0], s[1])).collect())
                    .map_err(CliError::Geometry)
            }
            other => Err(CliError::Config(format!(
                "geometry.cusp.kind = {other:?} is not one of cone | power | tabulated"
            ))),
        }
    }

    pub fn geometry(&self) -> Result<GeometryConfig, CliError> {
        let shape = match self.geometry.shape.as_str() {
            "wedge_cylinder" => MeshShape::WedgeCylinder,
            "slit_torus" => MeshShape::SlitTorus,
            "neumann_interval" => MeshShape::NeumannInterval,
            other => {
                return Err(CliError::Config(format!(
                    "geometry.shape = {other:?} is not one of wedge_cylinder | slit_torus | \
                     neumann_interval"
                )))
            }
        };
        let config = GeometryConfig {
            shape,
            t_len: self.geometry.t_len,
            circumference: self.geometry.circumference,
            cusp: self.cusp()?,
            singular_radius: self.geometry.singular_radius,
            beta: self.geometry.beta,
            blend_width: self.geometry.blend_width,
        };
        config.validate().map_err(CliError::Geometry)?;
        Ok(config)
    }

    pub fn tolerances(&self) -> SolverTolerances {
        SolverTolerances {
            cg_tol: self.discretization.cg_tol,
            cg_max_iter: self.discretization.cg_max_iter,
            residual_tol: self.discretization.residual_tol,
            newton_max_iter: self.discretization.newton_max_iter,
        }
    }

    pub fn formulation(&self) -> Result<Formulation, CliError> {
        match self.problem.formulation.as_str() {
            "pme1" => Ok(Formulation::Pme1),
            "pme_div" => Ok(Formulation::PmeDiv),
            other => Err(CliError::Config(format!(
                "problem.formulation = {other:?} is not one of pme1 | pme_div"
            ))),
        }
    }

    pub fn partition(&self) -> Result<TimePartition, CliError> {
        if let Some(points) = &self.problem.breakpoints {
            return TimePartition::from_breakpoints(points.clone()).map_err(CliError::Geometry);
        }
        let steps = self.problem.steps.ok_or_else(|| {
            CliError::Config("problem needs either steps or breakpoints".into())
        })?;
        TimePartition::uniform(self.problem.t_final, steps).map_err(CliError::Geometry)
    }

    pub fn build_mesh(&self) -> Result<SingularMesh, CliError> {
        let geometry = self.geometry()?;
        let budget =
            self.discretization.cell_budget.unwrap_or(cuspflow_core::geometry::DEFAULT_CELL_BUDGET);
        cuspflow_core::build_mesh_with_budget(
            &geometry,
            self.discretization.n_t,
            self.discretization.n_theta,
            budget,
        )
        .map_err(CliError::Geometry)
    }

    pub fn initial_field(&self, mesh: &SingularMesh) -> Result<ScalarField, CliError> {
        let init = &self.problem.initial;
        match init.kind.as_str() {
            "zero" => Ok(ScalarField::zeros(mesh)),
            "constant" => {
                let value = init.value.ok_or_else(|| {
                    CliError::Config("problem.initial.value is required for kind = \"constant\"".into())
                })?;
                Ok(ScalarField::constant(mesh, value))
            }
            "gaussian_bump" => {
                let center = init.center.ok_or_else(|| {
                    CliError::Config("problem.initial.center is required for gaussian_bump".into())
                })?;
                let width = init.width.ok_or_else(|| {
                    CliError::Config("problem.initial.width is required for gaussian_bump".into())
                })?;
                let height = init.height.ok_or_else(|| {
                    CliError::Config("problem.initial.height is required for gaussian_bump".into())
                })?;
                let circ = mesh.config().circumference;
                Ok(ScalarField::from_fn(mesh, |t, th| {
                    let dt = t - center[0];
                    let mut dth = (th - center[1]).abs();
                    if dth > 0.5 * circ {
                        dth = circ - dth;
                    }
                    height * (-(dt * dt + dth * dth) / (2.0 * width * width)).exp()
                }))
            }
            "from_csv" => {
                let path = init.path.as_ref().ok_or_else(|| {
                    CliError::Config("problem.initial.path is required for from_csv".into())
                })?;
                read_field_csv(Path::new(path), mesh)
            }
            other => Err(CliError::Config(format!(
                "problem.initial.kind = {other:?} is not one of zero | constant | gaussian_bump \
                 | from_csv"
            ))),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        self.geometry()?;
        self.formulation()?;
        for (name, value) in [
            ("discretization.cg_tol", self.discretization.cg_tol),
            ("discretization.residual_tol", self.discretization.residual_tol),
            ("discretization.eig_tol", self.discretization.eig_tol),
            ("problem.lambda", self.problem.lambda),
        ] {
            // Negated so NaN fails validation too.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(value > 0.0) {
                return Err(CliError::Config(format!("{name} = {value} must be positive")));
            }
        }
        match self.discretization.delta_schedule.last() {
            Some(&last) if last <= 1e-10 => {}
            _ => {
                return Err(CliError::Config(
                    "discretization.delta_schedule must end at a value <= 1e-10".into(),
                ))
            }
        }
        if self.output.jobs == 0 {
            return Err(CliError::Config("output.jobs must be at least 1".into()));
        }
        if self.problem.initial.kind == "from_csv" {
            let path = self.problem.initial.path.as_ref().ok_or_else(|| {
                CliError::Config("problem.initial.path is required for from_csv".into())
            })?;
            if !Path::new(path).exists() {
                return Err(CliError::Config(format!(
                    "problem.initial.path {path:?} does not exist"
                )));
            }
        }
        Ok(())
    }
}

/// Parse and fully validate a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

/// Read a field dump (`i_t,i_theta,t,theta,u`) back onto a mesh.
pub fn read_field_csv(path: &Path, mesh: &SingularMesh) -> Result<ScalarField, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == "i_t,i_theta,t,theta,u" => {}
        other => {
            return Err(CliError::Config(format!(
                "{}: expected header i_t,i_theta,t,theta,u, got {other:?}",
                path.display()
            )))
        }
    }
    let mut field = ScalarField::zeros(mesh);
    let mut seen = 0usize;
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(CliError::Config(format!(
                "{}: row {} has {} columns, expected 5",
                path.display(),
                row + 2,
                cols.len()
            )));
        }
        let parse = |s: &str| -> Result<f64, CliError> {
            s.trim().parse::<f64>().map_err(|e| {
                CliError::Config(format!("{}: row {}: {e}", path.display(), row + 2))
            })
        };
        let i_t = parse(cols[0])? as usize;
        let i_theta = parse(cols[1])? as usize;
        if i_t >= mesh.n_t() || i_theta >= mesh.n_theta() {
            return Err(CliError::Config(format!(
                "{}: cell ({i_t}, {i_theta}) outside the {}x{} mesh",
                path.display(),
                mesh.n_t(),
                mesh.n_theta()
            )));
        }
        field.values_mut()[mesh.cell_index(i_t, i_theta)] = parse(cols[4])?;
        seen += 1;
    }
    if seen != mesh.n_cells() {
        return Err(CliError::Config(format!(
            "{}: {seen} cells read, mesh has {}",
            path.display(),
            mesh.n_cells()
        )));
    }
    Ok(field)
}
