//! JSON experiment configuration.
//!
//! Minimal static run:
//!
//! ```json
//! {
//!   "experiment": "static",
//!   "kind": "se3",
//!   "n_el": 8,
//!   "rod": {
//!     "length": 1.0,
//!     "section": { "shape": "circular", "radius": 0.01, "density": 1.0, "young": 1e6, "shear": 5e5 }
//!   },
//!   "supports": { "first": "clamped" },
//!   "loads": { "last": { "moment": [0.0, 0.0, 1.0] } }
//! }
//! ```
//!
//! Unknown keys are rejected and errors name the offending path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::cantilever::{run_cantilever, CantileverOptions, ReferenceSpec};
use super::heavy_top::{run_heavy_top, HeavyTopOptions, HeavyTopParameters};
use super::quarter_circle::run_quarter_circle;
use super::{state_table, write_json, Table, ERROR_SAMPLES, SCHEMA_VERSION};
use crate::discretization::{node_position, InterpolationKind, Mesh, NODE_DOF};
use crate::error::{Result, RodError};
use crate::rodmodel::{
    section_circular, section_rectangular, CrossSection, Integration, LoadCase, RodModel,
};
use crate::solvers::{
    integrate_dynamic, solve_static, BoundaryConditions, DynamicOptions, DynamicSystem,
    StaticOptions, StepControl,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    QuarterCircle,
    Cantilever,
    HeavyTop,
    Static,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum SectionSettings {
    Circular {
        radius: f64,
        density: f64,
        young: f64,
        shear: f64,
    },
    Rectangular {
        width: f64,
        height: f64,
        density: f64,
        young: f64,
        shear: f64,
    },
}

impl SectionSettings {
    pub fn build(&self) -> CrossSection {
        match *self {
            SectionSettings::Circular {
                radius,
                density,
                young,
                shear,
            } => section_circular(radius, density, young, shear),
            SectionSettings::Rectangular {
                width,
                height,
                density,
                young,
                shear,
            } => section_rectangular(width, height, density, young, shear),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RodSettings {
    /// Length of the straight reference rod along `e_x`.
    #[serde(default)]
    pub length: Option<f64>,
    pub section: SectionSettings,
    /// Nodal reference coordinates `[x, y, z, psi_x, psi_y, psi_z]`,
    /// replacing the straight rod.
    #[serde(default)]
    pub reference: Option<Vec<[f64; 6]>>,
    #[serde(default = "default_stiffness_factor")]
    pub stiffness_factor: f64,
}

fn default_stiffness_factor() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StaticSettings {
    pub n_load_steps: usize,
    /// Newton tolerance; the cantilever uses its slenderness table when absent.
    pub atol: Option<f64>,
    pub max_iter: usize,
}

impl Default for StaticSettings {
    fn default() -> Self {
        Self {
            n_load_steps: 50,
            atol: None,
            max_iter: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicSettings {
    pub t_end: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub h_max: Option<f64>,
    /// Classical Runge-Kutta with this step instead of adaptive stepping.
    pub fixed_step: Option<f64>,
    pub n_samples: usize,
    /// Rigid initial velocity: inertial angular velocity about the origin.
    pub angular_velocity: [f64; 3],
    pub linear_velocity: [f64; 3],
}

impl Default for DynamicSettings {
    fn default() -> Self {
        Self {
            t_end: None,
            rtol: 1e-8,
            atol: 1e-8,
            h_max: None,
            fixed_step: None,
            n_samples: 500,
            angular_velocity: [0.0; 3],
            linear_velocity: [0.0; 3],
        }
    }
}

impl DynamicSettings {
    fn control(&self, t_end: f64) -> StepControl {
        match self.fixed_step {
            Some(h) => StepControl::Fixed { h },
            None => StepControl::Adaptive {
                rtol: self.rtol,
                atol: self.atol,
                h_max: self.h_max.unwrap_or(t_end),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub name: Option<String>,
    /// Element kind; the quarter circle runs every kind when absent.
    #[serde(default)]
    pub kind: Option<InterpolationKind>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub n_el: Option<usize>,
    /// Mesh sweep of the cantilever study.
    #[serde(default)]
    pub n_els: Option<Vec<usize>>,
    #[serde(default = "default_integration")]
    pub integration: Integration,
    #[serde(default)]
    pub slenderness: Option<f64>,
    #[serde(default)]
    pub reference: Option<ReferenceSpec>,
    /// Use the 512 / 256 element cantilever references.
    #[serde(default)]
    pub fine_reference: bool,
    #[serde(default)]
    pub reference_path: Option<PathBuf>,
    #[serde(default)]
    pub rod: Option<RodSettings>,
    #[serde(default)]
    pub loads: LoadCase,
    #[serde(default)]
    pub supports: BoundaryConditions,
    #[serde(default)]
    pub static_solver: StaticSettings,
    #[serde(default)]
    pub dynamic: DynamicSettings,
    #[serde(default)]
    pub heavy_top: Option<HeavyTopParameters>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_order() -> usize {
    1
}

fn default_integration() -> Integration {
    Integration::Reduced
}

fn config_error(path: &str, message: impl Into<String>) -> RodError {
    RodError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_error(&path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| RodError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

impl ExperimentConfig {
    /// Minimal configuration of `experiment` with all defaults.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment,
            name: None,
            kind: None,
            order: 1,
            n_el: None,
            n_els: None,
            integration: Integration::Reduced,
            slenderness: None,
            reference: None,
            fine_reference: false,
            reference_path: None,
            rod: None,
            loads: LoadCase::default(),
            supports: BoundaryConditions::default(),
            static_solver: StaticSettings::default(),
            dynamic: DynamicSettings::default(),
            heavy_top: None,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_error(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        if self.order == 0 || self.order > 2 {
            return Err(config_error(
                "order",
                format!("order {} not in {{1, 2}}", self.order),
            ));
        }
        if let Some(kind) = self.kind {
            if !kind.supports_order(self.order) {
                return Err(config_error(
                    "order",
                    format!("kind {kind} does not support order {}", self.order),
                ));
            }
        }
        if self.n_el == Some(0) {
            return Err(config_error("n_el", "must be at least 1"));
        }
        if let Some(list) = &self.n_els {
            if list.is_empty() || list.contains(&0) {
                return Err(config_error(
                    "n_els",
                    "must be a non-empty list of positive sizes",
                ));
            }
        }
        if let Some(rho) = self.slenderness {
            if !(rho > 0.0) {
                return Err(config_error("slenderness", "must be positive"));
            }
        }
        if self.static_solver.n_load_steps == 0 {
            return Err(config_error(
                "static_solver.n_load_steps",
                "must be at least 1",
            ));
        }
        if let Some(h) = self.dynamic.fixed_step {
            if !(h > 0.0) {
                return Err(config_error("dynamic.fixed_step", "must be positive"));
            }
        }
        match self.experiment {
            ExperimentKind::Static | ExperimentKind::Dynamic => {
                let rod = self
                    .rod
                    .as_ref()
                    .ok_or_else(|| config_error("rod", "required for static and dynamic runs"))?;
                if rod.length.is_none() == rod.reference.is_none() {
                    return Err(config_error(
                        "rod",
                        "give exactly one of `length` and `reference`",
                    ));
                }
                if let Some(l) = rod.length {
                    if !(l > 0.0) {
                        return Err(config_error("rod.length", "must be positive"));
                    }
                }
                if self.experiment == ExperimentKind::Dynamic && self.dynamic.t_end.is_none() {
                    return Err(config_error("dynamic.t_end", "required for dynamic runs"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn kind_or_default(&self) -> InterpolationKind {
        self.kind.unwrap_or(if self.order == 2 {
            InterpolationKind::R12
        } else {
            InterpolationKind::SE3
        })
    }

    fn stem(&self, default: &str) -> String {
        self.name.clone().unwrap_or_else(|| default.to_string())
    }

    /// Cantilever study options described by this configuration.
    pub fn cantilever_options(&self) -> CantileverOptions {
        let defaults = CantileverOptions::default();
        CantileverOptions {
            kind: self.kind_or_default(),
            order: self.order,
            integration: self.integration,
            slenderness: self.slenderness.unwrap_or(defaults.slenderness),
            n_els: match (&self.n_els, self.n_el) {
                (Some(list), _) => list.clone(),
                (None, Some(n)) => vec![n],
                (None, None) => defaults.n_els,
            },
            n_load_steps: self.static_solver.n_load_steps,
            max_iter: self.static_solver.max_iter,
            reference: self
                .reference
                .unwrap_or_else(|| ReferenceSpec::for_study(self.integration, self.fine_reference)),
            reference_path: self.reference_path.clone(),
            error_samples: ERROR_SAMPLES,
            plateau_guard: true,
        }
    }

    pub fn heavy_top_options(&self) -> HeavyTopOptions {
        let defaults = HeavyTopOptions::default();
        let params = self.heavy_top.unwrap_or_default();
        let t_end = self.dynamic.t_end.unwrap_or_else(|| params.period());
        let control = match self.dynamic.fixed_step {
            Some(h) => StepControl::Fixed { h },
            None => StepControl::Adaptive {
                rtol: self.dynamic.rtol,
                atol: self.dynamic.atol,
                h_max: self.dynamic.h_max.unwrap_or(match defaults.control {
                    StepControl::Adaptive { h_max, .. } => h_max,
                    StepControl::Fixed { h } => h,
                }),
            },
        };
        HeavyTopOptions {
            params,
            control,
            t_end: Some(t_end),
            n_samples: self.dynamic.n_samples,
        }
    }

    fn build_model(&self) -> Result<RodModel> {
        let rod = self
            .rod
            .as_ref()
            .ok_or_else(|| config_error("rod", "missing"))?;
        let kind = self.kind_or_default();
        let section = rod
            .section
            .build()
            .with_scaled_stiffness(rod.stiffness_factor);
        let model = match (&rod.reference, rod.length) {
            (Some(nodes), _) => {
                let n_el = self.n_el.unwrap_or(1);
                let mesh = Mesh::new(n_el, self.order)?;
                if nodes.len() != mesh.n_nodes() {
                    return Err(config_error(
                        "rod.reference",
                        format!("expected {} nodes, got {}", mesh.n_nodes(), nodes.len()),
                    ));
                }
                let q0: Vec<f64> = nodes.iter().flatten().copied().collect();
                RodModel::new(mesh, kind, section, q0, self.integration)?
            }
            (None, Some(length)) => {
                let mesh = Mesh::new(self.n_el.unwrap_or(8), self.order)?;
                RodModel::straight(mesh, kind, section, length, self.integration)?
            }
            (None, None) => return Err(config_error("rod", "missing length or reference")),
        };
        Ok(model.with_loads(self.loads))
    }
}

/// Files produced by a run and a short JSON summary.
#[derive(Debug, Clone)]
pub struct GenericOutput {
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

/// Runs the experiment described by `cfg`, writing into `out_dir`
/// (falling back to the configured output directory, then `out`).
pub fn run_generic(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<GenericOutput> {
    cfg.validate()?;
    let dir: PathBuf = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match cfg.experiment {
        ExperimentKind::QuarterCircle => {
            let kinds = match cfg.kind {
                Some(k) => vec![k],
                None => vec![
                    InterpolationKind::R12,
                    InterpolationKind::R3xSO3,
                    InterpolationKind::SE3,
                ],
            };
            let n_el = cfg.n_el.unwrap_or(1);
            let out = run_quarter_circle(cfg.order, n_el, &kinds, Some(&dir))?;
            let files: Vec<PathBuf> = out.iter().filter_map(|o| o.2.clone()).collect();
            Ok(GenericOutput {
                summary: serde_json::json!({
                    "experiment": "quarter-circle",
                    "kinds": out.iter().map(|o| o.0.name()).collect::<Vec<_>>(),
                    "order": cfg.order,
                    "n_el": n_el,
                }),
                files,
            })
        }
        ExperimentKind::Cantilever => {
            let opts = cfg.cantilever_options();
            let out = run_cantilever(&opts, Some(&dir))?;
            let files = out.write(&dir)?;
            Ok(GenericOutput {
                summary: serde_json::to_value(&out.report)
                    .map_err(|e| RodError::Io(e.to_string()))?,
                files,
            })
        }
        ExperimentKind::HeavyTop => {
            let opts = cfg.heavy_top_options();
            let out = run_heavy_top(&opts)?;
            let files = out.write(&dir, &cfg.stem("heavy_top"))?;
            Ok(GenericOutput {
                summary: serde_json::json!({
                    "experiment": "heavy-top",
                    "max_deviation": out.max_deviation,
                    "energy_drift": out.energy_drift,
                    "accepted_steps": out.stats.accepted,
                }),
                files,
            })
        }
        ExperimentKind::Static => run_static(cfg, &dir),
        ExperimentKind::Dynamic => run_dynamic(cfg, &dir),
    }
}

fn run_static(cfg: &ExperimentConfig, dir: &Path) -> Result<GenericOutput> {
    let model = cfg.build_model()?;
    let options = StaticOptions {
        n_load_steps: cfg.static_solver.n_load_steps,
        atol: cfg
            .static_solver
            .atol
            .unwrap_or(StaticOptions::default().atol),
        max_iter: cfg.static_solver.max_iter,
        complement: true,
    };
    let sol = solve_static(&model, &cfg.supports, None, &options)?;
    let stem = cfg.stem("static");
    let state = dir.join(format!("{stem}_state.csv"));
    state_table(model.mesh(), &sol.q).write(&state)?;
    let mut steps = Table::new(&[("load_factor", "1"), ("iterations", "1"), ("residual", "N")]);
    for s in &sol.steps {
        steps.push(vec![s.load_factor, s.iterations as f64, s.residual]);
    }
    let steps_path = dir.join(format!("{stem}_steps.csv"));
    steps.write(&steps_path)?;
    let summary = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": "static",
        "n_dof": model.n_dof(),
        "newton_iterations": sol.total_iterations(),
        "strain_energy": model.strain_energy(&sol.q)?,
    });
    let summary_path = dir.join(format!("{stem}_summary.json"));
    write_json(&summary_path, &summary)?;
    Ok(GenericOutput {
        files: vec![state, steps_path, summary_path],
        summary,
    })
}

fn run_dynamic(cfg: &ExperimentConfig, dir: &Path) -> Result<GenericOutput> {
    let model = cfg.build_model()?;
    let dyn_cfg = &cfg.dynamic;
    let t_end = dyn_cfg
        .t_end
        .ok_or_else(|| config_error("dynamic.t_end", "missing"))?;
    let q0 = model.reference_configuration().to_vec();
    let mut u0 = model.rigid_velocity(
        &q0,
        &dyn_cfg.linear_velocity.into(),
        &dyn_cfg.angular_velocity.into(),
    );
    for i in cfg.supports.fixed_dofs(model.mesh()) {
        u0[i] = 0.0;
    }
    let last = model.mesh().n_nodes() - 1;
    let mut system = DynamicSystem::new(model, &cfg.supports)?;
    let n = dyn_cfg.n_samples.max(1);
    let traj = integrate_dynamic(
        &mut system,
        &q0,
        &u0,
        &DynamicOptions {
            t_end,
            control: dyn_cfg.control(t_end),
            sample_times: (0..=n).map(|i| t_end * i as f64 / n as f64).collect(),
        },
    )?;
    let mut table = Table::new(&[
        ("t", "s"),
        ("tip_x", "m"),
        ("tip_y", "m"),
        ("tip_z", "m"),
        ("kinetic", "J"),
        ("strain", "J"),
        ("potential", "J"),
        ("total", "J"),
    ]);
    for ((t, q), u) in traj.times.iter().zip(&traj.q).zip(&traj.u) {
        let tip = node_position(q, last);
        let e = system.energies(q, u)?;
        table.push(vec![
            *t,
            tip.x,
            tip.y,
            tip.z,
            e.kinetic,
            e.strain,
            e.load,
            e.total(),
        ]);
    }
    let stem = cfg.stem("dynamic");
    let path = dir.join(format!("{stem}_trajectory.csv"));
    table.write(&path)?;
    let final_state = dir.join(format!("{stem}_final_state.csv"));
    let q_end = traj.q.last().expect("at least one sample");
    state_table(system.model().mesh(), q_end).write(&final_state)?;
    debug_assert_eq!(q_end.len() % NODE_DOF, 0);
    Ok(GenericOutput {
        files: vec![path, final_state],
        summary: serde_json::json!({
            "experiment": "dynamic",
            "accepted_steps": traj.stats.accepted,
            "rejected_steps": traj.stats.rejected,
            "complement_events": traj.events.len(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_key_with_path() {
        let err = parse_config(r#"{"experiment": "static", "rod": {"lenght": 1.0}}"#).unwrap_err();
        match err {
            RodError::Config { path, message } => {
                assert_eq!(path, "rod.lenght");
                assert!(message.contains("lenght"), "{message}");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rejects_bad_kind_name() {
        let err = parse_config(r#"{"experiment": "cantilever", "kind": "se4"}"#).unwrap_err();
        assert!(
            matches!(&err, RodError::Config { path, .. } if path == "kind"),
            "{err:?}"
        );
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_incompatible_order() {
        let err =
            parse_config(r#"{"experiment": "cantilever", "kind": "se3", "order": 2}"#).unwrap_err();
        assert!(matches!(&err, RodError::Config { path, .. } if path == "order"));
    }

    #[test]
    fn nested_section_error_path() {
        let text = r#"{"experiment": "static", "rod": {"length": 1.0,
            "section": {"shape": "circular", "radius": 0.1, "density": 1.0, "young": 1.0}}}"#;
        let err = parse_config(text).unwrap_err();
        match err {
            RodError::Config { path, message } => {
                assert_eq!(path, "rod.section");
                assert!(message.contains("shear"), "{message}");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn cantilever_defaults() {
        let cfg = parse_config(r#"{"experiment": "cantilever"}"#).unwrap();
        let opts = cfg.cantilever_options();
        assert_eq!(opts, CantileverOptions::default());
    }
}
