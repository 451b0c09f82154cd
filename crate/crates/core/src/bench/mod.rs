//! Experiment drivers: quarter-circle strains, cantilever convergence,
//! heavy-top dynamics and generic runs from JSON configuration files.
//!
//! Every CSV starts with two comment lines, `# schema_version: N` and
//! `# units: ...`, followed by the header row.

mod cantilever;
mod config;
mod heavy_top;
mod quarter_circle;

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use cantilever::{
    cantilever_atol, cantilever_model, reference_self_error, run_cantilever, solve_cantilever,
    CantileverOptions, CantileverOutput, ReferenceSolution, ReferenceSpec,
};
pub use config::{
    load_config, parse_config, run_generic, DynamicSettings, ExperimentConfig, ExperimentKind,
    GenericOutput, RodSettings, SectionSettings, StaticSettings,
};
pub use heavy_top::{
    heavy_top_initial_state, heavy_top_model, heavy_top_supports, rigid_top_tips, run_heavy_top,
    HeavyTopOptions, HeavyTopOutput, HeavyTopParameters,
};
pub use quarter_circle::{quarter_circle_nodes, quarter_circle_strains, run_quarter_circle};

use crate::discretization::{frame_at, InterpolationKind, Mesh};
use crate::error::{Result, RodError};
use crate::liegroup::{log_se3, FrameTransform};

pub const SCHEMA_VERSION: u32 = 1;

/// Default number of samples of the relative-twist error.
pub const ERROR_SAMPLES: usize = 100;

/// Discrete rod field that can be sampled at any `xi` in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RodField {
    pub mesh: Mesh,
    pub kind: InterpolationKind,
    pub q: Vec<f64>,
}

impl RodField {
    pub fn new(mesh: Mesh, kind: InterpolationKind, q: Vec<f64>) -> Self {
        Self { mesh, kind, q }
    }

    pub fn frame(&self, xi: f64) -> Result<FrameTransform> {
        frame_at(&self.mesh, self.kind, &self.q, xi)
    }
}

/// Relative-twist error `(1/k) sqrt(sum |log(H^-1 H*)|^2)` over
/// `xi_i = i / (k - 1)`.
pub fn error_twist<F, G>(solution: F, reference: G, k: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<FrameTransform>,
    G: Fn(f64) -> Result<FrameTransform>,
{
    if k < 2 {
        return Err(RodError::InvalidModel(
            "error norm needs at least two samples".into(),
        ));
    }
    let mut sum = 0.0;
    for i in 0..k {
        let xi = i as f64 / (k - 1) as f64;
        let h = solution(xi)?;
        let h_ref = reference(xi)?;
        sum += log_se3(&h.inverse().compose(&h_ref))?.norm_squared();
    }
    Ok(sum.sqrt() / k as f64)
}

/// [`error_twist`] between two rod fields.
pub fn field_error(solution: &RodField, reference: &RodField, k: usize) -> Result<f64> {
    error_twist(|xi| solution.frame(xi), |xi| reference.frame(xi), k)
}

/// Least-squares slope `-d log e / d log n_el`; `None` with fewer than two
/// usable points.
pub fn fit_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e > 0.0 && e.is_finite())
        .map(|(n, e)| ((*n as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}

/// One mesh of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_el: usize,
    pub n_nodes: usize,
    pub n_dof: usize,
    pub error: f64,
    pub newton_iterations: usize,
    pub runtime_s: f64,
    /// Whether the row entered the slope fit.
    pub fitted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub kind: InterpolationKind,
    pub order: usize,
    pub integration: crate::rodmodel::Integration,
    pub slenderness: f64,
    pub reference: ReferenceSpec,
    pub reference_self_error: Option<f64>,
    pub rows: Vec<ConvergenceRow>,
    pub slope: Option<f64>,
}

impl ConvergenceReport {
    /// Marks rows above the plateau guard and fits the slope over them.
    pub fn fit(&mut self) {
        let floor = self.reference_self_error.map_or(0.0, |e| 1e2 * e);
        for row in &mut self.rows {
            row.fitted = row.error > floor;
        }
        let pts: Vec<(usize, f64)> = self
            .rows
            .iter()
            .filter(|r| r.fitted)
            .map(|r| (r.n_el, r.error))
            .collect();
        self.slope = fit_slope(&pts);
    }
}

/// CSV table with a schema line and a units line.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub units: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.0.to_string()).collect(),
            units: columns.iter().map(|c| c.1.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = Vec::new();
        writeln!(out, "# schema_version: {SCHEMA_VERSION}")?;
        let units: Vec<String> = self
            .columns
            .iter()
            .zip(&self.units)
            .map(|(c, u)| format!("{c}={u}"))
            .collect();
        writeln!(out, "# units: {}", units.join(" "))?;
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.columns)
                .map_err(|e| RodError::Io(e.to_string()))?;
            for row in &self.rows {
                w.write_record(row.iter().map(|v| format!("{v:e}")))
                    .map_err(|e| RodError::Io(e.to_string()))?;
            }
            w.flush()?;
        }
        String::from_utf8(out).map_err(|e| RodError::Io(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_csv()?)
    }

    /// Parses a table written by [`Table::to_csv`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut units = Vec::new();
        let mut body = String::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# units: ") {
                units = rest
                    .split_whitespace()
                    .map(|s| s.split_once('=').map_or("", |p| p.1).to_string())
                    .collect();
            } else if !line.starts_with('#') {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let columns: Vec<String> = rdr
            .headers()
            .map_err(|e| RodError::Io(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| RodError::Io(e.to_string()))?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| RodError::Io(e.to_string())))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if units.len() != columns.len() {
            units = vec![String::new(); columns.len()];
        }
        Ok(Self {
            columns,
            units,
            rows,
        })
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| RodError::Io(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

/// Nodal coordinates of a configuration as a table.
pub fn state_table(mesh: &Mesh, q: &[f64]) -> Table {
    let mut t = Table::new(&[
        ("xi", "1"),
        ("x", "m"),
        ("y", "m"),
        ("z", "m"),
        ("psi_x", "rad"),
        ("psi_y", "rad"),
        ("psi_z", "rad"),
    ]);
    for i in 0..mesh.n_nodes() {
        let mut row = vec![mesh.node_parameter(i)];
        row.extend_from_slice(&q[6 * i..6 * i + 6]);
        t.push(row);
    }
    t
}
