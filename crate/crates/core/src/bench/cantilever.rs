//! Cantilever with tip moment and follower tip force: locking and
//! convergence study.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{
    field_error, state_table, write_json, ConvergenceReport, ConvergenceRow, RodField, Table,
    ERROR_SAMPLES, SCHEMA_VERSION,
};
use crate::discretization::{InterpolationKind, Mesh};
use crate::error::{Result, RodError};
use crate::rodmodel::{section_rectangular, Integration, LoadCase, PointLoad, RodModel};
use crate::solvers::{solve_static, BoundaryConditions, StaticOptions, StaticSolution};

pub const CANTILEVER_LENGTH: f64 = 1e3;

/// Mesh and formulation of a reference solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    pub kind: InterpolationKind,
    pub order: usize,
    pub n_el: usize,
    pub integration: Integration,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        Self::for_study(Integration::Reduced, false)
    }
}

impl ReferenceSpec {
    /// SE3 for the full-integration study, quadratic R12 for the reduced one;
    /// 512 / 256 elements with `fine`, 128 otherwise.
    pub fn for_study(integration: Integration, fine: bool) -> Self {
        match integration {
            Integration::Full => Self {
                kind: InterpolationKind::SE3,
                order: 1,
                n_el: if fine { 512 } else { 128 },
                integration: Integration::Full,
            },
            Integration::Reduced => Self {
                kind: InterpolationKind::R12,
                order: 2,
                n_el: if fine { 256 } else { 128 },
                integration: Integration::Reduced,
            },
        }
    }

    /// Expected convergence order of the reference formulation.
    pub fn expected_order(&self) -> i32 {
        if self.kind == InterpolationKind::R12
            && self.order == 2
            && self.integration == Integration::Reduced
        {
            3
        } else {
            2
        }
    }

    fn tag(&self) -> String {
        format!(
            "{}_p{}_{}_nel{}",
            self.kind, self.order, self.integration, self.n_el
        )
    }
}

/// Reference solution as cached on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSolution {
    pub schema_version: u32,
    pub spec: ReferenceSpec,
    pub slenderness: f64,
    pub n_load_steps: usize,
    pub q: Vec<f64>,
    pub self_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CantileverOptions {
    pub kind: InterpolationKind,
    pub order: usize,
    pub integration: Integration,
    pub slenderness: f64,
    pub n_els: Vec<usize>,
    pub n_load_steps: usize,
    pub max_iter: usize,
    pub reference: ReferenceSpec,
    /// Cache file of the reference solution.
    pub reference_path: Option<PathBuf>,
    pub error_samples: usize,
    /// Estimate the reference error and exclude rows below 100 times it.
    pub plateau_guard: bool,
}

impl Default for CantileverOptions {
    fn default() -> Self {
        Self {
            kind: InterpolationKind::SE3,
            order: 1,
            integration: Integration::Reduced,
            slenderness: 1e2,
            n_els: vec![4, 8, 16, 32, 64],
            n_load_steps: 50,
            max_iter: 30,
            reference: ReferenceSpec::default(),
            reference_path: None,
            error_samples: ERROR_SAMPLES,
            plateau_guard: true,
        }
    }
}

/// Newton tolerance for slenderness `rho`: 1e-8 at 1e1 down to 1e-14 at 1e4.
pub fn cantilever_atol(slenderness: f64) -> f64 {
    10f64.powf(-(6.0 + 2.0 * slenderness.log10()))
}

/// Square section of width `L / rho`, `E = 1`, `G = 1/2`, clamped at
/// `xi = 0`, with tip moment `(0, 0, pi k_b / (2L))` and follower force
/// `A (0, 0, pi k_b / (2L^2))`.
pub fn cantilever_model(
    kind: InterpolationKind,
    order: usize,
    n_el: usize,
    integration: Integration,
    slenderness: f64,
) -> Result<RodModel> {
    if !(slenderness > 0.0) {
        return Err(RodError::InvalidModel(
            "slenderness must be positive".into(),
        ));
    }
    let l = CANTILEVER_LENGTH;
    let w = l / slenderness;
    let section = section_rectangular(w, w, 1.0, 1.0, 0.5);
    let k_b = section.law.c_kappa[1];
    let loads = LoadCase::default().with_last(PointLoad {
        moment: [0.0, 0.0, 0.5 * PI * k_b / l],
        follower_force: [0.0, 0.0, 0.5 * PI * k_b / (l * l)],
        ..PointLoad::default()
    });
    let mesh = Mesh::new(n_el, order)?;
    Ok(RodModel::straight(mesh, kind, section, l, integration)?.with_loads(loads))
}

pub fn solve_cantilever(
    kind: InterpolationKind,
    order: usize,
    n_el: usize,
    integration: Integration,
    slenderness: f64,
    n_load_steps: usize,
    max_iter: usize,
) -> Result<(RodField, StaticSolution)> {
    let model = cantilever_model(kind, order, n_el, integration, slenderness)?;
    let options = StaticOptions {
        n_load_steps,
        atol: cantilever_atol(slenderness),
        max_iter,
        complement: true,
    };
    let sol = solve_static(&model, &BoundaryConditions::cantilever(), None, &options)?;
    Ok((RodField::new(*model.mesh(), kind, sol.q.clone()), sol))
}

/// Error of the reference estimated from its half-resolution counterpart:
/// `e(ref/2, ref) / (2^s - 1)` with `s` the expected order.
pub fn reference_self_error(
    spec: &ReferenceSpec,
    slenderness: f64,
    reference: &RodField,
    n_load_steps: usize,
    max_iter: usize,
    samples: usize,
) -> Result<f64> {
    let (coarse, _) = solve_cantilever(
        spec.kind,
        spec.order,
        (spec.n_el / 2).max(1),
        spec.integration,
        slenderness,
        n_load_steps,
        max_iter,
    )?;
    let e = field_error(&coarse, reference, samples)?;
    Ok(e / (2f64.powi(spec.expected_order()) - 1.0))
}

fn load_reference(path: &Path, opts: &CantileverOptions) -> Option<ReferenceSolution> {
    let text = std::fs::read_to_string(path).ok()?;
    let r: ReferenceSolution = serde_json::from_str(&text).ok()?;
    let matches = r.schema_version == SCHEMA_VERSION
        && r.spec == opts.reference
        && r.slenderness == opts.slenderness
        && r.n_load_steps == opts.n_load_steps
        && (r.self_error.is_some() || !opts.plateau_guard);
    matches.then_some(r)
}

fn reference_solution(opts: &CantileverOptions, cache: Option<&Path>) -> Result<ReferenceSolution> {
    if let Some(path) = cache {
        if let Some(r) = load_reference(path, opts) {
            return Ok(r);
        }
    }
    let spec = opts.reference;
    let (field, _) = solve_cantilever(
        spec.kind,
        spec.order,
        spec.n_el,
        spec.integration,
        opts.slenderness,
        opts.n_load_steps,
        opts.max_iter,
    )?;
    let self_error = if opts.plateau_guard {
        Some(reference_self_error(
            &spec,
            opts.slenderness,
            &field,
            opts.n_load_steps,
            opts.max_iter,
            opts.error_samples,
        )?)
    } else {
        None
    };
    let r = ReferenceSolution {
        schema_version: SCHEMA_VERSION,
        spec,
        slenderness: opts.slenderness,
        n_load_steps: opts.n_load_steps,
        q: field.q,
        self_error,
    };
    if let Some(path) = cache {
        write_json(path, &r)?;
    }
    Ok(r)
}

#[derive(Debug, Clone)]
pub struct CantileverOutput {
    pub report: ConvergenceReport,
    pub solutions: Vec<RodField>,
    pub reference: RodField,
}

impl CantileverOutput {
    pub fn convergence_table(&self) -> Table {
        let mut t = Table::new(&[
            ("n_el", "1"),
            ("n_nodes", "1"),
            ("n_dof", "1"),
            ("e_theta", "1"),
            ("newton_iterations", "1"),
            ("fitted", "1"),
        ]);
        for r in &self.report.rows {
            t.push(vec![
                r.n_el as f64,
                r.n_nodes as f64,
                r.n_dof as f64,
                r.error,
                r.newton_iterations as f64,
                if r.fitted { 1.0 } else { 0.0 },
            ]);
        }
        t
    }

    fn stem(&self) -> String {
        let r = &self.report;
        format!("cantilever_{}_p{}_{}", r.kind, r.order, r.integration)
    }

    /// Writes the convergence table, the JSON report and one nodal state per mesh.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let stem = self.stem();
        let mut written = Vec::new();
        let p = dir.join(format!("{stem}_convergence.csv"));
        self.convergence_table().write(&p)?;
        written.push(p);
        let p = dir.join(format!("{stem}_report.json"));
        write_json(&p, &self.report)?;
        written.push(p);
        for f in &self.solutions {
            let p = dir.join(format!("{stem}_nel{}_state.csv", f.mesh.n_el()));
            state_table(&f.mesh, &f.q).write(&p)?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Solves the cantilever on every mesh of the sweep and measures the
/// relative-twist error against the reference. Meshes run in parallel;
/// results are merged in sweep order. The reference is cached in `cache_dir`
/// unless a cache path is set.
pub fn run_cantilever(
    opts: &CantileverOptions,
    cache_dir: Option<&Path>,
) -> Result<CantileverOutput> {
    if opts.n_els.is_empty() {
        return Err(RodError::InvalidModel("empty mesh sweep".into()));
    }
    let mut n_els = opts.n_els.clone();
    n_els.sort_unstable();
    n_els.dedup();
    let default_cache = cache_dir.map(|d| {
        d.join(format!(
            "cantilever_reference_{}_rho{:e}.json",
            opts.reference.tag(),
            opts.slenderness
        ))
    });
    let cache = opts.reference_path.clone().or(default_cache);
    let reference = reference_solution(opts, cache.as_deref())?;
    let spec = reference.spec;
    let ref_field = RodField::new(Mesh::new(spec.n_el, spec.order)?, spec.kind, reference.q);

    let results: Vec<Result<(RodField, StaticSolution, f64)>> = std::thread::scope(|s| {
        let handles: Vec<_> = n_els
            .iter()
            .map(|&n| {
                s.spawn(move || {
                    let start = Instant::now();
                    let (f, sol) = solve_cantilever(
                        opts.kind,
                        opts.order,
                        n,
                        opts.integration,
                        opts.slenderness,
                        opts.n_load_steps,
                        opts.max_iter,
                    )?;
                    Ok((f, sol, start.elapsed().as_secs_f64()))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });

    let mut rows = Vec::new();
    let mut solutions = Vec::new();
    for r in results {
        let (field, sol, runtime) = r?;
        let error = field_error(&field, &ref_field, opts.error_samples)?;
        rows.push(ConvergenceRow {
            n_el: field.mesh.n_el(),
            n_nodes: field.mesh.n_nodes(),
            n_dof: field.mesh.n_dof(),
            error,
            newton_iterations: sol.total_iterations(),
            runtime_s: runtime,
            fitted: false,
        });
        solutions.push(field);
    }
    let mut report = ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        kind: opts.kind,
        order: opts.order,
        integration: opts.integration,
        slenderness: opts.slenderness,
        reference: spec,
        reference_self_error: reference.self_error,
        rows,
        slope: None,
    };
    report.fit();
    Ok(CantileverOutput {
        report,
        solutions,
        reference: ref_field,
    })
}
