//! Newton's method with incremental load stepping.

use super::{assemble_jacobian, complement_nodes, BoundaryConditions};
use crate::error::{Result, RodError};
use crate::rodmodel::RodModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticOptions {
    /// Number of equal load increments.
    pub n_load_steps: usize,
    /// Tolerance on the max-norm of the residual of the free coordinates.
    pub atol: f64,
    /// Newton updates allowed per load step.
    pub max_iter: usize,
    /// Replace nodal rotation vectors longer than pi by their complement
    /// after each converged step.
    pub complement: bool,
}

impl Default for StaticOptions {
    fn default() -> Self {
        Self {
            n_load_steps: 50,
            atol: 1e-10,
            max_iter: 30,
            complement: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadStepRecord {
    pub load_factor: f64,
    /// Residual evaluations in this step, including the converged one.
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct StaticSolution {
    pub q: Vec<f64>,
    pub steps: Vec<LoadStepRecord>,
    /// Residual max-norms of every evaluation, in order.
    pub residual_history: Vec<f64>,
}

impl StaticSolution {
    pub fn total_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.iterations).sum()
    }
}

/// Residual `f_int(q) + f_ext(q, load_factor)` on the free coordinates.
pub fn residual_static(
    model: &RodModel,
    q: &[f64],
    load_factor: f64,
    free: &[usize],
) -> Result<Vec<f64>> {
    let fi = model.f_int(q)?;
    let fe = model.f_ext(q, load_factor);
    Ok(free.iter().map(|&i| fi[i] + fe[i]).collect())
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Equilibrium under the full load, reached in `n_load_steps` increments
/// from `q_init` (the reference configuration when `None`).
pub fn solve_static(
    model: &RodModel,
    bcs: &BoundaryConditions,
    q_init: Option<&[f64]>,
    options: &StaticOptions,
) -> Result<StaticSolution> {
    if options.n_load_steps == 0 {
        return Err(RodError::InvalidModel(
            "at least one load step required".into(),
        ));
    }
    let free = bcs.free_dofs(model.mesh())?;
    let mut q = q_init.unwrap_or(model.reference_configuration()).to_vec();
    if q.len() != model.n_dof() {
        return Err(RodError::Dimension {
            expected: model.n_dof(),
            got: q.len(),
        });
    }
    let mut steps = Vec::with_capacity(options.n_load_steps);
    let mut history = Vec::new();
    for step in 1..=options.n_load_steps {
        let factor = step as f64 / options.n_load_steps as f64;
        let mut evaluations = 0;
        loop {
            let r = residual_static(model, &q, factor, &free)?;
            evaluations += 1;
            let norm = max_norm(&r);
            history.push(norm);
            if norm <= options.atol {
                steps.push(LoadStepRecord {
                    load_factor: factor,
                    iterations: evaluations,
                    residual: norm,
                });
                break;
            }
            if evaluations > options.max_iter || !norm.is_finite() {
                return Err(RodError::NoConvergence {
                    step,
                    iterations: evaluations,
                    residual: norm,
                });
            }
            let k = assemble_jacobian(model, &q, factor)?.principal_submatrix(&free);
            let mut delta: Vec<f64> = r.iter().map(|v| -v).collect();
            k.lu()?.solve_in_place(&mut delta);
            for (d, &i) in delta.iter().zip(&free) {
                q[i] += d;
            }
        }
        if options.complement {
            complement_nodes(&mut q);
        }
    }
    Ok(StaticSolution {
        q,
        steps,
        residual_history: history,
    })
}
