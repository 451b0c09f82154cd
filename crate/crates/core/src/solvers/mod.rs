//! Static and dynamic solvers.
//!
//! Supports are imposed by removing the fixed coordinates from the unknowns;
//! their values stay at those of the initial configuration.

mod dynamics;
mod ode;
mod statics;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use dynamics::{
    integrate_dynamic, ComplementEvent, DynamicOptions, DynamicSystem, Energies, Trajectory,
};
pub use ode::{Dopri5, OdeStats, OdeSystem, StepControl};
pub use statics::{residual_static, solve_static, LoadStepRecord, StaticOptions, StaticSolution};

use crate::discretization::{node_rotation, Mesh, NODE_DOF};
use crate::error::{Result, RodError};
use crate::liegroup::{complement_rotation, exp_so3, tangent_so3_inv, Vec3};
use crate::linalg::BandedMatrix;
use crate::rodmodel::RodModel;

/// Support of one rod end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Support {
    #[default]
    Free,
    /// Position fixed, rotation free.
    Pinned,
    /// Position and rotation fixed.
    Clamped,
}

impl Support {
    fn dofs(&self) -> std::ops::Range<usize> {
        match self {
            Support::Free => 0..0,
            Support::Pinned => 0..3,
            Support::Clamped => 0..6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryConditions {
    pub first: Support,
    pub last: Support,
}

impl BoundaryConditions {
    pub fn new(first: Support, last: Support) -> Self {
        Self { first, last }
    }

    pub fn cantilever() -> Self {
        Self::new(Support::Clamped, Support::Free)
    }

    pub fn free() -> Self {
        Self::default()
    }

    /// Sorted fixed coordinate indices.
    pub fn fixed_dofs(&self, mesh: &Mesh) -> Vec<usize> {
        let last = mesh.n_nodes() - 1;
        let mut out: Vec<usize> = self.first.dofs().collect();
        out.extend(self.last.dofs().map(|k| NODE_DOF * last + k));
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Sorted free coordinate indices.
    pub fn free_dofs(&self, mesh: &Mesh) -> Result<Vec<usize>> {
        let fixed = self.fixed_dofs(mesh);
        let free: Vec<usize> = (0..mesh.n_dof())
            .filter(|i| fixed.binary_search(i).is_err())
            .collect();
        if free.is_empty() {
            return Err(RodError::BoundaryCondition("no free coordinates".into()));
        }
        Ok(free)
    }
}

/// Kinematic map `q_dot = B(q) u` applied to `u`: identity on positions and
/// `T^-1(psi)` on the rotation vectors.
pub fn kinematic_map(q: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    if q.len() != u.len() || q.len() % NODE_DOF != 0 {
        return Err(RodError::Dimension {
            expected: q.len(),
            got: u.len(),
        });
    }
    let mut out = u.to_vec();
    for i in 0..q.len() / NODE_DOF {
        let t_inv = tangent_so3_inv(&node_rotation(q, i))?;
        let w = t_inv * node_rotation(u, i);
        out[NODE_DOF * i + 3..NODE_DOF * i + 6].copy_from_slice(w.as_slice());
    }
    Ok(out)
}

/// Replaces every nodal rotation vector longer than pi by its complement.
/// Returns the indices of the changed nodes.
pub fn complement_nodes(q: &mut [f64]) -> Vec<usize> {
    let mut changed = Vec::new();
    for i in 0..q.len() / NODE_DOF {
        let psi = node_rotation(q, i);
        if psi.norm() > std::f64::consts::PI {
            let c = complement_rotation(&psi);
            q[NODE_DOF * i + 3..NODE_DOF * i + 6].copy_from_slice(c.as_slice());
            changed.push(i);
        }
    }
    changed
}

/// Forward finite difference step for coordinate value `x`.
#[inline]
pub fn fd_step(x: f64) -> f64 {
    f64::EPSILON.sqrt() * x.abs().max(1.0)
}

/// Central finite difference step for coordinate value `x`.
#[inline]
pub fn central_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Dense forward-difference Jacobian of `f` at `q`.
pub fn jacobian_fd<F>(f: F, q: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let f0 = f(q)?;
    let mut jac = DMatrix::zeros(f0.len(), q.len());
    let mut qp = q.to_vec();
    for j in 0..q.len() {
        let h = fd_step(q[j]);
        qp[j] = q[j] + h;
        let f1 = f(&qp)?;
        qp[j] = q[j];
        for i in 0..f0.len() {
            jac[(i, j)] = (f1[i] - f0[i]) / h;
        }
    }
    Ok(jac)
}

/// Banded central-difference Jacobian of `f_int + f_ext` with respect to `q`,
/// assembled element by element.
pub fn assemble_jacobian(model: &RodModel, q: &[f64], load_factor: f64) -> Result<BandedMatrix> {
    let mesh = model.mesh();
    let ne = NODE_DOF * mesh.nodes_per_element();
    let mut k = BandedMatrix::zeros(q.len(), ne - 1, ne - 1);
    let mut f0 = vec![0.0; ne];
    let mut f1 = vec![0.0; ne];
    for e in 0..mesh.n_el() {
        let dofs = mesh.element_dofs(e);
        let mut qe = q[dofs.clone()].to_vec();
        for j in 0..ne {
            let x = qe[j];
            let h = central_step(x);
            qe[j] = x + h;
            f1.iter_mut().for_each(|v| *v = 0.0);
            model.add_f_int_element(e, &qe, &mut f1)?;
            qe[j] = x - h;
            f0.iter_mut().for_each(|v| *v = 0.0);
            model.add_f_int_element(e, &qe, &mut f0)?;
            qe[j] = x;
            for i in 0..ne {
                let d = (f1[i] - f0[i]) / (2.0 * h);
                if d != 0.0 {
                    k.add(dofs.start + i, dofs.start + j, d);
                }
            }
        }
    }
    if model.has_follower_loads() {
        let last = mesh.n_nodes() - 1;
        for (node, load) in [(0, &model.loads().first), (last, &model.loads().last)] {
            if !load.has_follower() {
                continue;
            }
            let psi = node_rotation(q, node);
            let f = load.follower_force() * load_factor;
            let base = exp_so3(&psi) * f;
            for j in 0..3 {
                let h = fd_step(psi[j]);
                let mut p = psi;
                p[j] += h;
                let d: Vec3 = (exp_so3(&p) * f - base) / h;
                for i in 0..3 {
                    k.add(NODE_DOF * node + i, NODE_DOF * node + 3 + j, d[i]);
                }
            }
        }
    }
    Ok(k)
}

/// Restriction of a full-length vector to the index set `idx`.
pub fn restrict(v: &[f64], idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}
