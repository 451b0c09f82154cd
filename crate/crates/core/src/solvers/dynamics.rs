//! Semi-discrete equations of motion
//! `q' = B(q) u`, `M u' = f_int(q) + f_ext(q) - f_gyr(u)`.

use super::ode::{Dopri5, OdeStats, OdeSystem, StepControl};
use super::{complement_nodes, kinematic_map, BoundaryConditions};
use crate::discretization::{node_rotation, NODE_DOF};
use crate::error::{Result, RodError};
use crate::liegroup::Vec3;
use crate::linalg::BandedLu;
use crate::rodmodel::RodModel;

/// Replacement of a nodal rotation vector by its complement during integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementEvent {
    pub t: f64,
    pub node: usize,
    pub before: Vec3,
    pub after: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies {
    pub kinetic: f64,
    pub strain: f64,
    /// Potential of the dead loads.
    pub load: f64,
}

impl Energies {
    pub fn total(&self) -> f64 {
        self.kinetic + self.strain + self.load
    }
}

/// Rod with supports, prepared for time integration. The reduced mass
/// matrix is factorized once at construction.
#[derive(Debug, Clone)]
pub struct DynamicSystem {
    model: RodModel,
    free: Vec<usize>,
    fixed: Vec<usize>,
    mass_lu: BandedLu,
    factorizations: usize,
    complement: bool,
    events: Vec<ComplementEvent>,
}

impl DynamicSystem {
    pub fn new(model: RodModel, bcs: &BoundaryConditions) -> Result<Self> {
        let free = bcs.free_dofs(model.mesh())?;
        let fixed = bcs.fixed_dofs(model.mesh());
        let mass_lu = model.mass_matrix().principal_submatrix(&free).lu()?;
        Ok(Self {
            model,
            free,
            fixed,
            mass_lu,
            factorizations: 1,
            complement: true,
            events: Vec::new(),
        })
    }

    /// Enables or disables the complement update of nodal rotation vectors.
    pub fn with_complement(mut self, on: bool) -> Self {
        self.complement = on;
        self
    }

    pub fn model(&self) -> &RodModel {
        &self.model
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    /// Number of mass matrix factorizations performed so far.
    pub fn mass_factorizations(&self) -> usize {
        self.factorizations
    }

    pub fn complement_events(&self) -> &[ComplementEvent] {
        &self.events
    }

    /// Time derivatives `(q', u')`.
    pub fn rhs_dynamic(&self, _t: f64, q: &[f64], u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut q_dot = kinematic_map(q, u)?;
        let fi = self.model.f_int(q)?;
        let fe = self.model.f_ext(q, 1.0);
        let fg = self.model.f_gyr(u);
        let mut rhs: Vec<f64> = self.free.iter().map(|&i| fi[i] + fe[i] - fg[i]).collect();
        self.mass_lu.solve_in_place(&mut rhs);
        let mut u_dot = vec![0.0; u.len()];
        for (v, &i) in rhs.iter().zip(&self.free) {
            u_dot[i] = *v;
        }
        for &i in &self.fixed {
            q_dot[i] = 0.0;
        }
        Ok((q_dot, u_dot))
    }

    pub fn energies(&self, q: &[f64], u: &[f64]) -> Result<Energies> {
        Ok(Energies {
            kinetic: self.model.kinetic_energy(u),
            strain: self.model.strain_energy(q)?,
            load: self.model.load_potential(q),
        })
    }
}

impl OdeSystem for DynamicSystem {
    fn dim(&self) -> usize {
        2 * self.model.n_dof()
    }

    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.model.n_dof();
        let (q_dot, u_dot) = self.rhs_dynamic(t, &y[..n], &y[n..])?;
        dy[..n].copy_from_slice(&q_dot);
        dy[n..].copy_from_slice(&u_dot);
        Ok(())
    }

    fn accept(&mut self, t: f64, y: &mut [f64]) -> bool {
        if !self.complement {
            return false;
        }
        let n = self.model.n_dof();
        let before: Vec<Vec3> = (0..n / NODE_DOF).map(|i| node_rotation(y, i)).collect();
        let changed = complement_nodes(&mut y[..n]);
        for &node in &changed {
            self.events.push(ComplementEvent {
                t,
                node,
                before: before[node],
                after: node_rotation(y, node),
            });
        }
        !changed.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicOptions {
    pub t_end: f64,
    pub control: StepControl,
    /// Output times; the end time is always appended.
    pub sample_times: Vec<f64>,
}

impl DynamicOptions {
    /// Adaptive integration with `n_samples` equally spaced outputs after `t = 0`.
    pub fn adaptive(t_end: f64, rtol: f64, atol: f64, n_samples: usize) -> Self {
        Self {
            t_end,
            control: StepControl::Adaptive {
                rtol,
                atol,
                h_max: t_end,
            },
            sample_times: uniform_samples(t_end, n_samples),
        }
    }

    pub fn fixed(t_end: f64, h: f64, n_samples: usize) -> Self {
        Self {
            t_end,
            control: StepControl::Fixed { h },
            sample_times: uniform_samples(t_end, n_samples),
        }
    }
}

fn uniform_samples(t_end: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub events: Vec<ComplementEvent>,
    pub stats: OdeStats,
    pub mass_factorizations: usize,
}

/// Integrates the motion from `(q0, u0)` at `t = 0`.
pub fn integrate_dynamic(
    system: &mut DynamicSystem,
    q0: &[f64],
    u0: &[f64],
    options: &DynamicOptions,
) -> Result<Trajectory> {
    let n = system.model.n_dof();
    for (v, name) in [(q0, "q0"), (u0, "u0")] {
        if v.len() != n {
            return Err(RodError::Dimension {
                expected: n,
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(RodError::InvalidModel(format!("{name} is not finite")));
        }
    }
    if system.fixed.iter().any(|&i| u0[i] != 0.0) {
        return Err(RodError::BoundaryCondition(
            "initial velocity must vanish at fixed coordinates".into(),
        ));
    }
    let mut y0 = q0.to_vec();
    y0.extend_from_slice(u0);
    let mut samples = options.sample_times.clone();
    samples.retain(|&t| t >= 0.0 && t <= options.t_end);
    samples.sort_by(f64::total_cmp);
    if samples.last() != Some(&options.t_end) {
        samples.push(options.t_end);
    }
    samples.dedup();
    let mut times = Vec::with_capacity(samples.len());
    let mut qs = Vec::with_capacity(samples.len());
    let mut us = Vec::with_capacity(samples.len());
    system.events.clear();
    let solver = Dopri5::new(options.control);
    let (_, stats) = solver.integrate(system, 0.0, &y0, options.t_end, &samples, |t, y| {
        times.push(t);
        qs.push(y[..n].to_vec());
        us.push(y[n..].to_vec());
    })?;
    Ok(Trajectory {
        times,
        q: qs,
        u: us,
        events: system.events.clone(),
        stats,
        mass_factorizations: system.factorizations,
    })
}
