//! Heavy top: a spinning cylinder pinned at one end precessing under gravity.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{write_json, Table, SCHEMA_VERSION};
use crate::discretization::{node_position, InterpolationKind, Mesh};
use crate::error::Result;
use crate::liegroup::{hat, Mat3, Vec3};
use crate::rodmodel::{section_circular, Integration, LoadCase, RodModel};
use crate::solvers::{
    integrate_dynamic, BoundaryConditions, Dopri5, DynamicOptions, DynamicSystem, Energies,
    OdeStats, OdeSystem, StepControl, Support,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeavyTopParameters {
    pub length: f64,
    pub radius: f64,
    pub density: f64,
    pub young: f64,
    pub poisson: f64,
    pub gravity: f64,
    /// Spin rate about the cylinder axis.
    pub spin: f64,
    /// Factor applied to all stiffnesses.
    pub stiffness_factor: f64,
}

impl Default for HeavyTopParameters {
    fn default() -> Self {
        Self {
            length: 0.5,
            radius: 0.1,
            density: 8000.0,
            young: 2.1e8,
            poisson: 1.0 / 3.0,
            gravity: 9.81,
            spin: 50.0 * PI,
            stiffness_factor: 1.0,
        }
    }
}

impl HeavyTopParameters {
    pub fn soft() -> Self {
        Self {
            stiffness_factor: 2.5e-3,
            ..Self::default()
        }
    }

    /// Gyroscopic precession rate `g L / (r^2 Omega)`.
    pub fn precession_rate(&self) -> f64 {
        self.gravity * self.length / (self.radius * self.radius * self.spin)
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.precession_rate()
    }

    /// Initial angular velocity: spin about the axis plus precession about `e_z`.
    pub fn angular_velocity(&self) -> Vec3 {
        Vec3::new(self.spin, 0.0, self.precession_rate())
    }

    fn shear_modulus(&self) -> f64 {
        self.young / (2.0 * (1.0 + self.poisson))
    }

    fn mass(&self) -> f64 {
        self.density * PI * self.radius.powi(2) * self.length
    }

    /// Rigid inertia about the pivot in body axes: `diag(C, A, A)`.
    fn pivot_inertia(&self) -> Mat3 {
        let i = PI * self.radius.powi(4) / 4.0;
        let area = PI * self.radius.powi(2);
        let c = 2.0 * self.density * i * self.length;
        let a = self.density * i * self.length + self.density * area * self.length.powi(3) / 3.0;
        Mat3::from_diagonal(&Vec3::new(c, a, a))
    }
}

/// One quadratic R12 element, reduced integration, gravity along `-e_z`.
pub fn heavy_top_model(params: &HeavyTopParameters) -> Result<RodModel> {
    let section = section_circular(
        params.radius,
        params.density,
        params.young,
        params.shear_modulus(),
    )
    .with_scaled_stiffness(params.stiffness_factor);
    let loads = LoadCase::gravity(section.inertia.a_rho0, params.gravity);
    let mesh = Mesh::new(1, 2)?;
    Ok(RodModel::straight(
        mesh,
        InterpolationKind::R12,
        section,
        params.length,
        Integration::Reduced,
    )?
    .with_loads(loads))
}

pub fn heavy_top_supports() -> BoundaryConditions {
    BoundaryConditions::new(Support::Pinned, Support::Free)
}

/// Straight horizontal rod along `e_x` moving rigidly with the precession
/// angular velocity.
pub fn heavy_top_initial_state(
    params: &HeavyTopParameters,
    model: &RodModel,
) -> (Vec<f64>, Vec<f64>) {
    let q0 = model.reference_configuration().to_vec();
    let u0 = model.rigid_velocity(&q0, &Vec3::zeros(), &params.angular_velocity());
    (q0, u0)
}

/// Rigid cylinder about a fixed pivot: `R' = R w~`, `J w' = -w x J w + tau`.
struct RigidTop {
    inertia: Mat3,
    inertia_inv: Mat3,
    weight: Vec3,
    arm: Vec3,
}

impl OdeSystem for RigidTop {
    fn dim(&self) -> usize {
        12
    }

    fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let r = Mat3::from_column_slice(&y[..9]);
        let w = Vec3::new(y[9], y[10], y[11]);
        let r_dot = r * hat(&w);
        dy[..9].copy_from_slice(r_dot.as_slice());
        let tau = self.arm.cross(&(r.transpose() * self.weight));
        let w_dot = self.inertia_inv * (tau - w.cross(&(self.inertia * w)));
        dy[9..].copy_from_slice(w_dot.as_slice());
        Ok(())
    }
}

/// Tip positions of the equivalent rigid top at `times`, integrated with
/// tolerance 1e-10.
pub fn rigid_top_tips(params: &HeavyTopParameters, times: &[f64]) -> Result<Vec<Vec3>> {
    let inertia = params.pivot_inertia();
    let mut sys = RigidTop {
        inertia,
        inertia_inv: inertia.try_inverse().expect("positive inertia"),
        weight: Vec3::new(0.0, 0.0, -params.mass() * params.gravity),
        arm: Vec3::new(0.5 * params.length, 0.0, 0.0),
    };
    let mut y0 = Mat3::identity().as_slice().to_vec();
    y0.extend_from_slice(params.angular_velocity().as_slice());
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let tip = Vec3::new(params.length, 0.0, 0.0);
    let mut out = Vec::with_capacity(times.len());
    Dopri5::new(StepControl::Adaptive {
        rtol: 1e-10,
        atol: 1e-10,
        h_max: t_end.max(1e-3),
    })
    .integrate(&mut sys, 0.0, &y0, t_end, times, |_, y| {
        out.push(Mat3::from_column_slice(&y[..9]) * tip);
    })?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeavyTopOptions {
    pub params: HeavyTopParameters,
    pub control: StepControl,
    /// End time; one precession period when `None`.
    pub t_end: Option<f64>,
    pub n_samples: usize,
}

impl Default for HeavyTopOptions {
    fn default() -> Self {
        Self {
            params: HeavyTopParameters::default(),
            control: StepControl::Adaptive {
                rtol: 1e-8,
                atol: 1e-8,
                h_max: 1e-2,
            },
            t_end: None,
            n_samples: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeavyTopOutput {
    pub params: HeavyTopParameters,
    pub times: Vec<f64>,
    pub tip: Vec<Vec3>,
    pub rigid_tip: Vec<Vec3>,
    pub energies: Vec<Energies>,
    /// Largest distance between rod and rigid tip.
    pub max_deviation: f64,
    /// Largest relative change of the total energy.
    pub energy_drift: f64,
    pub stats: OdeStats,
    pub complement_events: usize,
}

#[derive(Serialize)]
struct HeavyTopSummary<'a> {
    schema_version: u32,
    params: &'a HeavyTopParameters,
    t_end: f64,
    max_deviation: f64,
    energy_drift: f64,
    accepted_steps: usize,
    rejected_steps: usize,
    rhs_evaluations: usize,
    complement_events: usize,
}

impl HeavyTopOutput {
    pub fn trajectory_table(&self) -> Table {
        let mut t = Table::new(&[
            ("t", "s"),
            ("tip_x", "m"),
            ("tip_y", "m"),
            ("tip_z", "m"),
            ("rigid_x", "m"),
            ("rigid_y", "m"),
            ("rigid_z", "m"),
            ("deviation", "m"),
        ]);
        for ((t_i, a), b) in self.times.iter().zip(&self.tip).zip(&self.rigid_tip) {
            t.push(vec![*t_i, a.x, a.y, a.z, b.x, b.y, b.z, (a - b).norm()]);
        }
        t
    }

    pub fn energy_table(&self) -> Table {
        let mut t = Table::new(&[
            ("t", "s"),
            ("kinetic", "J"),
            ("strain", "J"),
            ("potential", "J"),
            ("total", "J"),
        ]);
        for (t_i, e) in self.times.iter().zip(&self.energies) {
            t.push(vec![*t_i, e.kinetic, e.strain, e.load, e.total()]);
        }
        t
    }

    pub fn write(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        let a = dir.join(format!("{stem}_trajectory.csv"));
        let b = dir.join(format!("{stem}_energy.csv"));
        let c = dir.join(format!("{stem}_summary.json"));
        self.trajectory_table().write(&a)?;
        self.energy_table().write(&b)?;
        write_json(
            &c,
            &HeavyTopSummary {
                schema_version: SCHEMA_VERSION,
                params: &self.params,
                t_end: self.times.last().copied().unwrap_or(0.0),
                max_deviation: self.max_deviation,
                energy_drift: self.energy_drift,
                accepted_steps: self.stats.accepted,
                rejected_steps: self.stats.rejected,
                rhs_evaluations: self.stats.rhs_evals,
                complement_events: self.complement_events,
            },
        )?;
        Ok(vec![a, b, c])
    }
}

pub fn run_heavy_top(opts: &HeavyTopOptions) -> Result<HeavyTopOutput> {
    let params = opts.params;
    let model = heavy_top_model(&params)?;
    let (q0, u0) = heavy_top_initial_state(&params, &model);
    let t_end = opts.t_end.unwrap_or_else(|| params.period());
    let n = opts.n_samples.max(1);
    let sample_times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
    let mut system = DynamicSystem::new(model, &heavy_top_supports())?;
    let traj = integrate_dynamic(
        &mut system,
        &q0,
        &u0,
        &DynamicOptions {
            t_end,
            control: opts.control,
            sample_times,
        },
    )?;
    let last = system.model().mesh().n_nodes() - 1;
    let tip: Vec<Vec3> = traj.q.iter().map(|q| node_position(q, last)).collect();
    let rigid_tip = rigid_top_tips(&params, &traj.times)?;
    let energies = traj
        .q
        .iter()
        .zip(&traj.u)
        .map(|(q, u)| system.energies(q, u))
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = tip
        .iter()
        .zip(&rigid_tip)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let e0 = energies[0].total();
    let energy_drift = energies
        .iter()
        .map(|e| (e.total() - e0).abs() / e0.abs())
        .fold(0.0, f64::max);
    Ok(HeavyTopOutput {
        params,
        times: traj.times,
        tip,
        rigid_tip,
        energies,
        max_deviation,
        energy_drift,
        stats: traj.stats,
        complement_events: traj.events.len(),
    })
}
