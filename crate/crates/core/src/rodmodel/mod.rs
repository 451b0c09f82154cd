//! Rod model with interpolated virtual displacements: internal, external,
//! gyroscopic forces and mass.
//!
//! Virtual displacements are interpolated with the Lagrange basis of the
//! element, virtual rotations are body-frame (`K`) quantities interpolated
//! the same way. All integrals run over the rod parameter `xi` in [0, 1]; the
//! reference tangent length `J = |r_xi|` of the reference configuration
//! converts them to arc length where needed.

mod loads;
mod section;

use serde::{Deserialize, Serialize};

pub use loads::{LoadCase, PointLoad};
pub use section::{
    constitutive, section_circular, section_rectangular, CrossSection, CrossSectionInertia,
    ElasticLaw,
};

use crate::discretization::{
    node_position, node_rotation, set_node, ElementField, InterpolationKind, LagrangeBasis, Mesh,
    StrainState, NODE_DOF,
};
use crate::error::{Result, RodError};
use crate::liegroup::{exp_so3, Mat3, Vec3};
use crate::linalg::BandedMatrix;
use crate::quadrature::QuadratureRule;

/// Quadrature used for the internal virtual work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integration {
    Full,
    Reduced,
}

impl Integration {
    pub fn name(&self) -> &'static str {
        match self {
            Integration::Full => "full",
            Integration::Reduced => "reduced",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(Self::Full),
            "reduced" => Some(Self::Reduced),
            _ => None,
        }
    }
}

impl std::fmt::Display for Integration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Gauss point counts `(full, reduced) = (ceil((p + 1)^2 / 2), p)` for order `p`.
pub fn quadrature_counts(p: usize) -> Result<(usize, usize)> {
    if p == 0 || p > 2 {
        return Err(RodError::UnsupportedOrder(p));
    }
    Ok((((p + 1) * (p + 1)).div_ceil(2), p))
}

/// Quadrature point with reference data frozen at model construction.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub xi: f64,
    pub weight: f64,
    /// Reference tangent length `|r0_xi|`.
    pub j: f64,
    /// Reference strains `gamma0`, `kappa0`.
    pub reference: StrainState,
    pub basis: LagrangeBasis,
}

/// Straight reference configuration of length `length` along `e_x`.
pub fn straight_configuration(mesh: &Mesh, length: f64) -> Vec<f64> {
    let mut q = vec![0.0; mesh.n_dof()];
    for i in 0..mesh.n_nodes() {
        let r = Vec3::new(length * mesh.node_parameter(i), 0.0, 0.0);
        set_node(&mut q, i, &r, &Vec3::zeros());
    }
    q
}

#[derive(Debug, Clone)]
pub struct RodModel {
    mesh: Mesh,
    kind: InterpolationKind,
    integration: Integration,
    section: CrossSection,
    loads: LoadCase,
    q0: Vec<f64>,
    internal: Vec<Vec<QuadPoint>>,
    full: Vec<Vec<QuadPoint>>,
    distributed: Vec<f64>,
}

impl RodModel {
    /// Model with reference configuration `q0`. Reference strains are those of
    /// `q0` under the chosen interpolation, so `q0` is stress free.
    pub fn new(
        mesh: Mesh,
        kind: InterpolationKind,
        section: CrossSection,
        q0: Vec<f64>,
        integration: Integration,
    ) -> Result<Self> {
        if !kind.supports_order(mesh.order()) {
            return Err(RodError::IncompatibleKind {
                kind: kind.name(),
                order: mesh.order(),
            });
        }
        if q0.len() != mesh.n_dof() {
            return Err(RodError::Dimension {
                expected: mesh.n_dof(),
                got: q0.len(),
            });
        }
        if !section.law.is_valid() {
            return Err(RodError::InvalidModel(
                "stiffnesses must be positive and finite".into(),
            ));
        }
        if !(section.inertia.a_rho0 >= 0.0) {
            return Err(RodError::InvalidModel(
                "mass density must be non-negative".into(),
            ));
        }
        let (m_full, m_red) = quadrature_counts(mesh.order())?;
        let m_int = match integration {
            Integration::Full => m_full,
            Integration::Reduced => m_red,
        };
        let rule_full = QuadratureRule::gauss_legendre(m_full);
        let rule_int = QuadratureRule::gauss_legendre(m_int);
        let mut internal = Vec::with_capacity(mesh.n_el());
        let mut full = Vec::with_capacity(mesh.n_el());
        for e in 0..mesh.n_el() {
            let field = ElementField::from_global(kind, &mesh, e, &q0)?;
            let (a, b) = mesh.element_interval(e);
            internal.push(reference_points(&field, &rule_int.mapped(a, b))?);
            full.push(reference_points(&field, &rule_full.mapped(a, b))?);
        }
        let mut model = Self {
            mesh,
            kind,
            integration,
            section,
            loads: LoadCase::default(),
            q0,
            internal,
            full,
            distributed: Vec::new(),
        };
        model.distributed = model.distributed_load_vector();
        Ok(model)
    }

    /// Straight stress-free rod of length `length` along `e_x`.
    pub fn straight(
        mesh: Mesh,
        kind: InterpolationKind,
        section: CrossSection,
        length: f64,
        integration: Integration,
    ) -> Result<Self> {
        let q0 = straight_configuration(&mesh, length);
        Self::new(mesh, kind, section, q0, integration)
    }

    pub fn with_loads(mut self, loads: LoadCase) -> Self {
        self.set_loads(loads);
        self
    }

    pub fn set_loads(&mut self, loads: LoadCase) {
        self.loads = loads;
        self.distributed = self.distributed_load_vector();
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn kind(&self) -> InterpolationKind {
        self.kind
    }

    pub fn integration(&self) -> Integration {
        self.integration
    }

    pub fn section(&self) -> &CrossSection {
        &self.section
    }

    pub fn loads(&self) -> &LoadCase {
        &self.loads
    }

    pub fn n_dof(&self) -> usize {
        self.mesh.n_dof()
    }

    pub fn reference_configuration(&self) -> &[f64] {
        &self.q0
    }

    /// Quadrature points of the internal virtual work of element `e`.
    pub fn internal_points(&self, e: usize) -> &[QuadPoint] {
        &self.internal[e]
    }

    /// Full-rule quadrature points of element `e` (inertia and line loads).
    pub fn full_points(&self, e: usize) -> &[QuadPoint] {
        &self.full[e]
    }

    /// Reference arc length `int J dxi`.
    pub fn reference_length(&self) -> f64 {
        self.full.iter().flatten().map(|p| p.weight * p.j).sum()
    }

    pub fn element_field(&self, e: usize, q: &[f64]) -> Result<ElementField> {
        ElementField::from_global(self.kind, &self.mesh, e, q)
    }

    /// Internal generalized force of element `e` from its coordinates `q_e`.
    pub fn f_int_element(&self, e: usize, q_e: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; q_e.len()];
        self.add_f_int_element(e, q_e, &mut out)?;
        Ok(out)
    }

    /// Adds the internal force of element `e` to the element-sized buffer `out`.
    pub fn add_f_int_element(&self, e: usize, q_e: &[f64], out: &mut [f64]) -> Result<()> {
        let field = ElementField::new(
            self.kind,
            self.mesh.order(),
            self.mesh.element_interval(e),
            q_e,
        )?;
        let law = &self.section.law;
        for qp in &self.internal[e] {
            let (a, gamma_bar, kappa_bar) = field.section_kinematics(qp.xi);
            let eps = StrainState::from_scaled(&gamma_bar, &kappa_bar, qp.j);
            let (n, m) = law.constitutive(&eps, &qp.reference);
            let an = a * n;
            let coupling = gamma_bar.cross(&n) + kappa_bar.cross(&m);
            let values = qp.basis.values();
            let derivs = qp.basis.derivatives();
            for i in 0..qp.basis.len() {
                let force = -qp.weight * derivs[i] * an;
                let moment = -qp.weight * (derivs[i] * m - values[i] * coupling);
                let o = NODE_DOF * i;
                for k in 0..3 {
                    out[o + k] += force[k];
                    out[o + 3 + k] += moment[k];
                }
            }
        }
        Ok(())
    }

    /// Assembled internal generalized force.
    pub fn f_int(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.check_len(q)?;
        let mut f = vec![0.0; q.len()];
        for e in 0..self.mesh.n_el() {
            let dofs = self.mesh.element_dofs(e);
            self.add_f_int_element(e, &q[dofs.clone()], &mut f[dofs])?;
        }
        Ok(f)
    }

    /// Distributed load contribution of element `e`; configuration independent.
    pub fn f_ext_element(&self, e: usize) -> Vec<f64> {
        let b = self.loads.distributed_force();
        let c = self.loads.distributed_moment();
        let mut out = vec![0.0; NODE_DOF * self.mesh.nodes_per_element()];
        for qp in &self.full[e] {
            for (i, &n) in qp.basis.values().iter().enumerate() {
                let s = qp.weight * qp.j * n;
                for k in 0..3 {
                    out[NODE_DOF * i + k] += s * b[k];
                    out[NODE_DOF * i + 3 + k] += s * c[k];
                }
            }
        }
        out
    }

    fn distributed_load_vector(&self) -> Vec<f64> {
        let mut f = vec![0.0; self.n_dof()];
        for e in 0..self.mesh.n_el() {
            let fe = self.f_ext_element(e);
            for (v, dof) in fe.iter().zip(self.mesh.element_dofs(e)) {
                f[dof] += v;
            }
        }
        f
    }

    /// End loads scaled by `factor` added to `f`.
    pub fn add_boundary_loads(&self, q: &[f64], factor: f64, f: &mut [f64]) {
        let last = self.mesh.n_nodes() - 1;
        for (node, load) in [(0, &self.loads.first), (last, &self.loads.last)] {
            if load.is_zero() {
                continue;
            }
            let mut force = load.force();
            if load.has_follower() {
                force += exp_so3(&node_rotation(q, node)) * load.follower_force();
            }
            let moment = load.moment();
            for k in 0..3 {
                f[NODE_DOF * node + k] += factor * force[k];
                f[NODE_DOF * node + 3 + k] += factor * moment[k];
            }
        }
    }

    /// Whether the external force depends on the configuration.
    pub fn has_follower_loads(&self) -> bool {
        self.loads.first.has_follower() || self.loads.last.has_follower()
    }

    /// External generalized force scaled by the load factor `factor`.
    pub fn f_ext(&self, q: &[f64], factor: f64) -> Vec<f64> {
        let mut f: Vec<f64> = self.distributed.iter().map(|v| factor * v).collect();
        self.add_boundary_loads(q, factor, &mut f);
        f
    }

    /// Consistent mass matrix `int N_i N_k diag(A_rho0 I, I_rho0) J dxi`.
    pub fn mass_matrix(&self) -> BandedMatrix {
        let bw = NODE_DOF * self.mesh.nodes_per_element() - 1;
        let mut m = BandedMatrix::zeros(self.n_dof(), bw, bw);
        let a_rho0 = self.section.inertia.a_rho0;
        let i_rho0 = self.section.inertia.i_rho0;
        for e in 0..self.mesh.n_el() {
            let base = self.mesh.element_dofs(e).start;
            for qp in &self.full[e] {
                let vals = qp.basis.values();
                for i in 0..vals.len() {
                    for k in 0..vals.len() {
                        let s = qp.weight * qp.j * vals[i] * vals[k];
                        let (ri, rk) = (base + NODE_DOF * i, base + NODE_DOF * k);
                        for d in 0..3 {
                            m.add(ri + d, rk + d, s * a_rho0);
                            for c in 0..3 {
                                let v = s * i_rho0[(d, c)];
                                if v != 0.0 {
                                    m.add(ri + 3 + d, rk + 3 + c, v);
                                }
                            }
                        }
                    }
                }
            }
        }
        m
    }

    /// Gyroscopic force `int N_i omega x (I_rho0 omega) J dxi` in the rotation slots.
    pub fn f_gyr(&self, u: &[f64]) -> Vec<f64> {
        let i_rho0 = self.section.inertia.i_rho0;
        let mut f = vec![0.0; u.len()];
        for e in 0..self.mesh.n_el() {
            let nodes = self.mesh.element_nodes(e);
            for qp in &self.full[e] {
                let vals = qp.basis.values();
                let mut omega = Vec3::zeros();
                for (i, node) in nodes.clone().enumerate() {
                    omega += vals[i] * node_rotation(u, node);
                }
                let g = omega.cross(&(i_rho0 * omega));
                for (i, node) in nodes.clone().enumerate() {
                    let s = qp.weight * qp.j * vals[i];
                    for k in 0..3 {
                        f[NODE_DOF * node + 3 + k] += s * g[k];
                    }
                }
            }
        }
        f
    }

    /// Elastic energy evaluated with the internal-force quadrature.
    pub fn strain_energy(&self, q: &[f64]) -> Result<f64> {
        self.check_len(q)?;
        let law = &self.section.law;
        let mut energy = 0.0;
        for e in 0..self.mesh.n_el() {
            let field = self.element_field(e, q)?;
            for qp in &self.internal[e] {
                let eps = field.strains(qp.xi, qp.j);
                energy += qp.weight * qp.j * law.energy_density(&eps, &qp.reference);
            }
        }
        Ok(energy)
    }

    /// Potential of the dead forces (distributed and concentrated, inertial
    /// components) at unit load factor.
    pub fn load_potential(&self, q: &[f64]) -> f64 {
        let mut v = 0.0;
        for i in 0..self.mesh.n_nodes() {
            let r = node_position(q, i);
            let f = Vec3::new(
                self.distributed[NODE_DOF * i],
                self.distributed[NODE_DOF * i + 1],
                self.distributed[NODE_DOF * i + 2],
            );
            v -= f.dot(&r);
        }
        let last = self.mesh.n_nodes() - 1;
        v -= self.loads.first.force().dot(&node_position(q, 0));
        v -= self.loads.last.force().dot(&node_position(q, last));
        v
    }

    /// Kinetic energy `u^T M u / 2`.
    pub fn kinetic_energy(&self, u: &[f64]) -> f64 {
        let mu = self.mass_matrix().mul_vec(u);
        0.5 * mu.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Strains of configuration `q` at `xi`.
    pub fn strains_at(&self, q: &[f64], xi: f64) -> Result<StrainState> {
        let e = self.mesh.locate(xi)?;
        let reference = ElementField::from_global(self.kind, &self.mesh, e, &self.q0)?;
        let j = reference.frame(xi).r_xi.norm();
        Ok(self.element_field(e, q)?.strains(xi, j))
    }

    /// Nodal velocities of the rigid motion of `q` with velocity `v0` of the
    /// inertial origin and inertial angular velocity `omega_inertial`.
    pub fn rigid_velocity(&self, q: &[f64], v0: &Vec3, omega_inertial: &Vec3) -> Vec<f64> {
        let mut u = vec![0.0; q.len()];
        for i in 0..self.mesh.n_nodes() {
            let r = node_position(q, i);
            let a: Mat3 = exp_so3(&node_rotation(q, i));
            let v = v0 + omega_inertial.cross(&r);
            let w = a.transpose() * omega_inertial;
            set_node(&mut u, i, &v, &w);
        }
        u
    }

    fn check_len(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.n_dof() {
            return Err(RodError::Dimension {
                expected: self.n_dof(),
                got: q.len(),
            });
        }
        Ok(())
    }
}

fn reference_points(field: &ElementField, rule: &QuadratureRule) -> Result<Vec<QuadPoint>> {
    rule.iter()
        .map(|(xi, weight)| {
            let j = field.frame(xi).r_xi.norm();
            if !(j > 0.0) || !j.is_finite() {
                return Err(RodError::InvalidModel(format!(
                    "degenerate reference tangent at xi = {xi}"
                )));
            }
            let (_, gamma_bar, kappa_bar) = field.section_kinematics(xi);
            Ok(QuadPoint {
                xi,
                weight,
                j,
                reference: StrainState::from_scaled(&gamma_bar, &kappa_bar, j),
                basis: field.basis(xi),
            })
        })
        .collect()
}
