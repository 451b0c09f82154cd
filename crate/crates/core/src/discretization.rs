//! Mesh, Lagrange bases and the three interpolation strategies.
//!
//! The rod parameter `xi` in [0, 1] is split into `n_el` equal elements, each
//! carrying `p + 1` evenly spaced nodes; neighbouring elements share their
//! boundary node, giving `N = p * n_el + 1` nodes. Every node stores six
//! coordinates `(r, psi)`: the centerline point in inertial components and
//! the total rotation vector of its cross-section. Global coordinate vectors
//! are flat `[f64]` slices with this node-wise layout and element data is
//! obtained by slicing.
//!
//! Element fields:
//!
//! * [`InterpolationKind::R12`]: Lagrange interpolation of the nodal points and
//!   of the nine entries of the nodal orientations (order 1 or 2). Off-node
//!   orientations are not orthogonal in general.
//! * [`InterpolationKind::R3xSO3`]: linear centerline, orientations
//!   `A_0 exp(N_1 psi_01)` with the relative rotation `psi_01`.
//! * [`InterpolationKind::SE3`]: Euclidean transforms `H_0 Exp(N_1 theta_01)`
//!   with the relative twist `theta_01`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RodError};
use crate::liegroup::{
    exp_se3, exp_so3, log_se3, log_so3, skw, vee_unchecked, FrameTransform, Mat3, Twist, Vec3,
};

/// Coordinates per node: three for the centerline point, three for the rotation vector.
pub const NODE_DOF: usize = 6;

/// Largest number of nodes per element (quadratic elements).
pub const MAX_ELEMENT_NODES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterpolationKind {
    #[serde(rename = "r12")]
    R12,
    #[serde(rename = "r3so3")]
    R3xSO3,
    #[serde(rename = "se3")]
    SE3,
}

impl InterpolationKind {
    pub fn name(&self) -> &'static str {
        match self {
            InterpolationKind::R12 => "r12",
            InterpolationKind::R3xSO3 => "r3so3",
            InterpolationKind::SE3 => "se3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "r12" => Some(Self::R12),
            "r3so3" => Some(Self::R3xSO3),
            "se3" => Some(Self::SE3),
            _ => None,
        }
    }

    pub fn supports_order(&self, order: usize) -> bool {
        match self {
            InterpolationKind::R12 => order == 1 || order == 2,
            _ => order == 1,
        }
    }
}

impl std::fmt::Display for InterpolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Values and `xi`-derivatives of the Lagrange basis of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangeBasis {
    len: usize,
    values: [f64; MAX_ELEMENT_NODES],
    derivatives: [f64; MAX_ELEMENT_NODES],
}

impl LagrangeBasis {
    /// Basis of order `order` on the element `[a, b]` with evenly spaced nodes.
    /// No range check on `xi`.
    pub fn evaluate(order: usize, a: f64, b: f64, xi: f64) -> Self {
        let n = order + 1;
        let mut nodes = [0.0; MAX_ELEMENT_NODES];
        for (i, node) in nodes.iter_mut().enumerate().take(n) {
            *node = a + (b - a) * i as f64 / order as f64;
        }
        let mut values = [0.0; MAX_ELEMENT_NODES];
        let mut derivatives = [0.0; MAX_ELEMENT_NODES];
        for i in 0..n {
            let mut v = 1.0;
            for j in (0..n).filter(|&j| j != i) {
                v *= (xi - nodes[j]) / (nodes[i] - nodes[j]);
            }
            values[i] = v;
            // product rule, valid at the nodes as well
            let mut d = 0.0;
            for k in (0..n).filter(|&k| k != i) {
                let mut term = 1.0 / (nodes[i] - nodes[k]);
                for j in (0..n).filter(|&j| j != i && j != k) {
                    term *= (xi - nodes[j]) / (nodes[i] - nodes[j]);
                }
                d += term;
            }
            derivatives[i] = d;
        }
        Self {
            len: n,
            values,
            derivatives,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values[..self.len]
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.derivatives[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Uniform mesh of `n_el` elements of order `order` on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mesh {
    n_el: usize,
    order: usize,
}

impl Mesh {
    pub fn new(n_el: usize, order: usize) -> Result<Self> {
        if order == 0 || order > 2 {
            return Err(RodError::UnsupportedOrder(order));
        }
        if n_el == 0 {
            return Err(RodError::InvalidModel(
                "mesh needs at least one element".into(),
            ));
        }
        Ok(Self { n_el, order })
    }

    pub fn n_el(&self) -> usize {
        self.n_el
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_nodes(&self) -> usize {
        self.order * self.n_el + 1
    }

    pub fn n_dof(&self) -> usize {
        NODE_DOF * self.n_nodes()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.order + 1
    }

    /// Element interval `[xi^e, xi^{e+1}]`.
    pub fn element_interval(&self, e: usize) -> (f64, f64) {
        let n = self.n_el as f64;
        (e as f64 / n, (e + 1) as f64 / n)
    }

    pub fn element_length(&self) -> f64 {
        1.0 / self.n_el as f64
    }

    /// Global node indices of element `e`.
    pub fn element_nodes(&self, e: usize) -> Range<usize> {
        let first = e * self.order;
        first..first + self.order + 1
    }

    /// Global coordinate indices of element `e` (contiguous by construction).
    pub fn element_dofs(&self, e: usize) -> Range<usize> {
        let nodes = self.element_nodes(e);
        NODE_DOF * nodes.start..NODE_DOF * nodes.end
    }

    /// Parameter of global node `i`.
    pub fn node_parameter(&self, i: usize) -> f64 {
        i as f64 / (self.n_nodes() - 1) as f64
    }

    /// Element containing `xi`; half-open intervals, `xi = 1` belongs to the last element.
    pub fn locate(&self, xi: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(RodError::OutOfRange {
                xi,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let e = (xi * self.n_el as f64).floor() as usize;
        Ok(e.min(self.n_el - 1))
    }

    /// Lagrange basis of element `e` at `xi`, which must lie in the element closure.
    pub fn lagrange_basis(&self, e: usize, xi: f64) -> Result<LagrangeBasis> {
        let (a, b) = self.element_interval(e);
        let slack = 1e-14;
        if xi < a - slack || xi > b + slack {
            return Err(RodError::OutOfRange { xi, lo: a, hi: b });
        }
        Ok(LagrangeBasis::evaluate(self.order, a, b, xi))
    }
}

/// Centerline point of node `i` in a global (or element) coordinate slice.
#[inline]
pub fn node_position(q: &[f64], i: usize) -> Vec3 {
    Vec3::new(q[NODE_DOF * i], q[NODE_DOF * i + 1], q[NODE_DOF * i + 2])
}

/// Rotation vector of node `i` in a global (or element) coordinate slice.
#[inline]
pub fn node_rotation(q: &[f64], i: usize) -> Vec3 {
    Vec3::new(
        q[NODE_DOF * i + 3],
        q[NODE_DOF * i + 4],
        q[NODE_DOF * i + 5],
    )
}

#[inline]
pub fn set_node(q: &mut [f64], i: usize, r: &Vec3, psi: &Vec3) {
    q[NODE_DOF * i..NODE_DOF * i + 3].copy_from_slice(r.as_slice());
    q[NODE_DOF * i + 3..NODE_DOF * i + 6].copy_from_slice(psi.as_slice());
}

/// Body-frame dilatation/shear `gamma` and torsion/bending `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StrainState {
    pub gamma: Vec3,
    pub kappa: Vec3,
}

impl StrainState {
    pub fn new(gamma: Vec3, kappa: Vec3) -> Self {
        Self { gamma, kappa }
    }

    /// Strains from the `xi`-scaled measures and the reference tangent length `j`.
    pub fn from_scaled(gamma_bar: &Vec3, kappa_bar: &Vec3, j: f64) -> Self {
        Self::new(gamma_bar / j, kappa_bar / j)
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.gamma.x,
            self.gamma.y,
            self.gamma.z,
            self.kappa.x,
            self.kappa.y,
            self.kappa.z,
        ]
    }
}

/// Centerline, tangent and orientation of an interpolated field at one `xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSample {
    pub r: Vec3,
    pub r_xi: Vec3,
    pub a: Mat3,
}

/// R12 sample, carrying the `xi`-derivative of the orientation field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R12Sample {
    pub r: Vec3,
    pub r_xi: Vec3,
    pub a: Mat3,
    pub a_xi: Mat3,
}

#[derive(Debug, Clone)]
enum Nodal {
    R12 {
        // nodal points relative to `origin`, the first node
        origin: Vec3,
        r: [Vec3; MAX_ELEMENT_NODES],
        a: [Mat3; MAX_ELEMENT_NODES],
    },
    R3xSO3 {
        r0: Vec3,
        r1: Vec3,
        a0: Mat3,
        psi01: Vec3,
    },
    SE3 {
        h0: FrameTransform,
        theta01: Twist,
    },
}

/// Interpolated fields of one element, prepared once from its nodal coordinates.
#[derive(Debug, Clone)]
pub struct ElementField {
    order: usize,
    a: f64,
    b: f64,
    nodal: Nodal,
}

impl ElementField {
    /// Prepares the element on `[a, b]` from its `6 (order + 1)` coordinates.
    pub fn new(
        kind: InterpolationKind,
        order: usize,
        interval: (f64, f64),
        q_e: &[f64],
    ) -> Result<Self> {
        if !kind.supports_order(order) {
            return Err(match kind {
                InterpolationKind::R12 => RodError::UnsupportedOrder(order),
                _ => RodError::IncompatibleKind {
                    kind: kind.name(),
                    order,
                },
            });
        }
        let expected = NODE_DOF * (order + 1);
        if q_e.len() != expected {
            return Err(RodError::Dimension {
                expected,
                got: q_e.len(),
            });
        }
        let nodal = match kind {
            InterpolationKind::R12 => {
                let origin = node_position(q_e, 0);
                let mut r = [Vec3::zeros(); MAX_ELEMENT_NODES];
                let mut a = [Mat3::zeros(); MAX_ELEMENT_NODES];
                for i in 0..=order {
                    r[i] = node_position(q_e, i) - origin;
                    a[i] = exp_so3(&node_rotation(q_e, i));
                }
                Nodal::R12 { origin, r, a }
            }
            InterpolationKind::R3xSO3 => {
                let a0 = exp_so3(&node_rotation(q_e, 0));
                let a1 = exp_so3(&node_rotation(q_e, 1));
                let psi01 = log_so3(&(a0.transpose() * a1))?;
                Nodal::R3xSO3 {
                    r0: node_position(q_e, 0),
                    r1: node_position(q_e, 1),
                    a0,
                    psi01,
                }
            }
            InterpolationKind::SE3 => {
                let h0 = FrameTransform::from_coordinates(
                    &node_position(q_e, 0),
                    &node_rotation(q_e, 0),
                );
                let h1 = FrameTransform::from_coordinates(
                    &node_position(q_e, 1),
                    &node_rotation(q_e, 1),
                );
                let theta01 = log_se3(&h0.inverse().compose(&h1))?;
                Nodal::SE3 { h0, theta01 }
            }
        };
        Ok(Self {
            order,
            a: interval.0,
            b: interval.1,
            nodal,
        })
    }

    /// Element `e` of `mesh`, reading its coordinates from the global vector `q`.
    pub fn from_global(kind: InterpolationKind, mesh: &Mesh, e: usize, q: &[f64]) -> Result<Self> {
        Self::new(
            kind,
            mesh.order(),
            mesh.element_interval(e),
            &q[mesh.element_dofs(e)],
        )
    }

    pub fn kind(&self) -> InterpolationKind {
        match self.nodal {
            Nodal::R12 { .. } => InterpolationKind::R12,
            Nodal::R3xSO3 { .. } => InterpolationKind::R3xSO3,
            Nodal::SE3 { .. } => InterpolationKind::SE3,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn basis(&self, xi: f64) -> LagrangeBasis {
        LagrangeBasis::evaluate(self.order, self.a, self.b, xi)
    }

    #[inline]
    fn linear_weight(&self, xi: f64) -> f64 {
        (xi - self.a) / (self.b - self.a)
    }

    /// Relative rotation vector `psi_01` of a two-node Lie-group element.
    pub fn relative_rotation(&self) -> Option<Vec3> {
        match &self.nodal {
            Nodal::R12 { .. } => None,
            Nodal::R3xSO3 { psi01, .. } => Some(*psi01),
            Nodal::SE3 { theta01, .. } => Some(theta01.angular),
        }
    }

    /// R12 evaluation including the orientation derivative; `None` for other kinds.
    pub fn r12_sample(&self, xi: f64) -> Option<R12Sample> {
        let Nodal::R12 { origin, r, a } = &self.nodal else {
            return None;
        };
        let basis = self.basis(xi);
        let mut s = R12Sample {
            r: *origin,
            r_xi: Vec3::zeros(),
            a: Mat3::zeros(),
            a_xi: Mat3::zeros(),
        };
        for (i, (&n, &dn)) in basis.values().iter().zip(basis.derivatives()).enumerate() {
            s.r += n * r[i];
            s.r_xi += dn * r[i];
            s.a += n * a[i];
            s.a_xi += dn * a[i];
        }
        Some(s)
    }

    /// Centerline point, its `xi`-derivative and the orientation at `xi`.
    pub fn frame(&self, xi: f64) -> FrameSample {
        let delta = self.b - self.a;
        match &self.nodal {
            Nodal::R12 { .. } => {
                let s = self.r12_sample(xi).expect("r12 nodal data");
                FrameSample {
                    r: s.r,
                    r_xi: s.r_xi,
                    a: s.a,
                }
            }
            Nodal::R3xSO3 { r0, r1, a0, psi01 } => {
                let n1 = self.linear_weight(xi);
                FrameSample {
                    r: (1.0 - n1) * r0 + n1 * r1,
                    r_xi: (r1 - r0) / delta,
                    a: a0 * exp_so3(&(n1 * psi01)),
                }
            }
            Nodal::SE3 { h0, theta01 } => {
                let n1 = self.linear_weight(xi);
                let h = h0.compose(&exp_se3(&theta01.scale(n1)));
                FrameSample {
                    r: h.translation,
                    r_xi: h.rotation * theta01.linear / delta,
                    a: h.rotation,
                }
            }
        }
    }

    /// Euclidean transform of the interpolated frame at `xi`.
    pub fn transform(&self, xi: f64) -> FrameTransform {
        let f = self.frame(xi);
        FrameTransform::new(f.a, f.r)
    }

    /// Scaled strains `(gamma_bar, kappa_bar) = J * (gamma, kappa)` at `xi`.
    pub fn scaled_strains(&self, xi: f64) -> (Vec3, Vec3) {
        let delta = self.b - self.a;
        match &self.nodal {
            Nodal::R12 { .. } => {
                let s = self.r12_sample(xi).expect("r12 nodal data");
                let at = s.a.transpose();
                (at * s.r_xi, vee_unchecked(&skw(&(at * s.a_xi))))
            }
            Nodal::R3xSO3 { psi01, .. } => {
                let f = self.frame(xi);
                (f.a.transpose() * f.r_xi, psi01 / delta)
            }
            Nodal::SE3 { theta01, .. } => (theta01.linear / delta, theta01.angular / delta),
        }
    }

    /// Orientation and scaled strains at `xi`, as needed by the internal force.
    pub fn section_kinematics(&self, xi: f64) -> (Mat3, Vec3, Vec3) {
        let delta = self.b - self.a;
        match &self.nodal {
            Nodal::R12 { .. } => {
                let s = self.r12_sample(xi).expect("r12 nodal data");
                let at = s.a.transpose();
                (s.a, at * s.r_xi, vee_unchecked(&skw(&(at * s.a_xi))))
            }
            Nodal::R3xSO3 { r0, r1, a0, psi01 } => {
                let a = a0 * exp_so3(&(self.linear_weight(xi) * psi01));
                (a, a.transpose() * (r1 - r0) / delta, psi01 / delta)
            }
            Nodal::SE3 { h0, theta01 } => {
                let a = h0.rotation * exp_so3(&(self.linear_weight(xi) * theta01.angular));
                (a, theta01.linear / delta, theta01.angular / delta)
            }
        }
    }

    pub fn strains(&self, xi: f64, j: f64) -> StrainState {
        let (g, k) = self.scaled_strains(xi);
        StrainState::from_scaled(&g, &k, j)
    }
}

/// Interpolated frame of the global field at `xi`.
pub fn frame_at(
    mesh: &Mesh,
    kind: InterpolationKind,
    q: &[f64],
    xi: f64,
) -> Result<FrameTransform> {
    let e = mesh.locate(xi)?;
    Ok(ElementField::from_global(kind, mesh, e, q)?.transform(xi))
}

fn element_field(
    kind: InterpolationKind,
    mesh: &Mesh,
    e: usize,
    q_e: &[f64],
    xi: f64,
) -> Result<ElementField> {
    mesh.lagrange_basis(e, xi)?;
    ElementField::new(kind, mesh.order(), mesh.element_interval(e), q_e)
}

/// R12 interpolation `(r, r_xi, A, A_xi)` of element `e`.
pub fn eval_r12(mesh: &Mesh, e: usize, q_e: &[f64], xi: f64) -> Result<R12Sample> {
    let f = element_field(InterpolationKind::R12, mesh, e, q_e, xi)?;
    Ok(f.r12_sample(xi).expect("r12 element"))
}

/// R12 strains: `gamma = A^T r_xi / J`, `kappa = vee(skw(A^T A_xi)) / J`.
pub fn strain_r12(mesh: &Mesh, e: usize, q_e: &[f64], xi: f64, j: f64) -> Result<StrainState> {
    let f = element_field(InterpolationKind::R12, mesh, e, q_e, xi)?;
    Ok(f.strains(xi, j))
}

/// R3xSO(3) interpolation `(r, r_xi, A)` of element `e`.
pub fn eval_r3so3(mesh: &Mesh, e: usize, q_e: &[f64], xi: f64) -> Result<FrameSample> {
    Ok(element_field(InterpolationKind::R3xSO3, mesh, e, q_e, xi)?.frame(xi))
}

/// R3xSO(3) strains; `kappa` is constant over the element.
pub fn strain_r3so3(mesh: &Mesh, e: usize, q_e: &[f64], xi: f64, j: f64) -> Result<StrainState> {
    Ok(element_field(InterpolationKind::R3xSO3, mesh, e, q_e, xi)?.strains(xi, j))
}

/// SE(3) interpolated Euclidean transform of element `e`.
pub fn eval_se3(mesh: &Mesh, e: usize, q_e: &[f64], xi: f64) -> Result<FrameTransform> {
    Ok(element_field(InterpolationKind::SE3, mesh, e, q_e, xi)?.transform(xi))
}

/// SE(3) strains `theta_01 / (delta_xi J)`, constant over the element.
pub fn strain_se3(mesh: &Mesh, e: usize, q_e: &[f64], j: f64) -> Result<StrainState> {
    let (a, _) = mesh.element_interval(e);
    Ok(element_field(InterpolationKind::SE3, mesh, e, q_e, a)?.strains(a, j))
}
