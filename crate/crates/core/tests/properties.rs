//! Property tests of the kernels, element interpolations, model forces and solvers.

use std::f64::consts::PI;

use cosserat::bench::solve_cantilever;
use cosserat::discretization::{
    node_position, node_rotation, set_node, ElementField, LagrangeBasis, NODE_DOF,
};
use cosserat::liegroup::{
    complement_rotation, exp_se3, exp_so3, log_se3, log_so3, tangent_so3, tangent_so3_inv,
    SMALL_ANGLE,
};
use cosserat::rodmodel::{section_circular, straight_configuration};
use cosserat::solvers::{complement_nodes, BoundaryConditions, DynamicSystem};
use cosserat::{
    Integration, InterpolationKind as Kind, LoadCase, Mat3, Mesh, RodModel, Twist, Vec3,
};
use proptest::prelude::*;

const KINDS: [(Kind, usize); 4] = [
    (Kind::R12, 1),
    (Kind::R12, 2),
    (Kind::R3xSO3, 1),
    (Kind::SE3, 1),
];

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-r..r).prop_map(Vec3::from)
}

fn direction() -> impl Strategy<Value = Vec3> {
    vec3(1.0)
        .prop_filter("non-degenerate", |v| v.norm() > 0.1)
        .prop_map(|v| v.normalize())
}

fn rotation_vector(lo: f64, hi: f64) -> impl Strategy<Value = Vec3> {
    (direction(), lo..hi).prop_map(|(d, a)| a * d)
}

/// Rigid motion `(R, t)`.
fn rigid_motion() -> impl Strategy<Value = (Mat3, Vec3)> {
    (rotation_vector(0.0, 3.0), vec3(5.0)).prop_map(|(psi, t)| (exp_so3(&psi), t))
}

/// Coordinates of a bent and twisted element with `n` nodes along roughly `e_x`.
fn element(n: usize) -> impl Strategy<Value = Vec<f64>> {
    (
        rotation_vector(0.0, 3.0),
        prop::collection::vec((vec3(0.2), rotation_vector(0.0, 1.0)), n),
    )
        .prop_map(move |(base, nodes)| {
            let a0 = exp_so3(&base);
            let mut q = vec![0.0; NODE_DOF * n];
            for (i, (dr, dpsi)) in nodes.iter().enumerate() {
                let r = a0 * (Vec3::new(0.5 * i as f64, 0.0, 0.0) + dr);
                let psi = log_so3(&(a0 * exp_so3(dpsi))).unwrap();
                set_node(&mut q, i, &r, &psi);
            }
            q
        })
}

fn moved(q: &[f64], rot: &Mat3, shift: &Vec3) -> Vec<f64> {
    let mut out = q.to_vec();
    for i in 0..q.len() / NODE_DOF {
        let r = rot * node_position(q, i) + shift;
        let psi = log_so3(&(rot * exp_so3(&node_rotation(q, i)))).unwrap();
        set_node(&mut out, i, &r, &psi);
    }
    out
}

fn samples() -> impl Iterator<Item = f64> {
    (0..10).map(|k| (k as f64 + 0.5) / 10.0)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn model(kind: Kind, order: usize, integration: Integration) -> RodModel {
    let mesh = Mesh::new(2, order).unwrap();
    let section = section_circular(0.05, 1000.0, 1e7, 4e6);
    RodModel::straight(mesh, kind, section, 1.0, integration).unwrap()
}

/// Perturbation of the straight two-element configuration of `mesh`.
fn deformed(mesh: &Mesh, dr: &[Vec3], dpsi: &[Vec3]) -> Vec<f64> {
    let mut q = straight_configuration(mesh, 1.0);
    for i in 0..mesh.n_nodes() {
        let r = node_position(&q, i) + dr[i];
        set_node(&mut q, i, &r, &dpsi[i]);
    }
    q
}

fn perturbations() -> impl Strategy<Value = (Vec<Vec3>, Vec<Vec3>)> {
    (
        prop::collection::vec(vec3(0.1), 5),
        prop::collection::vec(rotation_vector(0.0, 1.0), 5),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exp_is_a_rotation(psi in rotation_vector(0.0, 10.0)) {
        let a = exp_so3(&psi);
        prop_assert!((a.transpose() * a - Mat3::identity()).amax() < 1e-12);
        prop_assert!((a.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn so3_round_trip(psi in rotation_vector(0.0, PI - 1e-3)) {
        let a = exp_so3(&psi);
        let back = log_so3(&a).unwrap();
        prop_assert!((back - psi).norm() < 1e-10);
        prop_assert!((exp_so3(&back) - a).amax() < 1e-10);
    }

    #[test]
    fn se3_round_trip(d in vec3(10.0), psi in rotation_vector(0.0, PI - 1e-3)) {
        let theta = Twist::new(d, psi);
        let back = log_se3(&exp_se3(&theta)).unwrap();
        prop_assert!((back.linear - d).norm() < 1e-10 * (1.0 + d.norm()));
        prop_assert!((back.angular - psi).norm() < 1e-10);
    }

    #[test]
    fn tangent_inverse_pair(psi in rotation_vector(2.0 * SMALL_ANGLE, 2.0 * PI - 0.1)) {
        let t = tangent_so3(&psi);
        let t_inv = tangent_so3_inv(&psi).unwrap();
        prop_assert!((t * t_inv - Mat3::identity()).amax() < 1e-11);
        prop_assert!((t_inv * t - Mat3::identity()).amax() < 1e-11);
    }

    #[test]
    fn small_angle_branches_are_continuous(d in direction()) {
        let below = (SMALL_ANGLE * (1.0 - 1e-9)) * d;
        let above = (SMALL_ANGLE * (1.0 + 1e-9)) * d;
        prop_assert!((exp_so3(&below) - exp_so3(&above)).amax() < 1e-11);
        prop_assert!((tangent_so3(&below) - tangent_so3(&above)).amax() < 1e-11);
        let gap = tangent_so3_inv(&below).unwrap() - tangent_so3_inv(&above).unwrap();
        prop_assert!(gap.amax() < 1e-11);
        let a = exp_so3(&above);
        prop_assert!((log_so3(&a).unwrap() - above).norm() < 1e-11 * SMALL_ANGLE);
    }

    #[test]
    fn complement_is_short_and_same_rotation(psi in rotation_vector(0.0, 3.0 * PI)) {
        let c = complement_rotation(&psi);
        prop_assert!(c.norm() <= PI + 1e-12);
        prop_assert!((exp_so3(&c) - exp_so3(&psi)).amax() < 1e-12);
    }

    #[test]
    fn complement_nodes_keeps_orientations(
        psis in prop::collection::vec(rotation_vector(0.0, 3.0 * PI), 4),
    ) {
        let mut q = vec![0.0; NODE_DOF * psis.len()];
        for (i, psi) in psis.iter().enumerate() {
            set_node(&mut q, i, &Vec3::new(i as f64, 0.0, 0.0), psi);
        }
        let before = q.clone();
        let changed = complement_nodes(&mut q);
        for (i, psi) in psis.iter().enumerate() {
            prop_assert_eq!(changed.contains(&i), psi.norm() > PI);
            prop_assert!(node_rotation(&q, i).norm() <= PI + 1e-12);
            prop_assert_eq!(node_position(&q, i), node_position(&before, i));
            let gap = exp_so3(&node_rotation(&q, i)) - exp_so3(psi);
            prop_assert!(gap.amax() < 1e-12);
        }
    }

    #[test]
    fn basis_partition_of_unity(order in 1usize..=2, a in -5.0..5.0f64, len in 0.01..3.0f64, t in 0.0..=1.0f64) {
        let b = a + len;
        let basis = LagrangeBasis::evaluate(order, a, b, a + t * len);
        let sum: f64 = basis.values().iter().sum();
        let dsum: f64 = basis.derivatives().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-13);
        prop_assert!(dsum.abs() < 1e-11 / len);
    }

    #[test]
    fn strains_are_objective(
        q2 in element(2),
        q3 in element(3),
        (rot, shift) in rigid_motion(),
    ) {
        for (kind, order) in KINDS {
            let q = if order == 1 { &q2 } else { &q3 };
            let f = ElementField::new(kind, order, (0.0, 1.0), q).unwrap();
            let g = ElementField::new(kind, order, (0.0, 1.0), &moved(q, &rot, &shift)).unwrap();
            for xi in samples() {
                let a = f.strains(xi, 1.0).to_array();
                let b = g.strains(xi, 1.0).to_array();
                for k in 0..6 {
                    prop_assert!((a[k] - b[k]).abs() < 1e-10 * (1.0 + a[k].abs()), "{kind} p{order} xi {xi}");
                }
            }
        }
    }

    #[test]
    fn nodal_values_are_interpolated(q2 in element(2), q3 in element(3)) {
        for (kind, order) in KINDS {
            let q = if order == 1 { &q2 } else { &q3 };
            let f = ElementField::new(kind, order, (0.0, 1.0), q).unwrap();
            for i in 0..=order {
                let s = f.frame(i as f64 / order as f64);
                prop_assert!((s.r - node_position(q, i)).norm() < 1e-12 * (1.0 + s.r.norm()));
                prop_assert!((s.a - exp_so3(&node_rotation(q, i))).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn se3_and_r3so3_share_orientation(q in element(2)) {
        let se3 = ElementField::new(Kind::SE3, 1, (0.0, 1.0), &q).unwrap();
        let r3 = ElementField::new(Kind::R3xSO3, 1, (0.0, 1.0), &q).unwrap();
        for xi in samples() {
            prop_assert!((se3.frame(xi).a - r3.frame(xi).a).amax() < 1e-12);
        }
    }

    #[test]
    fn element_curvatures_are_constant(q in element(2)) {
        let se3 = ElementField::new(Kind::SE3, 1, (0.0, 1.0), &q).unwrap();
        let r3 = ElementField::new(Kind::R3xSO3, 1, (0.0, 1.0), &q).unwrap();
        let r12 = ElementField::new(Kind::R12, 1, (0.0, 1.0), &q).unwrap();
        let s0 = se3.strains(0.0, 1.0).to_array();
        let k_r3 = r3.strains(0.0, 1.0).kappa;
        let k_r12 = r12.strains(0.0, 1.0).kappa;
        for xi in samples() {
            let s = se3.strains(xi, 1.0).to_array();
            for k in 0..6 {
                prop_assert!((s[k] - s0[k]).abs() < 1e-12 * (1.0 + s0[k].abs()));
            }
            prop_assert!((r3.strains(xi, 1.0).kappa - k_r3).norm() < 1e-12 * (1.0 + k_r3.norm()));
            prop_assert!((r12.strains(xi, 1.0).kappa - k_r12).norm() < 1e-12 * (1.0 + k_r12.norm()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn internal_forces_are_self_equilibrated((dr, dpsi) in perturbations()) {
        for (kind, order) in KINDS {
            let m = model(kind, order, Integration::Full);
            let q = deformed(m.mesh(), &dr, &dpsi);
            let f = m.f_int(&q).unwrap();
            let scale = max_abs(&f);
            let total: Vec3 = (0..m.mesh().n_nodes()).map(|i| node_position(&f, i)).sum();
            prop_assert!(total.norm() <= 1e-10 * scale, "{kind} p{order}: {total:?}");
        }
    }

    #[test]
    fn moments_balance_for_uniform_orientation((dr, _) in perturbations(), psi in rotation_vector(0.0, 3.0)) {
        for (kind, order) in KINDS {
            let m = model(kind, order, Integration::Full);
            let psis = vec![psi; m.mesh().n_nodes()];
            let q = deformed(m.mesh(), &dr, &psis);
            let f = m.f_int(&q).unwrap();
            let a = exp_so3(&psi);
            let mut moment = Vec3::zeros();
            for i in 0..m.mesh().n_nodes() {
                moment += node_position(&q, i).cross(&node_position(&f, i));
                moment += a * node_rotation(&f, i);
            }
            prop_assert!(moment.norm() <= 1e-10 * max_abs(&f), "{kind} p{order}: {moment:?}");
        }
    }

    #[test]
    fn internal_forces_are_frame_indifferent(
        (dr, dpsi) in perturbations(),
        (rot, shift) in rigid_motion(),
    ) {
        for (kind, order) in KINDS {
            let m = model(kind, order, Integration::Reduced);
            let q = deformed(m.mesh(), &dr, &dpsi);
            let f = m.f_int(&q).unwrap();
            let g = m.f_int(&moved(&q, &rot, &shift)).unwrap();
            let tol = 1e-10 * max_abs(&f);
            for i in 0..m.mesh().n_nodes() {
                let df = rot * node_position(&f, i) - node_position(&g, i);
                let dm = node_rotation(&f, i) - node_rotation(&g, i);
                prop_assert!(df.norm() <= tol && dm.norm() <= tol, "{kind} p{order} node {i}");
            }
        }
    }

    #[test]
    fn se3_quadratures_agree_without_relative_rotation(
        (dr, _) in perturbations(),
        psi in rotation_vector(0.0, 3.0),
    ) {
        let full = model(Kind::SE3, 1, Integration::Full);
        let reduced = model(Kind::SE3, 1, Integration::Reduced);
        let q = deformed(full.mesh(), &dr, &[psi; 3]);
        let a = full.f_int(&q).unwrap();
        let b = reduced.f_int(&q).unwrap();
        let gap = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        prop_assert!(gap <= 1e-10 * max_abs(&a));
    }

    #[test]
    fn gyroscopic_forces_do_no_work(u in prop::collection::vec(-10.0..10.0f64, 30)) {
        let m = model(Kind::R12, 2, Integration::Full);
        let u = &u[..m.n_dof()];
        let g = m.f_gyr(u);
        let power: f64 = u.iter().zip(&g).map(|(a, b)| a * b).sum();
        prop_assert!(power.abs() <= 1e-12 * max_abs(&g).max(1.0) * max_abs(u));
    }

    #[test]
    fn momentum_rate_equals_weight(
        (dr, dpsi) in perturbations(),
        u in prop::collection::vec(-5.0..5.0f64, 30),
    ) {
        for (kind, order) in KINDS {
            let base = model(kind, order, Integration::Full);
            let a_rho0 = base.section().inertia.a_rho0;
            let m = base.with_loads(LoadCase::gravity(a_rho0, 9.81));
            let q = deformed(m.mesh(), &dr, &dpsi);
            let u = &u[..m.n_dof()];
            let sys = DynamicSystem::new(m.clone(), &BoundaryConditions::free()).unwrap();
            let (_, u_dot) = sys.rhs_dynamic(0.0, &q, u).unwrap();
            let p_dot = m.mass_matrix().mul_vec(&u_dot);
            let total: Vec3 = (0..m.mesh().n_nodes()).map(|i| node_position(&p_dot, i)).sum();
            let weight = Vec3::new(0.0, 0.0, -a_rho0 * 9.81);
            let scale = max_abs(&m.f_int(&q).unwrap()) + weight.norm();
            prop_assert!((total - weight).norm() <= 1e-10 * scale, "{kind} p{order}");
        }
    }
}

#[test]
fn mass_matrix_does_not_depend_on_the_reference_shape() {
    let mesh = Mesh::new(3, 2).unwrap();
    let section = section_circular(0.05, 1000.0, 1e7, 4e6);
    let straight = RodModel::straight(mesh, Kind::R12, section, 1.0, Integration::Full).unwrap();
    let mut twisted = straight_configuration(&mesh, 1.0);
    for i in 0..mesh.n_nodes() {
        let r = node_position(&twisted, i);
        set_node(&mut twisted, i, &r, &Vec3::new(0.3 * i as f64, 0.0, 0.0));
    }
    let twisted = RodModel::new(mesh, Kind::R12, section, twisted, Integration::Full).unwrap();
    assert_eq!(straight.mass_matrix(), twisted.mass_matrix());
}

#[test]
fn newton_tail_is_quadratic() {
    let (_, sol) = solve_cantilever(Kind::SE3, 1, 16, Integration::Reduced, 1e1, 10, 30).unwrap();
    let mut start = 0;
    for step in &sol.steps {
        let history = &sol.residual_history[start..start + step.iterations];
        start += step.iterations;
        let r0 = history[0];
        for pair in history.windows(2) {
            let (e0, e1) = (pair[0] / r0, pair[1] / r0);
            if e0 < 1e-2 {
                assert!(
                    e1 <= (10.0 * e0 * e0).max(1e-12),
                    "load {}: {e0:e} -> {e1:e}",
                    step.load_factor
                );
            }
        }
    }
    assert_eq!(start, sol.residual_history.len());
}
