//! Strain fields of a quarter circle interpolated by each element kind.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use super::Table;
use crate::discretization::{set_node, ElementField, InterpolationKind, Mesh, NODE_DOF};
use crate::error::Result;
use crate::liegroup::Vec3;

/// Nodes on the quarter circle of length 1 in the x-z plane:
/// `psi_i = (0, pi/2 * i/(N-1), 0)`, `r_i = 2/pi (1 - cos, 0, sin)`.
pub fn quarter_circle_nodes(n_nodes: usize) -> Vec<f64> {
    let mut q = vec![0.0; NODE_DOF * n_nodes];
    for i in 0..n_nodes {
        let a = FRAC_PI_2 * i as f64 / (n_nodes - 1).max(1) as f64;
        let r = Vec3::new(1.0 - a.cos(), 0.0, a.sin()) / FRAC_PI_2;
        set_node(&mut q, i, &r, &Vec3::new(0.0, a, 0.0));
    }
    q
}

/// Strains with `J = 1` at `samples` equally spaced parameters.
pub fn quarter_circle_strains(
    kind: InterpolationKind,
    order: usize,
    n_el: usize,
    samples: usize,
) -> Result<Table> {
    let mesh = Mesh::new(n_el, order)?;
    let q = quarter_circle_nodes(mesh.n_nodes());
    let fields = (0..n_el)
        .map(|e| ElementField::from_global(kind, &mesh, e, &q))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&[
        ("xi", "1"),
        ("gamma_x", "1"),
        ("gamma_y", "1"),
        ("gamma_z", "1"),
        ("kappa_x", "1/m"),
        ("kappa_y", "1/m"),
        ("kappa_z", "1/m"),
    ]);
    for i in 0..samples {
        let xi = i as f64 / (samples - 1).max(1) as f64;
        let e = mesh.locate(xi)?;
        let eps = fields[e].strains(xi, 1.0);
        let mut row = vec![xi];
        row.extend_from_slice(&eps.to_array());
        t.push(row);
    }
    Ok(t)
}

/// Strain tables for every kind supporting `order`, written to `out_dir` if given.
pub fn run_quarter_circle(
    order: usize,
    n_el: usize,
    kinds: &[InterpolationKind],
    out_dir: Option<&Path>,
) -> Result<Vec<(InterpolationKind, Table, Option<PathBuf>)>> {
    let mut out = Vec::new();
    for &kind in kinds.iter().filter(|k| k.supports_order(order)) {
        let table = quarter_circle_strains(kind, order, n_el, 101)?;
        let path = match out_dir {
            Some(dir) => {
                let p = dir.join(format!("quarter_circle_{kind}_p{order}_nel{n_el}.csv"));
                table.write(&p)?;
                Some(p)
            }
            None => None,
        };
        out.push((kind, table, path));
    }
    Ok(out)
}
