//! Cross-section inertia and the quadratic elastic law.

use serde::{Deserialize, Serialize};

use crate::discretization::StrainState;
use crate::liegroup::{Mat3, Vec3};

/// Mass per unit reference length and body-frame rotary inertia density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSectionInertia {
    pub a_rho0: f64,
    pub i_rho0: Mat3,
}

/// Diagonal elasticity `C_gamma = diag(k_e, k_s, k_s)`, `C_kappa = diag(k_t, k_by, k_bz)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticLaw {
    pub c_gamma: [f64; 3],
    pub c_kappa: [f64; 3],
}

impl ElasticLaw {
    pub fn new(c_gamma: [f64; 3], c_kappa: [f64; 3]) -> Self {
        Self { c_gamma, c_kappa }
    }

    pub fn is_valid(&self) -> bool {
        self.c_gamma
            .iter()
            .chain(self.c_kappa.iter())
            .all(|&k| k > 0.0 && k.is_finite())
    }

    /// Resultant contact force `n` and moment `m` in body components.
    pub fn constitutive(&self, eps: &StrainState, reference: &StrainState) -> (Vec3, Vec3) {
        let dg = eps.gamma - reference.gamma;
        let dk = eps.kappa - reference.kappa;
        (
            Vec3::new(
                self.c_gamma[0] * dg.x,
                self.c_gamma[1] * dg.y,
                self.c_gamma[2] * dg.z,
            ),
            Vec3::new(
                self.c_kappa[0] * dk.x,
                self.c_kappa[1] * dk.y,
                self.c_kappa[2] * dk.z,
            ),
        )
    }

    /// Strain energy per unit reference length.
    pub fn energy_density(&self, eps: &StrainState, reference: &StrainState) -> f64 {
        let (n, m) = self.constitutive(eps, reference);
        0.5 * (n.dot(&(eps.gamma - reference.gamma)) + m.dot(&(eps.kappa - reference.kappa)))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            c_gamma: self.c_gamma.map(|k| k * factor),
            c_kappa: self.c_kappa.map(|k| k * factor),
        }
    }
}

/// `n = C_gamma (gamma - gamma0)`, `m = C_kappa (kappa - kappa0)`.
pub fn constitutive(eps: &StrainState, law: &ElasticLaw, reference: &StrainState) -> (Vec3, Vec3) {
    law.constitutive(eps, reference)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSection {
    pub inertia: CrossSectionInertia,
    pub law: ElasticLaw,
}

impl CrossSection {
    pub fn with_scaled_stiffness(&self, factor: f64) -> Self {
        Self {
            inertia: self.inertia,
            law: self.law.scaled(factor),
        }
    }
}

/// Solid disc of radius `radius`: `A = pi r^2`, `I = pi r^4 / 4`, polar term `2 I`.
pub fn section_circular(radius: f64, rho0: f64, e: f64, g: f64) -> CrossSection {
    let area = std::f64::consts::PI * radius * radius;
    let i = std::f64::consts::PI * radius.powi(4) / 4.0;
    CrossSection {
        inertia: CrossSectionInertia {
            a_rho0: rho0 * area,
            i_rho0: Mat3::from_diagonal(&Vec3::new(2.0 * i, i, i)) * rho0,
        },
        law: ElasticLaw::new([e * area, g * area, g * area], [2.0 * g * i, e * i, e * i]),
    }
}

/// Solid rectangle of `width` along the body y axis and `height` along z.
/// Torsional stiffness uses the polar moment `I_y + I_z`, which reduces to
/// `2 G I` for a square.
pub fn section_rectangular(width: f64, height: f64, rho0: f64, e: f64, g: f64) -> CrossSection {
    let area = width * height;
    let iy = width * height.powi(3) / 12.0;
    let iz = height * width.powi(3) / 12.0;
    CrossSection {
        inertia: CrossSectionInertia {
            a_rho0: rho0 * area,
            i_rho0: Mat3::from_diagonal(&Vec3::new(iy + iz, iy, iz)) * rho0,
        },
        law: ElasticLaw::new(
            [e * area, g * area, g * area],
            [g * (iy + iz), e * iy, e * iz],
        ),
    }
}
