//! Line and end loads.

use serde::{Deserialize, Serialize};

use crate::liegroup::Vec3;

/// Concentrated loads at one end of the rod.
///
/// `force` is given in inertial components, `follower_force` in body
/// components (it rotates with the end cross-section) and `moment` in body
/// components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointLoad {
    pub force: [f64; 3],
    pub follower_force: [f64; 3],
    pub moment: [f64; 3],
}

impl PointLoad {
    pub fn force(&self) -> Vec3 {
        Vec3::from(self.force)
    }

    pub fn follower_force(&self) -> Vec3 {
        Vec3::from(self.follower_force)
    }

    pub fn moment(&self) -> Vec3 {
        Vec3::from(self.moment)
    }

    pub fn has_follower(&self) -> bool {
        self.follower_force.iter().any(|&f| f != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }
}

/// External loading of a rod per unit reference arc length plus end loads.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadCase {
    /// Distributed force `b`, inertial components.
    pub distributed_force: [f64; 3],
    /// Distributed moment `c`, body components.
    pub distributed_moment: [f64; 3],
    pub first: PointLoad,
    pub last: PointLoad,
}

impl LoadCase {
    pub fn distributed_force(&self) -> Vec3 {
        Vec3::from(self.distributed_force)
    }

    pub fn distributed_moment(&self) -> Vec3 {
        Vec3::from(self.distributed_moment)
    }

    /// Uniform weight `rho0 A g` along `-e_z`.
    pub fn gravity(a_rho0: f64, g: f64) -> Self {
        Self {
            distributed_force: [0.0, 0.0, -a_rho0 * g],
            ..Self::default()
        }
    }

    pub fn with_last(mut self, load: PointLoad) -> Self {
        self.last = load;
        self
    }

    pub fn with_first(mut self, load: PointLoad) -> Self {
        self.first = load;
        self
    }
}
