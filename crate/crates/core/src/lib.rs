//! Finite elements for geometrically exact Cosserat rods.
//!
//! Nodal unknowns are centerline points and total rotation vectors. Three
//! element fields are provided: Lagrange interpolation of points and
//! orientation matrices (`r12`), separate interpolation of centerline and
//! rotations (`r3so3`) and Euclidean-transform interpolation (`se3`).

pub mod bench;
pub mod discretization;
pub mod error;
pub mod liegroup;
pub mod linalg;
pub mod quadrature;
pub mod rodmodel;
pub mod solvers;

pub use discretization::{InterpolationKind, Mesh, StrainState};
pub use error::{Result, RodError};
pub use liegroup::{FrameTransform, Mat3, Twist, Vec3};
pub use rodmodel::{CrossSection, Integration, LoadCase, PointLoad, RodModel};
