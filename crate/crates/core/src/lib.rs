//! Differentially private Fréchet means on Riemannian manifolds.
//!
//! Geometries: [`sphere::Sphere`], [`spd::Spd`] (affine-invariant metric) and
//! [`kendall::Kendall`] planar shape space. All implement
//! [`manifold::Manifold`]; [`frechet`] computes means and [`mechanisms`]
//! releases them privately.

pub mod error;
pub mod frechet;
pub mod kendall;
pub mod linalg;
pub mod manifold;
pub mod mechanisms;
pub mod spd;
pub mod sphere;

pub use error::{Error, Result};
pub use frechet::{frechet_mean, neg_gradient, variance, Dataset, FrechetResult, SolverConfig};
pub use kendall::{Kendall, Preshape};
pub use manifold::{GeodesicBall, Manifold, ManifoldDescriptor, Tangent};
pub use mechanisms::calibration::PrivacyParams;
pub use mechanisms::mcmc::ChainConfig;
pub use mechanisms::Mechanism;
pub use spd::{Spd, SpdPoint};
pub use sphere::{Sphere, SpherePoint};
