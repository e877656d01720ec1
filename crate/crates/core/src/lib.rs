//! Numerical laboratory for Gaussian random Riemannian metrics with a fixed
//! volume form on a flat torus.
//!
//! The reference manifold is `R^n / (2 pi Z)^n` with the identity metric in
//! the coordinate frame. A random metric with the same volume form is built
//! pointwise from two Gaussian fields expanded in the Laplace eigenbasis: a
//! traceless diagonal (radial) part giving the log-eigenvalues, and a
//! skew-symmetric (angular) part giving the rotation. The crate provides
//!
//! * exact kernels for the fiber geometry of determinant-one SPD matrices
//!   ([`symspace`]),
//! * the torus eigenbasis and decay schedules ([`spectrum`]),
//! * seeded field samplers and covariance evaluation ([`fields`]),
//! * the L2 and Lipschitz distances to the reference metric
//!   ([`distances`]),
//! * the closed-form law of the squared L2 distance with concentration
//!   bounds and CDF inversion ([`lawlab`]),
//! * discrete diameter/eigenvalue functionals with bi-Lipschitz sandwich
//!   checks and integrability certificates ([`geomlab`]),
//! * reproducible experiment drivers with manifest emission ([`harness`]).
//!
//! The geometry and sampling kernels are generic over the scalar type via
//! [`Real`] (`f32` or `f64`); the statistics layers are `f64`. The aliases
//! below pin the common instantiations.

pub mod distances;
pub mod error;
pub mod fields;
pub mod geomlab;
pub mod harness;
pub mod lawlab;
pub mod linalg;
pub mod real;
pub mod seeding;
pub mod spectrum;
pub mod stats;
pub mod symspace;

pub use error::{Error, Result};
pub use real::Real;

pub type Mat64 = linalg::Mat<f64>;
pub type Mat32 = linalg::Mat<f32>;
pub type SymMatrix64 = linalg::SymMatrix<f64>;
pub type SymMatrix32 = linalg::SymMatrix<f32>;
pub type SkewMatrix64 = linalg::SkewMatrix<f64>;
pub type SkewMatrix32 = linalg::SkewMatrix<f32>;
pub type SpdDetOne64 = symspace::SpdDetOne<f64>;
pub type SpdDetOne32 = symspace::SpdDetOne<f32>;
pub type TracelessDiag64 = symspace::TracelessDiag<f64>;
pub type TracelessDiag32 = symspace::TracelessDiag<f32>;
pub type DecaySchedule64 = spectrum::DecaySchedule<f64>;
pub type DecaySchedule32 = spectrum::DecaySchedule<f32>;
pub type RadialField64 = fields::RadialField<f64>;
pub type AngularField64 = fields::AngularField<f64>;
pub type MetricField64 = fields::MetricField<f64>;
