//! semilab: a numerical laboratory for semilinear elliptic equations
//! `Lap u - f(u) = 0` on round spheres, balls, and symmetry-reduced
//! subdomains of S^3, specialized to the Allen-Cahn equation
//! `eps^2 Lap u - W'(u) = 0`.
//!
//! The crate computes ground states and other unstable solutions (Newton,
//! gradient flow, mountain-pass deformation), their Morse index and nullity,
//! Schwarz symmetrization and polarization on the sphere, and the bifurcation
//! structure of the Allen-Cahn solution families on S^3.
//!
//! All numerical kernels are generic over [`scalar::Scalar`]; the type
//! aliases below pin the `f64` instantiation used by the CLI and the
//! acceptance suite.

pub mod acceptance;
pub mod bifurcation;
pub mod config;
pub mod driver;
pub mod field;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod mountainpass;
pub mod potential;
pub mod rearrange;
pub mod rng;
pub mod scalar;
pub mod spectral;

pub use scalar::Scalar;

/// Default scalar of the shipped lab.
pub type Real = f64;

pub type Potential = potential::Potential<Real>;
pub type CriticalPointList = potential::CriticalPointList<Real>;
pub type Grid = geometry::Grid<Real>;
pub type Field = field::Field<Real>;
pub type Domain = geometry::Domain<Real>;
pub type Laplacian = geometry::Laplacian<Real>;
pub type EnergyReport = field::EnergyReport<Real>;
pub type FlowTrace = flow::FlowTrace<Real>;
pub type Path = mountainpass::Path<Real>;
pub type MinMaxResult = mountainpass::MinMaxResult<Real>;
pub type SpectrumReport = spectral::SpectrumReport<Real>;
pub type Branch = bifurcation::Branch<Real>;
pub type GapTable = bifurcation::GapTable<Real>;
