//! Numerical library for wave and Schrödinger propagators on the
//! three-dimensional model geometries S³, H³, ℝ³ and on small radial
//! perturbations of H³.
//!
//! The library is organized around the shifted Hamiltonian
//! `H = -Δ + κ₀ + V`, where `κ₀` is the (constant or asymptotic) sectional
//! curvature and `V` a small scalar potential:
//!
//! - [`geometry`]: exact point/geodesic geometry for the unit sphere in ℝ⁴
//!   and the hyperboloid model of H³, plus quadrature over geodesic spheres.
//! - [`jacobi`]: scalar and matrix Jacobi equations along geodesics, the
//!   2×2 transport matrix, the geodesic-sphere area element and scattering
//!   data for perturbed curvature.
//! - [`kato`]: Kato-class norms for radial potentials and the sup-over-
//!   geodesics L¹ norm for radial fields.
//! - [`freeprop`]: closed-form shell propagators of the free wave equation,
//!   spherical means, the S³ spectral oracle (zonal and dyadic projections).
//! - [`parametrix`]: space-time kernels radial about a fixed origin, the
//!   convolution algebra acting on them, the perturbed-metric parametrix
//!   with its error term, the iterated error series and the potential Born
//!   series, with weighted norm bookkeeping.
//! - [`schrodinger`]: the H³ Schrödinger kernel through the spectral
//!   (oscillatory-integral) route and through the time-domain transform of
//!   the sine propagator, plus `t^{-3/2}` decay scans.
//! - [`reference`]: independent reference solvers (1D radial finite
//!   differences, flat 1D Schrödinger) used to cross-check kernels.
//! - [`acceptance`]: the quantitative verification suite binding everything
//!   together; also reachable through the CLI.

pub mod acceptance;
pub mod error;
pub mod freeprop;
pub mod fresnel;
pub mod geometry;
pub mod jacobi;
pub mod kato;
pub mod mat2;
pub mod ode;
pub mod parametrix;
pub mod quad;
pub mod reference;
pub mod schrodinger;
pub mod spline;

pub use error::{Error, Result};
pub use geometry::{Point, Space, SpaceKind, TangentVector};
pub use jacobi::{PerturbationField, ScatteringData, TransportPath, TransportState};
