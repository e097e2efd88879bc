//! Numerical machinery for spectral gaps of hyperbolic surfaces: right-angled
//! polygon trigonometry, Poincaré metric densities, collar eigenfunction
//! analysis, boundary-length perturbation maps between pants, surface gluing
//! bounds and random-cover statistics.
//!
//! Geometry kernels are generic over [`scalar::Real`]; the aliases below fix
//! them to `f64`, which is what the certification suites use.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collar;
pub mod covers;
pub mod error;
pub mod hyptrig;
pub mod metrics;
pub mod ode;
pub mod oracle;
pub mod pants_maps;
pub mod quad;
pub mod scalar;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};

pub type Trirectangle = hyptrig::Trirectangle<f64>;
pub type Pentagon = hyptrig::Pentagon<f64>;
pub type Hexagon = hyptrig::Hexagon<f64>;
pub type Collar = hyptrig::Collar<f64>;
pub type AnnulusSpec = metrics::AnnulusSpec<f64>;
pub type RadialMetric = metrics::RadialMetric<f64>;
pub type IntermediateMetricSpec = metrics::IntermediateMetricSpec<f64>;
pub type ModeOdeParams = collar::ModeOdeParams<f64>;
pub type ModeSolutionPair = collar::ModeSolutionPair<f64>;
pub type MassRatioReport = collar::MassRatioReport<f64>;
pub type FermiPentagon = pants_maps::FermiPentagon<f64>;
pub type FermiHexagon = pants_maps::FermiHexagon<f64>;
pub type Pants = pants_maps::Pants<f64>;
pub type DistortionReport = pants_maps::DistortionReport<f64>;
