//! Cubic Curie–Weiss model: phase diagram, exact finite-n laws, limiting
//! densities, Stein-pair diagnostics and a heat-bath sampler.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod density;
pub mod error;
pub mod glauber;
pub mod law;
pub mod model;
pub mod numeric;
pub mod phase;
pub mod rate;
pub mod stein;

pub use density::{GPoly, LimitDensity};
pub use error::{Error, Result};
pub use glauber::{heat_bath_step, sample_magnetization, ChainState, SampleResult, SamplerConfig};
pub use law::{build_law, Interval, MagnetizationLaw, RescaledVariable};
pub use model::{Couplings, EquilibriumPoint, ModelParams, PointKind, TaylorCoeffs};
pub use phase::{
    find_stationary_points, gamma_of_k, m_star, phase_portrait, rate_function, GammaConfig, GammaCurvePoint,
    PhaseConfig, PhaseLabel, PhasePortrait,
};
pub use rate::RateFit;
pub use stein::{be_certificate, RegressionDecomposition, SteinReport};
