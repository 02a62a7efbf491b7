//! Distortion and V@R-type risk measures on finite scenarios, and the
//! risk-sharing constructions that split a position across a network of
//! regulated entities.
//!
//! Every position lives on one latent uniform coordinate as a
//! [`QuantileProfile`], so measures and allocations are computed exactly,
//! with no sampling. The numeric core is generic over [`Scalar`]: `f64`,
//! `f32` or the exact [`Rational`] type.

// `!(x > 0)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod distortion;
pub mod error;
pub mod io;
pub mod measures;
pub mod regulator;
pub mod scalar;
pub mod scenario;
pub mod sharing;

pub use distortion::{choquet_eval, mixture_eval, Distortion, Segment, StieltjesMeasure};
pub use error::{Error, HypothesisViolation, Result};
pub use measures::{Measure, RiskMeasure};
pub use regulator::{network_report, scr, solvency_check, BalanceSheet, NetworkReport};
pub use scalar::{Real, Scalar};
pub use scenario::{combine, DiscreteDistribution, LatentSort, PiecewiseLinear, QuantileProfile};
pub use sharing::{Allocation, Prediction, Regime, SharingOutcome, Strategy};

pub type Rational = num_rational::Ratio<i64>;

pub type Profile64 = QuantileProfile<f64>;
pub type Distortion64 = Distortion<f64>;
pub type Distribution64 = DiscreteDistribution<f64>;
pub type Measure64 = RiskMeasure<f64>;

pub type ProfileQ = QuantileProfile<Rational>;
pub type DistortionQ = Distortion<Rational>;
