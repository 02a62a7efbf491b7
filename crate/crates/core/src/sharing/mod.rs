//! Risk sharing across a network of entities: allocations that split a
//! position `X` into parts `X^1 + ... + X^n = X`, their closed-form totals, and
//! an exhaustive oracle for the infimal total on tiny instances.

mod construct;
mod oracle;
mod selectors;

pub use construct::{
    build_escape_allocation, build_main_allocation, build_surplus_escape,
    build_var_type_allocation, check_optimality_hypotheses, escape_leader,
    infconv_truncation_curve, naive_allocation, offsetting_pair, optimal_value, upper_bound,
};
pub use oracle::{brute_force_infconv, equiprobable_cells, OracleResult, ORACLE_LIMIT};
pub use selectors::{combined_g, CombinedDistortion, Region, SelectorSystem};

use serde::Serialize;

use crate::distortion::Distortion;
use crate::error::{Error, HypothesisViolation, Result};
use crate::measures::{Measure, RiskMeasure};
use crate::scalar::{abs, max, scaled, Real, Scalar};
use crate::scenario::{combine, QuantileProfile};

/// Parts of a position on a shared latent coordinate, checked to sum to it.
#[derive(Clone, Debug, PartialEq)]
pub struct Allocation<T> {
    parts: Vec<QuantileProfile<T>>,
    total: QuantileProfile<T>,
}

impl<T: Scalar> Allocation<T> {
    pub fn new(parts: Vec<QuantileProfile<T>>, total: QuantileProfile<T>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter(
                "an allocation needs at least one part".into(),
            ));
        }
        let alloc = Self { parts, total };
        let magnitude = alloc
            .parts
            .iter()
            .chain(std::iter::once(&alloc.total))
            .fold(T::zero(), |acc, p| {
                max(acc, max(abs(p.essinf()), abs(p.esssup())))
            });
        let gap = alloc.residual()?;
        if gap > scaled(T::merge_tolerance(), magnitude) {
            return Err(Error::InvalidProfile(format!(
                "parts miss the total by {gap}"
            )));
        }
        Ok(alloc)
    }

    pub fn parts(&self) -> &[QuantileProfile<T>] {
        &self.parts
    }

    pub fn total(&self) -> &QuantileProfile<T> {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `sup |sum of parts - X|`.
    pub fn residual(&self) -> Result<T> {
        let ones = vec![T::one(); self.parts.len()];
        Ok(combine(&self.parts, &ones)?.max_abs_diff(&self.total))
    }

    /// `(part_index, u_left, u_right, value)` rows, parts numbered from 1.
    pub fn rows(&self) -> Vec<(usize, T, T, T)> {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.pieces().map(move |(l, r, v)| (i + 1, l, r, v)))
            .collect()
    }

    pub fn risks<M: Measure<T>>(&self, measures: &[M]) -> Result<Vec<T>> {
        if measures.len() != self.parts.len() {
            return Err(Error::InvalidParameter(format!(
                "{} measures for {} parts",
                measures.len(),
                self.parts.len()
            )));
        }
        measures
            .iter()
            .zip(&self.parts)
            .map(|(m, p)| m.evaluate(p))
            .collect()
    }
}

/// Which construction produced an allocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Tranches below the parameters plus comonotone transfers of the rest.
    ComonotoneTransfer,
    /// Parameters sum to at least 1: `g = 0` and the total is the best case.
    BestCaseCollapse,
    /// V@R-type measures covering the unit interval.
    VarTypeCollapse,
    /// A distortion with `g(1 - d + alpha) < 1` absorbs an unbounded withdrawal.
    UnsaturatedEscape,
    /// A strongly surplus-sensitive extra entity absorbs the withdrawal.
    SurplusEscape,
    /// `X / n` to everyone.
    NaiveSplit,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Self::ComonotoneTransfer => "comonotone transfer",
            Self::BestCaseCollapse => "best-case collapse (g = 0)",
            Self::VarTypeCollapse => "V@R-type collapse",
            Self::UnsaturatedEscape => "unsaturated escape",
            Self::SurplusEscape => "surplus escape",
            Self::NaiveSplit => "naive split",
        }
    }
}

/// What the construction promises about the realized total.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Prediction<T> {
    Exact(T),
    UpperBound(T),
    Unavailable,
}

impl<T: Scalar> Prediction<T> {
    pub fn value(&self) -> Option<T> {
        match *self {
            Self::Exact(v) | Self::UpperBound(v) => Some(v),
            Self::Unavailable => None,
        }
    }

    pub fn holds(&self, realized: T, tol: T) -> bool {
        match *self {
            Self::Exact(v) => abs(realized - v) <= scaled(tol, v),
            Self::UpperBound(v) => realized <= v + scaled(tol, v),
            Self::Unavailable => true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SharingOutcome<T> {
    pub regime: Regime,
    pub allocation: Allocation<T>,
    pub part_risks: Vec<T>,
    pub prediction: Prediction<T>,
    pub notes: Vec<String>,
}

impl<T: Scalar> SharingOutcome<T> {
    pub fn realized_total(&self) -> T {
        self.part_risks.iter().fold(T::zero(), |acc, &r| acc + r)
    }

    pub fn prediction_holds(&self, tol: T) -> bool {
        self.prediction.holds(self.realized_total(), tol)
    }
}

/// A construction selectable by name from reports and the command line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy<T> {
    Main,
    VarType,
    Escape {
        m: T,
    },
    /// All measures but the last are V@R-type; the last is the extra entity.
    SurplusEscape {
        m: T,
    },
    Naive,
}

impl<T> Strategy<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Main => "main",
            Self::VarType => "var_type",
            Self::Escape { .. } => "escape",
            Self::SurplusEscape { .. } => "surplus_escape",
            Self::Naive => "naive",
        }
    }
}

fn distortions<T: Scalar>(measures: &[RiskMeasure<T>]) -> Result<Vec<Distortion<T>>> {
    measures
        .iter()
        .enumerate()
        .map(|(index, rho)| {
            rho.as_distortion()
                .cloned()
                .ok_or_else(|| HypothesisViolation::NotDistortion { index }.into())
        })
        .collect()
}

fn with_levels<T: Scalar>(measures: &[RiskMeasure<T>]) -> Result<Vec<(RiskMeasure<T>, T)>> {
    measures
        .iter()
        .enumerate()
        .map(|(index, rho)| match rho.structural_var_parameter() {
            Some(alpha) => Ok((rho.clone(), alpha)),
            None => Err(HypothesisViolation::NoVarLevel { index }.into()),
        })
        .collect()
}

/// Builds the allocation of `x` among `measures` with the named construction.
/// V@R-type levels are the measures' structural parameters.
pub fn run_strategy<T: Real>(
    x: &QuantileProfile<T>,
    measures: &[RiskMeasure<T>],
    strategy: Strategy<T>,
) -> Result<SharingOutcome<T>> {
    match strategy {
        Strategy::Main => build_main_allocation(x, &distortions(measures)?),
        Strategy::Escape { m } => build_escape_allocation(x, &distortions(measures)?, m),
        Strategy::VarType => build_var_type_allocation(x, &with_levels(measures)?),
        Strategy::SurplusEscape { m } => {
            let Some((extra, var_type)) = measures.split_last() else {
                return Err(Error::InvalidParameter(
                    "at least one measure is required".into(),
                ));
            };
            build_surplus_escape(x, &with_levels(var_type)?, extra, m)
        }
        Strategy::Naive => naive_allocation(x, measures),
    }
}
