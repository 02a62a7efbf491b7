//! JSON measure configurations.
//!
//! ```json
//! {"kind": "rvar", "alpha": 0.25, "beta": 0.75}
//! {"kind": "truncated", "alpha": 0.4, "base": {"kind": "entropic"}}
//! {"kind": "piecewise", "segments": [{"x0": 0, "x1": 1, "y_right": 1, "jump_before": 0.2}]}
//! ```
//!
//! A measures file holds one such object or an array of them.

use serde::{Deserialize, Serialize};

use crate::distortion::{Distortion, Segment};
use crate::error::{Error, Result};
use crate::measures::RiskMeasure;
use crate::scalar::Real;

/// One affine piece `(x0, x1]` of a distortion: `g(x1) = y_right`, and `g`
/// jumps up by `jump_before` at `x0+`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub x0: f64,
    pub x1: f64,
    pub y_right: f64,
    #[serde(default)]
    pub jump_before: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureConfig {
    Var {
        alpha: f64,
    },
    Avar {
        beta: f64,
    },
    Rvar {
        alpha: f64,
        beta: f64,
    },
    Expectation,
    Piecewise {
        segments: Vec<SegmentConfig>,
    },
    Entropic,
    Expectile {
        gamma: f64,
    },
    Truncated {
        alpha: f64,
        base: Box<MeasureConfig>,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(MeasureConfig),
    Many(Vec<MeasureConfig>),
}

impl MeasureConfig {
    pub fn build<T: Real>(&self) -> Result<RiskMeasure<T>> {
        let lit = |x: f64| {
            T::from_f64(x)
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Config(format!("{x} is not a finite number")))
        };
        Ok(match self {
            Self::Var { alpha } => RiskMeasure::Distortion(Distortion::var(lit(*alpha)?)?),
            Self::Avar { beta } => RiskMeasure::Distortion(Distortion::avar(lit(*beta)?)?),
            Self::Rvar { alpha, beta } => {
                RiskMeasure::Distortion(Distortion::rvar(lit(*alpha)?, lit(*beta)?)?)
            }
            Self::Expectation => RiskMeasure::Distortion(Distortion::identity()),
            Self::Piecewise { segments } => {
                let mut prev = T::zero();
                let mut out = Vec::with_capacity(segments.len());
                for s in segments {
                    let start = prev + lit(s.jump_before)?;
                    let end = lit(s.y_right)?;
                    out.push(Segment {
                        x0: lit(s.x0)?,
                        x1: lit(s.x1)?,
                        start,
                        end,
                    });
                    prev = end;
                }
                RiskMeasure::Distortion(Distortion::from_segments(out)?)
            }
            Self::Entropic => RiskMeasure::Entropic,
            Self::Expectile { gamma } => RiskMeasure::expectile(lit(*gamma)?)?,
            Self::Truncated { alpha, base } => RiskMeasure::truncated(base.build()?, lit(*alpha)?)?,
        })
    }
}

pub fn parse_measure_configs(text: &str) -> Result<Vec<MeasureConfig>> {
    let parsed: OneOrMany = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let list = match parsed {
        OneOrMany::One(m) => vec![m],
        OneOrMany::Many(v) => v,
    };
    if list.is_empty() {
        return Err(Error::Config("no measures given".into()));
    }
    Ok(list)
}

pub fn parse_measures<T: Real>(text: &str) -> Result<Vec<RiskMeasure<T>>> {
    parse_measure_configs(text)?
        .iter()
        .map(|c| c.build())
        .collect()
}
