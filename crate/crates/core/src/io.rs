//! Scenario, balance-sheet and allocation file formats.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regulator::BalanceSheet;
use crate::scalar::Scalar;
use crate::scenario::DiscreteDistribution;
use crate::sharing::Allocation;

/// Probabilities may miss 1 by this much before being rescaled.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Reads a `value,probability` CSV with a header row.
pub fn read_scenarios<R: Read>(reader: R) -> Result<DiscreteDistribution<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_error(1, e))?.clone();
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing column `{name}`"),
            })
    };
    let (vi, pi) = (position("value")?, position("probability")?);
    let mut atoms = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = record.get(i).unwrap_or("");
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    line,
                    message: format!("{name} `{raw}` is not a finite number"),
                }),
            }
        };
        let (value, probability) = (field(vi, "value")?, field(pi, "probability")?);
        if probability <= 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("probability {probability} is not positive"),
            });
        }
        atoms.push((value, probability));
    }
    if atoms.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no scenarios".into(),
        });
    }
    DiscreteDistribution::renormalized(atoms, PROBABILITY_SLACK)
}

fn parse_error(line: u64, e: csv::Error) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BalanceSheetScenario {
    #[serde(rename = "E1")]
    pub e1: f64,
    pub p: f64,
}

/// `{"A0": ..., "L0": ..., "scenarios": [{"E1": ..., "p": ...}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BalanceSheetFile {
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    pub scenarios: Vec<BalanceSheetScenario>,
}

impl BalanceSheetFile {
    pub fn into_sheet(self) -> Result<BalanceSheet<f64>> {
        let e1 = DiscreteDistribution::renormalized(
            self.scenarios.iter().map(|s| (s.e1, s.p)),
            PROBABILITY_SLACK,
        )?;
        BalanceSheet::new(self.a0, self.l0, e1)
    }
}

pub fn read_balance_sheet<R: Read>(reader: R) -> Result<BalanceSheet<f64>> {
    let file: BalanceSheetFile =
        serde_json::from_reader(reader).map_err(|e| Error::Config(e.to_string()))?;
    file.into_sheet()
}

/// Writes `part_index,u_left,u_right,value` rows, parts numbered from 1.
pub fn write_allocation<T: Scalar, W: Write>(alloc: &Allocation<T>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["part_index", "u_left", "u_right", "value"])
        .map_err(io)?;
    for (i, l, r, v) in alloc.rows() {
        w.write_record([i.to_string(), l.to_string(), r.to_string(), v.to_string()])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
