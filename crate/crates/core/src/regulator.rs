//! Solvency capital requirements for single entities and networks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{Measure, RiskMeasure};
use crate::scalar::{abs, Real, Scalar};
use crate::scenario::{DiscreteDistribution, QuantileProfile};
use crate::sharing::{run_strategy, Prediction, SharingOutcome, Strategy};

/// Net asset value today and its law one period ahead. Interest is ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct BalanceSheet<T> {
    pub a0: T,
    pub l0: T,
    /// Law of `E_1 = A_1 - L_1`.
    pub e1: DiscreteDistribution<T>,
}

impl<T: Scalar> BalanceSheet<T> {
    pub fn new(a0: T, l0: T, e1: DiscreteDistribution<T>) -> Result<Self> {
        if !a0.is_finite_value() || !l0.is_finite_value() {
            return Err(Error::InvalidParameter("A0 and L0 must be finite".into()));
        }
        Ok(Self { a0, l0, e1 })
    }

    pub fn e0(&self) -> T {
        self.a0 - self.l0
    }

    /// `-E_1` on the latent coordinate: the position a network splits.
    pub fn position(&self) -> QuantileProfile<T> {
        QuantileProfile::from_scenarios(&self.e1.negated())
    }

    /// `-(E_1 - E_0)`.
    pub fn loss(&self) -> QuantileProfile<T> {
        self.position().shift(self.e0())
    }

    /// `P(E_1 < 0)`.
    pub fn ruin_probability(&self) -> T {
        self.e1
            .atoms()
            .iter()
            .filter(|a| a.value < T::zero())
            .fold(T::zero(), |acc, a| acc + a.probability)
    }
}

/// `rho(-(E_1 - E_0))`.
pub fn scr<T: Scalar, M: Measure<T> + ?Sized>(bs: &BalanceSheet<T>, rho: &M) -> Result<T> {
    rho.evaluate(&bs.loss())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolvencyCheck {
    pub scr: f64,
    pub e0: f64,
    /// `SCR <= E_0`.
    pub solvent: bool,
    pub ruin_probability: f64,
    /// `P(E_1 < 0) <= alpha`, only for a V@R measure at level `alpha`.
    pub probability_test: Option<bool>,
    pub predicates_agree: Option<bool>,
    /// `P(E_1 < 0)` equals `alpha` to tolerance.
    pub at_boundary: bool,
}

pub fn solvency_check<T: Real>(
    bs: &BalanceSheet<T>,
    rho: &RiskMeasure<T>,
) -> Result<SolvencyCheck> {
    let value = scr(bs, rho)?;
    let e0 = bs.e0();
    let solvent = value <= e0 + T::merge_tolerance() * (T::one() + abs(e0));
    let ruin = bs.ruin_probability();
    let level = rho.as_distortion().and_then(|g| g.var_level());
    let probability_test = level.map(|alpha| ruin <= alpha);
    Ok(SolvencyCheck {
        scr: value.to_f64_lossy(),
        e0: e0.to_f64_lossy(),
        solvent,
        ruin_probability: ruin.to_f64_lossy(),
        probability_test,
        predicates_agree: probability_test.map(|p| p == solvent),
        at_boundary: level.is_some_and(|alpha| abs(ruin - alpha) <= T::merge_tolerance()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntityReport {
    pub entity: usize,
    pub measure: String,
    pub e0: f64,
    pub risk: f64,
    pub scr: f64,
    pub solvent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkReport {
    pub strategy: String,
    pub regime: String,
    pub entities: Vec<EntityReport>,
    /// `E_0 + sum rho_i(X^i)`.
    pub total_scr: f64,
    pub predicted_total_scr: Option<f64>,
    pub prediction: String,
    pub prediction_holds: bool,
    pub consolidated_measure: String,
    pub consolidated_scr: f64,
    /// `E_0 - esssup E_1`.
    pub best_case: f64,
    pub notes: Vec<String>,
}

impl NetworkReport {
    /// `entity,scr,regime` rows; the network total is entity `total`.
    pub fn csv(&self) -> String {
        let mut out = String::from("entity,scr,regime\n");
        for e in &self.entities {
            out.push_str(&format!("{},{},{}\n", e.entity, e.scr, self.regime));
        }
        out.push_str(&format!("total,{},{}\n", self.total_scr, self.regime));
        out.push_str(&format!(
            "consolidated,{},{}\n",
            self.consolidated_scr, self.regime
        ));
        out
    }
}

/// Splits `-E_1` among the entities with `strategy`, gives each an equal
/// share of `E_0`, and compares the network total with the consolidated SCR
/// under `measures[reference]`.
pub fn network_report<T: Real>(
    bs: &BalanceSheet<T>,
    measures: &[RiskMeasure<T>],
    strategy: Strategy<T>,
    reference: usize,
) -> Result<(NetworkReport, SharingOutcome<T>)> {
    let Some(reference_measure) = measures.get(reference) else {
        return Err(Error::InvalidParameter(format!(
            "no measure {reference} to consolidate with"
        )));
    };
    let outcome = run_strategy(&bs.position(), measures, strategy)?;
    let e0 = bs.e0();
    let n = outcome.part_risks.len();
    let share = e0 / T::from_usize(n).expect("entity count fits the scalar");
    let labels: Vec<String> = measures.iter().map(|m| m.label()).collect();
    let entities = outcome
        .part_risks
        .iter()
        .enumerate()
        .map(|(i, &risk)| EntityReport {
            entity: i + 1,
            measure: labels[i].clone(),
            e0: share.to_f64_lossy(),
            risk: risk.to_f64_lossy(),
            scr: (share + risk).to_f64_lossy(),
            solvent: risk <= T::zero(),
        })
        .collect();
    let total = e0 + outcome.realized_total();
    let (predicted, kind) = match outcome.prediction {
        Prediction::Exact(v) => (Some((e0 + v).to_f64_lossy()), "exact"),
        Prediction::UpperBound(v) => (Some((e0 + v).to_f64_lossy()), "upper_bound"),
        Prediction::Unavailable => (None, "none"),
    };
    let report = NetworkReport {
        strategy: strategy.name().to_string(),
        regime: outcome.regime.label().to_string(),
        entities,
        total_scr: total.to_f64_lossy(),
        predicted_total_scr: predicted,
        prediction: kind.to_string(),
        prediction_holds: outcome.prediction_holds(T::check_tolerance()),
        consolidated_measure: reference_measure.label(),
        consolidated_scr: scr(bs, reference_measure)?.to_f64_lossy(),
        best_case: (e0 - bs.e1.esssup()).to_f64_lossy(),
        notes: outcome.notes.clone(),
    };
    Ok((report, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::Distortion;

    fn tail_sheet() -> BalanceSheet<f64> {
        let e1 = DiscreteDistribution::new([(-50.0, 0.004), (12.0, 0.996)]).unwrap();
        BalanceSheet::new(110.0, 100.0, e1).unwrap()
    }

    #[test]
    fn var_scr_is_blind_to_the_tail() {
        let bs = tail_sheet();
        let var = RiskMeasure::Distortion(Distortion::var(0.005).unwrap());
        assert!((scr(&bs, &var).unwrap() - (-2.0)).abs() < 1e-12);
        let check = solvency_check(&bs, &var).unwrap();
        assert!(check.solvent);
        assert_eq!(check.probability_test, Some(true));
        assert_eq!(check.predicates_agree, Some(true));
        assert!(!check.at_boundary);
    }

    #[test]
    fn avar_scr_sees_the_tail() {
        let bs = tail_sheet();
        let avar = RiskMeasure::Distortion(Distortion::avar(0.005).unwrap());
        let value = scr(&bs, &avar).unwrap();
        assert!((value - 47.6).abs() < 1e-9);
        let check = solvency_check(&bs, &avar).unwrap();
        assert!(!check.solvent);
        assert_eq!(check.probability_test, None);
    }

    #[test]
    fn cash_identity() {
        let bs = tail_sheet();
        let rho = RiskMeasure::Entropic;
        let lhs = scr(&bs, &rho).unwrap();
        let rhs = rho.evaluate(&bs.position()).unwrap() + bs.e0();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn deterministic_and_ruined_sheets() {
        let flat =
            BalanceSheet::new(5.0f64, 2.0, DiscreteDistribution::point(3.0).unwrap()).unwrap();
        let avar = RiskMeasure::Distortion(Distortion::avar(0.1).unwrap());
        assert!(scr(&flat, &avar).unwrap().abs() < 1e-12);
        let ruin = BalanceSheet::new(1.0, 1.0, DiscreteDistribution::point(-1.0).unwrap()).unwrap();
        let var = RiskMeasure::Distortion(Distortion::var(0.1).unwrap());
        let check = solvency_check(&ruin, &var).unwrap();
        assert!(!check.solvent);
        assert_eq!(check.predicates_agree, Some(true));
    }

    #[test]
    fn var_network_reaches_the_best_case() {
        let e1 = DiscreteDistribution::new([(-8.0, 0.25), (1.0, 0.25), (4.0, 0.25), (9.0, 0.25)])
            .unwrap();
        let bs = BalanceSheet::new(20.0, 15.0, e1).unwrap();
        let var = RiskMeasure::Distortion(Distortion::var(0.5).unwrap());
        let (report, _) = network_report(&bs, &[var.clone(), var], Strategy::Main, 0).unwrap();
        assert!((report.total_scr - (5.0 - 9.0)).abs() < 1e-9);
        assert!((report.best_case - report.total_scr).abs() < 1e-9);
        assert!(report.consolidated_scr > report.total_scr);
        assert!(report.prediction_holds);
        assert_eq!(report.csv().lines().count(), 5);
    }
}
