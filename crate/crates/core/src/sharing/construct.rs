use crate::distortion::{choquet_eval, mixture_eval, Distortion};
use crate::error::{Error, HypothesisViolation, Result};
use crate::measures::{
    is_strongly_surplus_sensitive_distortion, is_var_type, probe_unbounded_withdrawal, Measure,
    RiskMeasure,
};
use crate::scalar::{max, min, Real, Scalar};
use crate::scenario::{LatentSort, QuantileProfile};

use super::selectors::{check_proper, combined_g, CombinedDistortion, SelectorSystem};
use super::{Allocation, Prediction, Regime, SharingOutcome};

/// The sort of `X`, `Y = X - essinf X` on the sorted coordinate, and `essinf X`.
fn normalize<T: Scalar>(x: &QuantileProfile<T>) -> (LatentSort<T>, QuantileProfile<T>, T) {
    let sort = LatentSort::new(x);
    let e = x.essinf();
    let y = sort.sorted().shift(-e);
    (sort, y, e)
}

/// Consecutive bands `[a_1 + ... + a_{i-1}, a_1 + ... + a_i)`, cut at 1.
fn bands<T: Scalar>(alphas: &[T]) -> Vec<(T, T)> {
    let mut cursor = T::zero();
    alphas
        .iter()
        .map(|&a| {
            let band = (min(cursor, T::one()), min(cursor + a, T::one()));
            cursor = cursor + a;
            band
        })
        .collect()
}

/// The `(width, value)` pieces of `p` inside `[a, b)`.
fn window<T: Scalar>(p: &QuantileProfile<T>, a: T, b: T) -> Vec<(T, T)> {
    p.pieces()
        .filter_map(|(l, r, v)| {
            let w = min(r, b) - max(l, a);
            (w > T::zero()).then_some((w, v))
        })
        .collect()
}

fn per_part<T: Scalar>(e: T, n: usize) -> T {
    e / T::from_usize(n).expect("part count fits the scalar")
}

fn sum<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, &v| acc + v)
}

/// Tranches of `Y` below the parameters, the rest of `Y` split by the
/// transfer functions, and `essinf X / n` to each part.
///
/// The realized total equals `int V@R_l(Y) g(dl) + essinf X` for the combined
/// distortion `g`; with parameters summing to at least 1 that is `essinf X`.
pub fn build_main_allocation<T: Scalar>(
    x: &QuantileProfile<T>,
    gs: &[Distortion<T>],
) -> Result<SharingOutcome<T>> {
    let combined = combined_g(gs)?;
    let (sort, y, e) = normalize(x);
    let share = per_part(e, gs.len());
    let collapse = combined.d >= T::one() - T::merge_tolerance();

    let mut sorted_parts = bands(&combined.parameters)
        .into_iter()
        .map(|(a, b)| y.restrict(a, b))
        .collect::<Result<Vec<_>>>()?;
    let mut notes = Vec::new();
    if collapse {
        notes.push(format!(
            "g ≡ 0 regime: parameters sum to {} >= 1, parts are tranches of Y",
            combined.d
        ));
    } else {
        let remainder = y.restrict(combined.d, T::one())?;
        let selectors = SelectorSystem::new(gs)?;
        let transfers = selectors.transfer_functions(&remainder.distribution())?;
        for (part, r) in sorted_parts.iter_mut().zip(&transfers) {
            *part = part.add(&remainder.apply_monotone(r)?);
        }
    }
    let parts = sorted_parts
        .iter()
        .map(|p| sort.pull_back(&p.shift(share)))
        .collect();
    let allocation = Allocation::new(parts, x.clone())?;
    let part_risks = gs
        .iter()
        .zip(allocation.parts())
        .map(|(g, p)| mixture_eval(g, p))
        .collect();
    Ok(SharingOutcome {
        regime: if collapse {
            Regime::BestCaseCollapse
        } else {
            Regime::ComonotoneTransfer
        },
        allocation,
        part_risks,
        prediction: Prediction::Exact(mixture_eval(&combined.g, &y) + e),
        notes,
    })
}

/// `int V@R_l(X - essinf X) g(dl) + essinf X`, computed as a Choquet
/// integral so that it checks [`build_main_allocation`] independently.
pub fn upper_bound<T: Scalar>(x: &QuantileProfile<T>, gs: &[Distortion<T>]) -> Result<T> {
    let combined = combined_g(gs)?;
    let e = x.essinf();
    Ok(choquet_eval(&combined.g, &x.shift(-e).distribution()) + e)
}

/// Checks `d < 1`, `g_i(1 - d + alpha_i) = 1` and concave active parts.
pub fn check_optimality_hypotheses<T: Scalar>(
    gs: &[Distortion<T>],
) -> Result<CombinedDistortion<T>> {
    let combined = combined_g(gs)?;
    let d = combined.d;
    let tol = T::merge_tolerance();
    if d >= T::one() - tol {
        return Err(HypothesisViolation::ParameterSumNotBelowOne {
            d: d.to_f64_lossy(),
        }
        .into());
    }
    for (index, (g, &alpha)) in gs.iter().zip(&combined.parameters).enumerate() {
        let value = g.eval(T::one() - d + alpha);
        if value < T::one() - tol {
            return Err(HypothesisViolation::NotSaturated {
                index,
                value: value.to_f64_lossy(),
            }
            .into());
        }
    }
    for (index, g) in gs.iter().enumerate() {
        if !g.is_concave_active_part()? {
            return Err(HypothesisViolation::NonConcaveActivePart { index }.into());
        }
    }
    Ok(combined)
}

/// The infimal total `int V@R_l(X) g(dl)`, available when
/// [`check_optimality_hypotheses`] passes.
pub fn optimal_value<T: Scalar>(x: &QuantileProfile<T>, gs: &[Distortion<T>]) -> Result<T> {
    let combined = check_optimality_hypotheses(gs)?;
    Ok(mixture_eval(&combined.g, x))
}

/// The first index with `g_i(1 - d + alpha_i) < 1` and the slope
/// `-(1 - g_i(1 - d + alpha_i))` of the escape total in the withdrawal `m`.
pub fn escape_leader<T: Scalar>(gs: &[Distortion<T>]) -> Result<(usize, T)> {
    check_proper(gs)?;
    let alphas = gs
        .iter()
        .map(|g| g.parameter())
        .collect::<Result<Vec<_>>>()?;
    let d = sum(&alphas);
    let edge = |i: usize| alphas[i] + max(T::one() - d, T::zero());
    let leader = (0..gs.len())
        .find(|&i| gs[i].eval(edge(i)) < T::one() - T::merge_tolerance())
        .ok_or(HypothesisViolation::NoUnsaturatedIndex)?;
    Ok((leader, -(gs[leader].g1() - gs[leader].eval(edge(leader)))))
}

/// The leader keeps `Y` below its parameter and above `d` and owes `m` on
/// `[alpha_1, d)`; every other entity receives `Y + m` on its band.
///
/// The realized total is `c - m (1 - g_1(1 - d + alpha_1)) + essinf X`, so it
/// falls without bound as `m` grows.
pub fn build_escape_allocation<T: Scalar>(
    x: &QuantileProfile<T>,
    gs: &[Distortion<T>],
    m: T,
) -> Result<SharingOutcome<T>> {
    if !(m > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "withdrawal m = {m} must be positive"
        )));
    }
    let (leader, slope) = escape_leader(gs)?;
    let alphas = gs
        .iter()
        .map(|g| g.parameter())
        .collect::<Result<Vec<_>>>()?;
    let one = T::one();
    let d = sum(&alphas);
    let dc = min(d, one);
    let a1 = alphas[leader];
    let (sort, y, e) = normalize(x);
    let share = per_part(e, gs.len());

    let mut sorted_parts = vec![QuantileProfile::constant(T::zero()); gs.len()];
    sorted_parts[leader] = y
        .restrict(T::zero(), a1)?
        .add(&y.restrict(dc, one)?)
        .add(&QuantileProfile::band_indicator(a1, dc)?.scale(-m));
    let lifted = y.shift(m);
    let mut cursor = a1;
    for (j, part) in sorted_parts.iter_mut().enumerate() {
        if j == leader {
            continue;
        }
        *part = lifted.restrict(min(cursor, one), min(cursor + alphas[j], one))?;
        cursor = cursor + alphas[j];
    }

    // V@R_l of the leader's part: Y below a1, then Y shifted down from d,
    // then -m from b = a1 + (1 - d)^+ on, the point b included
    let b = a1 + max(one - d, T::zero());
    let mut phi = window(&y, T::zero(), a1);
    phi.extend(window(&y, dc, one));
    phi.push((one - b, T::zero()));
    let c = gs[leader]
        .stieltjes()
        .integrate(&QuantileProfile::from_pieces(phi)?);

    let parts = sorted_parts
        .iter()
        .map(|p| sort.pull_back(&p.shift(share)))
        .collect();
    let allocation = Allocation::new(parts, x.clone())?;
    let part_risks = gs
        .iter()
        .zip(allocation.parts())
        .map(|(g, p)| mixture_eval(g, p))
        .collect();
    Ok(SharingOutcome {
        regime: Regime::UnsaturatedEscape,
        allocation,
        part_risks,
        prediction: Prediction::Exact(c + slope * m + e),
        notes: vec![
            format!(
                "entity {} leads: first with g(1 - d + alpha) < 1",
                leader + 1
            ),
            format!("c = {c}, slope in m = {slope}"),
            format!("c convention: the level b = {b} is carried by the -m mass"),
        ],
    })
}

fn check_var_type<T: Real>(
    measures: &[(RiskMeasure<T>, T)],
    x: &QuantileProfile<T>,
    parts: &[QuantileProfile<T>],
) -> Result<()> {
    for (index, ((rho, alpha), part)) in measures.iter().zip(parts).enumerate() {
        if !is_var_type(rho, *alpha, &[x.clone(), part.clone()])? {
            return Err(HypothesisViolation::NotVarType {
                index,
                alpha: alpha.to_f64_lossy(),
            }
            .into());
        }
    }
    Ok(())
}

/// Tranches of `Y` on consecutive bands of widths `alpha_i` covering `[0, 1)`.
/// For V@R-type measures the total is `sum rho_i(0) + essinf X`.
pub fn build_var_type_allocation<T: Real>(
    x: &QuantileProfile<T>,
    measures: &[(RiskMeasure<T>, T)],
) -> Result<SharingOutcome<T>> {
    if measures.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one measure is required".into(),
        ));
    }
    let alphas: Vec<T> = measures.iter().map(|(_, a)| *a).collect();
    let d = sum(&alphas);
    if d < T::one() - T::merge_tolerance() {
        return Err(HypothesisViolation::ParameterSumBelowOne {
            d: d.to_f64_lossy(),
        }
        .into());
    }
    let (sort, y, e) = normalize(x);
    let share = per_part(e, measures.len());
    let parts = bands(&alphas)
        .into_iter()
        .map(|(a, b)| Ok(sort.pull_back(&y.restrict(a, b)?.shift(share))))
        .collect::<Result<Vec<_>>>()?;
    let allocation = Allocation::new(parts, x.clone())?;
    check_var_type(measures, x, allocation.parts())?;

    let zero = QuantileProfile::constant(T::zero());
    let mut base = Vec::with_capacity(measures.len());
    let mut part_risks = Vec::with_capacity(measures.len());
    for ((rho, _), part) in measures.iter().zip(allocation.parts()) {
        base.push(rho.evaluate(&zero)?);
        part_risks.push(rho.evaluate(part)?);
    }
    Ok(SharingOutcome {
        regime: Regime::VarTypeCollapse,
        allocation,
        part_risks,
        prediction: Prediction::Exact(sum(&base) + e),
        notes: vec![format!("parameters sum to {d} >= 1")],
    })
}

/// V@R-type entities receive `Y + m` on their bands (the last one also keeps
/// `Y` above `d`), and the extra entity owes `m` on `[0, d)`.
///
/// The total is at most `sum rho_i(0) + V@R_d(Y) + essinf X + rho(-m 1{U < d})`,
/// unbounded below in `m` when the extra measure is strongly surplus sensitive.
pub fn build_surplus_escape<T: Real>(
    x: &QuantileProfile<T>,
    var_type: &[(RiskMeasure<T>, T)],
    extra: &RiskMeasure<T>,
    m: T,
) -> Result<SharingOutcome<T>> {
    if var_type.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one V@R-type measure is required".into(),
        ));
    }
    if m < T::zero() {
        return Err(Error::InvalidParameter(format!(
            "withdrawal m = {m} is negative"
        )));
    }
    let alphas: Vec<T> = var_type.iter().map(|(_, a)| *a).collect();
    let d = sum(&alphas);
    let tol = T::merge_tolerance();
    if !(d > tol && d < T::one() - tol) {
        return Err(HypothesisViolation::ParameterSumOutOfRange {
            d: d.to_f64_lossy(),
        }
        .into());
    }
    let sensitive = match extra.as_distortion() {
        Some(g) => is_strongly_surplus_sensitive_distortion(g, d)?,
        None => probe_unbounded_withdrawal(extra, d)?,
    };
    if !sensitive {
        return Err(HypothesisViolation::NotSurplusSensitive {
            level: d.to_f64_lossy(),
        }
        .into());
    }

    let (sort, y, e) = normalize(x);
    let n = var_type.len();
    let share = per_part(e, n);
    let lifted = y.shift(m);
    let mut sorted_parts = bands(&alphas)
        .into_iter()
        .map(|(a, b)| Ok(lifted.restrict(a, b)?.shift(share)))
        .collect::<Result<Vec<_>>>()?;
    sorted_parts[n - 1] = sorted_parts[n - 1].add(&y.restrict(d, T::one())?);
    sorted_parts.push(QuantileProfile::band_indicator(T::zero(), d)?.scale(-m));
    let parts = sorted_parts.iter().map(|p| sort.pull_back(p)).collect();
    let allocation = Allocation::new(parts, x.clone())?;
    check_var_type(var_type, x, &allocation.parts()[..n])?;

    let zero = QuantileProfile::constant(T::zero());
    let mut base = Vec::with_capacity(n);
    let mut part_risks = Vec::with_capacity(n + 1);
    for ((rho, _), part) in var_type.iter().zip(allocation.parts()) {
        base.push(rho.evaluate(&zero)?);
        part_risks.push(rho.evaluate(part)?);
    }
    let withdrawal = extra.evaluate(&allocation.parts()[n])?;
    part_risks.push(withdrawal);
    let bound = sum(&base) + y.var_at(d)? + e + withdrawal;
    Ok(SharingOutcome {
        regime: Regime::SurplusEscape,
        allocation,
        part_risks,
        prediction: Prediction::UpperBound(bound),
        notes: vec![format!("extra entity owes {m} on [0, {d})")],
    })
}

/// `X / n` to each entity.
pub fn naive_allocation<T: Scalar, M: Measure<T>>(
    x: &QuantileProfile<T>,
    measures: &[M],
) -> Result<SharingOutcome<T>> {
    if measures.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one measure is required".into(),
        ));
    }
    let n = T::from_usize(measures.len()).expect("part count fits the scalar");
    let part = x.map(|v| v / n);
    let allocation = Allocation::new(vec![part; measures.len()], x.clone())?;
    let part_risks = allocation.risks(measures)?;
    Ok(SharingOutcome {
        regime: Regime::NaiveSplit,
        allocation,
        part_risks,
        prediction: Prediction::Unavailable,
        notes: Vec::new(),
    })
}

/// `X^1 = amount * 1{U < width}` and `X^2 = X - X^1`, both on the latent
/// coordinate of `X`.
pub fn offsetting_pair<T: Scalar>(
    x: &QuantileProfile<T>,
    width: T,
    amount: T,
) -> Result<Allocation<T>> {
    let first = QuantileProfile::band_indicator(T::zero(), width)?.scale(amount);
    let second = x.zip_with(&first, |a, b| a - b);
    Allocation::new(vec![first, second], x.clone())
}

/// `(k, essinf max(X, -k))`: the best-case total of a normalized V@R-type
/// network holding the position floored at `-k`. Falls linearly once `k`
/// passes `-essinf X`, which is how an unbounded-below position shows up.
pub fn infconv_truncation_curve<T: Scalar>(x: &QuantileProfile<T>, ks: &[T]) -> Vec<(T, T)> {
    ks.iter()
        .map(|&k| (k, x.map(|v| max(v, -k)).essinf()))
        .collect()
}
