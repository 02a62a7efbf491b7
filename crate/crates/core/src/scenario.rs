//! Finite scenario data embedded on a latent uniform coordinate.
//!
//! A position is a [`QuantileProfile`]: a right-open step function of a
//! coordinate `u` in `[0, 1)`. Every random variable built by the allocation
//! routines is a function of this single coordinate, which makes all of them
//! exactly computable. V@R follows the cadlag convention
//! `V@R_l(Z) = inf { z : F_Z(z) >= 1 - l }`, losses counted positive, and
//! `V@R_l = essinf` for `l >= 1`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::{abs, max, min, scaled, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom<T> {
    pub value: T,
    pub probability: T,
}

/// A finite law: atoms with strictly increasing values and positive
/// probabilities summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution<T> {
    atoms: Vec<Atom<T>>,
}

fn cmp<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

impl<T: Scalar> DiscreteDistribution<T> {
    /// Builds a law from `(value, probability)` pairs. Duplicate values are
    /// merged; probabilities must sum to one within the merge tolerance.
    pub fn new(atoms: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        Self::build(atoms, T::merge_tolerance(), false)
    }

    /// Like [`new`](Self::new) but accepts a probability sum within
    /// `tolerance` of one and rescales it to one.
    pub fn renormalized(atoms: impl IntoIterator<Item = (T, T)>, tolerance: T) -> Result<Self> {
        Self::build(atoms, tolerance, true)
    }

    pub fn point(value: T) -> Result<Self> {
        Self::new([(value, T::one())])
    }

    fn build(atoms: impl IntoIterator<Item = (T, T)>, tolerance: T, rescale: bool) -> Result<Self> {
        let mut raw: Vec<Atom<T>> = Vec::new();
        let mut total = T::zero();
        for (value, probability) in atoms {
            if !value.is_finite_value() || !probability.is_finite_value() {
                return Err(Error::InvalidDistribution(
                    "non-finite value or probability".into(),
                ));
            }
            if probability <= T::zero() || probability > T::one() + tolerance {
                return Err(Error::InvalidDistribution(format!(
                    "probability {probability} outside (0, 1]"
                )));
            }
            total = total + probability;
            raw.push(Atom { value, probability });
        }
        if raw.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        if abs(total - T::one()) > tolerance {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        if rescale {
            for a in &mut raw {
                a.probability = a.probability / total;
            }
        }
        Ok(Self {
            atoms: canonicalize(raw),
        })
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn essinf(&self) -> T {
        self.atoms[0].value
    }

    pub fn esssup(&self) -> T {
        self.atoms[self.atoms.len() - 1].value
    }

    pub fn mean(&self) -> T {
        self.atoms
            .iter()
            .fold(T::zero(), |acc, a| acc + a.value * a.probability)
    }

    /// `P(X <= s)`.
    pub fn cdf(&self, s: T) -> T {
        self.atoms
            .iter()
            .take_while(|a| a.value <= s)
            .fold(T::zero(), |acc, a| acc + a.probability)
    }

    /// `P(X > s)`, summed from the top so that it is exact on the upper tail.
    pub fn survival(&self, s: T) -> T {
        self.atoms
            .iter()
            .rev()
            .take_while(|a| a.value > s)
            .fold(T::zero(), |acc, a| acc + a.probability)
    }

    /// `inf { z : F(z) >= 1 - level }`, straight from the definition.
    pub fn var_at(&self, level: T) -> Result<T> {
        if level < T::zero() {
            return Err(Error::InvalidParameter(format!(
                "V@R level {level} is negative"
            )));
        }
        if level >= T::one() {
            return Ok(self.essinf());
        }
        let threshold = T::one() - level - T::merge_tolerance();
        let mut cumulative = T::zero();
        for a in &self.atoms {
            cumulative = cumulative + a.probability;
            if cumulative >= threshold {
                return Ok(a.value);
            }
        }
        Ok(self.esssup())
    }

    /// The law of `-X`.
    pub fn negated(&self) -> Self {
        let atoms = self
            .atoms
            .iter()
            .rev()
            .map(|a| Atom {
                value: -a.value,
                probability: a.probability,
            })
            .collect();
        Self { atoms }
    }
}

fn canonicalize<T: Scalar>(mut raw: Vec<Atom<T>>) -> Vec<Atom<T>> {
    raw.sort_by(|a, b| cmp(&a.value, &b.value));
    let mut out: Vec<Atom<T>> = Vec::with_capacity(raw.len());
    for a in raw {
        match out.last_mut() {
            Some(last) if abs(a.value - last.value) <= scaled(T::merge_tolerance(), last.value) => {
                last.probability = last.probability + a.probability;
            }
            _ => out.push(a),
        }
    }
    out
}

/// A step function on `[0, 1)`: `values[j]` on `[breaks[j], breaks[j + 1])`.
///
/// Canonical form: `breaks` runs strictly from 0 to 1, values are finite and
/// adjacent pieces carry different values.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantileProfile<T> {
    breaks: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> QuantileProfile<T> {
    pub fn new(breaks: Vec<T>, values: Vec<T>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidProfile(
                "need one more breakpoint than values".into(),
            ));
        }
        if breaks[0] != T::zero() || breaks[breaks.len() - 1] != T::one() {
            return Err(Error::InvalidProfile(
                "breakpoints must run from 0 to 1".into(),
            ));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        let widths = breaks.windows(2).map(|w| w[1] - w[0]);
        Self::from_pieces(widths.zip(values))
    }

    /// Builds a profile from consecutive `(width, value)` pieces starting at 0.
    /// Widths below the merge tolerance are dropped and the last breakpoint is
    /// snapped to 1.
    pub fn from_pieces(pieces: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        let tol = T::merge_tolerance();
        let mut breaks = vec![T::zero()];
        let mut values: Vec<T> = Vec::new();
        let mut cursor = T::zero();
        let mut count = 0usize;
        for (width, value) in pieces {
            count += 1;
            if !width.is_finite_value() || !value.is_finite_value() {
                return Err(Error::InvalidProfile("non-finite piece".into()));
            }
            if width < -tol {
                return Err(Error::InvalidProfile(format!("negative width {width}")));
            }
            cursor = cursor + width;
            if width <= tol {
                continue;
            }
            match values.last() {
                Some(last) if *last == value => {
                    *breaks.last_mut().unwrap() = cursor;
                }
                _ => {
                    values.push(value);
                    breaks.push(cursor);
                }
            }
        }
        let slack = tol * T::from_usize(count.max(1)).unwrap();
        if values.is_empty() || abs(cursor - T::one()) > slack {
            return Err(Error::InvalidProfile(format!(
                "piece widths sum to {cursor}, not 1"
            )));
        }
        *breaks.last_mut().unwrap() = T::one();
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile("degenerate breakpoints".into()));
        }
        Ok(Self { breaks, values })
    }

    pub fn constant(value: T) -> Self {
        Self {
            breaks: vec![T::zero(), T::one()],
            values: vec![value],
        }
    }

    /// The profile `u -> V@R_u(X)`: atoms laid out in decreasing order of
    /// value, each on a band as wide as its probability.
    pub fn from_scenarios(dist: &DiscreteDistribution<T>) -> Self {
        let pieces = dist.atoms().iter().rev().map(|a| (a.probability, a.value));
        Self::from_pieces(pieces).expect("a valid distribution yields a valid profile")
    }

    /// `1` on `[a, b)`, `0` elsewhere.
    pub fn band_indicator(a: T, b: T) -> Result<Self> {
        if a > b || a < T::zero() || b > T::one() {
            return Err(Error::InvalidParameter(format!(
                "band [{a}, {b}) not inside [0, 1]"
            )));
        }
        Self::from_pieces([(a, T::zero()), (b - a, T::one()), (T::one() - b, T::zero())])
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `(left, right, value)` for every piece.
    pub fn pieces(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        self.breaks
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[0], w[1], v))
    }

    fn piece_index(&self, u: T, tol: T) -> usize {
        let inner = &self.breaks[1..self.values.len()];
        inner.partition_point(|&b| b - tol <= u)
    }

    /// Value at `u`; a `u` within the merge tolerance of a breakpoint is
    /// read as that breakpoint.
    pub fn value_at(&self, u: T) -> T {
        self.values[self.piece_index(u, T::merge_tolerance())]
    }

    fn value_at_exact(&self, u: T) -> T {
        self.values[self.piece_index(u, T::zero())]
    }

    pub fn essinf(&self) -> T {
        self.values.iter().copied().fold(self.values[0], min)
    }

    pub fn esssup(&self) -> T {
        self.values.iter().copied().fold(self.values[0], max)
    }

    pub fn mean(&self) -> T {
        self.pieces()
            .fold(T::zero(), |acc, (l, r, v)| acc + (r - l) * v)
    }

    pub fn is_constant(&self) -> bool {
        self.values.len() == 1
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }

    /// The decreasing rearrangement: the same law laid out as `u -> V@R_u`.
    pub fn decreasing(&self) -> Self {
        if self.is_nonincreasing() {
            return self.clone();
        }
        let mut pieces: Vec<(T, T)> = self.pieces().map(|(l, r, v)| (r - l, v)).collect();
        pieces.sort_by(|a, b| cmp(&b.1, &a.1));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(pieces.len());
        for (w, v) in pieces {
            match merged.last_mut() {
                Some(last) if abs(last.1 - v) <= scaled(T::merge_tolerance(), v) => {
                    last.0 = last.0 + w
                }
                _ => merged.push((w, v)),
            }
        }
        Self::from_pieces(merged).expect("rearrangement preserves widths")
    }

    /// `V@R_level` of the law of this profile, read off its decreasing
    /// rearrangement.
    pub fn var_at(&self, level: T) -> Result<T> {
        if level < T::zero() {
            return Err(Error::InvalidParameter(format!(
                "V@R level {level} is negative"
            )));
        }
        if level >= T::one() {
            return Ok(self.essinf());
        }
        Ok(self.decreasing().value_at(level))
    }

    /// The law: each distinct value weighted by the total width carrying it.
    pub fn distribution(&self) -> DiscreteDistribution<T> {
        let raw = self
            .pieces()
            .map(|(l, r, v)| Atom {
                value: v,
                probability: r - l,
            })
            .collect();
        DiscreteDistribution {
            atoms: canonicalize(raw),
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        let pieces = self.pieces().map(|(l, r, v)| (r - l, f(v)));
        Self::from_pieces(pieces).expect("same breakpoints")
    }

    pub fn try_map(&self, f: impl Fn(T) -> Result<T>) -> Result<Self> {
        let mut pieces = Vec::with_capacity(self.values.len());
        for (l, r, v) in self.pieces() {
            pieces.push((r - l, f(v)?));
        }
        Self::from_pieces(pieces)
    }

    /// Pointwise `f(self, other)` on the common refinement.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        let breaks = refine(&[self, other]);
        let pieces = breaks.windows(2).map(|w| {
            let mid = (w[0] + w[1]) / (T::one() + T::one());
            (
                w[1] - w[0],
                f(self.value_at_exact(mid), other.value_at_exact(mid)),
            )
        });
        Self::from_pieces(pieces).expect("refinement covers [0, 1)")
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    pub fn shift(&self, c: T) -> Self {
        self.map(|v| v + c)
    }

    /// `self * 1_{a <= U < b}`.
    pub fn restrict(&self, a: T, b: T) -> Result<Self> {
        let band = Self::band_indicator(a, b)?;
        Ok(self.zip_with(&band, |x, i| if i == T::zero() { T::zero() } else { x }))
    }

    /// Pointwise `min(X, c)`: the position with its upper tail cut at `c`.
    pub fn cap(&self, c: T) -> Self {
        self.map(|v| min(v, c))
    }

    /// Pointwise composition `h(X)`.
    pub fn apply_monotone(&self, h: &PiecewiseLinear<T>) -> Result<Self> {
        self.try_map(|v| h.eval(v))
    }

    /// Largest pointwise gap to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let d = self.zip_with(other, |a, b| abs(a - b));
        d.esssup()
    }
}

/// Union of breakpoints, with points closer than the merge tolerance fused.
fn refine<T: Scalar>(profiles: &[&QuantileProfile<T>]) -> Vec<T> {
    let tol = T::merge_tolerance();
    let mut all: Vec<T> = profiles
        .iter()
        .flat_map(|p| p.breaks.iter().copied())
        .collect();
    all.sort_by(cmp);
    let mut out: Vec<T> = Vec::with_capacity(all.len());
    for b in all {
        match out.last() {
            Some(&last) if b - last <= tol => {}
            _ => out.push(b),
        }
    }
    let n = out.len();
    if n >= 2 && T::one() - out[n - 1] <= tol && out[n - 1] != T::one() {
        out[n - 1] = T::one();
    }
    if out[out.len() - 1] != T::one() {
        out.push(T::one());
    }
    out
}

/// Pointwise linear combination `sum_i coefficients[i] * profiles[i]`.
pub fn combine<T: Scalar>(
    profiles: &[QuantileProfile<T>],
    coefficients: &[T],
) -> Result<QuantileProfile<T>> {
    if profiles.len() != coefficients.len() || profiles.is_empty() {
        return Err(Error::InvalidParameter(
            "one coefficient per profile required".into(),
        ));
    }
    let refs: Vec<&QuantileProfile<T>> = profiles.iter().collect();
    let breaks = refine(&refs);
    let two = T::one() + T::one();
    let pieces = breaks.windows(2).map(|w| {
        let mid = (w[0] + w[1]) / two;
        let v = profiles
            .iter()
            .zip(coefficients)
            .fold(T::zero(), |acc, (p, &c)| acc + c * p.value_at_exact(mid));
        (w[1] - w[0], v)
    });
    QuantileProfile::from_pieces(pieces)
}

/// A continuous nondecreasing piecewise-linear function on a closed interval.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear<T> {
    knots: Vec<(T, T)>,
}

impl<T: Scalar> PiecewiseLinear<T> {
    pub fn new(knots: Vec<(T, T)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidParameter("no knots".into()));
        }
        if knots
            .windows(2)
            .any(|w| w[1].0 <= w[0].0 || w[1].1 < w[0].1)
        {
            return Err(Error::InvalidParameter(
                "knots must have increasing abscissae and nondecreasing values".into(),
            ));
        }
        Ok(Self { knots })
    }

    pub fn identity(lo: T, hi: T) -> Result<Self> {
        if lo == hi {
            return Self::new(vec![(lo, lo)]);
        }
        Self::new(vec![(lo, lo), (hi, hi)])
    }

    pub fn knots(&self) -> &[(T, T)] {
        &self.knots
    }

    pub fn domain(&self) -> (T, T) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    pub fn eval(&self, x: T) -> Result<T> {
        let (lo, hi) = self.domain();
        let tol = scaled(T::merge_tolerance(), max(abs(lo), abs(hi)));
        if x < lo - tol || x > hi + tol {
            return Err(Error::OutOfDomain {
                value: x.to_f64_lossy(),
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
            });
        }
        if x <= lo {
            return Ok(self.knots[0].1);
        }
        if x >= hi {
            return Ok(self.knots[self.knots.len() - 1].1);
        }
        let k = self.knots.partition_point(|&(kx, _)| kx <= x);
        let (x0, y0) = self.knots[k - 1];
        let (x1, y1) = self.knots[k];
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }
}

/// A measure-preserving reordering of the latent coordinate under which a
/// profile becomes nonincreasing.
///
/// Constructions written on the sorted coordinate (where `X = V@R_U(X)`) are
/// pulled back so that they sum to the original profile pointwise.
#[derive(Clone, Debug)]
pub struct LatentSort<T> {
    /// `(original_left, width, sorted_left)` per piece, in original order.
    segments: Vec<(T, T, T)>,
    sorted: QuantileProfile<T>,
}

impl<T: Scalar> LatentSort<T> {
    pub fn new(x: &QuantileProfile<T>) -> Self {
        let mut order: Vec<usize> = (0..x.values.len()).collect();
        order.sort_by(|&a, &b| cmp(&x.values[b], &x.values[a]));
        let mut sorted_left = vec![T::zero(); order.len()];
        let mut cursor = T::zero();
        for &j in &order {
            sorted_left[j] = cursor;
            cursor = cursor + (x.breaks[j + 1] - x.breaks[j]);
        }
        let segments = (0..x.values.len())
            .map(|j| (x.breaks[j], x.breaks[j + 1] - x.breaks[j], sorted_left[j]))
            .collect();
        Self {
            segments,
            sorted: x.decreasing(),
        }
    }

    /// The profile on the sorted coordinate.
    pub fn sorted(&self) -> &QuantileProfile<T> {
        &self.sorted
    }

    /// Expresses a function of the sorted coordinate on the original one.
    pub fn pull_back(&self, p: &QuantileProfile<T>) -> QuantileProfile<T> {
        let mut pieces: Vec<(T, T)> = Vec::new();
        for &(_, width, s) in &self.segments {
            let end = s + width;
            for (l, r, v) in p.pieces() {
                if r <= s || l >= end {
                    continue;
                }
                let w = min(r, end) - max(l, s);
                if w > T::zero() {
                    pieces.push((w, v));
                }
            }
        }
        QuantileProfile::from_pieces(pieces).expect("pull-back preserves total width")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> Q {
        Ratio::new(n, d)
    }

    fn quarters() -> DiscreteDistribution<f64> {
        DiscreteDistribution::new([(0.0, 0.25), (1.0, 0.25), (2.0, 0.25), (3.0, 0.25)]).unwrap()
    }

    #[test]
    fn constant_scenario() {
        let d = DiscreteDistribution::new([(0.0, 1.0)]).unwrap();
        assert_eq!(
            QuantileProfile::from_scenarios(&d),
            QuantileProfile::constant(0.0)
        );
    }

    #[test]
    fn tail_event_profile_is_decreasing() {
        let d = DiscreteDistribution::new([(q(-6, 1), q(1, 8)), (q(0, 1), q(7, 8))]).unwrap();
        let p = QuantileProfile::from_scenarios(&d);
        assert_eq!(p.breaks(), &[q(0, 1), q(7, 8), q(1, 1)]);
        assert_eq!(p.values(), &[q(0, 1), q(-6, 1)]);
        assert_eq!(p.distribution(), d);
    }

    #[test]
    fn four_atoms_sorted_descending() {
        let p = QuantileProfile::from_scenarios(&quarters());
        assert_eq!(p.breaks(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(p.values(), &[3.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn invalid_distributions() {
        assert!(DiscreteDistribution::new([(0.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(DiscreteDistribution::new([(0.0, 0.0), (1.0, 1.0)]).is_err());
        assert!(DiscreteDistribution::new([(0.0, -0.5), (1.0, 1.5)]).is_err());
        assert!(DiscreteDistribution::new([(f64::INFINITY, 1.0)]).is_err());
        assert!(DiscreteDistribution::<f64>::new([]).is_err());
    }

    #[test]
    fn duplicates_merge_and_renormalize() {
        let d = DiscreteDistribution::new([(1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]).unwrap();
        assert_eq!(d.atoms().len(), 2);
        assert_eq!(
            d.atoms()[1],
            Atom {
                value: 1.0,
                probability: 0.5
            }
        );
        let r =
            DiscreteDistribution::renormalized([(0.0f64, 0.5), (1.0, 0.5 + 5e-10)], 1e-9).unwrap();
        assert!((r.atoms()[1].probability - 0.5).abs() < 1e-9);
    }

    #[test]
    fn var_from_definition() {
        let d = DiscreteDistribution::new([(q(-6, 1), q(1, 8)), (q(0, 1), q(7, 8))]).unwrap();
        assert_eq!(d.var_at(q(7, 8)).unwrap(), q(-6, 1));
        assert_eq!(d.var_at(q(1, 2)).unwrap(), q(0, 1));
        assert_eq!(d.var_at(q(1, 1)).unwrap(), q(-6, 1));
        assert_eq!(d.var_at(q(3, 1)).unwrap(), q(-6, 1));
        assert!(d.var_at(q(-1, 10)).is_err());
        let p = QuantileProfile::from_scenarios(&d);
        assert_eq!(p.var_at(q(7, 8)).unwrap(), q(-6, 1));
        assert_eq!(p.var_at(q(1, 2)).unwrap(), q(0, 1));
        assert!(p.var_at(q(-1, 10)).is_err());
    }

    #[test]
    fn extremes() {
        let c = QuantileProfile::constant(5.0);
        assert_eq!((c.essinf(), c.esssup()), (5.0, 5.0));
        let p = QuantileProfile::from_scenarios(&quarters());
        assert_eq!((p.essinf(), p.esssup()), (0.0, 3.0));
        assert_eq!((quarters().essinf(), quarters().esssup()), (0.0, 3.0));
    }

    #[test]
    fn combine_identities() {
        let x = QuantileProfile::from_scenarios(&quarters());
        assert_eq!(combine(std::slice::from_ref(&x), &[1.0]).unwrap(), x);
        let zero = combine(&[x.clone(), x.scale(-1.0)], &[1.0, 1.0]).unwrap();
        assert_eq!(zero, QuantileProfile::constant(0.0));
        let a = QuantileProfile::band_indicator(0.0, 0.5).unwrap();
        let b = QuantileProfile::band_indicator(0.5, 1.0).unwrap();
        assert_eq!(
            combine(&[a, b], &[1.0, 1.0]).unwrap(),
            QuantileProfile::constant(1.0)
        );
        assert!(combine(&[x], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn band_indicators() {
        assert_eq!(
            QuantileProfile::band_indicator(0.0, 1.0).unwrap(),
            QuantileProfile::constant(1.0)
        );
        let b = QuantileProfile::band_indicator(0.25, 0.5).unwrap();
        assert_eq!(b.breaks(), &[0.0, 0.25, 0.5, 1.0]);
        assert_eq!(b.values(), &[0.0, 1.0, 0.0]);
        assert_eq!(
            QuantileProfile::band_indicator(0.3, 0.3).unwrap(),
            QuantileProfile::constant(0.0)
        );
        assert!(QuantileProfile::band_indicator(0.5, 0.3).is_err());
    }

    #[test]
    fn distribution_width_bookkeeping() {
        assert_eq!(
            QuantileProfile::constant(2.5).distribution(),
            DiscreteDistribution::point(2.5).unwrap()
        );
        let p = QuantileProfile::new(vec![0.0, 0.25, 1.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(
            p.distribution(),
            DiscreteDistribution::new([(0.0, 0.75), (1.0, 0.25)]).unwrap()
        );
    }

    #[test]
    fn monotone_composition() {
        let x = QuantileProfile::from_scenarios(&quarters());
        let id = PiecewiseLinear::identity(0.0, 3.0).unwrap();
        assert_eq!(x.apply_monotone(&id).unwrap(), x);
        let half = PiecewiseLinear::new(vec![(0.0, 0.0), (10.0, 5.0)]).unwrap();
        assert_eq!(
            QuantileProfile::constant(4.0)
                .apply_monotone(&half)
                .unwrap(),
            QuantileProfile::constant(2.0)
        );
        let short = PiecewiseLinear::identity(0.0, 2.0).unwrap();
        assert!(matches!(
            x.apply_monotone(&short),
            Err(Error::OutOfDomain { .. })
        ));
        // per-piece oracle: a kinked R applied to a step profile
        let r = PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 2.0)]).unwrap();
        let out = x.apply_monotone(&r).unwrap();
        for (l, rr, v) in x.pieces() {
            let mid = (l + rr) / 2.0;
            assert_eq!(out.value_at(mid), r.eval(v).unwrap());
        }
    }

    #[test]
    fn invalid_profiles() {
        assert!(QuantileProfile::new(vec![0.0, 0.5], vec![1.0]).is_err());
        assert!(QuantileProfile::new(vec![0.0, 0.6, 0.5, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(QuantileProfile::from_pieces([(0.5, 1.0)]).is_err());
        assert!(QuantileProfile::from_pieces([(0.5, f64::NAN), (0.5, 1.0)]).is_err());
    }

    #[test]
    fn latent_sort_pulls_back_exactly() {
        let x = QuantileProfile::new(
            vec![q(0, 1), q(1, 4), q(1, 2), q(1, 1)],
            vec![q(1, 1), q(5, 1), q(2, 1)],
        )
        .unwrap();
        let sort = LatentSort::new(&x);
        assert_eq!(sort.sorted().values(), &[q(5, 1), q(2, 1), q(1, 1)]);
        assert_eq!(sort.pull_back(sort.sorted()), x);
        let top = sort.sorted().restrict(q(0, 1), q(1, 4)).unwrap();
        let back = sort.pull_back(&top);
        assert_eq!(back.value_at(q(3, 8)), q(5, 1));
        assert_eq!(back.value_at(q(1, 8)), q(0, 1));
    }

    fn arb_distribution() -> impl Strategy<Value = DiscreteDistribution<Q>> {
        prop::collection::vec((-20i64..20, 1i64..10), 1..8).prop_map(|raw| {
            let total: i64 = raw.iter().map(|r| r.1).sum();
            DiscreteDistribution::new(raw.into_iter().map(|(v, w)| (q(v, 1), q(w, total)))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn round_trip_and_quantile_identity(d in arb_distribution(), num in 0i64..=64) {
            let p = QuantileProfile::from_scenarios(&d);
            prop_assert_eq!(p.distribution(), d.clone());
            let level = q(num, 64);
            prop_assert_eq!(d.var_at(level).unwrap(), p.var_at(level).unwrap());
            if level < q(1, 1) {
                prop_assert_eq!(p.value_at(level), d.var_at(level).unwrap());
            }
        }

        #[test]
        fn var_matches_strict_inequality_criterion(d in arb_distribution(), num in 0i64..64) {
            // s < V@R_l(Z)  <=>  F_Z(s) < 1 - l
            let level = q(num, 64);
            let v = d.var_at(level).unwrap();
            for a in d.atoms() {
                prop_assert_eq!(a.value < v, d.cdf(a.value) < q(1, 1) - level);
            }
        }

        #[test]
        fn combine_is_exact_on_integers(a in arb_distribution(), b in arb_distribution(), c in -3i64..4) {
            let x = QuantileProfile::from_scenarios(&a);
            let y = QuantileProfile::from_scenarios(&b);
            let s = combine(&[x.clone(), y.clone()], &[q(1, 1), q(c, 1)]).unwrap();
            for k in 0..50 {
                let u = q(2 * k + 1, 100);
                prop_assert_eq!(s.value_at(u), x.value_at(u) + q(c, 1) * y.value_at(u));
            }
        }

        #[test]
        fn var_is_nonincreasing(d in arb_distribution()) {
            let mut prev = d.var_at(q(0, 1)).unwrap();
            for k in 1..=40 {
                let v = d.var_at(q(k, 40)).unwrap();
                prop_assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn var_is_right_continuous_at_breakpoints() {
        let d = quarters();
        let p = QuantileProfile::from_scenarios(&d);
        for &b in &p.breaks()[1..p.breaks().len() - 1] {
            let at = d.var_at(b).unwrap();
            assert_eq!(d.var_at(b + 1e-10).unwrap(), at);
            assert!(d.var_at(b - 1e-10).unwrap() > at);
            assert_eq!(p.var_at(b).unwrap(), at);
            assert!(p.var_at(b - 1e-10).unwrap() > at);
        }
    }
}
