//! Distortion functions and the two evaluators of distortion risk measures.
//!
//! A [`Distortion`] is a nondecreasing, left-continuous, piecewise-linear
//! function on `[0, 1]` with `g(0) = 0`, stored as segments `(x0, x1]` whose
//! right endpoint value belongs to the segment. Upward jumps sit between
//! segments. `g(1) = 1` makes it proper; `g(1) < 1` (including `g = 0`) is
//! allowed and reported by [`Distortion::is_proper`].
//!
//! The measure `rho^g(X)` is computed two independent ways:
//!
//! * [`choquet_eval`] integrates survival-set capacities `g(P[X > s])` layer
//!   by layer over the sorted support;
//! * [`mixture_eval`] integrates `l -> V@R_l(X)` against the Stieltjes
//!   measure of `g`, with point masses `g(x+) - g(x)`.

use crate::error::{Error, Result};
use crate::scalar::{abs, max, min, Scalar};
use crate::scenario::{DiscreteDistribution, QuantileProfile};

/// `g` restricted to `(x0, x1]`: affine from `g(x0+) = start` to `g(x1) = end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment<T> {
    pub x0: T,
    pub x1: T,
    pub start: T,
    pub end: T,
}

impl<T: Scalar> Segment<T> {
    pub fn slope(&self) -> T {
        (self.end - self.start) / (self.x1 - self.x0)
    }

    fn at(&self, x: T) -> T {
        let v = self.start + self.slope() * (x - self.x0);
        max(self.start, min(self.end, v))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Distortion<T> {
    segments: Vec<Segment<T>>,
}

impl<T: Scalar> Distortion<T> {
    /// Validates contiguity over `(0, 1]` and monotonicity. Jumps or slopes
    /// that are negative by no more than the merge tolerance are flattened.
    pub fn from_segments(segments: Vec<Segment<T>>) -> Result<Self> {
        let tol = T::merge_tolerance();
        if segments.is_empty() {
            return Err(Error::InvalidDistortion("no segments".into()));
        }
        let mut out: Vec<Segment<T>> = Vec::with_capacity(segments.len());
        let mut cursor = T::zero();
        let mut prev_end = T::zero();
        for mut s in segments {
            if [s.x0, s.x1, s.start, s.end]
                .iter()
                .any(|v| !v.is_finite_value())
            {
                return Err(Error::InvalidDistortion("non-finite segment".into()));
            }
            if abs(s.x0 - cursor) > tol {
                return Err(Error::InvalidDistortion(format!(
                    "gap or overlap at x = {}",
                    s.x0
                )));
            }
            s.x0 = cursor;
            if s.x1 <= s.x0 {
                return Err(Error::InvalidDistortion(format!(
                    "empty segment ({}, {}]",
                    s.x0, s.x1
                )));
            }
            if s.start < prev_end - tol {
                return Err(Error::InvalidDistortion(format!(
                    "downward jump at x = {}",
                    s.x0
                )));
            }
            if s.end < s.start - tol {
                return Err(Error::InvalidDistortion(format!(
                    "negative slope on ({}, {}]",
                    s.x0, s.x1
                )));
            }
            s.start = max(s.start, prev_end);
            s.end = max(s.end, s.start);
            cursor = s.x1;
            prev_end = s.end;
            match out.last_mut() {
                Some(last) if last.end == s.start && last.slope() == s.slope() => {
                    last.x1 = s.x1;
                    last.end = s.end;
                }
                _ => out.push(s),
            }
        }
        if abs(cursor - T::one()) > tol {
            return Err(Error::InvalidDistortion(format!(
                "segments end at {cursor}, not 1"
            )));
        }
        out.last_mut().unwrap().x1 = T::one();
        Ok(Self { segments: out })
    }

    /// From breakpoint data: `(x1, g(x1), jump at the segment's left end)`,
    /// segments consecutive from 0.
    pub fn from_jumps(pieces: impl IntoIterator<Item = (T, T, T)>) -> Result<Self> {
        let mut segments = Vec::new();
        let mut x0 = T::zero();
        let mut prev = T::zero();
        for (x1, end, jump) in pieces {
            if jump < T::zero() {
                return Err(Error::InvalidDistortion(format!("negative jump {jump}")));
            }
            segments.push(Segment {
                x0,
                x1,
                start: prev + jump,
                end,
            });
            x0 = x1;
            prev = end;
        }
        Self::from_segments(segments)
    }

    /// `g = 0`: the improper function of an over-saturated network.
    pub fn zero() -> Self {
        Self::from_segments(vec![Segment {
            x0: T::zero(),
            x1: T::one(),
            start: T::zero(),
            end: T::zero(),
        }])
        .unwrap()
    }

    /// `g(x) = x`, the expectation.
    pub fn identity() -> Self {
        Self::from_segments(vec![Segment {
            x0: T::zero(),
            x1: T::one(),
            start: T::zero(),
            end: T::one(),
        }])
        .unwrap()
    }

    /// V@R at level `alpha`: `0` on `[0, alpha]`, `1` after.
    pub fn var(alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "V@R level {alpha} outside (0, 1)"
            )));
        }
        Self::from_jumps([
            (alpha, T::zero(), T::zero()),
            (T::one(), T::one(), T::one()),
        ])
    }

    /// AV@R at level `beta`: `x / beta` on `[0, beta]`, `1` after.
    pub fn avar(beta: T) -> Result<Self> {
        if !(beta > T::zero() && beta <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "AV@R level {beta} outside (0, 1]"
            )));
        }
        let mut pieces = vec![(beta, T::one(), T::zero())];
        if beta < T::one() {
            pieces.push((T::one(), T::one(), T::zero()));
        }
        Self::from_jumps(pieces)
    }

    /// RV@R: `0` on `[0, alpha]`, `(x - alpha) / beta` up to `alpha + beta`,
    /// `1` after.
    pub fn rvar(alpha: T, beta: T) -> Result<Self> {
        if !(alpha > T::zero() && beta > T::zero() && alpha + beta <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "RV@R parameters ({alpha}, {beta}) need alpha, beta > 0 and alpha + beta <= 1"
            )));
        }
        let mut pieces = vec![
            (alpha, T::zero(), T::zero()),
            (alpha + beta, T::one(), T::zero()),
        ];
        if alpha + beta < T::one() {
            pieces.push((T::one(), T::one(), T::zero()));
        }
        Self::from_jumps(pieces)
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    /// Segment boundaries, `0` and `1` included.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut v = vec![T::zero()];
        v.extend(self.segments.iter().map(|s| s.x1));
        v
    }

    /// `g(x)`, with `g = 0` left of 0 and `g(1)` right of 1. Points within the
    /// merge tolerance above a boundary read the boundary value.
    pub fn eval(&self, x: T) -> T {
        let tol = T::merge_tolerance();
        if x <= tol {
            return T::zero();
        }
        let k = self.segments.partition_point(|s| s.x1 + tol < x);
        match self.segments.get(k) {
            Some(s) => s.at(x),
            None => self.g1(),
        }
    }

    /// `g(x+)`.
    pub fn right_limit(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        let tol = T::merge_tolerance();
        let k = self.segments.partition_point(|s| s.x1 - tol <= x);
        match self.segments.get(k) {
            Some(s) => s.at(max(x, s.x0)),
            None => self.g1(),
        }
    }

    pub fn g1(&self) -> T {
        self.segments[self.segments.len() - 1].end
    }

    pub fn is_proper(&self) -> bool {
        abs(self.g1() - T::one()) <= T::merge_tolerance()
    }

    /// `sup { x : g(x) = 0 }`. Fails for `g = 0`.
    pub fn parameter(&self) -> Result<T> {
        for s in &self.segments {
            if s.start > T::zero() || s.end > T::zero() {
                return Ok(s.x0);
            }
        }
        Err(Error::InvalidDistortion(
            "g vanishes identically; no parameter".into(),
        ))
    }

    /// `g(x + alpha)` on `[0, 1 - alpha]` and `1` beyond.
    pub fn active_part(&self) -> Result<Self> {
        let alpha = self.parameter()?;
        let mut segments: Vec<Segment<T>> = self
            .segments
            .iter()
            .filter(|s| s.x0 >= alpha)
            .map(|s| Segment {
                x0: s.x0 - alpha,
                x1: s.x1 - alpha,
                start: s.start,
                end: s.end,
            })
            .collect();
        if alpha > T::zero() {
            let x0 = T::one() - alpha;
            segments.push(Segment {
                x0,
                x1: T::one(),
                start: max(T::one(), self.g1()),
                end: max(T::one(), self.g1()),
            });
        }
        Self::from_segments(segments)
    }

    /// Whether `g` is the V@R distortion at some level; returns the level.
    pub fn var_level(&self) -> Option<T> {
        let m = self.stieltjes();
        match (m.density.is_empty(), m.atoms.as_slice()) {
            (true, [(loc, mass)]) if abs(*mass - T::one()) <= T::merge_tolerance() => Some(*loc),
            _ => None,
        }
    }

    /// Concavity of the active part on `(0, 1]`: no upward jump after the
    /// first segment and nonincreasing slopes. A jump at `0+` is admitted.
    pub fn is_concave_active_part(&self) -> Result<bool> {
        if !self.is_proper() {
            return Err(Error::InvalidDistortion(
                "concavity check needs a proper distortion".into(),
            ));
        }
        let active = self.active_part()?;
        let tol = T::merge_tolerance();
        Ok(active.segments.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            b.start <= a.end + tol && b.slope() <= a.slope() + tol
        }))
    }

    /// `g(x) < 1` for every `x < 1`.
    pub fn stays_below_one_before_one(&self) -> bool {
        let one = T::one() - T::merge_tolerance();
        self.segments
            .iter()
            .all(|s| s.start < one && (s.x1 >= T::one() || s.end < one))
    }

    /// The Stieltjes measure `g(dl)` on `[0, 1]`.
    pub fn stieltjes(&self) -> StieltjesMeasure<T> {
        let mut density = Vec::new();
        let mut atoms = Vec::new();
        let mut prev = T::zero();
        for s in &self.segments {
            let jump = s.start - prev;
            if jump > T::zero() {
                atoms.push((s.x0, jump));
            }
            let slope = s.slope();
            if slope > T::zero() {
                density.push((s.x0, s.x1, slope));
            }
            prev = s.end;
        }
        StieltjesMeasure { density, atoms }
    }
}

/// Piecewise-constant density plus point masses on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StieltjesMeasure<T> {
    /// `(from, to, density)`.
    pub density: Vec<(T, T, T)>,
    /// `(location, mass)`.
    pub atoms: Vec<(T, T)>,
}

impl<T: Scalar> StieltjesMeasure<T> {
    pub fn total_mass(&self) -> T {
        let d = self
            .density
            .iter()
            .fold(T::zero(), |acc, &(a, b, rho)| acc + (b - a) * rho);
        self.atoms.iter().fold(d, |acc, &(_, m)| acc + m)
    }

    /// `int phi(l) mu(dl)` for a right-continuous step function of the level.
    pub fn integrate(&self, phi: &QuantileProfile<T>) -> T {
        let mut total = T::zero();
        for &(a, b, rho) in &self.density {
            for (l, r, v) in phi.pieces() {
                let lo = max(a, l);
                let hi = min(b, r);
                if hi > lo {
                    total = total + rho * (hi - lo) * v;
                }
            }
        }
        for &(loc, mass) in &self.atoms {
            total = total + mass * phi.value_at(loc);
        }
        total
    }
}

/// `int V@R_l(X) g(dl)`, exact on step profiles.
pub fn mixture_eval<T: Scalar>(g: &Distortion<T>, x: &QuantileProfile<T>) -> T {
    g.stieltjes().integrate(&x.decreasing())
}

/// Choquet integral of `X` against the set function `A -> g(P[A])`.
pub fn choquet_eval<T: Scalar>(g: &Distortion<T>, x: &DiscreteDistribution<T>) -> T {
    let atoms = x.atoms();
    let mut total = atoms[0].value * g.g1();
    // survival[j] = P(X > z_j), accumulated from the top
    let mut survival = vec![T::zero(); atoms.len()];
    let mut acc = T::zero();
    for j in (0..atoms.len()).rev() {
        survival[j] = acc;
        acc = acc + atoms[j].probability;
    }
    for j in 0..atoms.len() - 1 {
        total = total + (atoms[j + 1].value - atoms[j].value) * g.eval(survival[j]);
    }
    total
}

/// One piece of the lower envelope of several distortions: on `(from, to]`
/// function `winner` (first index among ties) is the smallest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopePiece<T> {
    pub from: T,
    pub to: T,
    pub winner: usize,
    pub start: T,
    pub end: T,
}

/// Lower envelope with crossings of the affine pieces solved exactly.
pub fn lower_envelope<T: Scalar>(gs: &[Distortion<T>]) -> Vec<EnvelopePiece<T>> {
    let tol = T::merge_tolerance();
    let two = T::one() + T::one();
    let mut grid: Vec<T> = gs.iter().flat_map(|g| g.breakpoints()).collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|b, a| *b - *a <= tol);
    *grid.last_mut().unwrap() = T::one();

    let mut out: Vec<EnvelopePiece<T>> = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        // affine form on (a, b]: value at a+ and slope
        let lines: Vec<(T, T)> = gs
            .iter()
            .map(|g| {
                let k = g.segments.partition_point(|s| s.x1 - tol <= a);
                let s = g.segments[k.min(g.segments.len() - 1)];
                (s.start + s.slope() * (a - s.x0), s.slope())
            })
            .collect();
        let mut cuts = vec![a, b];
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let ds = lines[j].1 - lines[i].1;
                if ds != T::zero() {
                    let x = a + (lines[i].0 - lines[j].0) / ds;
                    if x > a + tol && x < b - tol {
                        cuts.push(x);
                    }
                }
            }
        }
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        cuts.dedup_by(|q, p| *q - *p <= tol);
        for c in cuts.windows(2) {
            let (p, q) = (c[0], c[1]);
            let mid = (p + q) / two;
            let at = |i: usize, x: T| lines[i].0 + lines[i].1 * (x - a);
            let mut winner = 0;
            for i in 1..lines.len() {
                if at(i, mid) < at(winner, mid) {
                    winner = i;
                }
            }
            out.push(EnvelopePiece {
                from: p,
                to: q,
                winner,
                start: at(winner, p),
                end: at(winner, q),
            });
        }
    }
    out
}

/// Pointwise minimum of distortions, exact on linear pieces.
pub fn pointwise_min<T: Scalar>(gs: &[Distortion<T>]) -> Result<Distortion<T>> {
    if gs.is_empty() {
        return Err(Error::InvalidParameter("minimum of no distortions".into()));
    }
    let segments = lower_envelope(gs)
        .into_iter()
        .map(|p| Segment {
            x0: p.from,
            x1: p.to,
            start: p.start,
            end: p.end,
        })
        .collect();
    Distortion::from_segments(segments)
}
