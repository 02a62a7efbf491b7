//! The combined distortion of a network and the selector system that decides,
//! level by level, which entity absorbs the comonotone remainder.

use crate::distortion::{lower_envelope, pointwise_min, Distortion, Segment};
use crate::error::{Error, HypothesisViolation, Result};
use crate::scalar::{min, Scalar};
use crate::scenario::{DiscreteDistribution, PiecewiseLinear};

/// `f = min_i g_hat_i`, the shifted distortion `g` and the parameter sum `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinedDistortion<T> {
    pub envelope: Distortion<T>,
    pub g: Distortion<T>,
    pub d: T,
    pub parameters: Vec<T>,
}

pub(crate) fn check_proper<T: Scalar>(gs: &[Distortion<T>]) -> Result<()> {
    if gs.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one distortion is required".into(),
        ));
    }
    for (index, g) in gs.iter().enumerate() {
        if !g.is_proper() {
            return Err(HypothesisViolation::ImproperDistortion {
                index,
                g1: g.g1().to_f64_lossy(),
            }
            .into());
        }
    }
    Ok(())
}

/// `g(x) = 0` on `[0, min(d, 1)]` and `f(x - d)` above, where `d` sums the
/// parameters and `f` is the lower envelope of the active parts.
pub fn combined_g<T: Scalar>(gs: &[Distortion<T>]) -> Result<CombinedDistortion<T>> {
    check_proper(gs)?;
    let parameters = gs
        .iter()
        .map(|g| g.parameter())
        .collect::<Result<Vec<_>>>()?;
    let actives = gs
        .iter()
        .map(|g| g.active_part())
        .collect::<Result<Vec<_>>>()?;
    let envelope = pointwise_min(&actives)?;
    let d = parameters.iter().fold(T::zero(), |acc, &a| acc + a);
    let tol = T::merge_tolerance();

    let g = if d >= T::one() - tol {
        Distortion::zero()
    } else {
        let mut segments = Vec::new();
        if d > tol {
            segments.push(Segment {
                x0: T::zero(),
                x1: d,
                start: T::zero(),
                end: T::zero(),
            });
        }
        let shift = if d > tol { d } else { T::zero() };
        for s in envelope.segments() {
            let x0 = s.x0 + shift;
            if x0 >= T::one() - tol {
                break;
            }
            let x1 = min(s.x1 + shift, T::one());
            let end = if s.x1 + shift > T::one() {
                s.start + s.slope() * (x1 - x0)
            } else {
                s.end
            };
            segments.push(Segment {
                x0,
                x1,
                start: s.start,
                end,
            });
        }
        Distortion::from_segments(segments)?
    };
    Ok(CombinedDistortion {
        envelope,
        g,
        d,
        parameters,
    })
}

/// Levels `lambda` in `[from, to)` on which entity `winner` carries the
/// remainder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region<T> {
    pub from: T,
    pub to: T,
    pub winner: usize,
}

#[derive(Clone, Debug)]
pub struct SelectorSystem<T> {
    actives: Vec<Distortion<T>>,
    envelope: Distortion<T>,
    regions: Vec<Region<T>>,
}

impl<T: Scalar> SelectorSystem<T> {
    pub fn new(gs: &[Distortion<T>]) -> Result<Self> {
        check_proper(gs)?;
        let actives = gs
            .iter()
            .map(|g| g.active_part())
            .collect::<Result<Vec<_>>>()?;
        let envelope = pointwise_min(&actives)?;
        let mut regions: Vec<Region<T>> = Vec::new();
        // envelope pieces are (p, q] in x = 1 - lambda, i.e. [1 - q, 1 - p) in lambda
        for p in lower_envelope(&actives).iter().rev() {
            let (from, to) = (T::one() - p.to, T::one() - p.from);
            match regions.last_mut() {
                Some(r) if r.winner == p.winner => r.to = to,
                _ => regions.push(Region {
                    from,
                    to,
                    winner: p.winner,
                }),
            }
        }
        Ok(Self {
            actives,
            envelope,
            regions,
        })
    }

    pub fn len(&self) -> usize {
        self.actives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actives.is_empty()
    }

    pub fn actives(&self) -> &[Distortion<T>] {
        &self.actives
    }

    /// `f`, the lower envelope of the active parts.
    pub fn envelope(&self) -> &Distortion<T> {
        &self.envelope
    }

    pub fn regions(&self) -> &[Region<T>] {
        &self.regions
    }

    /// First index attaining `min_j g_hat_j(1 - lambda)`.
    pub fn winner_at(&self, lambda: T) -> usize {
        let x = T::one() - lambda;
        let values: Vec<T> = self.actives.iter().map(|g| g.eval(x)).collect();
        let low = values.iter().copied().fold(values[0], min);
        values
            .iter()
            .position(|&v| v <= low + T::merge_tolerance())
            .expect("the minimum is attained")
    }

    /// `r_i(lambda)`: 1 for the winner, 0 otherwise.
    pub fn r(&self, i: usize, lambda: T) -> T {
        if self.winner_at(lambda) == i {
            T::one()
        } else {
            T::zero()
        }
    }

    /// `int_0^y r_i(lambda) d lambda` for `y` in `[0, 1]`, read off the regions.
    pub fn integrated_selector(&self, i: usize, y: T) -> T {
        self.regions
            .iter()
            .filter(|r| r.winner == i && r.from < y)
            .fold(T::zero(), |acc, r| acc + (min(r.to, y) - r.from))
    }

    /// The transfer functions `R_i(y) = int_0^y r_i(F(s)) ds` for the law `F`
    /// of the nonnegative remainder. Piecewise linear with knots at its atoms;
    /// the `R_i` sum to the identity on `[0, esssup]`.
    pub fn transfer_functions(
        &self,
        remainder: &DiscreteDistribution<T>,
    ) -> Result<Vec<PiecewiseLinear<T>>> {
        if remainder.essinf() < T::zero() {
            return Err(Error::InvalidParameter(
                "transfer functions need a nonnegative remainder".into(),
            ));
        }
        let n = self.actives.len();
        let mut knots = vec![vec![(T::zero(), T::zero())]; n];
        let mut s = T::zero();
        let mut cdf = T::zero();
        for atom in remainder.atoms() {
            if atom.value > s {
                let w = self.winner_at(cdf);
                for (i, k) in knots.iter_mut().enumerate() {
                    let last = k[k.len() - 1].1;
                    let rise = if i == w { atom.value - s } else { T::zero() };
                    k.push((atom.value, last + rise));
                }
                s = atom.value;
            }
            cdf = cdf + atom.probability;
        }
        knots.into_iter().map(PiecewiseLinear::new).collect()
    }
}
