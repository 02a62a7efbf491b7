//! Law-invariant monetary risk measures on step profiles.

use num_traits::Float;

use crate::distortion::{mixture_eval, Distortion, Segment};
use crate::error::{Error, Result};
use crate::scalar::{abs, scaled, Real, Scalar};
use crate::scenario::QuantileProfile;

/// A monotone, cash-invariant, distribution-based functional.
pub trait Measure<T: Scalar>: Send + Sync {
    fn evaluate(&self, x: &QuantileProfile<T>) -> Result<T>;

    /// Evaluates the position that takes `value` on a cell of mass `width`,
    /// for cells listed in any order. Used by the exhaustive oracle.
    fn evaluate_cells(&self, cells: &[(T, T)]) -> Result<T> {
        self.evaluate(&QuantileProfile::from_pieces(cells.iter().copied())?)
    }
}

impl<T: Scalar> Measure<T> for Distortion<T> {
    fn evaluate(&self, x: &QuantileProfile<T>) -> Result<T> {
        Ok(mixture_eval(self, x))
    }

    fn evaluate_cells(&self, cells: &[(T, T)]) -> Result<T> {
        let mut sorted = cells.to_vec();
        sorted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let mut level = T::zero();
        let mut g_prev = T::zero();
        let mut total = T::zero();
        for (w, v) in sorted {
            level = level + w;
            let g = self.eval(level);
            total = total + v * (g - g_prev);
            g_prev = g;
        }
        Ok(total)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RiskMeasure<T> {
    Distortion(Distortion<T>),
    /// `log E[exp(X)]`.
    Entropic,
    /// `inf { m : E[(X - m)^-] >= gamma * E[(X - m)^+] }`.
    Expectile {
        gamma: T,
    },
    /// The base measure applied to `min(X, V@R_alpha(X))`.
    Truncated {
        alpha: T,
        base: Box<RiskMeasure<T>>,
    },
}

impl<T: Scalar> RiskMeasure<T> {
    pub fn expectile(gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite_value() {
            return Err(Error::InvalidParameter(format!(
                "expectile gamma {gamma} must be positive"
            )));
        }
        Ok(Self::Expectile { gamma })
    }

    pub fn truncated(base: RiskMeasure<T>, alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "truncation level {alpha} outside (0, 1)"
            )));
        }
        Ok(Self::Truncated {
            alpha,
            base: Box::new(base),
        })
    }

    pub fn as_distortion(&self) -> Option<&Distortion<T>> {
        match self {
            Self::Distortion(g) => Some(g),
            _ => None,
        }
    }

    /// The largest level at which the measure is V@R-type by construction,
    /// if any.
    pub fn structural_var_parameter(&self) -> Option<T> {
        match self {
            Self::Distortion(g) => g.parameter().ok().filter(|a| *a > T::zero()),
            Self::Truncated { alpha, base } => {
                let inner = base.structural_var_parameter();
                Some(match inner {
                    Some(b) if b > *alpha => b,
                    _ => *alpha,
                })
            }
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Distortion(g) => distortion_label(g),
            Self::Entropic => "entropic".into(),
            Self::Expectile { gamma } => format!("expectile({gamma})"),
            Self::Truncated { alpha, base } => format!("truncated({}, {alpha})", base.label()),
        }
    }
}

impl<T: Real> Measure<T> for RiskMeasure<T> {
    fn evaluate(&self, x: &QuantileProfile<T>) -> Result<T> {
        match self {
            Self::Distortion(g) => Ok(mixture_eval(g, x)),
            Self::Entropic => Ok(entropic(x)),
            Self::Expectile { gamma } => expectile(x, *gamma),
            Self::Truncated { alpha, base } => {
                let cap = x.var_at(*alpha)?;
                base.evaluate(&x.cap(cap))
            }
        }
    }

    fn evaluate_cells(&self, cells: &[(T, T)]) -> Result<T> {
        match self {
            Self::Distortion(g) => g.evaluate_cells(cells),
            _ => self.evaluate(&QuantileProfile::from_pieces(cells.iter().copied())?),
        }
    }
}

/// Names V@R, AV@R, RV@R and the expectation; anything else is `distortion`.
fn distortion_label<T: Scalar>(g: &Distortion<T>) -> String {
    if let Some(a) = g.var_level() {
        return format!("var({a})");
    }
    let (zero, one) = (T::zero(), T::one());
    let s = g.segments();
    let (alpha, rest) = match s.split_first() {
        Some((z, rest)) if z.end == zero => (z.x1, rest),
        _ => (zero, s),
    };
    let ramp = |r: &Segment<T>| r.start == zero && r.end == one;
    let beta = match rest {
        [r] if ramp(r) => Some(r.x1 - r.x0),
        [r, flat] if ramp(r) && flat.start == one => Some(r.x1 - r.x0),
        _ => None,
    };
    match beta {
        Some(b) if alpha == zero && b == one => "expectation".to_string(),
        Some(b) if alpha == zero => format!("avar({b})"),
        Some(b) => format!("rvar({alpha}, {b})"),
        None => "distortion".to_string(),
    }
}

fn entropic<T: Real>(x: &QuantileProfile<T>) -> T {
    let top = x.esssup();
    let sum = x.pieces().fold(T::zero(), |acc, (l, r, v)| {
        acc + (r - l) * Float::exp(v - top)
    });
    top + Float::ln(sum)
}

fn expectile<T: Real>(x: &QuantileProfile<T>, gamma: T) -> Result<T> {
    let accepts = |m: T| {
        let (mut pos, mut neg) = (T::zero(), T::zero());
        for (l, r, v) in x.pieces() {
            let d = v - m;
            if d > T::zero() {
                pos = pos + (r - l) * d;
            } else {
                neg = neg - (r - l) * d;
            }
        }
        pos == T::zero() || neg >= gamma * pos
    };
    let mut lo = x.essinf() - T::one();
    let mut hi = x.esssup() + T::one();
    if accepts(lo) || !accepts(hi) {
        return Err(Error::BisectionBracket {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    let tol = T::lit(1e-13) * (T::one() + Float::abs(lo) + Float::abs(hi));
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + (hi - lo) / (T::one() + T::one());
        if accepts(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Checks the V@R-type identity `rho(X) = rho(min(X, V@R_alpha(X)))`.
///
/// Distortions with parameter at least `alpha` and truncations at a level at
/// least `alpha` pass structurally; anything else is checked on the
/// witnesses, so `true` there means "no counterexample among them".
pub fn is_var_type<T: Real>(
    rho: &RiskMeasure<T>,
    alpha: T,
    witnesses: &[QuantileProfile<T>],
) -> Result<bool> {
    if !(alpha > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "V@R-type level {alpha} must be positive"
        )));
    }
    if let Some(p) = rho.structural_var_parameter() {
        if p >= alpha {
            return Ok(true);
        }
    }
    for x in witnesses {
        let lhs = rho.evaluate(x)?;
        let rhs = rho.evaluate(&x.cap(x.var_at(alpha)?))?;
        if abs(lhs - rhs) > scaled(T::check_tolerance(), lhs) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `h_X(m) = rho(X - m * 1{X <= V@R_{1 - alpha}(X)})` for each `m`.
pub fn surplus_profile<T: Real, M: Measure<T> + ?Sized>(
    rho: &M,
    x: &QuantileProfile<T>,
    alpha: T,
    ms: &[T],
) -> Result<Vec<(T, T)>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "surplus level {alpha} outside (0, 1)"
        )));
    }
    let threshold = x.var_at(T::one() - alpha)?;
    ms.iter()
        .map(|&m| {
            if m < T::zero() {
                return Err(Error::InvalidParameter(format!(
                    "withdrawal {m} is negative"
                )));
            }
            let shifted = x.map(|v| if v <= threshold { v - m } else { v });
            Ok((m, rho.evaluate(&shifted)?))
        })
        .collect()
}

/// Distortion criterion for strong surplus sensitivity: `g(x) < 1` for all
/// `x < 1`. Holds at every positive level at once.
pub fn is_strongly_surplus_sensitive_distortion<T: Scalar>(
    g: &Distortion<T>,
    level: T,
) -> Result<bool> {
    if !g.is_proper() {
        return Err(Error::InvalidDistortion(
            "strong surplus sensitivity needs a proper distortion".into(),
        ));
    }
    if !(level > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "level {level} must be positive"
        )));
    }
    Ok(g.stays_below_one_before_one())
}

/// Numerical probe used when no structural criterion applies: evaluates
/// `rho(-m * 1{U < level})` for growing `m` and requires a strictly
/// decreasing sequence whose late slope keeps at least half of its early
/// slope.
pub fn probe_unbounded_withdrawal<T: Real, M: Measure<T> + ?Sized>(
    rho: &M,
    level: T,
) -> Result<bool> {
    let band = QuantileProfile::band_indicator(T::zero(), level)?;
    let ms: Vec<T> = [1.0, 10.0, 100.0, 1000.0]
        .iter()
        .map(|&m| T::lit(m))
        .collect();
    let hs = ms
        .iter()
        .map(|&m| rho.evaluate(&band.scale(-m)))
        .collect::<Result<Vec<T>>>()?;
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Ok(false);
    }
    let early = (hs[1] - hs[0]) / (ms[1] - ms[0]);
    let late = (hs[3] - hs[2]) / (ms[3] - ms[2]);
    Ok(late <= early / (T::one() + T::one()))
}
