use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::scalar::{abs, Scalar};
use crate::scenario::QuantileProfile;

/// Largest number of assignments the exhaustive search will visit.
pub const ORACLE_LIMIT: u64 = 200_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<T> {
    /// Smallest `rho_1(X^1) + rho_2(X - X^1)` found.
    pub value: T,
    /// The minimizing `X^1`, one value per cell.
    pub first_part: Vec<T>,
    /// Assignments evaluated after removing permutations of equal cells.
    pub assignments: u64,
}

/// Reads `x` as `k` equiprobable cells; fails if it is not constant on them.
pub fn equiprobable_cells<T: Scalar>(x: &QuantileProfile<T>, k: usize) -> Result<Vec<T>> {
    let kk = T::from_usize(k).expect("cell count fits the scalar");
    let tol = T::merge_tolerance();
    for &b in x.breaks() {
        let scaled = b * kk;
        let nearest = T::from_i64(scaled.to_f64_lossy().round() as i64).expect("integer");
        if abs(scaled - nearest) > tol * kk {
            return Err(Error::InvalidParameter(format!(
                "breakpoint {b} is not a multiple of 1/{k}"
            )));
        }
    }
    let two = T::one() + T::one();
    Ok((0..k)
        .map(|j| {
            let mid = (T::from_usize(j).unwrap() + T::one() / two) / kk;
            x.value_at(mid)
        })
        .collect())
}

fn grid<T: Scalar>(lo: T, hi: T, step: T) -> Result<Vec<T>> {
    if !(step > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "grid step {step} must be positive"
        )));
    }
    let span = ((hi - lo) / step).to_f64_lossy();
    if !span.is_finite() {
        return Err(Error::InvalidParameter("grid span is not finite".into()));
    }
    let count = (span + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|j| lo + step * T::from_usize(j).unwrap())
        .collect())
}

/// Best value and grid indices seen by one worker.
type Best<T> = Option<(T, Vec<usize>)>;

/// Exhaustive minimum of `rho_1(X^1) + rho_2(X - X^1)` over every `X^1` that
/// assigns each equiprobable cell of `X` a value on the grid
/// `essinf X - bound, essinf X - bound + step, ..., esssup X + bound`.
///
/// The measures are law invariant, so permuting cells on which `X` agrees
/// does not change the objective; only one assignment per such permutation
/// class is visited. Ties go to the lexicographically first assignment, so
/// the result does not depend on how the search is split across threads.
pub fn brute_force_infconv<T: Scalar, M: Measure<T>>(
    cells: &[T],
    measures: [&M; 2],
    grid_step: T,
    bound: T,
) -> Result<OracleResult<T>> {
    if cells.is_empty() {
        return Err(Error::InvalidParameter(
            "the oracle needs at least one cell".into(),
        ));
    }
    if bound < T::zero() {
        return Err(Error::InvalidParameter(format!(
            "oracle bound {bound} is negative"
        )));
    }
    let lo = cells
        .iter()
        .copied()
        .fold(cells[0], |a, b| if b < a { b } else { a })
        - bound;
    let hi = cells
        .iter()
        .copied()
        .fold(cells[0], |a, b| if b > a { b } else { a })
        + bound;
    let points = grid(lo, hi, grid_step)?;
    let k = cells.len();
    let n = points.len();
    if (n as u64)
        .checked_pow(k as u32)
        .is_none_or(|t| t > ORACLE_LIMIT)
    {
        return Err(Error::OracleTooLarge {
            grid_points: n,
            cells: k,
            limit: ORACLE_LIMIT,
        });
    }

    // cells in ascending order of X; equal neighbours take nondecreasing indices
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        cells[a]
            .partial_cmp(&cells[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<T> = order.iter().map(|&j| cells[j]).collect();
    let tied: Vec<bool> = (0..k)
        .map(|j| j > 0 && values[j] == values[j - 1])
        .collect();
    let width = T::one() / T::from_usize(k).unwrap();

    let searched = (0..n)
        .into_par_iter()
        .map(|first| -> Result<(u64, Best<T>)> {
            let mut idx = vec![first; k];
            for j in 1..k {
                idx[j] = if tied[j] { idx[j - 1] } else { 0 };
            }
            let mut own = vec![(width, T::zero()); k];
            let mut rest = vec![(width, T::zero()); k];
            let mut best: Best<T> = None;
            let mut visited = 0u64;
            loop {
                for j in 0..k {
                    own[j].1 = points[idx[j]];
                    rest[j].1 = values[j] - points[idx[j]];
                }
                let v = measures[0].evaluate_cells(&own)? + measures[1].evaluate_cells(&rest)?;
                visited += 1;
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, idx.clone()));
                }
                let mut pos = k;
                loop {
                    if pos == 1 {
                        return Ok((visited, best));
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < n {
                        break;
                    }
                }
                for j in pos + 1..k {
                    idx[j] = if tied[j] { idx[j - 1] } else { 0 };
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let assignments = searched.iter().map(|(v, _)| v).sum();
    let best = searched
        .into_iter()
        .filter_map(|(_, b)| b)
        .fold(Best::<T>::None, |acc, cand| match acc {
            Some(a) if a.0 < cand.0 || (a.0 == cand.0 && a.1 <= cand.1) => Some(a),
            _ => Some(cand),
        })
        .expect("the grid is nonempty");

    let mut first_part = vec![T::zero(); k];
    for (slot, &j) in order.iter().enumerate() {
        first_part[j] = points[best.1[slot]];
    }
    Ok(OracleResult {
        value: best.0,
        first_part,
        assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::Distortion;

    #[test]
    fn cells_of_a_profile() {
        let x = QuantileProfile::from_pieces([(0.5, 2.0), (0.25, 1.0), (0.25, 0.0)]).unwrap();
        assert_eq!(equiprobable_cells(&x, 4).unwrap(), vec![2.0, 2.0, 1.0, 0.0]);
        assert!(equiprobable_cells(&x, 3).is_err());
    }

    #[test]
    fn coherent_pair_gains_nothing() {
        let g = Distortion::avar(0.5).unwrap();
        let r = brute_force_infconv(&[0.0f64, 0.0, 0.0], [&g, &g], 0.5, 2.0).unwrap();
        assert!(r.value.abs() < 1e-12);
        // multisets of size 3 from 9 grid points
        assert_eq!(r.assignments, 165);
    }

    #[test]
    fn constant_position_with_coherent_measures() {
        let g = Distortion::var(0.25).unwrap();
        let h = Distortion::avar(0.5).unwrap();
        let r = brute_force_infconv(&[3.0f64, 3.0], [&h, &h], 1.0, 2.0).unwrap();
        assert!((r.value - 3.0).abs() < 1e-12);
        // V@R leaves room below the constant
        let r = brute_force_infconv(&[3.0, 3.0], [&g, &h], 1.0, 2.0).unwrap();
        assert!(r.value <= 3.0 + 1e-12);
    }

    #[test]
    fn size_guard() {
        let g = Distortion::avar(0.5).unwrap();
        assert!(matches!(
            brute_force_infconv(&[0.0; 8], [&g, &g], 0.01, 10.0),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn search_is_deterministic() {
        let g = Distortion::rvar(0.25, 0.75).unwrap();
        let a = brute_force_infconv(&[0.0; 4], [&g, &g], 1.0, 6.0).unwrap();
        let b = brute_force_infconv(&[0.0; 4], [&g, &g], 1.0, 6.0).unwrap();
        assert_eq!(a, b);
        assert!(a.value <= -1.0);
    }
}
