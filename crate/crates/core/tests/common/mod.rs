#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riskshard::{Distortion, QuantileProfile, Segment};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An unsorted step profile with up to `max_pieces` pieces and occasional ties.
pub fn profile(rng: &mut impl Rng, max_pieces: usize) -> QuantileProfile<f64> {
    let k = rng.gen_range(1..=max_pieces);
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut values: Vec<f64> = Vec::with_capacity(k);
    for _ in 0..k {
        let v = if !values.is_empty() && rng.gen_bool(0.15) {
            values[rng.gen_range(0..values.len())]
        } else {
            rng.gen_range(-10.0..10.0)
        };
        values.push(v);
    }
    QuantileProfile::from_pieces(weights.iter().map(|w| w / total).zip(values)).unwrap()
}

/// `k` equiprobable cells with values on a quarter grid in `[lo, hi]`.
pub fn cells(rng: &mut impl Rng, k: usize, lo: i32, hi: i32) -> Vec<f64> {
    (0..k)
        .map(|_| rng.gen_range(lo * 4..=hi * 4) as f64 / 4.0)
        .collect()
}

pub fn cells_profile(cells: &[f64]) -> QuantileProfile<f64> {
    let w = 1.0 / cells.len() as f64;
    QuantileProfile::from_pieces(cells.iter().map(|&v| (w, v))).unwrap()
}

/// A proper distortion: zero up to `alpha`, then random jumps, slopes and
/// flats. `alpha = None` draws it, sometimes 0.
pub fn distortion(rng: &mut impl Rng, alpha: Option<f64>) -> Distortion<f64> {
    let alpha = alpha.unwrap_or_else(|| {
        if rng.gen_bool(0.3) {
            0.0
        } else {
            rng.gen_range(0.0..0.6)
        }
    });
    match rng.gen_range(0..6) {
        0 if alpha > 0.0 => return Distortion::var(alpha).unwrap(),
        1 if alpha == 0.0 => return Distortion::avar(rng.gen_range(0.05..1.0)).unwrap(),
        2 if alpha > 0.0 && alpha < 0.95 => {
            return Distortion::rvar(alpha, rng.gen_range(0.01..(1.0 - alpha))).unwrap()
        }
        _ => {}
    }
    let pieces = rng.gen_range(1..=4);
    let mut knots: Vec<f64> = (1..pieces).map(|_| rng.gen_range(alpha..1.0)).collect();
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup_by(|b, a| *b - *a < 1e-3);
    knots.retain(|&k| k - alpha > 1e-3 && 1.0 - k > 1e-3);
    let mut xs = vec![alpha];
    xs.extend(knots);
    xs.push(1.0);
    let steps: Vec<(f64, f64)> = (0..xs.len() - 1)
        .map(|_| {
            let jump = if rng.gen_bool(0.3) {
                rng.gen::<f64>()
            } else {
                0.0
            };
            let rise = if rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen::<f64>()
            };
            (jump, rise)
        })
        .collect();
    let mut total: f64 = steps.iter().map(|(j, r)| j + r).sum();
    let mut steps = steps;
    if total == 0.0 {
        steps[0].1 = 1.0;
        total = 1.0;
    }
    let mut segments = Vec::new();
    if alpha > 0.0 {
        segments.push(Segment {
            x0: 0.0,
            x1: alpha,
            start: 0.0,
            end: 0.0,
        });
    }
    let mut level = 0.0;
    for (i, w) in xs.windows(2).enumerate() {
        let start = level + steps[i].0 / total;
        let end = if i == xs.len() - 2 {
            1.0
        } else {
            start + steps[i].1 / total
        };
        segments.push(Segment {
            x0: w[0],
            x1: w[1],
            start,
            end,
        });
        level = end;
    }
    Distortion::from_segments(segments).unwrap()
}

/// A V@R-type distortion with parameter in `[0.02, max_alpha)`.
pub fn var_type_distortion(rng: &mut impl Rng, max_alpha: f64) -> Distortion<f64> {
    let alpha = rng.gen_range(0.02..max_alpha);
    distortion(rng, Some(alpha))
}

/// A nonincreasing profile: comonotone with every other nonincreasing one.
pub fn decreasing_profile(rng: &mut impl Rng, max_pieces: usize) -> QuantileProfile<f64> {
    profile(rng, max_pieces).decreasing()
}
