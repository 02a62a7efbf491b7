//! Invariant suite on built-in fixtures. Random fixtures come from the seed,
//! so a run is reproducible from its report.

use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use riskshard::measures::surplus_profile;
use riskshard::sharing::{
    brute_force_infconv, build_escape_allocation, build_main_allocation, offsetting_pair,
    upper_bound,
};
use riskshard::{
    choquet_eval, mixture_eval, scr, BalanceSheet, DiscreteDistribution, Distortion, Profile64,
    QuantileProfile, RiskMeasure, Segment,
};

use crate::failure::Failure;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: riskshard::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn quarters() -> Result<Profile64, String> {
    lib(QuantileProfile::from_pieces([
        (0.25, 0.0),
        (0.25, 3.0),
        (0.25, 1.0),
        (0.25, 2.0),
    ]))
}

fn offsetting_pair_on_zero() -> Outcome {
    let g = lib(Distortion::<f64>::rvar(0.25, 0.75))?;
    let zero = QuantileProfile::constant(0.0);
    for m in [1.0, 5.0, 40.0] {
        let risks =
            lib(lib(offsetting_pair(&zero, 0.125, 6.0 * m))?.risks(&[g.clone(), g.clone()]))?;
        ensure(
            risks[0].abs() <= 1e-12 && (risks[1] + m).abs() <= 1e-12,
            || format!("m = {m}: risks {risks:?}"),
        )?;
    }
    let oracle = lib(brute_force_infconv(&[0.0; 4], [&g, &g], 0.25, 6.0))?;
    ensure(oracle.value <= -1.0, || {
        format!("oracle minimum {}", oracle.value)
    })?;
    Ok(format!(
        "risks (0, -m) for m = 1, 5, 40; oracle minimum {}",
        oracle.value
    ))
}

fn coherent_pair_on_zero() -> Outcome {
    let g = lib(Distortion::<f64>::avar(0.5))?;
    let oracle = lib(brute_force_infconv(&[0.0; 4], [&g, &g], 0.5, 2.0))?;
    ensure(oracle.value.abs() <= 1e-12, || {
        format!("oracle minimum {}", oracle.value)
    })?;
    Ok("oracle minimum 0".into())
}

fn var_tranches() -> Outcome {
    let g = lib(Distortion::var(0.5))?;
    let out = lib(build_main_allocation(&quarters()?, &[g.clone(), g]))?;
    ensure(out.realized_total().abs() <= 1e-12, || {
        format!("total {}", out.realized_total())
    })?;
    Ok("two V@R(0.5) on {0, 1, 2, 3}: total 0 = essinf X".into())
}

fn escape_slope() -> Outcome {
    let g = lib(Distortion::rvar(0.25, 0.75))?;
    let gs = [g.clone(), g];
    let x = quarters()?;
    let totals = [1.0, 2.0, 3.0]
        .iter()
        .map(|&m| lib(build_escape_allocation(&x, &gs, m)).map(|o| o.realized_total()))
        .collect::<Result<Vec<_>, _>>()?;
    for w in totals.windows(2) {
        ensure(close(w[1] - w[0], -1.0 / 3.0, 1e-9), || {
            format!("totals {totals:?}")
        })?;
    }
    Ok(format!("slope -1/3, total at m = 1 is {}", totals[0]))
}

fn entropic_witness() -> Outcome {
    let x = QuantileProfile::from_scenarios(&lib(DiscreteDistribution::new([
        (0.0, 0.9),
        (10f64.ln(), 0.1),
    ]))?);
    let h = lib(surplus_profile(
        &RiskMeasure::Entropic,
        &x,
        0.2,
        &[0.0, 1.0, 5.0, 20.0],
    ))?;
    for &(m, v) in &h {
        let expected = (1.0 + 0.9 * (-m).exp()).ln();
        ensure((v - expected).abs() <= 1e-10 && v >= 0.0, || {
            format!("h({m}) = {v}, expected {expected}")
        })?;
    }
    Ok(format!("h(m) = ln(1 + 0.9 e^-m), h(20) = {:.3e}", h[3].1))
}

fn random_profile(rng: &mut impl Rng) -> Result<Profile64, String> {
    let k = rng.gen_range(1..=12);
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    lib(QuantileProfile::from_pieces(
        weights
            .iter()
            .map(|w| (w / total, rng.gen_range(-10.0..10.0))),
    ))
}

fn random_distortion(rng: &mut impl Rng) -> Result<Distortion<f64>, String> {
    let alpha: f64 = rng.gen_range(0.0..0.5);
    lib(match rng.gen_range(0..4) {
        0 => Distortion::var(alpha.max(0.01)),
        1 => Distortion::avar(rng.gen_range(0.05..1.0)),
        2 => Distortion::rvar(alpha, rng.gen_range(0.05..(1.0 - alpha))),
        _ => {
            // zero up to alpha, a jump, a rise to a knot, then up to 1
            let mid = rng.gen_range(alpha + 0.01..0.99);
            let jump = rng.gen_range(0.0..0.5);
            let knot = rng.gen_range(jump..1.0);
            let mut segments = Vec::new();
            if alpha > 0.0 {
                segments.push(Segment {
                    x0: 0.0,
                    x1: alpha,
                    start: 0.0,
                    end: 0.0,
                });
            }
            segments.push(Segment {
                x0: alpha,
                x1: mid,
                start: jump,
                end: knot,
            });
            segments.push(Segment {
                x0: mid,
                x1: 1.0,
                start: knot,
                end: 1.0,
            });
            Distortion::from_segments(segments)
        }
    })
}

fn dual_evaluators(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let g = random_distortion(rng)?;
        let x = random_profile(rng)?;
        let (a, b) = (mixture_eval(&g, &x), choquet_eval(&g, &x.distribution()));
        worst = worst.max((a - b).abs());
        ensure(close(a, b, 1e-10), || {
            format!("trial {trial}: mixture {a}, Choquet {b}")
        })?;
    }
    Ok(format!("200 pairs, worst gap {worst:.1e}"))
}

fn main_allocation_totals(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let x = random_profile(rng)?;
        let n = rng.gen_range(1..=3);
        let gs = (0..n)
            .map(|_| random_distortion(rng))
            .collect::<Result<Vec<_>, _>>()?;
        let out = lib(build_main_allocation(&x, &gs))?;
        let predicted = out.prediction.value().unwrap_or(f64::NAN);
        let bound = lib(upper_bound(&x, &gs))?;
        let gap = (out.realized_total() - predicted)
            .abs()
            .max((bound - predicted).abs());
        worst = worst.max(gap);
        ensure(gap <= 1e-9 * (1.0 + predicted.abs()), || {
            format!(
                "trial {trial}: realized {}, predicted {predicted}, bound {bound}",
                out.realized_total()
            )
        })?;
    }
    Ok(format!("100 networks, worst gap {worst:.1e}"))
}

fn scr_fixture() -> Outcome {
    let e1 = lib(DiscreteDistribution::new([(-50.0, 0.004), (12.0, 0.996)]))?;
    let bs = lib(BalanceSheet::new(110.0, 100.0, e1))?;
    let var = lib(scr(&bs, &lib(Distortion::var(0.005))?))?;
    let avar = lib(scr(&bs, &lib(Distortion::avar(0.005))?))?;
    ensure(close(var, -2.0, 1e-12) && close(avar, 47.6, 1e-12), || {
        format!("V@R SCR {var}, AV@R SCR {avar}")
    })?;
    Ok(format!("V@R SCR {var}, AV@R SCR {avar}"))
}

#[derive(Serialize)]
struct Entry {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct Report {
    seed: u64,
    passed: usize,
    failed: usize,
    checks: Vec<Entry>,
}

pub fn run(seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let results: Vec<(&'static str, Outcome)> = vec![
        ("offsetting pair on X = 0", offsetting_pair_on_zero()),
        ("coherent pair on X = 0", coherent_pair_on_zero()),
        ("V@R tranches reach essinf", var_tranches()),
        ("escape total is affine in m", escape_slope()),
        ("entropic surplus witness", entropic_witness()),
        (
            "mixture and Choquet evaluators agree",
            dual_evaluators(&mut rng),
        ),
        (
            "comonotone-transfer totals",
            main_allocation_totals(&mut rng),
        ),
        ("SCR fixture", scr_fixture()),
    ];
    let checks: Vec<Entry> = results
        .into_iter()
        .map(|(name, r)| match r {
            Ok(detail) => Entry {
                name,
                passed: true,
                detail,
            },
            Err(detail) => Entry {
                name,
                passed: false,
                detail,
            },
        })
        .collect();
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        eprintln!(
            "{} {}: {}",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let report = Report {
        seed,
        passed: checks.len() - failed,
        failed,
        checks,
    };
    let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    print!("{text}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
        std::fs::write(dir.join("selftest.json"), text)
            .map_err(|e| Failure::input(e.to_string()))?;
    }
    match failed {
        0 => Ok(()),
        n => Err(Failure::invariant(format!("{n} selftest checks failed"))),
    }
}
