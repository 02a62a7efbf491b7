use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use riskshard::config::parse_measures;
use riskshard::io::{read_balance_sheet, read_scenarios, write_allocation};
use riskshard::sharing::{
    brute_force_infconv, build_escape_allocation, check_optimality_hypotheses, equiprobable_cells,
    escape_leader, optimal_value, run_strategy, upper_bound,
};
use riskshard::{
    choquet_eval, mixture_eval, network_report, solvency_check, Distortion, Distribution64,
    Measure, Measure64, NetworkReport, Prediction, Profile64, QuantileProfile, Regime, Strategy,
};

use crate::failure::Failure;
use crate::StrategyName;

/// Relative tolerance for every predicted-versus-realized comparison.
pub const TOLERANCE: f64 = 1e-9;

fn within(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOLERANCE * (1.0 + a.abs().max(b.abs()))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: riskshard::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

pub fn load_scenarios(path: &Path) -> Result<Distribution64, Failure> {
    let file =
        fs::File::open(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    with_path(path, read_scenarios(file))
}

pub fn load_measures(path: &Path) -> Result<Vec<Measure64>, Failure> {
    with_path(path, parse_measures(&read_text(path)?))
}

fn json<S: Serialize>(value: &S) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Prints the report and, with an output directory, also saves it there.
fn emit<S: Serialize>(report: &S, out: Option<&Path>, name: &str) -> Result<(), Failure> {
    let text = json(report);
    print!("{text}");
    if let Some(dir) = out {
        write_file(dir, name, text.as_bytes())?;
    }
    Ok(())
}

fn prediction_parts(p: &Prediction<f64>) -> (&'static str, Option<f64>) {
    match *p {
        Prediction::Exact(v) => ("exact", Some(v)),
        Prediction::UpperBound(v) => ("upper_bound", Some(v)),
        Prediction::Unavailable => ("none", None),
    }
}

/// The named strategy, or one picked from the measures: the comonotone
/// construction for distortions, the V@R-type collapse when structural
/// levels cover the unit interval, otherwise the naive split.
fn pick_strategy(
    name: Option<StrategyName>,
    m: Option<f64>,
    measures: &[Measure64],
) -> Result<(Strategy<f64>, &'static str), Failure> {
    let need_m = |m: Option<f64>| {
        m.filter(|v| v.is_finite())
            .ok_or_else(|| Failure::input("this strategy needs a finite --m"))
    };
    let Some(name) = name else {
        if measures.iter().all(|r| r.as_distortion().is_some()) {
            return Ok((Strategy::Main, "auto"));
        }
        let levels: Option<Vec<f64>> = measures
            .iter()
            .map(|r| r.structural_var_parameter())
            .collect();
        if levels.is_some_and(|l| l.iter().sum::<f64>() >= 1.0 - 1e-12) {
            return Ok((Strategy::VarType, "auto"));
        }
        return Ok((Strategy::Naive, "auto"));
    };
    let strategy = match name {
        StrategyName::Main => Strategy::Main,
        StrategyName::VarType => Strategy::VarType,
        StrategyName::Escape => Strategy::Escape { m: need_m(m)? },
        StrategyName::SurplusEscape => Strategy::SurplusEscape { m: need_m(m)? },
        StrategyName::Naive => Strategy::Naive,
    };
    Ok((strategy, "flag"))
}

#[derive(Serialize)]
struct EvalEntry {
    index: usize,
    measure: String,
    value: f64,
    /// Stieltjes integral of the decreasing rearrangement.
    mixture: Option<f64>,
    /// Choquet integral of the law.
    choquet: Option<f64>,
    dual_residual: Option<f64>,
    distortion: bool,
    proper: Option<bool>,
    var_type: bool,
    parameter: Option<f64>,
    concave_active_part: Option<bool>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct EvalReport {
    atoms: usize,
    essinf: f64,
    esssup: f64,
    mean: f64,
    measures: Vec<EvalEntry>,
}

pub fn eval(scenarios: &Path, measures: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let dist = load_scenarios(scenarios)?;
    let measures = load_measures(measures)?;
    let x = QuantileProfile::from_scenarios(&dist);
    let mut entries = Vec::with_capacity(measures.len());
    let mut broken = Vec::new();
    for (index, rho) in measures.iter().enumerate() {
        let value = rho.evaluate(&x)?;
        let mut warnings = Vec::new();
        let parameter = rho.structural_var_parameter();
        if let Some(alpha) = parameter {
            let cap = x.var_at(alpha)?;
            let beyond = dist.survival(cap);
            if beyond > 0.0 {
                warnings.push(format!(
                    "tail beyond V@R ignored: P(X > {cap}) = {beyond} at level {alpha}"
                ));
            }
        }
        let (mixture, choquet, residual, proper, concave, parameter) = match rho.as_distortion() {
            Some(g) => {
                let a = mixture_eval(g, &x);
                let b = choquet_eval(g, &dist);
                if !within(a, b) {
                    broken.push(format!(
                        "measure {}: evaluators disagree, {a} vs {b}",
                        index + 1
                    ));
                }
                let concave = g
                    .is_proper()
                    .then(|| g.is_concave_active_part())
                    .transpose()?;
                (
                    Some(a),
                    Some(b),
                    Some((a - b).abs()),
                    Some(g.is_proper()),
                    concave,
                    g.parameter().ok(),
                )
            }
            None => (None, None, None, None, None, parameter),
        };
        entries.push(EvalEntry {
            index: index + 1,
            measure: rho.label(),
            value,
            mixture,
            choquet,
            dual_residual: residual,
            distortion: rho.as_distortion().is_some(),
            proper,
            var_type: rho.structural_var_parameter().is_some(),
            parameter,
            concave_active_part: concave,
            warnings,
        });
    }
    for e in &entries {
        for w in &e.warnings {
            eprintln!("warning: measure {}: {w}", e.index);
        }
    }
    let report = EvalReport {
        atoms: dist.len(),
        essinf: dist.essinf(),
        esssup: dist.esssup(),
        mean: dist.mean(),
        measures: entries,
    };
    emit(&report, out, "eval.json")?;
    match broken.is_empty() {
        true => Ok(()),
        false => Err(Failure::invariant(broken.join("; "))),
    }
}

#[derive(Serialize)]
struct Check {
    check: String,
    outcome: String,
}

fn check(name: &str, outcome: impl Into<String>) -> Check {
    Check {
        check: name.to_string(),
        outcome: outcome.into(),
    }
}

fn hypothesis_checks(measures: &[Measure64]) -> (Vec<Check>, Option<Vec<Distortion<f64>>>) {
    let mut checks = Vec::new();
    let gs: Option<Vec<Distortion<f64>>> = measures
        .iter()
        .map(|r| r.as_distortion().cloned())
        .collect();
    let levels: Vec<String> = measures
        .iter()
        .map(|r| {
            r.structural_var_parameter()
                .map_or("none".to_string(), |a| a.to_string())
        })
        .collect();
    checks.push(check("V@R-type levels", levels.join(", ")));
    let Some(gs) = gs else {
        checks.push(check("distortion measures", "no"));
        return (checks, None);
    };
    checks.push(check("distortion measures", "yes"));
    if let Some(i) = gs.iter().position(|g| !g.is_proper()) {
        checks.push(check("proper", format!("distortion {i} is improper")));
        return (checks, Some(gs));
    }
    checks.push(check("proper", "yes"));
    let d: f64 = gs.iter().filter_map(|g| g.parameter().ok()).sum();
    checks.push(check("parameter sum d", d.to_string()));
    checks.push(check(
        "optimality hypotheses",
        match check_optimality_hypotheses(&gs) {
            Ok(_) => "hold".to_string(),
            Err(e) => e.to_string(),
        },
    ));
    checks.push(check(
        "unsaturated index",
        match escape_leader(&gs) {
            Ok((leader, slope)) => format!("entity {} with slope {slope}", leader + 1),
            Err(e) => e.to_string(),
        },
    ));
    (checks, Some(gs))
}

#[derive(Serialize)]
struct LinearCheck {
    m: f64,
    realized: f64,
    doubled_m: f64,
    doubled_realized: f64,
    slope: f64,
    expected_slope: f64,
    holds: bool,
}

#[derive(Serialize)]
struct AllocateReport {
    strategy: &'static str,
    strategy_source: &'static str,
    regime: Regime,
    regime_label: &'static str,
    part_risks: Vec<f64>,
    realized_total: f64,
    prediction: &'static str,
    predicted_total: Option<f64>,
    gap: Option<f64>,
    prediction_holds: bool,
    allocation_residual: f64,
    upper_bound: Option<f64>,
    optimal_value: Option<f64>,
    linear_check: Option<LinearCheck>,
    hypothesis_checks: Vec<Check>,
    notes: Vec<String>,
}

pub fn allocate(
    scenarios: &Path,
    measures: &Path,
    strategy: Option<StrategyName>,
    m: Option<f64>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let dist = load_scenarios(scenarios)?;
    let measures = load_measures(measures)?;
    let x: Profile64 = QuantileProfile::from_scenarios(&dist);
    let (strategy, source) = pick_strategy(strategy, m, &measures)?;
    let (checks, gs) = hypothesis_checks(&measures);
    let outcome = run_strategy(&x, &measures, strategy)?;

    let realized = outcome.realized_total();
    let (kind, predicted) = prediction_parts(&outcome.prediction);
    let holds = match outcome.prediction {
        Prediction::Exact(v) => within(realized, v),
        Prediction::UpperBound(v) => realized <= v + TOLERANCE * (1.0 + v.abs()),
        Prediction::Unavailable => true,
    };
    let proper = gs.as_ref().filter(|gs| gs.iter().all(|g| g.is_proper()));
    let linear_check = match (strategy, proper) {
        (Strategy::Escape { m }, Some(gs)) => {
            let (_, slope) = escape_leader(gs)?;
            let doubled = build_escape_allocation(&x, gs, 2.0 * m)?.realized_total();
            let measured = (doubled - realized) / m;
            Some(LinearCheck {
                m,
                realized,
                doubled_m: 2.0 * m,
                doubled_realized: doubled,
                slope: measured,
                expected_slope: slope,
                holds: within(doubled - realized, slope * m),
            })
        }
        _ => None,
    };
    let residual = outcome.allocation.residual()?;
    let report = AllocateReport {
        strategy: strategy.name(),
        strategy_source: source,
        regime: outcome.regime,
        regime_label: outcome.regime.label(),
        part_risks: outcome.part_risks.clone(),
        realized_total: realized,
        prediction: kind,
        predicted_total: predicted,
        gap: predicted.map(|p| realized - p),
        prediction_holds: holds,
        allocation_residual: residual,
        upper_bound: proper.map(|gs| upper_bound(&x, gs)).transpose()?,
        optimal_value: proper.and_then(|gs| optimal_value(&x, gs).ok()),
        linear_check,
        hypothesis_checks: checks,
        notes: outcome.notes.clone(),
    };

    let dir = out.unwrap_or(Path::new("."));
    let mut csv = Vec::new();
    write_allocation(&outcome.allocation, &mut csv)?;
    write_file(dir, "allocation.csv", &csv)?;
    emit(&report, Some(dir), "report.json")?;

    let mut broken = Vec::new();
    if !holds {
        broken.push(format!(
            "realized total {realized} misses the {kind} prediction {predicted:?}"
        ));
    }
    if report.linear_check.as_ref().is_some_and(|c| !c.holds) {
        broken.push("escape total is not affine in m".to_string());
    }
    if residual > TOLERANCE * (1.0 + x.essinf().abs().max(x.esssup().abs())) {
        broken.push(format!("parts miss X by {residual}"));
    }
    match broken.is_empty() {
        true => Ok(()),
        false => Err(Failure::invariant(broken.join("; "))),
    }
}

#[derive(Serialize)]
struct StandaloneEntry {
    measure: String,
    #[serde(flatten)]
    check: riskshard::regulator::SolvencyCheck,
}

#[derive(Serialize)]
struct ScrReport {
    e0: f64,
    ruin_probability: f64,
    standalone: Vec<StandaloneEntry>,
    network: Option<NetworkReport>,
}

pub fn scr(
    balance_sheet: &Path,
    measures: &Path,
    strategy: Option<StrategyName>,
    m: Option<f64>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let file = fs::File::open(balance_sheet)
        .map_err(|e| Failure::input(format!("{}: {e}", balance_sheet.display())))?;
    let bs = with_path(balance_sheet, read_balance_sheet(file))?;
    let measures = load_measures(measures)?;
    let standalone = measures
        .iter()
        .map(|rho| {
            Ok(StandaloneEntry {
                measure: rho.label(),
                check: solvency_check(&bs, rho)?,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let network = if measures.len() > 1 || strategy.is_some() {
        let (strategy, _) = pick_strategy(strategy, m, &measures)?;
        Some(network_report(&bs, &measures, strategy, 0)?.0)
    } else {
        None
    };
    let report = ScrReport {
        e0: bs.e0(),
        ruin_probability: bs.ruin_probability(),
        standalone,
        network,
    };
    emit(&report, out, "scr.json")?;
    if let (Some(dir), Some(net)) = (out, &report.network) {
        write_file(dir, "network.csv", net.csv().as_bytes())?;
    }

    let mut broken = Vec::new();
    for (i, e) in report.standalone.iter().enumerate() {
        if e.check.predicates_agree == Some(false) && !e.check.at_boundary {
            broken.push(format!(
                "measure {}: SCR test and ruin probability test disagree",
                i + 1
            ));
        }
    }
    if report.network.as_ref().is_some_and(|n| !n.prediction_holds) {
        broken.push("network total misses its prediction".to_string());
    }
    match broken.is_empty() {
        true => Ok(()),
        false => Err(Failure::invariant(broken.join("; "))),
    }
}

#[derive(Serialize)]
struct OracleReport {
    cells: Vec<f64>,
    grid: f64,
    bound: f64,
    assignments: u64,
    minimum: f64,
    first_part: Vec<f64>,
    upper_bound: Option<f64>,
    optimal_value: Option<f64>,
    /// Oracle minimum minus the closed-form bound.
    gap: Option<f64>,
    gap_sign: Option<&'static str>,
    notes: Vec<String>,
}

fn default_cells(x: &Profile64) -> Option<usize> {
    (1..=64)
        .find(|&k| equiprobable_cells(x, k).is_ok())
        .map(|k| k * 4usize.div_ceil(k))
}

pub fn oracle(
    scenarios: &Path,
    measures: &Path,
    grid: f64,
    bound: f64,
    cells: Option<usize>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let dist = load_scenarios(scenarios)?;
    let measures = load_measures(measures)?;
    let [first, second] = measures.as_slice() else {
        return Err(Failure::input(format!(
            "the oracle needs exactly 2 measures, got {}",
            measures.len()
        )));
    };
    let x = QuantileProfile::from_scenarios(&dist);
    let k = match cells {
        Some(0) => return Err(Failure::input("--cells must be positive")),
        Some(k) => k,
        None => default_cells(&x)
            .ok_or_else(|| Failure::input("probabilities are not multiples of 1/k for k <= 64"))?,
    };
    let values = equiprobable_cells(&x, k)?;
    let result = brute_force_infconv(&values, [first, second], grid, bound)?;

    let gs: Option<Vec<Distortion<f64>>> = measures
        .iter()
        .map(|r| r.as_distortion().cloned())
        .collect();
    let gs = gs.filter(|gs| gs.iter().all(|g| g.is_proper()));
    let mut notes = Vec::new();
    let closed = gs.as_ref().map(|gs| upper_bound(&x, gs)).transpose()?;
    let optimal = match &gs {
        Some(gs) => match optimal_value(&x, gs) {
            Ok(v) => Some(v),
            Err(e) => {
                notes.push(format!("no optimal value: {e}"));
                None
            }
        },
        None => {
            notes.push("closed forms need proper distortion measures".to_string());
            None
        }
    };
    let gap = closed.map(|c| result.value - c);
    let gap_sign = gap.map(|g| match g {
        g if g.abs() <= TOLERANCE * (1.0 + result.value.abs()) => "zero",
        g if g < 0.0 => "negative",
        _ => "positive",
    });
    let report = OracleReport {
        cells: values,
        grid,
        bound,
        assignments: result.assignments,
        minimum: result.value,
        first_part: result.first_part,
        upper_bound: closed,
        optimal_value: optimal,
        gap,
        gap_sign,
        notes,
    };
    emit(&report, out, "oracle.json")?;
    match optimal {
        Some(opt) if result.value < opt - TOLERANCE * (1.0 + opt.abs()) => {
            Err(Failure::invariant(format!(
                "oracle minimum {} lies below the optimal value {opt}",
                result.value
            )))
        }
        _ => Ok(()),
    }
}
