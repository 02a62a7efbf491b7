mod common;

use rand::Rng;
use riskshard::measures::Measure;
use riskshard::sharing::Allocation;
use riskshard::{
    network_report, BalanceSheet, DiscreteDistribution, Distortion, QuantileProfile, RiskMeasure,
    Strategy,
};

fn sheet(rng: &mut impl Rng) -> BalanceSheet<f64> {
    let k = rng.gen_range(2..=6);
    let atoms: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.gen_range(-60.0..20.0), rng.gen_range(0.05..1.0)))
        .collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let e1 = DiscreteDistribution::new(atoms.into_iter().map(|(v, p)| (v, p / total))).unwrap();
    BalanceSheet::new(110.0, 100.0, e1).unwrap()
}

#[test]
fn coherent_entities_never_beat_the_consolidated_scr() {
    let mut rng = common::rng(5);
    let rho = Distortion::avar(0.1).unwrap();
    for _ in 0..200 {
        let bs = sheet(&mut rng);
        let x = bs.position();
        // random split on a refinement of the latent coordinate
        let n = rng.gen_range(2..=4);
        let k = 8;
        let mut parts = Vec::new();
        let mut used = QuantileProfile::constant(0.0);
        for _ in 0..n - 1 {
            let noise = QuantileProfile::from_pieces(
                (0..k).map(|_| (1.0 / k as f64, rng.gen_range(-30.0..30.0))),
            )
            .unwrap();
            used = used.add(&noise);
            parts.push(noise);
        }
        parts.push(x.add(&used.scale(-1.0)));
        let alloc = Allocation::new(parts, x.clone()).unwrap();
        let total: f64 = alloc.risks(&vec![rho.clone(); n]).unwrap().iter().sum();
        assert!(total >= rho.evaluate(&x).unwrap() - 1e-9);
    }
}

#[test]
fn naive_split_reproduces_the_consolidated_scr() {
    let mut rng = common::rng(6);
    let measures = vec![RiskMeasure::Distortion(Distortion::avar(0.05).unwrap()); 3];
    for _ in 0..50 {
        let bs = sheet(&mut rng);
        let (report, _) = network_report(&bs, &measures, Strategy::Naive, 0).unwrap();
        assert!((report.total_scr - report.consolidated_scr).abs() < 1e-9);
    }
}

#[test]
fn var_network_sits_at_the_best_case() {
    let mut rng = common::rng(7);
    let measures = vec![RiskMeasure::Distortion(Distortion::var(0.5).unwrap()); 2];
    for _ in 0..50 {
        let bs = sheet(&mut rng);
        let (report, outcome) = network_report(&bs, &measures, Strategy::Main, 0).unwrap();
        assert!((report.total_scr - report.best_case).abs() < 1e-9);
        assert!(report.total_scr <= report.consolidated_scr + 1e-9);
        assert!(outcome.prediction_holds(1e-9));
        assert_eq!(report.entities.len(), 2);
        assert!(report.csv().lines().count() == 5);
    }
}
