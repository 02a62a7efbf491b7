mod common;

use riskshard::sharing::{build_escape_allocation, build_main_allocation};
use riskshard::{
    choquet_eval, mixture_eval, Distortion, Measure, QuantileProfile, Rational, RiskMeasure, Scalar,
};

fn quarters<T: Scalar>() -> QuantileProfile<T> {
    let w = T::ratio(1, 4);
    QuantileProfile::from_pieces([
        (w, T::ratio(0, 1)),
        (w, T::ratio(3, 1)),
        (w, T::ratio(1, 1)),
        (w, T::ratio(2, 1)),
    ])
    .unwrap()
}

fn rvar_pair<T: Scalar>() -> Vec<Distortion<T>> {
    let g = Distortion::rvar(T::ratio(1, 10), T::ratio(1, 2)).unwrap();
    vec![g.clone(), g]
}

#[test]
fn same_construction_on_three_scalars() {
    let exact = build_main_allocation(&quarters::<Rational>(), &rvar_pair()).unwrap();
    let wide = build_main_allocation(&quarters::<f64>(), &rvar_pair()).unwrap();
    let narrow = build_main_allocation(&quarters::<f32>(), &rvar_pair()).unwrap();
    let reference = exact.realized_total().to_f64_lossy();
    assert!((wide.realized_total() - reference).abs() <= 1e-12);
    assert!((narrow.realized_total() as f64 - reference).abs() <= 1e-5);
    assert!(wide.prediction_holds(f64::check_tolerance()));
    assert!(narrow.prediction_holds(f32::check_tolerance()));
    assert!(exact.prediction_holds(Rational::check_tolerance()));
}

#[test]
fn escape_slope_is_exact_on_rationals() {
    let g = Distortion::rvar(Rational::new(1, 4), Rational::new(3, 4)).unwrap();
    let gs = [g.clone(), g];
    let x = QuantileProfile::constant(Rational::from_integer(0));
    let totals: Vec<Rational> = [1, 2, 3]
        .iter()
        .map(|&m| {
            build_escape_allocation(&x, &gs, Rational::from_integer(m))
                .unwrap()
                .realized_total()
        })
        .collect();
    assert_eq!(totals[1] - totals[0], Rational::new(-1, 3));
    assert_eq!(totals[2] - totals[1], Rational::new(-1, 3));
}

#[test]
fn f32_evaluators_agree_with_f64() {
    let mut rng = common::rng(11);
    for _ in 0..100 {
        let x = common::profile(&mut rng, 6);
        let g = common::distortion(&mut rng, None);
        let wide = mixture_eval(&g, &x);
        let narrow_g = Distortion::from_segments(
            g.segments()
                .iter()
                .map(|s| riskshard::Segment {
                    x0: s.x0 as f32,
                    x1: s.x1 as f32,
                    start: s.start as f32,
                    end: s.end as f32,
                })
                .collect(),
        )
        .unwrap();
        let narrow_x =
            QuantileProfile::from_pieces(x.pieces().map(|(l, r, v)| ((r - l) as f32, v as f32)))
                .unwrap();
        let a = mixture_eval(&narrow_g, &narrow_x);
        let b = choquet_eval(&narrow_g, &narrow_x.distribution());
        assert!((a - b).abs() <= 1e-3, "{a} vs {b}");
        assert!(
            (a as f64 - wide).abs() <= 1e-3 * (1.0 + wide.abs()),
            "{a} vs {wide}"
        );
    }
}

#[test]
fn entropic_and_expectile_run_in_f32() {
    let x = quarters::<f32>();
    let ent = RiskMeasure::<f32>::Entropic.evaluate(&x).unwrap();
    let want = ((1.0f64 + 1f64.exp() + 2f64.exp() + 3f64.exp()) / 4.0).ln();
    assert!((ent as f64 - want).abs() < 1e-5);
    let half = RiskMeasure::<f32>::expectile(1.0)
        .unwrap()
        .evaluate(&x)
        .unwrap();
    assert!((half - 1.5).abs() < 1e-5);
}
