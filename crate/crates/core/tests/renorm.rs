mod common;

use sharpwave::renorm::{left_limit, time_monotonicity, verify_periodicity};
use sharpwave::waves::{find_sharp_speed, TwProblem};

const CELLS: usize = 16;

#[test]
fn logistic_wave_runs_at_the_sharp_speed() {
    let spec = common::demo("logistic");
    let b = common::wave(&spec, CELLS);
    let tw = TwProblem::from_spec(&spec);
    let sharp = find_sharp_speed(&tw).unwrap().c;
    let w = &b.wave;
    assert!(
        (w.c_star / sharp - 1.0).abs() < 0.02,
        "c* {} vs {sharp}",
        w.c_star
    );
    assert!((w.t_period * w.c_star - w.period).abs() < 1e-9);
    let from = w.crossings.n[w.crossings.n.len() / 2];
    let slope = w.crossings.regression_speed(from).unwrap();
    assert!(
        (slope / w.c_star - 1.0).abs() < 0.005,
        "regression {slope} vs {}",
        w.c_star
    );
}

#[test]
fn logistic_tail_rate_matches_the_saddle() {
    let spec = common::demo("logistic");
    let b = common::wave(&spec, CELLS);
    let tail = left_limit(&spec, &b.wave, &b.p0, 3).unwrap();
    let rate = TwProblem::from_spec(&spec).tail_rate(b.wave.c_star);
    assert!(tail.fit.r2 >= 0.98);
    assert!(
        (tail.fit.delta / rate - 1.0).abs() < 0.05,
        "delta* {} vs {rate}",
        tail.fit.delta
    );
}

#[test]
fn heterogeneous_wave_is_periodic_and_increasing() {
    for name in ["hetmono", "hetbi"] {
        let spec = common::demo(name);
        let b = common::wave(&spec, CELLS);
        let w = &b.wave;
        assert!(verify_periodicity(w) < 5e-3, "{name}");
        assert!(w.delta_meas > 0.0, "{name}: min R' {}", w.delta_meas);
        let first: Vec<f64> = w
            .r_t
            .iter()
            .zip(&w.rprime)
            .filter(|p| *p.0 <= w.t_period)
            .map(|p| *p.1)
            .collect();
        assert!(!first.is_empty() && first.iter().all(|&r| r >= w.delta_meas));
        let (_, bad, total) = time_monotonicity(w, 1e-12 * spec.kappa_hi());
        assert!(total > 0 && bad == 0, "{name}: {bad} of {total}");
    }
}

#[test]
fn mirrored_bistable_wave_has_its_own_speed() {
    let spec = common::demo("hetbi");
    let right = common::wave(&spec, CELLS);
    let left = common::wave(&spec.mirrored().unwrap(), CELLS);
    // Both fronts invade the same periodic state, so the speeds are close but
    // the profiles are reflections only when the medium is symmetric.
    assert!((right.wave.c_star / left.wave.c_star - 1.0).abs() < 0.05);
    assert!(left.wave.delta_meas > 0.0);
}

#[test]
fn homogeneous_bistable_tail_rate_matches_the_saddle() {
    let mut doc: serde_json::Value =
        serde_json::from_str(sharpwave::demos::get("hetbi").unwrap()).unwrap();
    doc["reaction"]["f"] = "u*(u-0.2)".into();
    doc["reaction"]["kappa"] = "1".into();
    let spec = sharpwave::model::config::spec_from_json(&doc).unwrap();
    let b = common::wave(&spec, CELLS);
    let tail = left_limit(&spec, &b.wave, &b.p0, 3).unwrap();
    let rate = TwProblem::from_spec(&spec).tail_rate(b.wave.c_star);
    assert!(tail.min_gap > 0.0);
    assert!(
        (tail.fit.delta / rate - 1.0).abs() < 0.05,
        "delta* {} vs {rate}",
        tail.fit.delta
    );
}
