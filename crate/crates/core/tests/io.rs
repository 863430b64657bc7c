mod common;

use sharpwave::analysis::{run_spreading, SpreadOptions};
use sharpwave::io::{load_spreading, load_wave, save_spreading, save_wave};

fn same(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()))
}

#[test]
fn wave_round_trip_is_exact() {
    let spec = common::demo("logistic");
    let b = common::wave(&spec, 16);
    let dir = tempfile::tempdir().unwrap();
    let hash = spec.hash(16);
    save_wave(dir.path(), &b.wave, &hash).unwrap();
    let (h, w) = load_wave(dir.path()).unwrap();
    assert_eq!(h, hash);
    assert_eq!(w.c_star.to_bits(), b.wave.c_star.to_bits());
    assert_eq!(w.t_period.to_bits(), b.wave.t_period.to_bits());
    assert_eq!(w.delta_meas.to_bits(), b.wave.delta_meas.to_bits());
    assert!(same(&w.times, &b.wave.times));
    assert!(same(&w.r, &b.wave.r));
    assert_eq!(w.v.len(), b.wave.v.len());
    assert!(w.v.iter().zip(&b.wave.v).all(|(x, y)| same(x, y)));
    for (x, t) in [(-2.0, 0.3), (-0.25, 0.9), (0.1, 0.5)] {
        assert_eq!(w.eval(x, t), b.wave.eval(x, t));
    }
}

#[test]
fn spreading_round_trip_keeps_the_support() {
    let spec = common::demo("hetbi");
    let p0 = common::p0(&spec, 8);
    let opts = SpreadOptions {
        t_end: 1.0,
        snapshot_every: 0.25,
        ..SpreadOptions::for_spec(&spec, 1.0, 0.5).unwrap()
    };
    let sr = run_spreading(&spec, &p0, &opts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_spreading(dir.path(), &spec, &sr, &spec.hash(8), serde_json::json!({})).unwrap();
    let (h, back) = load_spreading(dir.path()).unwrap();
    assert_eq!(h, spec.hash(8));
    assert_eq!(back.verdict, sr.verdict);
    assert_eq!(back.cells_per_period, 8);
    let (a, b) = (&sr.run.trajectory.snapshots, &back.run.trajectory.snapshots);
    assert_eq!(a.len(), b.len());
    for (fa, fb) in a.iter().zip(b) {
        assert_eq!(fa.t.to_bits(), fb.t.to_bits());
        assert!(same(&fa.u, &fb.u));
    }
    assert!(same(&sr.run.trace.r, &back.run.trace.r));
    assert!(same(&sr.run.trace.l, &back.run.trace.l));
}
