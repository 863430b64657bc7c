mod common;

use proptest::prelude::*;
use sharpwave::analysis::intersection_count;
use sharpwave::solver::{
    default_start, run_cauchy, solve_periodic_stationary_with, Boundary, Direction, Field, Grid1D,
    Integrator, SolverConfig, Trajectory,
};
use sharpwave::ProblemSpec;

fn grid() -> Grid1D {
    Grid1D::new(-4.0, 1.0 / 8.0, 64).unwrap()
}

fn bumps(g: Grid1D, spec: &[(f64, f64, f64)]) -> Vec<f64> {
    (0..g.n_cells)
        .map(|i| {
            spec.iter()
                .map(|&(c, w, a)| a * (1.0 - ((g.x(i) - c) / w).powi(2)).max(0.0))
                .sum()
        })
        .collect()
}

fn bump() -> impl Strategy<Value = (f64, f64, f64)> {
    (-1.0..1.0f64, 0.2..0.6f64, 0.1..1.2f64)
}

/// Both solutions on the same fixed step so that snapshots line up.
fn pair(spec: &ProblemSpec, a: Vec<f64>, b: Vec<f64>) -> (Trajectory, Trajectory) {
    let (fa, fb) = (Field::new(grid(), a, 0.0), Field::new(grid(), b, 0.0));
    let dt = 0.5
        * Integrator::new(spec, fa.clone(), 0.45, Boundary::ZERO)
            .stable_dt()
            .min(Integrator::new(spec, fb.clone(), 0.45, Boundary::ZERO).stable_dt());
    let cfg = SolverConfig {
        t_end: 0.3,
        snapshot_every: Some(0.05),
        dt_fixed: Some(dt),
        ..Default::default()
    };
    let ra = run_cauchy(spec, fa, &cfg, Boundary::ZERO).unwrap();
    let rb = run_cauchy(spec, fb, &cfg, Boundary::ZERO).unwrap();
    (ra.trajectory, rb.trajectory)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ordered_data_stays_ordered(lo in prop::collection::vec(bump(), 1..3), extra in prop::collection::vec(bump(), 1..3)) {
        let spec = common::demo("hetbi");
        let a = bumps(grid(), &lo);
        let b: Vec<f64> = a.iter().zip(bumps(grid(), &extra)).map(|(x, y)| x + 0.3 * y).collect();
        let (ta, tb) = pair(&spec, a, b);
        for (fa, fb) in ta.snapshots.iter().zip(&tb.snapshots) {
            let excess = fa.u.iter().zip(&fb.u).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(excess <= 1e-8, "t = {}: excess {excess:e}", fa.t);
        }
    }

    #[test]
    fn intersections_never_increase(a in prop::collection::vec(bump(), 1..4), b in prop::collection::vec(bump(), 1..4)) {
        let spec = common::demo("hetbi");
        let (ta, tb) = pair(&spec, bumps(grid(), &a), bumps(grid(), &b));
        let n = grid().n_cells;
        let counts: Vec<usize> = ta.snapshots.iter().zip(&tb.snapshots)
            .map(|(fa, fb)| intersection_count(fa, fb, 0, n - 1, spec.kappa_hi()))
            .collect();
        prop_assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
    }

    #[test]
    fn runs_are_bitwise_reproducible(a in prop::collection::vec(bump(), 1..3)) {
        let spec = common::demo("hetmono");
        let u = bumps(grid(), &a);
        let (t1, t2) = pair(&spec, u.clone(), u);
        for (f1, f2) in t1.snapshots.iter().zip(&t2.snapshots) {
            prop_assert!(f1.u.iter().zip(&f2.u).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn solutions_stay_between_zero_and_kappa(a in prop::collection::vec(bump(), 1..3)) {
        let spec = common::demo("hetmono");
        let u: Vec<f64> = bumps(grid(), &a).iter().map(|x| x.min(spec.kappa_hi())).collect();
        let (t, _) = pair(&spec, u.clone(), u);
        for f in &t.snapshots {
            prop_assert!(f.min() >= 0.0);
            prop_assert!(f.max() <= spec.kappa_hi() * (1.0 + 1e-9));
        }
    }
}

#[test]
fn bistable_stationary_state_is_unique() {
    let spec = common::demo("hetbi");
    let solve =
        |d| solve_periodic_stationary_with(&spec, default_start(&spec, d), d, 16, 1e-11).unwrap();
    let (lo, hi) = (solve(Direction::FromBelow), solve(Direction::FromAbove));
    let gap =
        lo.p.iter()
            .zip(&hi.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    assert!(gap < 1e-6, "gap {gap:e}");
}
