#![allow(dead_code)]

use sharpwave::demos;
use sharpwave::renorm::{build_wave, ExtractOptions, HeavisideRun, RenormConfig, WaveProfile};
use sharpwave::solver::{
    default_start, solve_periodic_stationary_with, Direction, Field, Grid1D, StationaryProfile,
};
use sharpwave::ProblemSpec;

pub fn demo(name: &str) -> ProblemSpec {
    demos::spec(name).expect("known demo").expect("demo parses")
}

pub fn p0(spec: &ProblemSpec, cells: usize) -> StationaryProfile {
    solve_periodic_stationary_with(
        spec,
        default_start(spec, Direction::FromBelow),
        Direction::FromBelow,
        cells,
        1e-11,
    )
    .expect("stationary state")
}

pub fn renorm_config() -> RenormConfig {
    RenormConfig {
        crossings: 16,
        ..Default::default()
    }
}

pub struct Built {
    pub spec: ProblemSpec,
    pub p0: StationaryProfile,
    pub run: HeavisideRun,
    pub wave: WaveProfile,
}

pub fn wave(spec: &ProblemSpec, cells: usize) -> Built {
    let p0 = p0(spec, cells);
    let (run, wave) = build_wave(spec, &p0, &renorm_config(), &ExtractOptions::default())
        .expect("wave extraction");
    Built {
        spec: spec.clone(),
        p0,
        run,
        wave,
    }
}

pub fn barenblatt(x: f64, t: f64) -> f64 {
    (t.powf(-1.0 / 3.0) * (1.0 - x * x / (12.0 * t.powf(2.0 / 3.0)))).max(0.0)
}

pub fn barenblatt_field(cells: usize) -> Field {
    let g = Grid1D::new(-12.0, 1.0 / cells as f64, 24 * cells).unwrap();
    Field::from_fn(g, 1.0, |x| barenblatt(x, 1.0))
}
