use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use sharpwave::solver::{locate_front, Boundary, Integrator};
use sharpwave::waves::{find_sharp_speed, TwProblem};
use sharpwave_bench::{hetbi_plateau, spec};

fn explicit_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for cells in [16, 32] {
        let (spec, u0) = hetbi_plateau(cells);
        group.bench_function(format!("hetbi_{cells}"), |b| {
            b.iter_batched(
                || Integrator::new(&spec, u0.clone(), 0.45, Boundary::ZERO),
                |mut it| {
                    let dt = it.stable_dt();
                    it.step(dt).unwrap();
                    it
                },
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn front_locate(c: &mut Criterion) {
    let (spec, u0) = hetbi_plateau(32);
    c.bench_function("locate_front/hetbi_32", |b| {
        b.iter(|| locate_front(&spec, std::hint::black_box(&u0)))
    });
}

fn shooting(c: &mut Criterion) {
    let mut group = c.benchmark_group("sharp_speed");
    group.sample_size(10);
    for name in ["logistic", "hetbi"] {
        let tw = TwProblem::from_spec(&spec(name));
        group.bench_function(name, |b| b.iter(|| find_sharp_speed(&tw).unwrap().c));
    }
    group.finish();
}

criterion_group!(benches, explicit_step, front_locate, shooting);
criterion_main!(benches);
