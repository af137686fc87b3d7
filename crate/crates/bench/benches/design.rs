use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use gsd_core::sim::estimate_oc;
use gsd_core::{
    joint_law, rect_prob, solve_design, DesignSpec, EfficacyModel, Hypothesis, LookSchedule, Mode, Rectangle,
    SpendingPlan,
};
use std::hint::black_box;

fn spec(mode: Mode) -> DesignSpec {
    DesignSpec {
        model: EfficacyModel::new(0.58, 0.60, -0.10).unwrap(),
        plan: SpendingPlan::new(0.025, 0.1, 2.0, 3.0, false).unwrap(),
        psi: 0.6,
        mode,
    }
}

fn bench_rect_prob(c: &mut Criterion) {
    let model = EfficacyModel::new(0.58, 0.60, -0.10).unwrap();
    let law = joint_law(&model, &LookSchedule::two_stage(0.6, 831.6).unwrap(), Hypothesis::H1).unwrap();
    let region = Rectangle::new(vec![0.55, 2.04], vec![2.37, f64::INFINITY]).unwrap();
    c.bench_function("rect_prob bivariate", |b| b.iter(|| rect_prob(black_box(&law), black_box(&region))));
}

fn bench_solve(c: &mut Criterion) {
    let solve_n = spec(Mode::SolveN { power: 0.9 });
    let solve_power = spec(Mode::SolvePower { n: 831.6 });
    c.bench_function("solve_design N", |b| b.iter(|| solve_design(black_box(&solve_n)).unwrap()));
    c.bench_function("solve_design power", |b| b.iter(|| solve_design(black_box(&solve_power)).unwrap()));
}

fn bench_simulation(c: &mut Criterion) {
    let design = solve_design(&spec(Mode::SolveN { power: 0.9 })).unwrap().design;
    let mut group = c.benchmark_group("estimate_oc");
    group.sample_size(10);
    group.bench_function("100k trials", |b| {
        b.iter_batched(|| design.clone(), |d| estimate_oc(&d, 100_000, 1).unwrap(), BatchSize::SmallInput)
    });
    group.finish();
}

criterion_group!(benches, bench_rect_prob, bench_solve, bench_simulation);
criterion_main!(benches);
