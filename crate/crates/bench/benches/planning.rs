use std::hint::black_box;

use bo_pomdp_core::planners::{mcts_plan, plan_myopic, PlanContext};
use bo_pomdp_core::trajectory::{build_spline, default_action_set};
use bo_pomdp_core::{
    ActionSet, BeliefGp, FictiveState, KernelKind, KernelSpec, PlannerConfig, Pose, RewardConfig,
    RewardKind, Workspace,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn belief(n: usize) -> BeliefGp {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let k = KernelSpec::new(KernelKind::Rbf, 1.0, 25.0, 1e-2).unwrap();
    let xs: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)])
        .collect();
    let ys: Vec<f64> = xs.iter().map(|p| (p[0] * 0.7).sin() * 5.0 + p[1]).collect();
    BeliefGp::from_data(k, &xs, &ys).unwrap()
}

fn gp(c: &mut Criterion) {
    let mut g = c.benchmark_group("gp");
    for n in [50, 200, 400] {
        let b = belief(n);
        g.bench_with_input(BenchmarkId::new("update", n), &b, |bench, b| {
            bench.iter(|| b.update(black_box([4.2, 5.1]), 1.0).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("predict", n), &b, |bench, b| {
            bench.iter(|| b.predict(black_box([4.2, 5.1])))
        });
        g.bench_with_input(BenchmarkId::new("mean_gradient", n), &b, |bench, b| {
            bench.iter(|| b.mean_gradient(black_box([4.2, 5.1])))
        });
    }
    g.finish();
}

fn spline(c: &mut Criterion) {
    let templates = default_action_set();
    let pose = Pose::new(3.0, 4.0, 0.4);
    c.bench_function("spline/build", |b| {
        b.iter(|| build_spline(black_box(&templates[1]), &pose, 1.0).unwrap())
    });
    let s = build_spline(&templates[1], &pose, 1.0).unwrap();
    c.bench_function("spline/sample_8", |b| b.iter(|| black_box(&s).sample_points(8)));
}

fn planners(c: &mut Criterion) {
    let set = ActionSet::new(default_action_set(), 1.0, 8).unwrap();
    let ws = Workspace::new(0.0, 10.0, 0.0, 10.0).unwrap();
    let rc = RewardConfig::default();
    let ctx = PlanContext { actions: &set, workspace: &ws, reward: &rc };
    let state = FictiveState { belief: belief(40), pose: Pose::new(5.0, 5.0, 0.0) };
    c.bench_function("plan/myopic", |b| {
        b.iter(|| plan_myopic(black_box(&state), &ctx, RewardKind::GradientUcb).unwrap())
    });
    let mut g = c.benchmark_group("plan/mcts");
    g.sample_size(10);
    for iterations in [25, 100] {
        let cfg = PlannerConfig { mcts_iterations: iterations, ..Default::default() };
        g.bench_with_input(BenchmarkId::from_parameter(iterations), &cfg, |b, cfg| {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            b.iter(|| mcts_plan(black_box(&state), &ctx, cfg, &mut rng).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, gp, spline, planners);
criterion_main!(benches);
