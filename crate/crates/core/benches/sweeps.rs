use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use framelab::perturb;
use framelab::random::{self, Field};
use framelab::sweep;
use framelab::Tolerance;

/// One perturbation trial: a random frame, a nearby frame and its stable dual.
fn trial(rng: &mut ChaCha8Rng, _: usize) -> bool {
    let tol = Tolerance::default();
    let n = rng.random_range(3..=6);
    let a = random::frame(rng, n, 2, n, Field::Complex);
    let alpha = a.classify(&tol).lower_bound;
    let b = random::perturbed(rng, &a, 0.2 * alpha.sqrt(), Field::Complex, &tol);
    let g = a.geometry(&tol).expect("frame");
    let l = random::dual_param(rng, &g, Field::Complex, 1.0);
    perturb::stable_dual(&a, &b, &l, &tol).map(|(_, r)| r.holds).unwrap_or(false)
}

fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("perturbation trials");
    group.sample_size(10);
    for trials in [64usize, 256] {
        group.bench_with_input(BenchmarkId::new("sequential", trials), &trials, |b, &t| {
            b.iter(|| black_box(sweep::run_trials_sequential(42, t, trial)))
        });
        group.bench_with_input(BenchmarkId::new("run_trials", trials), &trials, |b, &t| {
            b.iter(|| black_box(sweep::run_trials(42, t, trial)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
