use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use arena_core::corpus::{corpus, random_monotone, run_bound_suites, Suite};
use arena_core::equilibrium::{analyze_with, EnumConfig};
use arena_core::{Execution, GameModel, Protocol, Resource};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Seven players, six resources, four strategies each: 16384 profiles.
fn large_game() -> GameModel {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (n, m) = (7, 6);
    let resources = (0..m)
        .map(|r| Resource::new(format!("r{r}"), random_monotone(&mut rng, n).unwrap()))
        .collect();
    let strategies = (0..n)
        .map(|_| {
            let mut picks: Vec<u32> = (1..(1u32 << m)).collect();
            picks.shuffle(&mut rng);
            picks[..4]
                .iter()
                .map(|mask| (0..m).filter(|r| mask & (1 << r) != 0).collect())
                .collect()
        })
        .collect();
    GameModel::new(n, resources, strategies).unwrap()
}

fn modes() -> [(&'static str, EnumConfig); 2] {
    let seq = EnumConfig::sequential();
    let par = EnumConfig {
        execution: Execution::Parallel,
        ..seq
    };
    [("sequential", seq), ("parallel", par)]
}

fn bench_analyze(c: &mut Criterion) {
    let game = large_game();
    let mut group = c.benchmark_group("analyze");
    for (name, cfg) in modes() {
        group.bench_with_input(BenchmarkId::new(name, game.profile_count().unwrap()), &cfg, |b, cfg| {
            b.iter(|| analyze_with(&game, &Protocol::Shapley, cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_suites(c: &mut Criterion) {
    let games = corpus(1, 60).unwrap();
    let mut group = c.benchmark_group("bound_suites");
    group.sample_size(10);
    for (name, cfg) in modes() {
        group.bench_with_input(BenchmarkId::new(name, games.len()), &cfg, |b, cfg| {
            b.iter(|| run_bound_suites(&games, &Suite::ALL, cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_analyze, bench_suites);
criterion_main!(benches);
