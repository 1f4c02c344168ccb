use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use vpart::corr::{CorrelationKind, GlobalCorr, PcorOptions};
use vpart::harness::{latent_factor_dataset, random_dataset};
use vpart::split::{
    equal_counts, split_by_correlation, split_by_importance, BrkgaConfig, DirichletSpec,
};

fn bench_pair_metrics(c: &mut Criterion) {
    let ds = latent_factor_dataset(500, 80, 12, 0.8, 0.3, 7);
    let opts = PcorOptions::default();
    let gc = GlobalCorr::from_dataset(&ds, CorrelationKind::Spearman).unwrap();
    let half: Vec<usize> = (0..40).collect();
    let rest: Vec<usize> = (40..80).collect();

    c.bench_function("global_corr_500x80", |b| {
        b.iter(|| GlobalCorr::from_dataset(&ds, CorrelationKind::Spearman).unwrap())
    });
    c.bench_function("pair_pcor_40x40", |b| {
        b.iter(|| gc.pair_pcor(&half, &rest, &opts).unwrap())
    });
    c.bench_function("icor_2x40", |b| {
        b.iter(|| {
            gc.icor_of_parties(&[half.clone(), rest.clone()], &opts)
                .unwrap()
        })
    });
}

fn bench_importance_split(c: &mut Criterion) {
    c.bench_function("importance_split_1000_features_k4", |b| {
        b.iter_batched(
            || DirichletSpec::new(vec![1.0, 2.0, 3.0, 4.0], 9),
            |spec| split_by_importance(1000, &spec).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_correlation_split(c: &mut Criterion) {
    let ds = random_dataset(200, 24, 5);
    let counts = equal_counts(24, 3).unwrap();
    let cfg = BrkgaConfig {
        max_generations: 40,
        stall_generations: 10,
        ..BrkgaConfig::default()
    };
    let opts = PcorOptions::default();
    let mut group = c.benchmark_group("correlation_split");
    group.sample_size(10);
    group.bench_function("200x24_k3_beta_half", |b| {
        b.iter(|| split_by_correlation(&ds, 0.5, &counts, &cfg, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_pair_metrics,
    bench_importance_split,
    bench_correlation_split
);
criterion_main!(benches);
