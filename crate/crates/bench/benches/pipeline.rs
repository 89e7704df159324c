use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use multiconf_bench::{dataset, records};
use multiconf_core::classifiers::fit;
use multiconf_core::strategies::run_strategy;
use multiconf_core::viz::{cooccurrence_matrix, multiset_chart, CooccurrenceGraph};
use multiconf_core::{ClassifierConfig, ConformalModel, ForestConfig, MetricsReport, StrategyKind};
use std::hint::black_box;

fn metrics(c: &mut Criterion) {
    let mut g = c.benchmark_group("metrics");
    for n in [100, 10_000] {
        let recs = records(n, 6, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &recs, |b, r| {
            b.iter(|| MetricsReport::compute(black_box(r), 6).unwrap())
        });
    }
    g.finish();
}

fn conformal(c: &mut Criterion) {
    let data = dataset(50, 8);
    let model = fit(
        &ClassifierConfig::Gnb,
        data.features(),
        data.labels(),
        data.n_classes(),
        0,
    )
    .unwrap();
    c.bench_function("conformal/calibrate_1200", |b| {
        b.iter(|| ConformalModel::calibrate(model.clone(), data.features(), data.labels(), 0.05).unwrap())
    });
    let cm = ConformalModel::calibrate(model, data.features(), data.labels(), 0.05).unwrap();
    c.bench_function("conformal/predict_1200", |b| {
        b.iter(|| {
            for (i, x) in data.features().rows().enumerate() {
                black_box(cm.predict(x, data.labels()[i], 0).unwrap());
            }
        })
    });
}

fn classifiers(c: &mut Criterion) {
    let data = dataset(50, 8);
    let mut g = c.benchmark_group("fit");
    g.sample_size(10);
    for (name, cfg) in [
        ("gnb", ClassifierConfig::Gnb),
        ("knn", ClassifierConfig::knn()),
        (
            "rf25",
            ClassifierConfig::Rf(ForestConfig {
                n_trees: 25,
                ..ForestConfig::default()
            }),
        ),
    ] {
        g.bench_function(name, |b| {
            b.iter(|| fit(&cfg, data.features(), data.labels(), data.n_classes(), 0).unwrap())
        });
    }
    g.finish();
}

fn strategies(c: &mut Criterion) {
    let data = dataset(30, 4);
    let mut g = c.benchmark_group("strategy_gnb");
    g.sample_size(20);
    for kind in StrategyKind::ALL {
        g.bench_function(kind.name(), |b| {
            b.iter(|| run_strategy(&data, kind, &ClassifierConfig::Gnb, 0.05, 0).unwrap())
        });
    }
    g.finish();
}

fn charts(c: &mut Criterion) {
    let recs = records(10_000, 6, 2);
    let names: Vec<String> = (0..6).map(|i| format!("c{i}")).collect();
    c.bench_function("viz/cooccurrence_10k", |b| {
        b.iter(|| cooccurrence_matrix(black_box(&recs), 6))
    });
    c.bench_function("viz/graph_dot_10k", |b| {
        b.iter(|| CooccurrenceGraph::new(&recs, &names).to_dot())
    });
    c.bench_function("viz/multiset_svg_10k", |b| {
        b.iter(|| multiset_chart(&recs, &names, 20).to_svg())
    });
}

criterion_group!(benches, metrics, conformal, classifiers, strategies, charts);
criterion_main!(benches);
