use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use oracount_core::adversarial::{er_hypergraph, er_partite_hypergraph};
use oracount_core::col::colour_coarse;
use oracount_core::cost::CostModel;
use oracount_core::oracle::{OracleMode, OracleSession};
use oracount_core::profile::Profile;
use oracount_core::rng::RngStream;
use oracount_core::sparse::{sparse_count, SparseCountParams};
use oracount_core::uncol::uncol_approx;
use std::sync::Arc;

fn bench_sparse_count(c: &mut Criterion) {
    let mut group = c.benchmark_group("sparse_count");
    group.sample_size(20);
    for &n in &[64u64, 256] {
        let mut rng = RngStream::new(3);
        let g = Arc::new(er_hypergraph(n, 2, 16.0 / (n as f64), &mut rng).unwrap());
        let mut sess =
            OracleSession::plain(g, CostModel::unit(), OracleMode::Indora).unwrap();
        let u: Vec<u32> = (1..=n as u32).collect();
        let params = SparseCountParams::from_profile(&Profile::fast(), 2, u.len(), n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            let mut seed = 0u64;
            b.iter(|| {
                seed += 1;
                let mut r = RngStream::new(seed);
                sparse_count(&mut sess, &u, 10_000, &params, &mut r)
            });
        });
    }
    group.finish();
}

fn bench_uncol_approx(c: &mut Criterion) {
    let mut group = c.benchmark_group("uncol_approx");
    group.sample_size(10);
    for &n in &[64u64, 256] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let mut seed = 0u64;
            b.iter(|| {
                seed += 1;
                let mut rng = RngStream::new(seed);
                let g =
                    Arc::new(er_hypergraph(n, 2, 2.0 / (n as f64), &mut rng).unwrap());
                let mut sess =
                    OracleSession::plain(g, CostModel::unit(), OracleMode::Indora).unwrap();
                uncol_approx(&mut sess, 0.5, &Profile::fast(), &mut rng).unwrap()
            });
        });
    }
    group.finish();
}

fn bench_colour_coarse(c: &mut Criterion) {
    let mut group = c.benchmark_group("colour_coarse");
    group.sample_size(10);
    for &t in &[16u64, 64] {
        group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            let mut seed = 0u64;
            b.iter(|| {
                seed += 1;
                let mut rng = RngStream::new(seed);
                let ph = er_partite_hypergraph(t, 2, 0.2, &mut rng).unwrap();
                let classes = ph.classes.clone();
                let mut sess = OracleSession::partitioned(
                    Arc::new(ph),
                    CostModel::power(1.0).unwrap(),
                    OracleMode::Cindora,
                )
                .unwrap();
                colour_coarse(&mut sess, &classes, &Profile::fast(), &mut rng).unwrap()
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sparse_count, bench_uncol_approx, bench_colour_coarse);
criterion_main!(benches);
