use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rangepres_core::analyzer::{classify, AnalysisConfig, MapUnderTest};
use rangepres_core::lcs::VectorSpaceModel;
use rangepres_core::par::Execution;
use rangepres_core::sample::random_function;
use rangepres_core::space::{FiniteSpace, Symbol};

fn composition(nx: usize, ny: usize, d: usize) -> MapUnderTest {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = Arc::new(FiniteSpace::numbered("x", nx).unwrap());
    let y = Arc::new(FiniteSpace::numbered("y", ny).unwrap());
    let model = Arc::new(VectorSpaceModel::standard(d));
    let phi = Symbol::new(y.clone(), x.clone(), (0..ny).map(|_| rng.gen_range(0..nx)).collect()).unwrap();
    let offset = random_function(&mut rng, &y, &model, true);
    MapUnderTest::new(x, y, model, move |f| offset.add(&f.compose(&phi)?))
}

fn bench_classify(c: &mut Criterion) {
    let mut group = c.benchmark_group("classify");
    group.sample_size(10);
    for (nx, ny, d) in [(4, 3, 2), (16, 16, 3), (64, 32, 4)] {
        let map = composition(nx, ny, d);
        for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let cfg = AnalysisConfig {
                execution,
                ..AnalysisConfig::default()
            };
            group.bench_with_input(BenchmarkId::new(name, format!("{nx}x{ny}x{d}")), &cfg, |b, cfg| {
                b.iter(|| classify(&map, cfg))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_classify);
criterion_main!(benches);
