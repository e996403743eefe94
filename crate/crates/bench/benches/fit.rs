use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use csdsvm::{fit, generate, CensoringModel, KernelSpec, SimSetting};

fn bench_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    for &n in &[100usize, 400, 800] {
        let train = generate(SimSetting::Weibull1D, n, 7).unwrap();
        let cens = CensoringModel::known_uniform(1.0, 1e-3).unwrap();
        let spec = KernelSpec::rbf(0.5).unwrap();
        group.bench_with_input(BenchmarkId::new("rbf_intercept", n), &n, |b, _| {
            b.iter(|| fit(&train.data, &spec, 0.01, &cens, true).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_fit);
criterion_main!(benches);
