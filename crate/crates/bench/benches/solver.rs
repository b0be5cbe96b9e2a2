use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use regrisk::covering::fit_covering_exponent;
use regrisk::harness::{generate, DataModel, NoiseModel};
use regrisk::{fit, DomainBox, GramOperator, Kernel, LossSpec, SolverConfig, SolverMethod};

fn setup() -> (Kernel, DataModel) {
    let k = Kernel::matern(1.0, 0.5, DomainBox::unit(1)).unwrap();
    let m = DataModel::new(DataModel::standard_fstar(&k, 0.45).unwrap(), NoiseModel::Uniform { b: 0.5 }).unwrap();
    (k, m)
}

fn solvers(c: &mut Criterion) {
    let (k, m) = setup();
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    for &n in &[200usize, 800, 3200] {
        let data = generate(&m, n, 1).unwrap();
        let lambda = (n as f64).powf(-2.0 / 3.0);
        for &alpha in &[1.0, 1.5, 2.0] {
            let loss = LossSpec::power(alpha).unwrap();
            let cfg = SolverConfig::new(lambda);
            group.bench_with_input(BenchmarkId::new(format!("alpha {alpha}"), n), &data, |b, d| {
                b.iter(|| fit(&k, &loss, d, &cfg).unwrap())
            });
        }
        if n <= 800 {
            let cfg = SolverConfig::new(lambda).with_method(SolverMethod::ClosedFormQuadratic);
            let gauss = Kernel::gaussian(0.3, DomainBox::unit(1)).unwrap();
            group.bench_with_input(BenchmarkId::new("closed form gaussian", n), &data, |b, d| {
                b.iter(|| fit(&gauss, &LossSpec::least_squares(), d, &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn gram(c: &mut Criterion) {
    let (k, m) = setup();
    let data = generate(&m, 2000, 2).unwrap();
    let v: Vec<f64> = data.ys().to_vec();
    let fast = GramOperator::new(&k, data.xs()).unwrap();
    let dense = GramOperator::dense(&k, data.xs()).unwrap();
    let mut group = c.benchmark_group("gram apply n 2000");
    group.bench_function("chain", |b| b.iter(|| fast.apply(&v)));
    group.bench_function("dense", |b| b.iter(|| dense.apply(&v)));
    group.finish();
}

fn covering(c: &mut Criterion) {
    let (k, m) = setup();
    let data = generate(&m, 400, 3).unwrap();
    let mut group = c.benchmark_group("covering");
    group.sample_size(10);
    group.bench_function("fit n 400", |b| b.iter(|| fit_covering_exponent(&k, data.xs(), None).unwrap()));
    group.finish();
}

criterion_group!(benches, solvers, gram, covering);
criterion_main!(benches);
