use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use spectragraph::analysis::trials::hadamard_trials;
use spectragraph::gallery::corpus_problem;
use spectragraph::surgery::{verify_with, Theorem};
use spectragraph::{eigenvalues_with, Exec, SpectrumRequest};

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectrum-40");
    for name in ["pumpkin-deltaprime", "potential-tree"] {
        let p = corpus_problem(name).unwrap();
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(mode, name), &p, |b, p| {
                b.iter(|| eigenvalues_with(p, SpectrumRequest::first(40), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("trials");
    group.sample_size(10);
    for (mode, exec) in MODES {
        group.bench_function(BenchmarkId::new(mode, "verify join-delta x32"), |b| {
            b.iter(|| verify_with(Theorem::JoinDelta, 7, 32, 6, exec).unwrap())
        });
        group.bench_function(BenchmarkId::new(mode, "hadamard x16"), |b| {
            b.iter(|| hadamard_trials(1, 16, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, spectrum, trials);
criterion_main!(benches);
