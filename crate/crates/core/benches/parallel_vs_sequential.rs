use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use twisted_hodge::fourier::{assemble_operators, sigma_min_scan, ThetaField, TorusSpec};
use twisted_hodge::model::bundled;
use twisted_hodge::twisted::hodge_table;
use twisted_hodge::{Execution, GaussRational, OneForm01, Scalar};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn hodge_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("hodge_table");
    group.sample_size(10);
    for name in ["torus_n3", "iwasawa"] {
        let m = bundled(name).expect("bundled model");
        let theta = OneForm01::basis(3, 0, GaussRational::one());
        for (label, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(label, name), &exec, |b, &exec| {
                b.iter(|| hodge_table(&m, &theta, None, exec, "phi_bar_1").expect("table"))
            });
        }
    }
    group.finish();
}

fn fourier_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("sigma_min_scan");
    group.sample_size(10);
    let theta = ThetaField::parse("2+cos", 1).expect("theta");
    let torus = TorusSpec::new(1, 4).expect("torus");
    let grid = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
    for (label, exec) in MODES {
        group.bench_function(BenchmarkId::new(label, "assemble"), |b| {
            b.iter(|| assemble_operators(&torus, &theta, 0, exec).expect("operators"))
        });
        group.bench_function(BenchmarkId::new(label, "scan"), |b| {
            b.iter(|| sigma_min_scan(&torus, &theta, 0, &grid, false, exec).expect("scan"))
        });
    }
    group.finish();
}

criterion_group!(benches, hodge_tables, fourier_scan);
criterion_main!(benches);
