//! Parallel against sequential execution for the three data-parallel kernels:
//! the numeric sweep, wall enumeration along a segment, and the genericity scan.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mukai_core::lattice::DivisorClass;
use mukai_core::mukai::MukaiVector;
use mukai_core::oracles::{sweep_numeri_with, Gate, SweepBounds};
use mukai_core::par::Exec;
use mukai_core::walls::{is_generic_with, walls_between_with};
use mukai_core::SurfaceClass;

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep_numeri");
    g.sample_size(10);
    let b = SweepBounds::new(2, 2, 4, 1024).unwrap();
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, "r2k2l4n1024"), &b, |bench, b| {
            bench.iter(|| black_box(sweep_numeri_with(exec, b, Gate::Certified, 16)))
        });
    }
    g.finish();
}

fn walls(c: &mut Criterion) {
    let mut g = c.benchmark_group("walls");
    g.sample_size(10);
    let s = SurfaceClass::resolve("elliptic-k3").unwrap();
    let v = MukaiVector::from_i64s(4, &[1, 2], -3);
    let h1 = DivisorClass::from_i64s(&[1, 3]);
    let h2 = DivisorClass::from_i64s(&[1, 400]);
    let h = DivisorClass::from_i64s(&[1, 7]);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("between", name), |bench| {
            bench.iter(|| black_box(walls_between_with(exec, &s, &v, &h1, &h2).unwrap()))
        });
        g.bench_function(BenchmarkId::new("is_generic", name), |bench| {
            bench.iter(|| black_box(is_generic_with(exec, &s, &v, &h).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, sweep, walls);
criterion_main!(benches);
