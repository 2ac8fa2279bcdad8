//! Benchmarks for the measure kernels on representative small states.
//!
//! Sample counts are kept low because each relative-entropy solve runs a full
//! iterative optimization; `cargo bench` stays in the minutes range.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};

use entcert_bench::{bell_pair, bipartite_state, flagged_pair};
use entcert_core::measures::{negativity, ppt_relative_entropy, ree, ReeConfig};
use entcert_core::{trace_norm, Party};

fn bench_trace_norm(c: &mut Criterion) {
    let rho = bipartite_state(3, 6, 6);
    c.bench_function("trace_norm_dim_36", |b| {
        b.iter(|| trace_norm(black_box(rho.matrix())))
    });
}

fn bench_negativity(c: &mut Criterion) {
    let cut = [Party::from("A")];
    let two_qubit = bipartite_state(1, 2, 2);
    let three_by_three = bipartite_state(2, 3, 3);
    c.bench_function("negativity_2x2", |b| {
        b.iter(|| negativity(black_box(&two_qubit), &cut).unwrap())
    });
    c.bench_function("negativity_3x3", |b| {
        b.iter(|| negativity(black_box(&three_by_three), &cut).unwrap())
    });
}

fn bench_ree(c: &mut Criterion) {
    let rho = bipartite_state(4, 2, 2);
    let cfg = ReeConfig {
        max_iterations: 40,
        ..ReeConfig::default()
    };
    c.bench_function("ree_2x2_40_iterations", |b| {
        b.iter(|| ree(black_box(&rho), &cfg).unwrap())
    });
}

fn bench_ppt(c: &mut Criterion) {
    let bell = bell_pair();
    let flagged = flagged_pair(6);
    c.bench_function("ppt_relative_entropy_bell", |b| {
        b.iter(|| ppt_relative_entropy(black_box(&bell), 1e-6).unwrap())
    });
    c.bench_function("ppt_relative_entropy_flagged_pair", |b| {
        b.iter(|| ppt_relative_entropy(black_box(&flagged), 1e-6).unwrap())
    });
}

fn config() -> Criterion {
    Criterion::default()
        .sample_size(10)
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(3))
}

criterion_group! {
    name = benches;
    config = config();
    targets = bench_trace_norm, bench_negativity, bench_ree, bench_ppt
}
criterion_main!(benches);
