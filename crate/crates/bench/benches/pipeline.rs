use criterion::{black_box, criterion_group, criterion_main, Criterion};
use std::path::Path;

use downclose::order_reduce::reduce_scheme;
use downclose::pipeline::{diagonal_regular, downward_closure_regular, downward_closure_search, letter_set, Bounds, LanguageHandle};
use downclose::schemes::{bohm_prefix, language_enumerate};
use downclose::stre::{normalize, to_nfta, to_pure_product, Stre};
use downclose::{Nfta, Scheme};

fn input(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../inputs").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn schemes(c: &mut Criterion) {
    let g = Scheme::parse(&input("pair_chains.scm")).unwrap();
    c.bench_function("bohm_prefix depth 12", |b| b.iter(|| bohm_prefix(black_box(&g), 12, 100_000)));
    c.bench_function("enumerate size 9", |b| b.iter(|| language_enumerate(black_box(&g), 9, 12, 100_000)));
    c.bench_function("reduce_scheme", |b| b.iter(|| reduce_scheme(black_box(&g)).unwrap()));
}

fn stre(c: &mut Criterion) {
    let s = Stre::parse("a?((b(#))*.c?() + (b(#) + d(#))*.(c?() + e?()), c?())").unwrap();
    c.bench_function("stre normalize", |b| b.iter(|| normalize(black_box(&s))));
    let p = Stre::parse("a?((b(#))*.c?(), (a(#,d?()))*.(0))").unwrap();
    c.bench_function("stre to_pure_product", |b| b.iter(|| to_pure_product(black_box(&p)).unwrap()));
    c.bench_function("stre to_nfta", |b| b.iter(|| to_nfta(black_box(&s))));
}

fn pipeline(c: &mut Criterion) {
    let chain = Nfta::parse(&input("chain.nfta")).unwrap();
    let sigma = letter_set(&["b1"]);
    c.bench_function("downward_closure_regular chain", |b| b.iter(|| downward_closure_regular(black_box(&chain)).unwrap()));
    c.bench_function("diagonal_regular chain", |b| b.iter(|| diagonal_regular(black_box(&chain), &sigma)));

    let g = Scheme::parse(&input("pair_chains.scm")).unwrap();
    let handle = LanguageHandle::Scheme { scheme: g, size: 12, depth: 12, fuel: 100_000 };
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    group.bench_function("dc-search example scheme", |b| {
        b.iter(|| downward_closure_search(black_box(&handle), 9, Bounds::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, schemes, stre, pipeline);
criterion_main!(benches);
