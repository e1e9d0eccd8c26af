//! End-to-end timings for the hot paths: trace canonicalization, the two
//! normal-ordering packs, deletion/contraction Tutte evaluation, and signed
//! word reduction in the trace group.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use tgrw_bench::{
    banded_alphabet, complete_graph, group_alphabet, scrambled_tokens, tangled_signed_word,
};
use tgrw_core::{pbw_normal_order, weyl_normal_order, TGElement, TutteEngine};

fn bench_trace_canonicalization(c: &mut Criterion) {
    let alphabet = banded_alphabet(8);
    let tokens = scrambled_tokens(8, 512);
    c.bench_function("trace/canonicalize 512 tokens over 8 banded letters", |b| {
        b.iter(|| alphabet.trace(black_box(&tokens)).unwrap())
    });
}

fn bench_weyl_normal_order(c: &mut Criterion) {
    c.bench_function("weyl/normal order (ba)^6", |b| {
        b.iter(|| weyl_normal_order(black_box("babababababa")).unwrap())
    });
}

fn bench_pbw_straightening(c: &mut Criterion) {
    c.bench_function("pbw/straighten (cba)^4", |b| {
        b.iter(|| pbw_normal_order(black_box("cbacbacbacba")).unwrap())
    });
}

fn bench_tutte(c: &mut Criterion) {
    let k5 = complete_graph(5);
    c.bench_function("graphs/tutte K5, cold cache", |b| {
        b.iter(|| TutteEngine::new().tutte(black_box(&k5)).unwrap())
    });
}

fn bench_signed_reduction(c: &mut Criterion) {
    let alphabet = group_alphabet();
    let word = tangled_signed_word(240);
    c.bench_function("group/reduce 240-token signed word", |b| {
        b.iter(|| TGElement::from_signed(&alphabet, black_box(word.clone())).unwrap())
    });
}

criterion_group!(
    benches,
    bench_trace_canonicalization,
    bench_weyl_normal_order,
    bench_pbw_straightening,
    bench_tutte,
    bench_signed_reduction,
);
criterion_main!(benches);
