use criterion::{black_box, criterion_group, criterion_main, Criterion};
use mtf_bench::word_batch;
use mtf_core::graph_pair::{self, GraphPair};
use mtf_core::one_relator;
use mtf_core::stallings::{fold, graph_from_words, intersection, subgroup_graph};
use mtf_core::text::parse_word;
use mtf_core::words::Endomorphism;

fn bench_fold(c: &mut Criterion) {
    let batch = word_batch(7, 50, 3, 10);
    c.bench_function("fold_50_random_wedges", |b| {
        b.iter(|| {
            for gens in &batch {
                let wedge = graph_from_words(3, gens, true);
                black_box(fold(&wedge));
            }
        })
    });
}

fn bench_pullback(c: &mut Criterion) {
    let g1 = subgroup_graph(2, &[parse_word("aa").unwrap(), parse_word("b").unwrap()]);
    let g2 = subgroup_graph(2, &[parse_word("aaa").unwrap(), parse_word("b").unwrap()]);
    c.bench_function("pullback_intersection", |b| {
        b.iter(|| black_box(intersection(&g1, &g2).unwrap()))
    });
}

fn bench_minimize(c: &mut Criterion) {
    let psi = Endomorphism::new(vec![parse_word("ab").unwrap(), parse_word("a").unwrap()]).unwrap();
    let gens = vec![parse_word("a").unwrap()];
    c.bench_function("minimize_fibonacci_pair", |b| {
        b.iter(|| {
            let pair = GraphPair::invariant_from_generators(2, &gens, &psi).unwrap();
            black_box(graph_pair::minimize(&pair, &psi, 5).unwrap())
        })
    });
}

fn bench_pirank(c: &mut Criterion) {
    let w = parse_word("abAB").unwrap();
    c.bench_function("pirank_commutator", |b| {
        b.iter(|| black_box(one_relator::primitivity_rank(&w, 2).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_fold,
    bench_pullback,
    bench_minimize,
    bench_pirank
);
criterion_main!(benches);
