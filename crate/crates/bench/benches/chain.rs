use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use trigraph::spectral::{eigendecompose, lambda2};
use trigraph::ProposalKind;
use trigraph_bench::{reference_chain, reference_graph};

fn mh_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("mh_step");
    group.throughput(Throughput::Elements(10_000));
    for (name, kind) in [("global", ProposalKind::GlobalSwap), ("vertex", ProposalKind::VertexLocalSwap)] {
        let chain = reference_chain(kind, 1);
        group.bench_function(name, |b| {
            b.iter_batched_ref(|| chain.clone(), |ch| ch.run(10_000), BatchSize::SmallInput)
        });
    }
    group.finish();
}

fn spectra(c: &mut Criterion) {
    let g = reference_graph(2);
    c.bench_function("lambda2_n54", |b| b.iter(|| lambda2(&g).unwrap()));
    c.bench_function("eigendecompose_n54", |b| b.iter(|| eigendecompose(&g).unwrap()));
    c.bench_function("two_ear_n54", |b| b.iter(|| g.two_ear_count()));
}

criterion_group!(benches, mh_steps, spectra);
criterion_main!(benches);
