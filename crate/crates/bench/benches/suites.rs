use criterion::{criterion_group, criterion_main, Criterion};
use yangw_core::{run, CheckParams, Suite};

fn bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("suites");
    g.sample_size(10);
    let cases = [
        ("yang-ev n=3 D=2", Suite::YangEv, CheckParams::default()),
        ("d0-kernel (4,3)", Suite::D0Kernel, CheckParams { q: vec![4, 3], ..CheckParams::default() }),
        ("hojo (4,3) D=2", Suite::Hojo, CheckParams { q: vec![4, 3], ..CheckParams::default() }),
        ("miura-split (3,3,3) w=2 D=2", Suite::MiuraSplit, CheckParams { q: vec![3, 3, 3], w: 2, ..CheckParams::default() }),
        ("parabolic-compat (3,3) D=2", Suite::ParabolicCompat, CheckParams::default()),
    ];
    for (name, suite, p) in cases {
        g.bench_function(name, |b| b.iter(|| run(suite, &p).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
