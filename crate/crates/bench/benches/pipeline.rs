use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use locsym_bench::{bundled_network, token_ring};
use locsym_core::balance::{largest_balance, representatives};
use locsym_core::compositional::{strongest_compositional_invariant, DEFAULT_STATE_CAP};
use locsym_core::dsl::parse_formula;
use locsym_core::mucalc::holds;
use locsym_core::spaces::{build_global_space, build_local_space, PropositionSet};
use locsym_core::NodeId;

fn balance(c: &mut Criterion) {
    let mut g = c.benchmark_group("largest_balance");
    for name in ["ring5", "torus_tile"] {
        let net = bundled_network(name);
        g.bench_with_input(BenchmarkId::from_parameter(name), &net, |b, net| {
            b.iter(|| largest_balance(black_box(net)).unwrap())
        });
    }
    g.finish();
}

fn local_versus_global(c: &mut Criterion) {
    let mut g = c.benchmark_group("mutex_check");
    g.sample_size(20);
    for n in [3, 5, 7] {
        let net = token_ring(n);
        let tpl = net.template(NodeId(0));
        let phi = parse_formula("AG (inE -> xin == tok)", tpl).unwrap();
        let props = PropositionSet::for_formulas(tpl, [&phi]).unwrap();
        g.bench_with_input(BenchmarkId::new("local", n), &net, |b, net| {
            b.iter(|| {
                let scheme = representatives(net, &largest_balance(net).unwrap()).unwrap();
                let inv = strongest_compositional_invariant(net, &scheme).unwrap();
                let h = build_local_space(net, inv.all(), NodeId(0), &props).unwrap();
                holds(&phi, &h).unwrap()
            })
        });
        g.bench_with_input(BenchmarkId::new("global", n), &net, |b, net| {
            b.iter(|| {
                let gs = build_global_space(net, NodeId(0), &props, DEFAULT_STATE_CAP).unwrap();
                holds(&phi, &gs).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, balance, local_versus_global);
criterion_main!(benches);
