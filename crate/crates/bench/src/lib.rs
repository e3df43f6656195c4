//! Fixtures shared by the benchmarks.

use locsym_core::bundled::load;
use locsym_core::tiles::{exactly_on_edges, generate, Family};
use locsym_core::ProcessNetwork;

/// The network of a bundled model.
pub fn bundled_network(name: &str) -> ProcessNetwork {
    let doc = load(name).expect("bundled model").expect("bundled models parse");
    doc.networks.into_iter().next().expect("one network")
}

/// Single-token ring of `n` philosophers.
pub fn token_ring(n: usize) -> ProcessNetwork {
    let doc = load("ring3").expect("bundled model").expect("bundled models parse");
    let net = generate(&doc.tile_sets[0], Family::Ring(n)).expect("ring sizes >= 2");
    net.with_initially(Some(exactly_on_edges(&net, 1, "tok")))
        .expect("constraint over the ring's edges")
}
