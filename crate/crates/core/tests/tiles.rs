use locsym_core::balance::{is_balance_relation, largest_balance, representatives, representatives_unchecked};
use locsym_core::bundled::load;
use locsym_core::tiles::{exactly_on_edges, generate, Family, TileError};

fn generated(model: &str, family: Family) -> locsym_core::ProcessNetwork {
    let doc = load(model).unwrap().unwrap();
    generate(&doc.tile_sets[0], family).unwrap()
}

fn matrix() -> Vec<(&'static str, Family, usize)> {
    let mut out = Vec::new();
    for n in 2..=8 {
        out.push(("ring3", Family::Ring(n), 1));
    }
    for n in [4, 6, 8] {
        out.push(("red_black_ring", Family::RedBlackRing(n), 2));
    }
    for (w, h) in [(3, 3), (3, 4), (4, 3), (4, 4)] {
        out.push(("torus_tile", Family::Torus(w, h), 1));
    }
    out
}

#[test]
fn induced_balance_on_generator_matrix() {
    for (model, family, tiles) in matrix() {
        let doc = load(model).unwrap().unwrap();
        let set = &doc.tile_sets[0];
        assert_eq!(set.len(), tiles);
        let net = generate(set, family).unwrap();
        set.validate_instance(&net).unwrap();
        let induced = set.induced_balance(&net).unwrap();
        assert!(is_balance_relation(&net, &induced).unwrap().is_ok(), "{family:?}");
        assert!(representatives_unchecked(&net, &induced).classes.len() <= tiles, "{family:?}");
        assert!(induced.is_subset(&largest_balance(&net).unwrap()), "{family:?}");
    }
}

#[test]
fn class_counts_of_largest_balance() {
    for (model, family, _) in matrix() {
        let net = generated(model, family);
        let b = largest_balance(&net).unwrap();
        let classes = representatives(&net, &b).unwrap().classes.len();
        let want = if matches!(family, Family::RedBlackRing(_)) { 2 } else { 1 };
        assert_eq!(classes, want, "{family:?}");
    }
}

#[test]
fn generated_members_match_bundled_instances() {
    let doc = load("ring3").unwrap().unwrap();
    let net = generated("ring3", Family::Ring(3));
    assert_eq!(net.nodes().len(), doc.networks[0].nodes().len());
    assert_eq!(net.edges().len(), doc.networks[0].edges().len());
    let net = net.with_initially(Some(exactly_on_edges(&net, 1, "tok"))).unwrap();
    assert_eq!(net.reachable(1_000_000).unwrap().len(), 36);
}

#[test]
fn bad_family_parameters() {
    let doc = load("ring3").unwrap().unwrap();
    let set = &doc.tile_sets[0];
    assert!(matches!(generate(set, Family::Ring(1)), Err(TileError::BadParams(_))));
    assert!(matches!(generate(set, Family::RedBlackRing(4)), Err(TileError::BadParams(_))));
    assert!(matches!(Family::parse("torus", &[3]), Err(TileError::BadParams(_))));
    assert!(matches!(Family::parse("mesh", &[3]), Err(TileError::UnknownFamily(_))));
    assert_eq!(Family::parse("torus", &[3, 4]).unwrap(), Family::Torus(3, 4));
}
