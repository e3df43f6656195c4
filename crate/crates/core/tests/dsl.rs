mod support;

use locsym_core::bundled::{load, BUNDLED};
use locsym_core::dsl::{parse_formula_unresolved, parse_model, pretty_print, ModelDocument};
use locsym_core::tiles::{exactly_on_edges, generate, Family};
use proptest::prelude::*;

#[test]
fn bundled_models_survive_printing() {
    for (file, _) in BUNDLED {
        let doc = load(file).unwrap().unwrap();
        let text = pretty_print(&doc);
        assert_eq!(parse_model(&text).unwrap(), doc, "{file}");
        assert_eq!(pretty_print(&parse_model(&text).unwrap()), text, "{file}");
    }
}

#[test]
fn parse_errors_carry_positions() {
    let err = parse_model("domain D { a, b }\ntemplate T {\n  internal x : E\n}\n").unwrap_err();
    let text = err.to_string();
    assert!(text.contains('3'), "{text}");
}

fn with_family(model: &str, family: Family) -> ModelDocument {
    let mut doc = load(model).unwrap().unwrap();
    let net = generate(&doc.tile_sets[0], family).unwrap();
    let net = net.with_initially(Some(exactly_on_edges(&net, 1, "tok"))).unwrap();
    doc.networks = vec![net];
    doc.spans.clear();
    doc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn formulas_survive_printing(f in support::formula(vec![])) {
        let text = f.to_string();
        prop_assert_eq!(parse_formula_unresolved(&text).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_rings_survive_printing(n in 2usize..12) {
        let doc = with_family("ring3", Family::Ring(n));
        prop_assert_eq!(parse_model(&pretty_print(&doc)).unwrap(), doc);
    }
}
