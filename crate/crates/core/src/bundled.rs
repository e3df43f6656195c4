//! Example models shipped with the crate.

use crate::dsl::{parse_model_named, Diagnostics, ModelDocument};

/// `(file name, source text)` for every bundled model.
pub const BUNDLED: &[(&str, &str)] = &[
    ("ring3.lmu", include_str!("../models/ring3.lmu")),
    ("ring5.lmu", include_str!("../models/ring5.lmu")),
    ("ring_2tok_4.lmu", include_str!("../models/ring_2tok_4.lmu")),
    ("red_black_ring.lmu", include_str!("../models/red_black_ring.lmu")),
    ("torus_tile.lmu", include_str!("../models/torus_tile.lmu")),
    ("dining_phil.lmu", include_str!("../models/dining_phil.lmu")),
    ("non_outward.lmu", include_str!("../models/non_outward.lmu")),
];

/// Source of a bundled model; the `.lmu` suffix is optional.
pub fn source(name: &str) -> Option<&'static str> {
    let file = if name.ends_with(".lmu") {
        name.to_string()
    } else {
        format!("{name}.lmu")
    };
    BUNDLED.iter().find(|(n, _)| *n == file).map(|(_, t)| *t)
}

/// Parses a bundled model by name.
pub fn load(name: &str) -> Option<Result<ModelDocument, Diagnostics>> {
    let file = if name.ends_with(".lmu") {
        name.to_string()
    } else {
        format!("{name}.lmu")
    };
    source(&file).map(|t| parse_model_named(t, &file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_models_parse() {
        for (name, _) in BUNDLED {
            let doc = load(name).unwrap().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(doc.networks.len(), 1, "{name}");
            assert_eq!(doc.tile_sets.len(), 1, "{name}");
            assert!(!doc.formulas.is_empty(), "{name}");
        }
    }
}
