use std::fmt::Write as _;

use super::ModelDocument;
use crate::model::{PortMode, ProcessNetwork, Template, VarKind};
use crate::tiles::TileSet;

const HEADER: &str = "// locsym model\n";

/// Canonical text of a document; `parse_model(&pretty_print(d)) == Ok(d)`.
pub fn pretty_print(doc: &ModelDocument) -> String {
    let mut blocks: Vec<String> = Vec::new();
    for d in &doc.domains {
        blocks.push(format!("domain {} {{ {} }}\n", d.name(), d.values().join(", ")));
    }
    blocks.extend(doc.templates.iter().map(|t| template(t)));
    blocks.extend(doc.networks.iter().map(network));
    blocks.extend(doc.tile_sets.iter().map(tiles));
    for (name, f) in &doc.formulas {
        blocks.push(format!("formula {name} := {f}\n"));
    }
    let mut out = String::from(HEADER);
    for b in blocks {
        out.push('\n');
        out.push_str(&b);
    }
    out
}

fn template(t: &Template) -> String {
    let mut s = format!("template {} {{\n", t.name);
    for v in &t.vars {
        let dom = if v.inline_domain {
            format!(" {{ {} }}", v.domain.values().join(", "))
        } else {
            format!(" : {}", v.domain.name())
        };
        match v.kind {
            VarKind::Internal => {
                let _ = writeln!(s, "  internal {}{dom}", v.name);
            }
            VarKind::Port(m) => {
                let _ = writeln!(s, "  port {}{dom} {}", v.name, m.keyword());
            }
        }
    }
    let _ = writeln!(s, "  init {}", t.init);
    for c in &t.commands {
        let ups: Vec<String> = c
            .updates
            .iter()
            .map(|u| format!("{} := {}", u.target, u.source))
            .collect();
        let _ = write!(s, "  trans {}: {} ->", c.name, c.guard);
        if !ups.is_empty() {
            let _ = write!(s, " {}", ups.join(", "));
        }
        s.push('\n');
    }
    for p in &t.props {
        let _ = writeln!(s, "  prop {} := {}", p.name, p.expr);
    }
    s.push_str("}\n");
    s
}

/// Groups consecutive items sharing a key: `node p0 p1 : Phil`.
fn runs<'a>(items: impl Iterator<Item = (&'a str, &'a str)>) -> Vec<(Vec<&'a str>, &'a str)> {
    let mut out: Vec<(Vec<&str>, &str)> = Vec::new();
    for (name, key) in items {
        match out.last_mut() {
            Some((names, k)) if *k == key => names.push(name),
            _ => out.push((vec![name], key)),
        }
    }
    out
}

fn network(n: &ProcessNetwork) -> String {
    let mut s = format!("network {} {{\n", n.name);
    for (names, tpl) in runs(n.nodes().iter().map(|x| (x.name.as_str(), x.template.name.as_str()))) {
        let _ = writeln!(s, "  node {} : {tpl}", names.join(" "));
    }
    for (names, dom) in runs(n.edges().iter().map(|e| (e.name.as_str(), e.domain.name()))) {
        let _ = writeln!(s, "  edge {} : {dom}", names.join(" "));
    }
    for node in n.nodes() {
        if node.bindings.is_empty() {
            continue;
        }
        let bs: Vec<String> = node
            .bindings
            .iter()
            .map(|b| {
                let arrow = match b.declared {
                    None => "=",
                    Some(PortMode::Read) => "<-",
                    Some(PortMode::Write) => "->",
                    Some(PortMode::ReadWrite) => "<->",
                };
                format!("{} {arrow} {}", b.port, n.edge(b.edge).name)
            })
            .collect();
        let _ = writeln!(s, "  connect {} {{ {} }}", node.name, bs.join(", "));
    }
    if let Some(c) = n.initially() {
        let _ = writeln!(s, "  initially {}", c.expr);
    }
    s.push_str("}\n");
    s
}

fn tiles(t: &TileSet) -> String {
    let mut s = format!("tiles {} {{\n", t.name);
    for tile in &t.tiles {
        let dirs: Vec<String> = tile
            .dirs
            .iter()
            .map(|d| format!("dir {} -> {}.{}", d.dir, d.neighbor_type, d.neighbor_dir))
            .collect();
        let _ = writeln!(s, "  tile {} {{ {} }}", tile.type_name(), dirs.join("; "));
    }
    s.push_str("}\n");
    s
}
