//! The `.lmu` model language: domains, templates, networks, tiles and formulas.

mod lexer;
mod parser;
mod printer;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::model::{Binding, Domain, Edge, EdgeId, ModelError, NodeSpec, ProcessNetwork, Template, VariableDecl};
use crate::mucalc::{Formula, FormulaError};
use crate::tiles::{Tile, TileDir, TileError, TileSet};
use parser::{DomainRef, Parser, RawItem, RawNetwork, RawTemplate, RawTiles};

pub use printer::pretty_print;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub col_start: usize,
    /// Exclusive; may lie on a later line than `line` for multi-line items.
    pub col_end: usize,
    /// Byte offsets into the input.
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    /// Span from the start of `self` to the end of `other`.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            line: self.line,
            col_start: self.col_start,
            col_end: other.col_end,
            start: self.start,
            end: other.end.max(self.start),
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col_start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DiagnosticKind {
    Lexical,
    Syntax,
    UnresolvedName,
    /// A guard or copy reads a write-only port, or an update writes a read-only one.
    ModeViolation,
    /// A `connect` arrow disagrees with the port's mode.
    AssignmentViolation,
    Duplicate,
    Monotonicity,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub span: SourceSpan,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}: {}", self.span, self.kind, self.message)
    }
}

impl std::error::Error for Diagnostic {}

/// A list of diagnostics, displayed one per line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

fn model_kind(e: &ModelError) -> DiagnosticKind {
    use ModelError as M;
    match e {
        M::ReadsWriteOnly { .. } | M::WritesReadOnly { .. } => DiagnosticKind::ModeViolation,
        M::AssignmentViolation { .. } => DiagnosticKind::AssignmentViolation,
        M::UnknownVariable(_)
        | M::UnknownConstant { .. }
        | M::UnknownPort { .. }
        | M::UnknownEdge(_)
        | M::UnknownNode(_) => DiagnosticKind::UnresolvedName,
        M::Duplicate { .. } | M::DuplicateValue { .. } | M::EdgeBoundTwice { .. } => {
            DiagnosticKind::Duplicate
        }
        _ => DiagnosticKind::Invalid,
    }
}

fn formula_kind(e: &FormulaError) -> DiagnosticKind {
    match e {
        FormulaError::NonMonotone(_) => DiagnosticKind::Monotonicity,
        FormulaError::UnknownLabel(_)
        | FormulaError::UnknownProposition(_)
        | FormulaError::UnboundVariable(_)
        | FormulaError::BadComparison(_) => DiagnosticKind::UnresolvedName,
        _ => DiagnosticKind::Invalid,
    }
}

/// A parsed and resolved model file. Items keep declaration order per category.
#[derive(Debug, Clone, Default)]
pub struct ModelDocument {
    pub domains: Vec<Domain>,
    pub templates: Vec<Arc<Template>>,
    pub networks: Vec<ProcessNetwork>,
    pub tile_sets: Vec<TileSet>,
    /// Template-independent formulas; see [`ModelDocument::formula_for`].
    pub formulas: Vec<(String, Formula)>,
    /// Keyed by `"<category> <name>"`, e.g. `"network ring3"`.
    pub spans: BTreeMap<String, SourceSpan>,
}

/// Structural equality; spans are ignored.
impl PartialEq for ModelDocument {
    fn eq(&self, other: &Self) -> bool {
        self.domains == other.domains
            && self.templates == other.templates
            && self.networks == other.networks
            && self.tile_sets == other.tile_sets
            && self.formulas == other.formulas
    }
}

impl Eq for ModelDocument {}

impl ModelDocument {
    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
            && self.templates.is_empty()
            && self.networks.is_empty()
            && self.tile_sets.is_empty()
            && self.formulas.is_empty()
    }

    pub fn domain(&self, name: &str) -> Option<&Domain> {
        self.domains.iter().find(|d| d.name() == name)
    }

    pub fn template(&self, name: &str) -> Option<&Arc<Template>> {
        self.templates.iter().find(|t| t.name == name)
    }

    pub fn network(&self, name: &str) -> Option<&ProcessNetwork> {
        self.networks.iter().find(|n| n.name == name)
    }

    pub fn tile_set(&self, name: &str) -> Option<&TileSet> {
        self.tile_sets.iter().find(|t| t.name == name)
    }

    pub fn formula(&self, name: &str) -> Option<&Formula> {
        self.formulas.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    /// The named formula resolved against a template (default label sets filled).
    pub fn formula_for(&self, name: &str, template: &Template) -> Option<Result<Formula, FormulaError>> {
        self.formula(name).map(|f| f.resolve(template))
    }
}

/// Parses a model with `<input>` as the file name in spans.
pub fn parse_model(text: &str) -> Result<ModelDocument, Diagnostics> {
    parse_model_named(text, "<input>")
}

pub fn parse_model_named(text: &str, file: &str) -> Result<ModelDocument, Diagnostics> {
    let toks = lexer::lex(text, file).map_err(|d| Diagnostics(vec![d]))?;
    let items = Parser::new(text, toks)
        .document()
        .map_err(|d| Diagnostics(vec![d]))?;
    Resolver::default().run(items)
}

/// Parses a formula without binding it to a template.
pub fn parse_formula_unresolved(text: &str) -> Result<Formula, Diagnostic> {
    let toks = lexer::lex(text, "<formula>")?;
    let mut p = Parser::new(text, toks);
    let f = p.formula()?;
    if !p.at_end() {
        return Err(p.trailing());
    }
    Ok(f)
}

/// Parses a formula and resolves labels, propositions and comparisons
/// against `template`.
pub fn parse_formula(text: &str, template: &Template) -> Result<Formula, Diagnostic> {
    let f = parse_formula_unresolved(text)?;
    f.resolve(template).map_err(|e| Diagnostic {
        kind: formula_kind(&e),
        message: e.to_string(),
        span: SourceSpan {
            file: "<formula>".into(),
            line: 1,
            col_start: 1,
            col_end: text.len() + 1,
            start: 0,
            end: text.len(),
        },
    })
}

#[derive(Default)]
struct Resolver {
    doc: ModelDocument,
    diags: Vec<Diagnostic>,
    /// Items that failed to resolve; references to them are not reported again.
    failed: std::collections::BTreeSet<String>,
}

impl Resolver {
    fn diag(&mut self, kind: DiagnosticKind, message: String, span: &SourceSpan) {
        self.diags.push(Diagnostic {
            kind,
            message,
            span: span.clone(),
        });
    }

    fn claim(&mut self, category: &str, name: &str, span: &SourceSpan) -> bool {
        let key = format!("{category} {name}");
        if self.doc.spans.contains_key(&key) {
            self.diag(DiagnosticKind::Duplicate, format!("duplicate {category} `{name}`"), span);
            return false;
        }
        self.doc.spans.insert(key, span.clone());
        true
    }

    fn run(mut self, items: Vec<(RawItem, SourceSpan)>) -> Result<ModelDocument, Diagnostics> {
        // Categories resolve in dependency order so forward references work.
        for (item, span) in &items {
            if let RawItem::Domain(name, values) = item {
                if self.claim("domain", name, span) {
                    match Domain::new(name.clone(), values.clone()) {
                        Ok(d) => self.doc.domains.push(d),
                        Err(e) => {
                            self.failed.insert(format!("domain {name}"));
                            self.diag(model_kind(&e), e.to_string(), span)
                        }
                    }
                }
            }
        }
        for (item, span) in &items {
            if let RawItem::Template(t) = item {
                if self.claim("template", &t.name, span) && !self.template(t, span) {
                    self.failed.insert(format!("template {}", t.name));
                }
            }
        }
        for (item, span) in &items {
            if let RawItem::Network(n) = item {
                if self.claim("network", &n.name, span) {
                    self.network(n, span);
                }
            }
        }
        for (item, span) in &items {
            if let RawItem::Tiles(t) = item {
                if self.claim("tiles", &t.name, span) {
                    self.tiles(t, span);
                }
            }
        }
        for (item, span) in &items {
            if let RawItem::Formula(name, f) = item {
                if self.claim("formula", name, span) {
                    match f.check_monotone() {
                        Ok(()) => self.doc.formulas.push((name.clone(), f.clone())),
                        Err(e) => self.diag(formula_kind(&e), e.to_string(), span),
                    }
                }
            }
        }
        if self.diags.is_empty() {
            Ok(self.doc)
        } else {
            Err(Diagnostics(self.diags))
        }
    }

    fn unknown(&mut self, category: &str, name: &str, span: &SourceSpan) {
        if !self.failed.contains(&format!("{category} {name}")) {
            self.diag(DiagnosticKind::UnresolvedName, format!("unknown {category} `{name}`"), span);
        }
    }

    fn template(&mut self, t: &RawTemplate, span: &SourceSpan) -> bool {
        let mut vars = Vec::with_capacity(t.vars.len());
        for v in &t.vars {
            let (domain, inline) = match &v.domain {
                DomainRef::Named(d, dspan) => match self.doc.domain(d) {
                    Some(dom) => (dom.clone(), false),
                    None => {
                        self.unknown("domain", d, dspan);
                        return false;
                    }
                },
                DomainRef::Inline(values) => match Domain::new(v.name.clone(), values.clone()) {
                    Ok(d) => (d, true),
                    Err(e) => {
                        self.diag(model_kind(&e), e.to_string(), span);
                        return false;
                    }
                },
            };
            let mut decl = match v.mode {
                Some(m) => VariableDecl::port(v.name.clone(), domain, m),
                None => VariableDecl::internal(v.name.clone(), domain),
            };
            decl.inline_domain = inline;
            vars.push(decl);
        }
        let init = t.init.clone().unwrap_or(crate::model::Expr::Bool(true));
        match Template::new(t.name.clone(), vars, init, t.commands.clone(), t.props.clone()) {
            Ok(tpl) => {
                self.doc.templates.push(Arc::new(tpl));
                true
            }
            Err(e) => {
                self.diag(model_kind(&e), format!("template `{}`: {e}", t.name), span);
                false
            }
        }
    }

    fn network(&mut self, n: &RawNetwork, span: &SourceSpan) {
        let mut edges = Vec::with_capacity(n.edges.len());
        let mut edge_ids = HashMap::new();
        for (name, dom, esp) in &n.edges {
            let Some(domain) = self.doc.domain(dom).cloned() else {
                self.unknown("domain", dom, esp);
                return;
            };
            edge_ids.insert(name.clone(), EdgeId(edges.len()));
            edges.push(Edge {
                name: name.clone(),
                domain,
            });
        }
        let mut connects: HashMap<&str, &parser::RawConnect> = HashMap::new();
        for c in &n.connects {
            if !n.nodes.iter().any(|(x, _, _)| *x == c.node) {
                self.diag(DiagnosticKind::UnresolvedName, format!("unknown node `{}`", c.node), &c.span);
                return;
            }
            if connects.insert(&c.node, c).is_some() {
                self.diag(DiagnosticKind::Duplicate, format!("node `{}` connected twice", c.node), &c.span);
                return;
            }
        }
        let mut nodes = Vec::with_capacity(n.nodes.len());
        for (name, tpl, nsp) in &n.nodes {
            let Some(template) = self.doc.template(tpl).cloned() else {
                self.unknown("template", tpl, nsp);
                return;
            };
            let mut bindings = Vec::new();
            if let Some(c) = connects.get(name.as_str()) {
                for (port, dir, edge, bsp) in &c.bindings {
                    let Some(&e) = edge_ids.get(edge) else {
                        self.diag(DiagnosticKind::UnresolvedName, format!("unknown edge `{edge}`"), bsp);
                        return;
                    };
                    bindings.push(Binding {
                        port: port.clone(),
                        edge: e,
                        declared: *dir,
                    });
                }
            }
            nodes.push(NodeSpec {
                name: name.clone(),
                template,
                bindings,
            });
        }
        match ProcessNetwork::new(n.name.clone(), nodes, edges, n.initially.clone()) {
            Ok(net) => self.doc.networks.push(net),
            Err(e) => {
                // Point at the offending connect line when there is one.
                let at = match &e {
                    ModelError::AssignmentViolation { node, .. }
                    | ModelError::UnknownPort { node, .. }
                    | ModelError::InternalBound { node, .. }
                    | ModelError::UnboundPort { node, .. }
                    | ModelError::EdgeBoundTwice { node, .. } => {
                        connects.get(node.as_str()).map(|c| c.span.clone())
                    }
                    _ => None,
                };
                let at = at.unwrap_or_else(|| span.clone());
                self.diag(model_kind(&e), format!("network `{}`: {e}", n.name), &at);
            }
        }
    }

    fn tiles(&mut self, t: &RawTiles, span: &SourceSpan) {
        let mut tiles = Vec::with_capacity(t.tiles.len());
        for raw in &t.tiles {
            let Some(template) = self.doc.template(&raw.ty).cloned() else {
                self.unknown("template", &raw.ty, &raw.span);
                return;
            };
            tiles.push(Tile {
                template,
                dirs: raw
                    .dirs
                    .iter()
                    .map(|(d, nt, nd)| TileDir {
                        dir: d.clone(),
                        neighbor_type: nt.clone(),
                        neighbor_dir: nd.clone(),
                    })
                    .collect(),
            });
        }
        match TileSet::new(t.name.clone(), tiles) {
            Ok(ts) => self.doc.tile_sets.push(ts),
            Err(e) => {
                let kind = match e {
                    TileError::DuplicateTile(_) | TileError::DuplicateDirection { .. } => {
                        DiagnosticKind::Duplicate
                    }
                    TileError::UnknownType { .. } | TileError::UnknownDirection { .. } => {
                        DiagnosticKind::UnresolvedName
                    }
                    _ => DiagnosticKind::Invalid,
                };
                self.diag(kind, format!("tiles `{}`: {e}", t.name), span);
            }
        }
    }
}

#[cfg(test)]
mod tests;
