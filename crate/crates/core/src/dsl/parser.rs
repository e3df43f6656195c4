//! Recursive-descent parser producing an unresolved syntax tree.

use super::lexer::{Tok, Token};
use super::{Diagnostic, DiagnosticKind, SourceSpan};
use crate::model::{CmpOp, CommandSpec, Expr, PortMode, Update};
use crate::mucalc::{Formula, Label};

#[derive(Debug, Clone)]
pub(crate) enum DomainRef {
    Named(String, SourceSpan),
    Inline(Vec<String>),
}

#[derive(Debug, Clone)]
pub(crate) struct RawVar {
    pub name: String,
    pub domain: DomainRef,
    pub mode: Option<PortMode>,
}

#[derive(Debug, Clone)]
pub(crate) struct RawTemplate {
    pub name: String,
    pub vars: Vec<RawVar>,
    pub init: Option<Expr>,
    pub commands: Vec<CommandSpec>,
    pub props: Vec<(String, Expr)>,
}

#[derive(Debug, Clone)]
pub(crate) struct RawConnect {
    pub node: String,
    pub span: SourceSpan,
    pub bindings: Vec<(String, Option<PortMode>, String, SourceSpan)>,
}

#[derive(Debug, Clone)]
pub(crate) struct RawNetwork {
    pub name: String,
    pub nodes: Vec<(String, String, SourceSpan)>,
    pub edges: Vec<(String, String, SourceSpan)>,
    pub connects: Vec<RawConnect>,
    pub initially: Option<Expr>,
}

#[derive(Debug, Clone)]
pub(crate) struct RawTile {
    pub ty: String,
    pub span: SourceSpan,
    pub dirs: Vec<(String, String, String)>,
}

#[derive(Debug, Clone)]
pub(crate) struct RawTiles {
    pub name: String,
    pub tiles: Vec<RawTile>,
}

#[derive(Debug, Clone)]
pub(crate) enum RawItem {
    Domain(String, Vec<String>),
    Template(RawTemplate),
    Network(RawNetwork),
    Tiles(RawTiles),
    Formula(String, Formula),
}

pub(crate) struct Parser<'a> {
    text: &'a str,
    toks: Vec<Token>,
    pos: usize,
    /// Fixpoint variables in scope while parsing a formula.
    bound: Vec<String>,
}

type PResult<T> = Result<T, Diagnostic>;

const TOP_LEVEL: [&str; 5] = ["domain", "template", "network", "tiles", "formula"];

impl<'a> Parser<'a> {
    pub fn new(text: &'a str, toks: Vec<Token>) -> Self {
        Self {
            text,
            toks,
            pos: 0,
            bound: Vec::new(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> Diagnostic {
        Diagnostic {
            kind: DiagnosticKind::Syntax,
            message: format!("expected {expected}, found {}", self.peek().describe()),
            span: self.span(),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => Err(self.error("an identifier")),
        }
    }

    /// Identifier or numeral, as written.
    fn name(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(_) | Tok::Int(_) => {
                let sp = self.bump().span;
                Ok(self.text[sp.start..sp.end].to_string())
            }
            _ => Err(self.error("a name")),
        }
    }

    fn comma_names(&mut self, close: Tok) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        if *self.peek() == close {
            return Ok(out);
        }
        loop {
            out.push(self.name()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(out)
    }

    pub fn document(&mut self) -> PResult<Vec<(RawItem, SourceSpan)>> {
        let mut items = Vec::new();
        while *self.peek() != Tok::Eof {
            let start = self.span();
            let item = if self.eat_kw("domain") {
                let (name, _) = self.ident()?;
                self.expect(Tok::LBrace)?;
                let values = self.comma_names(Tok::RBrace)?;
                self.expect(Tok::RBrace)?;
                RawItem::Domain(name, values)
            } else if self.eat_kw("template") {
                RawItem::Template(self.template()?)
            } else if self.eat_kw("network") {
                RawItem::Network(self.network()?)
            } else if self.eat_kw("tiles") {
                RawItem::Tiles(self.tiles()?)
            } else if self.eat_kw("formula") {
                let (name, _) = self.ident()?;
                self.expect(Tok::Assign)?;
                RawItem::Formula(name, self.formula()?)
            } else {
                return Err(self.error("`domain`, `template`, `network`, `tiles` or `formula`"));
            };
            let end = self.toks[self.pos.saturating_sub(1)].span.clone();
            items.push((item, start.to(&end)));
        }
        Ok(items)
    }

    fn template(&mut self) -> PResult<RawTemplate> {
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut t = RawTemplate {
            name,
            vars: Vec::new(),
            init: None,
            commands: Vec::new(),
            props: Vec::new(),
        };
        loop {
            if self.eat_kw("internal") {
                let (vname, _) = self.ident()?;
                let domain = self.domain_ref()?;
                t.vars.push(RawVar {
                    name: vname,
                    domain,
                    mode: None,
                });
            } else if self.eat_kw("port") {
                let (vname, _) = self.ident()?;
                let domain = self.domain_ref()?;
                let mode = if self.eat_kw("read") {
                    PortMode::Read
                } else if self.eat_kw("write") {
                    PortMode::Write
                } else if self.eat_kw("readwrite") {
                    PortMode::ReadWrite
                } else {
                    return Err(self.error("`read`, `write` or `readwrite`"));
                };
                t.vars.push(RawVar {
                    name: vname,
                    domain,
                    mode: Some(mode),
                });
            } else if self.is_kw("init") {
                let sp = self.bump().span;
                if t.init.is_some() {
                    return Err(Diagnostic {
                        kind: DiagnosticKind::Duplicate,
                        message: "template declares `init` twice".into(),
                        span: sp,
                    });
                }
                t.init = Some(self.expr()?);
            } else if self.eat_kw("trans") {
                let (cname, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let guard = self.expr()?;
                self.expect(Tok::Arrow)?;
                let mut updates = Vec::new();
                while matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Assign {
                    let (target, _) = self.ident()?;
                    self.expect(Tok::Assign)?;
                    updates.push(Update::new(target, self.name()?));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                t.commands.push(CommandSpec::new(cname, guard, updates));
            } else if self.eat_kw("prop") {
                let (pname, _) = self.ident()?;
                self.expect(Tok::Assign)?;
                t.props.push((pname, self.expr()?));
            } else if self.eat(&Tok::RBrace) {
                return Ok(t);
            } else {
                return Err(self.error("`internal`, `port`, `init`, `trans`, `prop` or `}`"));
            }
            self.eat(&Tok::Semi);
        }
    }

    fn domain_ref(&mut self) -> PResult<DomainRef> {
        if self.eat(&Tok::LBrace) {
            let values = self.comma_names(Tok::RBrace)?;
            self.expect(Tok::RBrace)?;
            Ok(DomainRef::Inline(values))
        } else {
            self.expect(Tok::Colon)?;
            let (d, sp) = self.ident()?;
            Ok(DomainRef::Named(d, sp))
        }
    }

    fn network(&mut self) -> PResult<RawNetwork> {
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut n = RawNetwork {
            name,
            nodes: Vec::new(),
            edges: Vec::new(),
            connects: Vec::new(),
            initially: None,
        };
        loop {
            if self.is_kw("node") || self.is_kw("edge") {
                let is_node = self.is_kw("node");
                self.bump();
                let mut names = Vec::new();
                while matches!(self.peek(), Tok::Ident(_)) {
                    names.push(self.ident()?);
                }
                if names.is_empty() {
                    return Err(self.error("a name"));
                }
                self.expect(Tok::Colon)?;
                let (ty, _) = self.ident()?;
                let list = if is_node { &mut n.nodes } else { &mut n.edges };
                list.extend(names.into_iter().map(|(x, sp)| (x, ty.clone(), sp)));
            } else if self.eat_kw("connect") {
                let (node, span) = self.ident()?;
                self.expect(Tok::LBrace)?;
                let mut bindings = Vec::new();
                while *self.peek() != Tok::RBrace {
                    let (port, sp) = self.ident()?;
                    let dir = match self.bump().tok {
                        Tok::Eq => None,
                        Tok::LArrow => Some(PortMode::Read),
                        Tok::Arrow => Some(PortMode::Write),
                        Tok::BiArrow => Some(PortMode::ReadWrite),
                        _ => {
                            self.pos -= 1;
                            return Err(self.error("`=`, `<-`, `->` or `<->`"));
                        }
                    };
                    let (edge, esp) = self.ident()?;
                    bindings.push((port, dir, edge, sp.to(&esp)));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                n.connects.push(RawConnect {
                    node,
                    span,
                    bindings,
                });
            } else if self.is_kw("initially") {
                let sp = self.bump().span;
                if n.initially.is_some() {
                    return Err(Diagnostic {
                        kind: DiagnosticKind::Duplicate,
                        message: "network declares `initially` twice".into(),
                        span: sp,
                    });
                }
                n.initially = Some(self.expr()?);
            } else if self.eat(&Tok::RBrace) {
                return Ok(n);
            } else {
                return Err(self.error("`node`, `edge`, `connect`, `initially` or `}`"));
            }
            self.eat(&Tok::Semi);
        }
    }

    fn tiles(&mut self) -> PResult<RawTiles> {
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut tiles = Vec::new();
        while !self.eat(&Tok::RBrace) {
            self.expect_kw("tile")?;
            let (ty, span) = self.ident()?;
            self.expect(Tok::LBrace)?;
            let mut dirs = Vec::new();
            while !self.eat(&Tok::RBrace) {
                self.expect_kw("dir")?;
                let (d, _) = self.ident()?;
                self.expect(Tok::Arrow)?;
                let (nt, _) = self.ident()?;
                self.expect(Tok::Dot)?;
                let (nd, _) = self.ident()?;
                dirs.push((d, nt, nd));
                self.eat(&Tok::Semi);
            }
            tiles.push(RawTile { ty, span, dirs });
        }
        Ok(RawTiles { name, tiles })
    }

    // Expressions: `||` < `&&` < `!` < atoms.

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.expr_and()?;
        while self.eat(&Tok::OrOr) {
            e = e.or(self.expr_and()?);
        }
        Ok(e)
    }

    fn expr_and(&mut self) -> PResult<Expr> {
        let mut e = self.expr_unary()?;
        while self.eat(&Tok::AndAnd) {
            e = e.and(self.expr_unary()?);
        }
        Ok(e)
    }

    fn expr_unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Bang) {
            return Ok(self.expr_unary()?.negate());
        }
        if self.eat(&Tok::LParen) {
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(e);
        }
        if self.eat_kw("true") {
            return Ok(Expr::Bool(true));
        }
        if self.eat_kw("false") {
            return Ok(Expr::Bool(false));
        }
        if (self.is_kw("exactly_one") || self.is_kw("exactly")) && *self.peek_at(1) == Tok::LParen {
            let one = self.is_kw("exactly_one");
            self.bump();
            self.bump();
            let count = if one {
                1
            } else {
                let Tok::Int(k) = *self.peek() else {
                    return Err(self.error("a count"));
                };
                self.bump();
                self.expect(Tok::Comma)?;
                k
            };
            let mut items = vec![self.expr()?];
            while self.eat(&Tok::Comma) {
                items.push(self.expr()?);
            }
            self.expect(Tok::RParen)?;
            return Ok(Expr::Exactly { count, items });
        }
        let lhs = self.name()?;
        let op = self.cmp_op()?;
        let rhs = self.name()?;
        Ok(Expr::cmp(lhs, op, rhs))
    }

    fn cmp_op(&mut self) -> PResult<CmpOp> {
        match self.peek() {
            Tok::EqEq => {
                self.bump();
                Ok(CmpOp::Eq)
            }
            Tok::NotEq => {
                self.bump();
                Ok(CmpOp::Ne)
            }
            _ => Err(self.error("`==` or `!=`")),
        }
    }

    // Formulas: binder < `->` < `||` < `&&` < prefix.

    pub fn formula(&mut self) -> PResult<Formula> {
        if self.is_kw("mu") || self.is_kw("nu") {
            let mu = self.is_kw("mu");
            self.bump();
            let (z, _) = self.ident()?;
            self.expect(Tok::Dot)?;
            self.bound.push(z.clone());
            let body = self.formula();
            self.bound.pop();
            let body = body?;
            return Ok(if mu {
                Formula::mu(z, body)
            } else {
                Formula::nu(z, body)
            });
        }
        let lhs = self.formula_or()?;
        if self.eat(&Tok::Arrow) {
            return Ok(Formula::implies(lhs, self.formula()?));
        }
        Ok(lhs)
    }

    fn formula_or(&mut self) -> PResult<Formula> {
        let mut f = self.formula_and()?;
        while self.eat(&Tok::OrOr) || self.eat_kw("or") {
            f = Formula::or(f, self.formula_and()?);
        }
        Ok(f)
    }

    fn formula_and(&mut self) -> PResult<Formula> {
        let mut f = self.formula_unary()?;
        while self.eat(&Tok::AndAnd) || self.eat_kw("and") {
            f = Formula::and(f, self.formula_unary()?);
        }
        Ok(f)
    }

    fn label(&mut self) -> PResult<Label> {
        let (l, _) = self.ident()?;
        Ok(match l.as_str() {
            "self" => Label::Own,
            "any" => Label::Any,
            _ => Label::Port(l),
        })
    }

    fn label_set(&mut self) -> PResult<Option<Vec<Label>>> {
        if !self.eat(&Tok::LBracket) {
            return Ok(None);
        }
        let mut out = Vec::new();
        if *self.peek() != Tok::RBracket {
            loop {
                out.push(self.label()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(Some(out))
    }

    fn formula_unary(&mut self) -> PResult<Formula> {
        if self.is_kw("mu") || self.is_kw("nu") {
            return self.formula();
        }
        if self.eat(&Tok::Bang) || self.eat_kw("not") {
            return Ok(Formula::not(self.formula_unary()?));
        }
        if self.eat(&Tok::LParen) {
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        if self.eat_kw("true") {
            return Ok(Formula::True);
        }
        if self.eat_kw("false") {
            return Ok(Formula::False);
        }
        if (self.is_kw("E") || self.is_kw("A")) && *self.peek_at(1) == Tok::LBracket {
            let exist = self.is_kw("E");
            self.bump();
            self.bump();
            let hold = self.formula()?;
            self.expect_kw(if exist { "U" } else { "W" })?;
            let label = if self.eat(&Tok::LBracket) {
                let l = self.label()?;
                self.expect(Tok::RBracket)?;
                l
            } else {
                Label::Any
            };
            let goal = self.formula()?;
            self.expect(Tok::RBracket)?;
            return Ok(if exist {
                Formula::eu(hold, label, goal)
            } else {
                Formula::aw(hold, label, goal)
            });
        }
        for op in ["AG", "AF", "EF", "EG"] {
            if self.is_kw(op) {
                self.bump();
                let ls = self.label_set()?;
                let body = Box::new(self.formula_unary()?);
                return Ok(match op {
                    "AG" => Formula::AG(ls, body),
                    "AF" => Formula::AF(ls, body),
                    "EF" => Formula::EF(ls, body),
                    _ => Formula::EG(ls, body),
                });
            }
        }
        if let Tok::Ident(s) = self.peek() {
            if TOP_LEVEL.contains(&s.as_str()) {
                return Err(self.error("a formula"));
            }
        }
        let lhs = self.name()?;
        if matches!(self.peek(), Tok::EqEq | Tok::NotEq) {
            let op = self.cmp_op()?;
            let rhs = self.name()?;
            return Ok(Formula::Cmp { lhs, op, rhs });
        }
        Ok(if self.bound.contains(&lhs) {
            Formula::Var(lhs)
        } else {
            Formula::Prop(lhs)
        })
    }

    pub fn at_end(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn trailing(&self) -> Diagnostic {
        self.error("end of input")
    }
}
