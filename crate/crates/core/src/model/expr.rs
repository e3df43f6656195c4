use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{Domain, ModelError, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CmpOp {
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

/// Source-level boolean expression over variable names and symbolic constants.
///
/// A bare identifier in a comparison is a variable if the enclosing scope
/// declares it, otherwise a constant of the other operand's domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Expr {
    Bool(bool),
    Cmp { lhs: String, op: CmpOp, rhs: String },
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    /// True iff exactly `count` of `items` hold.
    Exactly { count: usize, items: Vec<Expr> },
}

impl Expr {
    pub fn cmp(lhs: impl Into<String>, op: CmpOp, rhs: impl Into<String>) -> Self {
        Expr::Cmp {
            lhs: lhs.into(),
            op,
            rhs: rhs.into(),
        }
    }

    pub fn eq(lhs: impl Into<String>, rhs: impl Into<String>) -> Self {
        Self::cmp(lhs, CmpOp::Eq, rhs)
    }

    pub fn and(self, other: Expr) -> Self {
        Expr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Expr) -> Self {
        Expr::Or(Box::new(self), Box::new(other))
    }

    pub fn negate(self) -> Self {
        Expr::Not(Box::new(self))
    }

    /// Splits a tree of `&&` into its conjuncts, left to right.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            match e {
                Expr::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Every identifier appearing in a comparison.
    pub fn identifiers(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit_cmps(&mut |lhs, _, rhs| {
            out.insert(lhs);
            out.insert(rhs);
        });
        out
    }

    pub fn visit_cmps<'a>(&'a self, f: &mut dyn FnMut(&'a str, CmpOp, &'a str)) {
        match self {
            Expr::Bool(_) => {}
            Expr::Cmp { lhs, op, rhs } => f(lhs, *op, rhs),
            Expr::Not(e) => e.visit_cmps(f),
            Expr::And(a, b) | Expr::Or(a, b) => {
                a.visit_cmps(f);
                b.visit_cmps(f);
            }
            Expr::Exactly { items, .. } => items.iter().for_each(|e| e.visit_cmps(f)),
        }
    }

    pub fn compile(&self, scope: &dyn Scope) -> Result<Pred, ModelError> {
        Ok(match self {
            Expr::Bool(b) => Pred::Const(*b),
            Expr::Cmp { lhs, op, rhs } => {
                let eq = *op == CmpOp::Eq;
                match (scope.lookup(lhs), scope.lookup(rhs)) {
                    (Some((a, da)), Some((b, db))) => {
                        if !da.same_values(db) {
                            return Err(ModelError::DomainMismatch {
                                lhs: lhs.clone(),
                                rhs: rhs.clone(),
                            });
                        }
                        Pred::VarVar { a, b, eq }
                    }
                    (Some((var, dom)), None) => Pred::VarConst {
                        var,
                        value: constant(dom, rhs)?,
                        eq,
                    },
                    (None, Some((var, dom))) => Pred::VarConst {
                        var,
                        value: constant(dom, lhs)?,
                        eq,
                    },
                    (None, None) => return Err(ModelError::UnknownVariable(lhs.clone())),
                }
            }
            Expr::Not(e) => Pred::Not(Box::new(e.compile(scope)?)),
            Expr::And(a, b) => Pred::And(vec![a.compile(scope)?, b.compile(scope)?]),
            Expr::Or(a, b) => Pred::Or(vec![a.compile(scope)?, b.compile(scope)?]),
            Expr::Exactly { count, items } => Pred::Exactly(
                *count,
                items
                    .iter()
                    .map(|e| e.compile(scope))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }
}

fn constant(dom: &Domain, name: &str) -> Result<Value, ModelError> {
    dom.index_of(name).ok_or_else(|| ModelError::UnknownConstant {
        name: name.to_string(),
        domain: dom.name().to_string(),
    })
}

/// Name resolution for [`Expr::compile`].
pub trait Scope {
    /// Slot index and domain of a variable, if `name` denotes one.
    fn lookup(&self, name: &str) -> Option<(usize, &Domain)>;
}

// Precedence: `!` > `&&` > `||`. Used by the pretty printer as well as diagnostics.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn prec(e: &Expr) -> u8 {
            match e {
                Expr::Or(..) => 1,
                Expr::And(..) => 2,
                _ => 3,
            }
        }
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
            if prec(e) < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Cmp { lhs, op, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
            Expr::Not(e) => {
                f.write_str("!")?;
                child(f, e, 3)
            }
            Expr::And(a, b) => {
                child(f, a, 2)?;
                f.write_str(" && ")?;
                child(f, b, 3)
            }
            Expr::Or(a, b) => {
                child(f, a, 1)?;
                f.write_str(" || ")?;
                child(f, b, 2)
            }
            Expr::Exactly { count, items } => {
                if *count == 1 {
                    f.write_str("exactly_one(")?;
                } else {
                    write!(f, "exactly({count}, ")?;
                }
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Compiled predicate over a slice of values indexed by slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pred {
    Const(bool),
    VarConst { var: usize, value: Value, eq: bool },
    VarVar { a: usize, b: usize, eq: bool },
    Not(Box<Pred>),
    And(Vec<Pred>),
    Or(Vec<Pred>),
    Exactly(usize, Vec<Pred>),
}

impl Pred {
    pub fn eval(&self, vals: &[Value]) -> bool {
        match self {
            Pred::Const(b) => *b,
            Pred::VarConst { var, value, eq } => (vals[*var] == *value) == *eq,
            Pred::VarVar { a, b, eq } => (vals[*a] == vals[*b]) == *eq,
            Pred::Not(p) => !p.eval(vals),
            Pred::And(ps) => ps.iter().all(|p| p.eval(vals)),
            Pred::Or(ps) => ps.iter().any(|p| p.eval(vals)),
            Pred::Exactly(k, ps) => ps.iter().filter(|p| p.eval(vals)).count() == *k,
        }
    }

    pub fn slots(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_slots(&mut out);
        out
    }

    fn collect_slots(&self, out: &mut BTreeSet<usize>) {
        match self {
            Pred::Const(_) => {}
            Pred::VarConst { var, .. } => {
                out.insert(*var);
            }
            Pred::VarVar { a, b, .. } => {
                out.insert(*a);
                out.insert(*b);
            }
            Pred::Not(p) => p.collect_slots(out),
            Pred::And(ps) | Pred::Or(ps) | Pred::Exactly(_, ps) => {
                ps.iter().for_each(|p| p.collect_slots(out))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Vars(Vec<(&'static str, Domain)>);

    impl Scope for Vars {
        fn lookup(&self, name: &str) -> Option<(usize, &Domain)> {
            self.0
                .iter()
                .position(|(n, _)| *n == name)
                .map(|i| (i, &self.0[i].1))
        }
    }

    fn scope() -> Vars {
        let tok = Domain::new("Tok", ["none", "tok"]).unwrap();
        let st = Domain::new("st", ["T", "H", "E"]).unwrap();
        Vars(vec![("state", st), ("a", tok.clone()), ("b", tok)])
    }

    #[test]
    fn constants_resolve_against_the_variable_domain() {
        let p = Expr::eq("state", "H").compile(&scope()).unwrap();
        assert!(p.eval(&[1, 0, 0]));
        assert!(!p.eval(&[0, 0, 0]));
        let p = Expr::eq("tok", "a").compile(&scope()).unwrap();
        assert!(p.eval(&[0, 1, 0]));
    }

    #[test]
    fn compile_errors() {
        assert!(matches!(
            Expr::eq("state", "tok").compile(&scope()),
            Err(ModelError::UnknownConstant { .. })
        ));
        assert!(matches!(
            Expr::eq("state", "a").compile(&scope()),
            Err(ModelError::DomainMismatch { .. })
        ));
        assert!(matches!(
            Expr::eq("x", "y").compile(&scope()),
            Err(ModelError::UnknownVariable(_))
        ));
    }

    #[test]
    fn exactly_counts_true_items() {
        let e = Expr::Exactly {
            count: 1,
            items: vec![Expr::eq("a", "tok"), Expr::eq("b", "tok")],
        };
        let p = e.compile(&scope()).unwrap();
        assert!(p.eval(&[0, 1, 0]));
        assert!(!p.eval(&[0, 1, 1]));
        assert!(!p.eval(&[0, 0, 0]));
    }

    #[test]
    fn display_parenthesizes_by_precedence() {
        let e = Expr::eq("a", "tok")
            .or(Expr::eq("b", "tok"))
            .and(Expr::eq("state", "T").negate());
        assert_eq!(e.to_string(), "(a == tok || b == tok) && !state == T");
    }
}
