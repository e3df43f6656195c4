use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::model::{CmpOp, Template};

use super::FormulaError;

/// Transition label named in a formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Label {
    /// A step of the node itself.
    Own,
    /// Interference arriving through the named port.
    Port(String),
    /// Any non-τ label.
    Any,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Own => f.write_str("self"),
            Label::Port(p) => f.write_str(p),
            Label::Any => f.write_str("any"),
        }
    }
}

/// Local mu-calculus formula. The core connectives are `True`, `False`,
/// `Prop`, `Cmp`, `Var`, `Not`, `And`, `EUntil` and `Mu`; everything else is
/// surface sugar removed by [`Formula::expand_derived`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Formula {
    True,
    False,
    Prop(String),
    /// Inline comparison over the node's variables, e.g. `xin == tok`.
    Cmp {
        lhs: String,
        op: CmpOp,
        rhs: String,
    },
    Var(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    EUntil {
        hold: Box<Formula>,
        label: Label,
        goal: Box<Formula>,
    },
    AWeak {
        hold: Box<Formula>,
        label: Label,
        goal: Box<Formula>,
    },
    Mu(String, Box<Formula>),
    Nu(String, Box<Formula>),
    AG(Option<Vec<Label>>, Box<Formula>),
    AF(Option<Vec<Label>>, Box<Formula>),
    EF(Option<Vec<Label>>, Box<Formula>),
    EG(Option<Vec<Label>>, Box<Formula>),
}

use Formula as F;

fn bx(f: Formula) -> Box<Formula> {
    Box::new(f)
}

impl Formula {
    pub fn prop(name: impl Into<String>) -> Self {
        F::Prop(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        F::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        F::Not(bx(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        F::And(bx(a), bx(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        F::Or(bx(a), bx(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        F::Implies(bx(a), bx(b))
    }

    pub fn eu(hold: Formula, label: Label, goal: Formula) -> Self {
        F::EUntil {
            hold: bx(hold),
            label,
            goal: bx(goal),
        }
    }

    pub fn aw(hold: Formula, label: Label, goal: Formula) -> Self {
        F::AWeak {
            hold: bx(hold),
            label,
            goal: bx(goal),
        }
    }

    pub fn mu(z: impl Into<String>, body: Formula) -> Self {
        F::Mu(z.into(), bx(body))
    }

    pub fn nu(z: impl Into<String>, body: Formula) -> Self {
        F::Nu(z.into(), bx(body))
    }

    /// Key under which an atomic formula is looked up in a state labeling.
    pub fn atom_key(&self) -> Option<String> {
        match self {
            F::Prop(p) => Some(p.clone()),
            F::Cmp { lhs, op, rhs } => Some(format!("{lhs}{}{rhs}", op.symbol())),
            _ => None,
        }
    }

    fn children(&self) -> Vec<&Formula> {
        match self {
            F::True | F::False | F::Prop(_) | F::Cmp { .. } | F::Var(_) => vec![],
            F::Not(a)
            | F::Mu(_, a)
            | F::Nu(_, a)
            | F::AG(_, a)
            | F::AF(_, a)
            | F::EF(_, a)
            | F::EG(_, a) => vec![a],
            F::And(a, b) | F::Or(a, b) | F::Implies(a, b) => vec![a, b],
            F::EUntil { hold, goal, .. } | F::AWeak { hold, goal, .. } => vec![hold, goal],
        }
    }

    /// Atomic subformulas (`Prop` and `Cmp`), deduplicated.
    pub fn atoms(&self) -> Vec<Formula> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.walk(&mut |f| {
            if let Some(k) = f.atom_key() {
                if seen.insert(k) {
                    out.push(f.clone());
                }
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Every label named explicitly anywhere in the formula.
    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| match f {
            F::EUntil { label, .. } | F::AWeak { label, .. } => {
                out.insert(label.clone());
            }
            F::AG(Some(ls), _) | F::AF(Some(ls), _) | F::EF(Some(ls), _) | F::EG(Some(ls), _) => {
                out.extend(ls.iter().cloned());
            }
            _ => {}
        });
        out
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                F::Var(z) if !bound.contains(z) => {
                    out.insert(z.clone());
                }
                F::Mu(z, b) | F::Nu(z, b) => {
                    bound.push(z.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                other => other.children().into_iter().for_each(|c| go(c, bound, out)),
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Checks that every fixpoint body is syntactically monotone in its
    /// variable (even number of negations above each occurrence).
    pub fn check_monotone(&self) -> Result<(), FormulaError> {
        fn occ(f: &Formula, z: &str, neg: bool) -> bool {
            // true if some occurrence of z sits under an odd number of negations
            match f {
                F::Var(v) => v == z && neg,
                F::Not(a) => occ(a, z, !neg),
                F::Implies(a, b) => occ(a, z, !neg) || occ(b, z, neg),
                F::AWeak { hold, goal, .. } => occ(hold, z, neg) || occ(goal, z, neg),
                F::Mu(v, _) | F::Nu(v, _) if v == z => false,
                other => other.children().into_iter().any(|c| occ(c, z, neg)),
            }
        }
        let mut err = None;
        self.walk(&mut |f| {
            if let F::Mu(z, b) | F::Nu(z, b) = f {
                if err.is_none() && occ(b, z, false) {
                    err = Some(FormulaError::NonMonotone(z.clone()));
                }
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// Replaces free occurrences of `z` with `¬z`.
    fn negate_var(&self, z: &str) -> Formula {
        self.map_var(z, &|v| F::Not(bx(F::Var(v.to_string()))))
    }

    fn map_var(&self, z: &str, f: &dyn Fn(&str) -> Formula) -> Formula {
        let rec = |a: &Formula| bx(a.map_var(z, f));
        match self {
            F::Var(v) if v == z => f(v),
            F::Mu(v, _) | F::Nu(v, _) if v == z => self.clone(),
            F::True | F::False | F::Prop(_) | F::Cmp { .. } | F::Var(_) => self.clone(),
            F::Not(a) => F::Not(rec(a)),
            F::And(a, b) => F::And(rec(a), rec(b)),
            F::Or(a, b) => F::Or(rec(a), rec(b)),
            F::Implies(a, b) => F::Implies(rec(a), rec(b)),
            F::EUntil { hold, label, goal } => F::EUntil {
                hold: rec(hold),
                label: label.clone(),
                goal: rec(goal),
            },
            F::AWeak { hold, label, goal } => F::AWeak {
                hold: rec(hold),
                label: label.clone(),
                goal: rec(goal),
            },
            F::Mu(v, b) => F::Mu(v.clone(), rec(b)),
            F::Nu(v, b) => F::Nu(v.clone(), rec(b)),
            F::AG(l, a) => F::AG(l.clone(), rec(a)),
            F::AF(l, a) => F::AF(l.clone(), rec(a)),
            F::EF(l, a) => F::EF(l.clone(), rec(a)),
            F::EG(l, a) => F::EG(l.clone(), rec(a)),
        }
    }

    /// Rewrites into the core connectives. Label-set operators need an
    /// explicit label set (resolution fills in the default).
    pub fn expand_derived(&self) -> Result<Formula, FormulaError> {
        let mut fresh = 0usize;
        self.expand(&mut fresh)
    }

    fn expand(&self, fresh: &mut usize) -> Result<Formula, FormulaError> {
        let mut next_var = || {
            *fresh += 1;
            format!("%Z{fresh}")
        };
        Ok(match self {
            F::True | F::False | F::Prop(_) | F::Cmp { .. } | F::Var(_) => self.clone(),
            F::Not(a) => F::Not(bx(a.expand(fresh)?)),
            F::And(a, b) => F::And(bx(a.expand(fresh)?), bx(b.expand(fresh)?)),
            F::Or(a, b) => core_or(a.expand(fresh)?, b.expand(fresh)?),
            F::Implies(a, b) => core_or(F::not(a.expand(fresh)?), b.expand(fresh)?),
            F::EUntil { hold, label, goal } => F::EUntil {
                hold: bx(hold.expand(fresh)?),
                label: label.clone(),
                goal: bx(goal.expand(fresh)?),
            },
            // A[φ W_a ψ] = ¬E[¬φ U_a ¬ψ]
            F::AWeak { hold, label, goal } => F::not(F::EUntil {
                hold: bx(F::not(hold.expand(fresh)?)),
                label: label.clone(),
                goal: bx(F::not(goal.expand(fresh)?)),
            }),
            F::Mu(z, b) => F::Mu(z.clone(), bx(b.expand(fresh)?)),
            // νZ.φ(Z) = ¬μZ.¬φ(¬Z)
            F::Nu(z, b) => core_nu(z, b.expand(fresh)?),
            F::EF(ls, psi) => {
                let ls = labels_or_err(ls)?;
                let z = next_var();
                let psi = psi.expand(fresh)?;
                let steps = ls
                    .iter()
                    .map(|a| F::eu(F::True, a.clone(), F::var(&z)))
                    .reduce(core_or)
                    .expect("nonempty");
                F::mu(z, core_or(psi, steps))
            }
            F::AG(ls, phi) => {
                let ls = labels_or_err(ls)?;
                let z = next_var();
                let phi = phi.expand(fresh)?;
                let steps = ls
                    .iter()
                    .map(|a| F::not(F::eu(F::True, a.clone(), F::not(F::var(&z)))))
                    .reduce(F::and)
                    .expect("nonempty");
                core_nu(&z, F::and(phi, steps))
            }
            F::EG(ls, psi) => {
                let ls = labels_or_err(ls)?;
                let z = next_var();
                let psi = psi.expand(fresh)?;
                let steps = ls
                    .iter()
                    .map(|a| F::eu(psi.clone(), a.clone(), F::var(&z)))
                    .reduce(core_or)
                    .expect("nonempty");
                core_nu(&z, F::and(psi, steps))
            }
            F::AF(ls, phi) => {
                let eg = F::EG(ls.clone(), bx(F::not((**phi).clone())));
                F::not(eg.expand(fresh)?)
            }
        })
    }

    /// The formula uses only core connectives.
    pub fn is_core(&self) -> bool {
        let mut ok = true;
        self.walk(&mut |f| {
            if matches!(
                f,
                F::Or(..)
                    | F::Implies(..)
                    | F::AWeak { .. }
                    | F::Nu(..)
                    | F::AG(..)
                    | F::AF(..)
                    | F::EF(..)
                    | F::EG(..)
            ) {
                ok = false;
            }
        });
        ok
    }

    /// Negation normal form: negations only on atoms, using the
    /// `E[U]`/`A[W]`, `μ`/`ν` and `∧`/`∨` duals.
    pub fn to_nnf(&self) -> Result<Formula, FormulaError> {
        Ok(self.expand_derived()?.nnf(false))
    }

    fn nnf(&self, neg: bool) -> Formula {
        match self {
            F::True => {
                if neg {
                    F::False
                } else {
                    F::True
                }
            }
            F::False => {
                if neg {
                    F::True
                } else {
                    F::False
                }
            }
            F::Prop(_) | F::Cmp { .. } | F::Var(_) => {
                if neg {
                    F::not(self.clone())
                } else {
                    self.clone()
                }
            }
            F::Not(a) => a.nnf(!neg),
            F::And(a, b) if neg => F::or(a.nnf(true), b.nnf(true)),
            F::And(a, b) => F::and(a.nnf(false), b.nnf(false)),
            F::Or(a, b) if neg => F::and(a.nnf(true), b.nnf(true)),
            F::Or(a, b) => F::or(a.nnf(false), b.nnf(false)),
            F::EUntil { hold, label, goal } if neg => {
                F::aw(hold.nnf(true), label.clone(), goal.nnf(true))
            }
            F::EUntil { hold, label, goal } => {
                F::eu(hold.nnf(false), label.clone(), goal.nnf(false))
            }
            F::AWeak { hold, label, goal } if neg => {
                F::eu(hold.nnf(true), label.clone(), goal.nnf(true))
            }
            F::AWeak { hold, label, goal } => {
                F::aw(hold.nnf(false), label.clone(), goal.nnf(false))
            }
            // ¬μZ.φ(Z) = νZ.¬φ(¬Z)
            F::Mu(z, b) if neg => F::nu(z.clone(), b.negate_var(z).nnf(true)),
            F::Mu(z, b) => F::mu(z.clone(), b.nnf(false)),
            F::Nu(z, b) if neg => F::mu(z.clone(), b.negate_var(z).nnf(true)),
            F::Nu(z, b) => F::nu(z.clone(), b.nnf(false)),
            F::Implies(..) | F::AG(..) | F::AF(..) | F::EF(..) | F::EG(..) => {
                unreachable!("nnf runs on expanded formulas")
            }
        }
    }

    /// Universal: the negation normal form contains no `E[U]`.
    pub fn is_universal(&self) -> Result<bool, FormulaError> {
        let nnf = self.to_nnf()?;
        let mut universal = true;
        nnf.walk(&mut |f| {
            if matches!(f, F::EUntil { .. }) {
                universal = false;
            }
        });
        Ok(universal)
    }

    /// Binds names against a template: checks propositions, comparisons and
    /// labels, fills default label sets with `self` plus every port, makes
    /// bound variable names distinct, and checks monotonicity.
    pub fn resolve(&self, template: &Template) -> Result<Formula, FormulaError> {
        let mut all: Vec<Label> = vec![Label::Own];
        let mut ports: Vec<&str> = template.port_names();
        ports.sort();
        all.extend(ports.iter().map(|p| Label::Port(p.to_string())));
        let mut used = BTreeSet::new();
        let out = self.resolve_in(template, &all, &mut Vec::new(), &mut used)?;
        out.check_monotone()?;
        if let Some(z) = out.free_vars().into_iter().next() {
            return Err(FormulaError::UnboundVariable(z));
        }
        Ok(out)
    }

    fn resolve_in(
        &self,
        tpl: &Template,
        all: &[Label],
        scope: &mut Vec<(String, String)>,
        used: &mut BTreeSet<String>,
    ) -> Result<Formula, FormulaError> {
        let check_label = |l: &Label| -> Result<Label, FormulaError> {
            match l {
                Label::Port(p) if !all.contains(l) => Err(FormulaError::UnknownLabel(p.clone())),
                _ => Ok(l.clone()),
            }
        };
        let labels = |ls: &Option<Vec<Label>>| -> Result<Option<Vec<Label>>, FormulaError> {
            Ok(Some(match ls {
                None => all.to_vec(),
                Some(ls) => ls.iter().map(check_label).collect::<Result<_, _>>()?,
            }))
        };
        macro_rules! r {
            ($e:expr) => {
                bx($e.resolve_in(tpl, all, scope, used)?)
            };
        }
        Ok(match self {
            F::True | F::False => self.clone(),
            F::Prop(p) => {
                if let Some((_, renamed)) = scope.iter().rev().find(|(orig, _)| orig == p) {
                    F::Var(renamed.clone())
                } else if tpl.prop(p).is_some() {
                    self.clone()
                } else {
                    return Err(FormulaError::UnknownProposition(p.clone()));
                }
            }
            F::Var(z) => match scope.iter().rev().find(|(orig, _)| orig == z) {
                Some((_, renamed)) => F::Var(renamed.clone()),
                None => return Err(FormulaError::UnboundVariable(z.clone())),
            },
            F::Cmp { lhs, op, rhs } => {
                tpl.compile(&crate::model::Expr::cmp(lhs.clone(), *op, rhs.clone()))
                    .map_err(|e| FormulaError::BadComparison(e.to_string()))?;
                self.clone()
            }
            F::Not(a) => F::Not(r!(a)),
            F::And(a, b) => F::And(r!(a), r!(b)),
            F::Or(a, b) => F::Or(r!(a), r!(b)),
            F::Implies(a, b) => F::Implies(r!(a), r!(b)),
            F::EUntil { hold, label, goal } => F::EUntil {
                hold: r!(hold),
                label: check_label(label)?,
                goal: r!(goal),
            },
            F::AWeak { hold, label, goal } => F::AWeak {
                hold: r!(hold),
                label: check_label(label)?,
                goal: r!(goal),
            },
            F::Mu(z, b) | F::Nu(z, b) => {
                let mut name = z.clone();
                let mut i = 0;
                while used.contains(&name) {
                    i += 1;
                    name = format!("{z}_{i}");
                }
                used.insert(name.clone());
                scope.push((z.clone(), name.clone()));
                let body = b.resolve_in(tpl, all, scope, used);
                scope.pop();
                let body = bx(body?);
                if matches!(self, F::Mu(..)) {
                    F::Mu(name, body)
                } else {
                    F::Nu(name, body)
                }
            }
            F::AG(ls, a) => F::AG(labels(ls)?, r!(a)),
            F::AF(ls, a) => F::AF(labels(ls)?, r!(a)),
            F::EF(ls, a) => F::EF(labels(ls)?, r!(a)),
            F::EG(ls, a) => F::EG(labels(ls)?, r!(a)),
        })
    }
}

fn labels_or_err(ls: &Option<Vec<Label>>) -> Result<&Vec<Label>, FormulaError> {
    match ls {
        Some(ls) if !ls.is_empty() => Ok(ls),
        Some(_) => Err(FormulaError::EmptyLabelSet),
        None => Err(FormulaError::UnresolvedLabelSet),
    }
}

fn core_or(a: Formula, b: Formula) -> Formula {
    F::not(F::and(F::not(a), F::not(b)))
}

fn core_nu(z: &str, body: Formula) -> Formula {
    F::not(F::mu(z.to_string(), F::not(body.negate_var(z))))
}

// Precedence: -> (1, right assoc) < || (2) < && (3) < prefix (4).
// Binders extend as far right as possible and are parenthesized inside operators.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn prec(x: &Formula) -> u8 {
            match x {
                F::Mu(..) | F::Nu(..) => 0,
                F::Implies(..) => 1,
                F::Or(..) => 2,
                F::And(..) => 3,
                _ => 4,
            }
        }
        fn child(f: &mut fmt::Formatter<'_>, x: &Formula, min: u8) -> fmt::Result {
            if prec(x) < min {
                write!(f, "({x})")
            } else {
                write!(f, "{x}")
            }
        }
        fn labels(f: &mut fmt::Formatter<'_>, ls: &Option<Vec<Label>>) -> fmt::Result {
            if let Some(ls) = ls {
                f.write_str("[")?;
                for (i, l) in ls.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{l}")?;
                }
                f.write_str("]")?;
            }
            f.write_str(" ")
        }
        match self {
            F::True => f.write_str("true"),
            F::False => f.write_str("false"),
            F::Prop(p) | F::Var(p) => f.write_str(p),
            F::Cmp { lhs, op, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
            F::Not(a) => {
                f.write_str("!")?;
                child(f, a, 4)
            }
            F::And(a, b) => {
                child(f, a, 3)?;
                f.write_str(" && ")?;
                child(f, b, 4)
            }
            F::Or(a, b) => {
                child(f, a, 2)?;
                f.write_str(" || ")?;
                child(f, b, 3)
            }
            F::Implies(a, b) => {
                child(f, a, 2)?;
                f.write_str(" -> ")?;
                child(f, b, 1)
            }
            F::EUntil { hold, label, goal } => write!(f, "E[{hold} U[{label}] {goal}]"),
            F::AWeak { hold, label, goal } => write!(f, "A[{hold} W[{label}] {goal}]"),
            F::Mu(z, b) => write!(f, "mu {z}. {b}"),
            F::Nu(z, b) => write!(f, "nu {z}. {b}"),
            F::AG(ls, a) | F::AF(ls, a) | F::EF(ls, a) | F::EG(ls, a) => {
                f.write_str(match self {
                    F::AG(..) => "AG",
                    F::AF(..) => "AF",
                    F::EF(..) => "EF",
                    _ => "EG",
                })?;
                labels(f, ls)?;
                child(f, a, 4)
            }
        }
    }
}
