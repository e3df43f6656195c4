use std::collections::BTreeSet;

use serde::Serialize;

use super::expr::{Expr, Pred, Scope};
use super::{Domain, ModelError, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PortMode {
    Read,
    Write,
    ReadWrite,
}

impl PortMode {
    pub fn can_read(self) -> bool {
        matches!(self, PortMode::Read | PortMode::ReadWrite)
    }

    pub fn can_write(self) -> bool {
        matches!(self, PortMode::Write | PortMode::ReadWrite)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            PortMode::Read => "read",
            PortMode::Write => "write",
            PortMode::ReadWrite => "readwrite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum VarKind {
    Internal,
    Port(PortMode),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct VariableDecl {
    pub name: String,
    pub domain: Domain,
    /// Declared with an anonymous `{ ... }` domain rather than a named one.
    pub inline_domain: bool,
    pub kind: VarKind,
}

impl VariableDecl {
    pub fn internal(name: impl Into<String>, domain: Domain) -> Self {
        Self {
            name: name.into(),
            domain,
            inline_domain: false,
            kind: VarKind::Internal,
        }
    }

    pub fn port(name: impl Into<String>, domain: Domain, mode: PortMode) -> Self {
        Self {
            name: name.into(),
            domain,
            inline_domain: false,
            kind: VarKind::Port(mode),
        }
    }

    pub fn is_port(&self) -> bool {
        matches!(self.kind, VarKind::Port(_))
    }

    pub fn mode(&self) -> Option<PortMode> {
        match self.kind {
            VarKind::Port(m) => Some(m),
            VarKind::Internal => None,
        }
    }

    fn readable(&self) -> bool {
        self.mode().is_none_or(PortMode::can_read)
    }

    fn writable(&self) -> bool {
        self.mode().is_none_or(PortMode::can_write)
    }
}

/// `target := source`; `source` is a variable of the template or a constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Update {
    pub target: String,
    pub source: String,
}

impl Update {
    pub fn new(target: impl Into<String>, source: impl Into<String>) -> Self {
        Self {
            target: target.into(),
            source: source.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateSource {
    Const(Value),
    Var(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GuardedCommand {
    pub name: String,
    pub guard: Expr,
    pub updates: Vec<Update>,
    guard_pred: Pred,
    compiled: Vec<(usize, UpdateSource)>,
}

impl GuardedCommand {
    pub fn guard_pred(&self) -> &Pred {
        &self.guard_pred
    }

    pub fn compiled_updates(&self) -> &[(usize, UpdateSource)] {
        &self.compiled
    }

    pub fn enabled(&self, vals: &[Value]) -> bool {
        self.guard_pred.eval(vals)
    }

    /// Simultaneous assignment: every right-hand side reads the pre-state.
    pub fn apply(&self, vals: &[Value]) -> Vec<Value> {
        let mut next = vals.to_vec();
        for &(target, src) in &self.compiled {
            next[target] = match src {
                UpdateSource::Const(v) => v,
                UpdateSource::Var(i) => vals[i],
            };
        }
        next
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PropDef {
    pub name: String,
    pub expr: Expr,
    pred: Pred,
}

impl PropDef {
    pub fn pred(&self) -> &Pred {
        &self.pred
    }
}

/// A process template `(V, I, T)` plus named propositions over its variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template {
    pub name: String,
    pub vars: Vec<VariableDecl>,
    pub init: Expr,
    pub commands: Vec<GuardedCommand>,
    pub props: Vec<PropDef>,
    init_pred: Pred,
}

/// Unvalidated command as written in a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandSpec {
    pub name: String,
    pub guard: Expr,
    pub updates: Vec<Update>,
}

impl CommandSpec {
    pub fn new(name: impl Into<String>, guard: Expr, updates: Vec<Update>) -> Self {
        Self {
            name: name.into(),
            guard,
            updates,
        }
    }
}

struct AllVars<'a>(&'a [VariableDecl]);

impl Scope for AllVars<'_> {
    fn lookup(&self, name: &str) -> Option<(usize, &Domain)> {
        self.0
            .iter()
            .position(|v| v.name == name)
            .map(|i| (i, &self.0[i].domain))
    }
}

impl Template {
    pub fn new(
        name: impl Into<String>,
        vars: Vec<VariableDecl>,
        init: Expr,
        commands: Vec<CommandSpec>,
        props: Vec<(String, Expr)>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(ModelError::Duplicate {
                    what: "variable",
                    name: v.name.clone(),
                });
            }
        }
        let scope = AllVars(&vars);
        let init_pred = init.compile(&scope)?;

        let mut compiled_cmds = Vec::with_capacity(commands.len());
        for cmd in commands {
            if compiled_cmds
                .iter()
                .any(|c: &GuardedCommand| c.name == cmd.name)
            {
                return Err(ModelError::Duplicate {
                    what: "command",
                    name: cmd.name,
                });
            }
            let guard_pred = cmd.guard.compile(&scope)?;
            for ident in cmd.guard.identifiers() {
                if let Some((i, _)) = scope.lookup(ident) {
                    if !vars[i].readable() {
                        return Err(ModelError::ReadsWriteOnly {
                            command: cmd.name.clone(),
                            port: ident.to_string(),
                        });
                    }
                }
            }
            let mut compiled = Vec::with_capacity(cmd.updates.len());
            let mut targets = BTreeSet::new();
            for up in &cmd.updates {
                let (t, tdom) = scope
                    .lookup(&up.target)
                    .ok_or_else(|| ModelError::UnknownVariable(up.target.clone()))?;
                if !vars[t].writable() {
                    return Err(ModelError::WritesReadOnly {
                        command: cmd.name.clone(),
                        port: up.target.clone(),
                    });
                }
                if !targets.insert(t) {
                    return Err(ModelError::Duplicate {
                        what: "update target",
                        name: up.target.clone(),
                    });
                }
                let src = match scope.lookup(&up.source) {
                    Some((s, sdom)) => {
                        if !sdom.same_values(tdom) {
                            return Err(ModelError::DomainMismatch {
                                lhs: up.target.clone(),
                                rhs: up.source.clone(),
                            });
                        }
                        if !vars[s].readable() {
                            return Err(ModelError::ReadsWriteOnly {
                                command: cmd.name.clone(),
                                port: up.source.clone(),
                            });
                        }
                        UpdateSource::Var(s)
                    }
                    None => UpdateSource::Const(tdom.index_of(&up.source).ok_or_else(|| {
                        ModelError::UnknownConstant {
                            name: up.source.clone(),
                            domain: tdom.name().to_string(),
                        }
                    })?),
                };
                compiled.push((t, src));
            }
            compiled_cmds.push(GuardedCommand {
                name: cmd.name,
                guard: cmd.guard,
                updates: cmd.updates,
                guard_pred,
                compiled,
            });
        }

        let mut compiled_props: Vec<PropDef> = Vec::with_capacity(props.len());
        for (pname, expr) in props {
            if compiled_props.iter().any(|p| p.name == pname) {
                return Err(ModelError::Duplicate {
                    what: "proposition",
                    name: pname,
                });
            }
            if pname == "true" || pname == "false" {
                return Err(ModelError::ReservedName(pname));
            }
            let pred = expr.compile(&scope)?;
            compiled_props.push(PropDef {
                name: pname,
                expr,
                pred,
            });
        }

        Ok(Self {
            name,
            vars,
            init,
            commands: compiled_cmds,
            props: compiled_props,
            init_pred,
        })
    }

    pub fn init_pred(&self) -> &Pred {
        &self.init_pred
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn internal_vars(&self) -> impl Iterator<Item = (usize, &VariableDecl)> {
        self.vars.iter().enumerate().filter(|(_, v)| !v.is_port())
    }

    pub fn ports(&self) -> impl Iterator<Item = (usize, &VariableDecl)> {
        self.vars.iter().enumerate().filter(|(_, v)| v.is_port())
    }

    pub fn port_names(&self) -> Vec<&str> {
        self.ports().map(|(_, v)| v.name.as_str()).collect()
    }

    pub fn prop(&self, name: &str) -> Option<&PropDef> {
        self.props.iter().find(|p| p.name == name)
    }

    /// Compiles an expression in this template's variable scope.
    pub fn compile(&self, expr: &Expr) -> Result<Pred, ModelError> {
        expr.compile(&AllVars(&self.vars))
    }

    /// Internal variables of both templates agree position-wise on domains.
    pub fn same_internal_layout(&self, other: &Template) -> bool {
        let a: Vec<_> = self.internal_vars().map(|(_, v)| &v.domain).collect();
        let b: Vec<_> = other.internal_vars().map(|(_, v)| &v.domain).collect();
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.same_values(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok() -> Domain {
        Domain::new("Tok", ["none", "tok"]).unwrap()
    }

    fn vars() -> Vec<VariableDecl> {
        vec![
            VariableDecl::internal("st", Domain::new("st", ["a", "b"]).unwrap()),
            VariableDecl::port("r", tok(), PortMode::Read),
            VariableDecl::port("w", tok(), PortMode::Write),
        ]
    }

    #[test]
    fn guard_may_not_read_write_only_port() {
        let err = Template::new(
            "P",
            vars(),
            Expr::Bool(true),
            vec![CommandSpec::new("c", Expr::eq("w", "tok"), vec![])],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::ReadsWriteOnly { .. }));
    }

    #[test]
    fn update_may_not_target_read_only_port() {
        let err = Template::new(
            "P",
            vars(),
            Expr::Bool(true),
            vec![CommandSpec::new(
                "c",
                Expr::Bool(true),
                vec![Update::new("r", "tok")],
            )],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::WritesReadOnly { .. }));
    }

    #[test]
    fn updates_are_simultaneous() {
        let t = Template::new(
            "Swap",
            vec![
                VariableDecl::port("x", tok(), PortMode::ReadWrite),
                VariableDecl::port("y", tok(), PortMode::ReadWrite),
            ],
            Expr::Bool(true),
            vec![CommandSpec::new(
                "swap",
                Expr::Bool(true),
                vec![Update::new("x", "y"), Update::new("y", "x")],
            )],
            vec![],
        )
        .unwrap();
        assert_eq!(t.commands[0].apply(&[0, 1]), vec![1, 0]);
    }

    #[test]
    fn duplicate_update_target_rejected() {
        let err = Template::new(
            "P",
            vars(),
            Expr::Bool(true),
            vec![CommandSpec::new(
                "c",
                Expr::Bool(true),
                vec![Update::new("st", "a"), Update::new("st", "b")],
            )],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::Duplicate { .. }));
    }
}
