//! Process networks and their interleaving semantics.

mod domain;
pub mod expr;
mod network;
mod semantics;
mod template;

use thiserror::Error;

pub use domain::{Domain, Value};
pub use expr::{CmpOp, Expr, Pred};
pub use network::{
    Binding, Edge, EdgeId, NetworkConstraint, Node, NodeId, NodeSpec, ProcessNetwork,
    CONSTRAINT_ENUM_CAP,
};
pub use semantics::{GlobalState, LocalState, Reachable, LOCAL_ENUM_CAP};
pub use template::{
    CommandSpec, GuardedCommand, PortMode, PropDef, Template, Update, UpdateSource, VarKind,
    VariableDecl,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("domain `{0}` has no values")]
    EmptyDomain(String),
    #[error("domain `{0}` has more than 256 values")]
    DomainTooLarge(String),
    #[error("value `{value}` appears twice in domain `{domain}`")]
    DuplicateValue { domain: String, value: String },
    #[error("duplicate {what} `{name}`")]
    Duplicate { what: &'static str, name: String },
    #[error("`{0}` is reserved")]
    ReservedName(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("`{name}` is not a value of domain `{domain}`")]
    UnknownConstant { name: String, domain: String },
    #[error("`{lhs}` and `{rhs}` range over different domains")]
    DomainMismatch { lhs: String, rhs: String },
    #[error("command `{command}` reads write-only port `{port}`")]
    ReadsWriteOnly { command: String, port: String },
    #[error("command `{command}` writes read-only port `{port}`")]
    WritesReadOnly { command: String, port: String },
    #[error("node `{node}` has no port `{port}`")]
    UnknownPort { node: String, port: String },
    #[error("node `{node}` binds internal variable `{var}` to an edge")]
    InternalBound { node: String, var: String },
    #[error("node `{node}` leaves port `{port}` unbound")]
    UnboundPort { node: String, port: String },
    #[error("node `{node}` binds edge `{edge}` to more than one port")]
    EdgeBoundTwice { node: String, edge: String },
    #[error(
        "node `{node}` connects edge `{edge}` as {} but port `{port}` is {}",
        declared.keyword(),
        mode.keyword()
    )]
    AssignmentViolation {
        node: String,
        port: String,
        edge: String,
        declared: PortMode,
        mode: PortMode,
    },
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge `{0}` is connected to no node")]
    DanglingEdge(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("({n}, {m}) is not a joint state: shared edge `{edge}` disagrees")]
    NotJoint { n: String, m: String, edge: String },
    #[error("`{n}` and `{m}` are not neighbors")]
    NotNeighbors { n: String, m: String },
    #[error("enumeration exceeds cap of {0} valuations")]
    EnumerationCap(usize),
    #[error("state count exceeds cap of {0}")]
    StateCap(usize),
    #[error("θ has {sets} sets for {nodes} nodes")]
    ThetaShape { sets: usize, nodes: usize },
}

/// Mixed-radix counter over `sizes`, last position fastest (lexicographic order).
pub(crate) fn product(sizes: &[usize]) -> impl Iterator<Item = Vec<Value>> + '_ {
    let empty = sizes.contains(&0);
    let mut cur: Option<Vec<Value>> = if empty {
        None
    } else {
        Some(vec![0; sizes.len()])
    };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut i = sizes.len();
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if usize::from(next[i]) + 1 < sizes[i] {
                next[i] += 1;
                cur = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_is_lexicographic_and_complete() {
        let all: Vec<_> = product(&[2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[5], vec![1, 2]);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }

    #[test]
    fn empty_product_has_one_element() {
        assert_eq!(product(&[]).count(), 1);
    }
}
