//! The local space H_n^θ and the node-relative global space G_n.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::lts::{LabeledTs, LtsBuilder, TransitionLabel};
use crate::model::{
    Expr, GlobalState, LocalState, ModelError, NodeId, Pred, ProcessNetwork, Template, Value,
};
use crate::mucalc::{Formula, FormulaError};

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("θ has no set for node {0}")]
    MissingNode(NodeId),
    #[error("interference moves {node} from {from} to {to}, outside θ")]
    NotClosed { node: String, from: String, to: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Named predicates over one template's variables, evaluated on local states.
#[derive(Debug, Clone, Default)]
pub struct PropositionSet {
    entries: Vec<(String, Pred)>,
}

impl PropositionSet {
    /// The `prop` declarations of the template.
    pub fn for_template(tpl: &Template) -> Self {
        Self {
            entries: tpl
                .props
                .iter()
                .map(|p| (p.name.clone(), p.pred().clone()))
                .collect(),
        }
    }

    /// Template props plus the comparison atoms of `formulas`, keyed as
    /// [`Formula::atom_key`] renders them.
    pub fn for_formulas<'a>(
        tpl: &Template,
        formulas: impl IntoIterator<Item = &'a Formula>,
    ) -> Result<Self, FormulaError> {
        let mut set = Self::for_template(tpl);
        for f in formulas {
            set.add_atoms(tpl, f)?;
        }
        Ok(set)
    }

    pub fn add_atoms(&mut self, tpl: &Template, f: &Formula) -> Result<(), FormulaError> {
        for atom in f.atoms() {
            let key = atom.atom_key().expect("atoms have keys");
            if self.contains(&key) {
                continue;
            }
            match atom {
                Formula::Cmp { lhs, op, rhs } => {
                    let pred = tpl
                        .compile(&Expr::cmp(lhs, op, rhs))
                        .map_err(|e| FormulaError::BadComparison(e.to_string()))?;
                    self.entries.push((key, pred));
                }
                _ => return Err(FormulaError::UnknownProposition(key)),
            }
        }
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| n == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn holds(&self, name: &str, s: &LocalState) -> Option<bool> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, p)| p.eval(&s.values))
    }

    pub fn labels_of(&self, s: &LocalState) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, p)| p.eval(&s.values))
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

/// Visible labels of node `n`: self, then one port per neighbor.
fn alphabet(net: &ProcessNetwork, n: NodeId) -> Vec<TransitionLabel> {
    let mut out = vec![TransitionLabel::Own];
    out.extend(
        net.neighbors(n)
            .iter()
            .filter_map(|&m| net.neighbor_port(n, m))
            .map(TransitionLabel::port),
    );
    out
}

/// H_n^θ: states θ_n; own steps labeled self; neighbor moves from joint
/// θ-states labeled by n's port toward the neighbor. Interference that leaves
/// the state of n unchanged is omitted. Initial states are the seed states of
/// n; deadlocks get a τ self-loop.
pub fn build_local_space(
    net: &ProcessNetwork,
    theta: &[BTreeSet<LocalState>],
    n: NodeId,
    props: &PropositionSet,
) -> Result<LabeledTs<LocalState>, SpaceError> {
    net.check_node(n)?;
    let th = theta.get(n.0).ok_or(SpaceError::MissingNode(n))?;
    let mut b = LtsBuilder::new(alphabet(net, n));
    for name in props.names() {
        b.declare_prop(name);
    }
    for s in th {
        let id = b.add_state(s.clone(), net.show_local(s));
        for p in props.labels_of(s) {
            b.set_prop(id, p);
        }
    }
    for s in net.seed_local_states(n)? {
        if let Some(id) = b.state_id(&s) {
            b.mark_initial(id);
        }
    }
    let id = |b: &LtsBuilder<LocalState>, s: &LocalState, from: &LocalState| {
        b.state_id(s).ok_or_else(|| SpaceError::NotClosed {
            node: net.node(n).name.clone(),
            from: net.show_local(from),
            to: net.show_local(s),
        })
    };
    // Neighbor states indexed by their values on the edges shared with n.
    let mut neighbors = Vec::new();
    for &m in net.neighbors(n) {
        let label = TransitionLabel::port(net.neighbor_port(n, m).expect("neighbors share a port"));
        let slots = net.shared_slots(n, m);
        let mut index: HashMap<Vec<Value>, Vec<&LocalState>> = HashMap::new();
        for u in theta.get(m.0).ok_or(SpaceError::MissingNode(m))? {
            index.entry(slots.iter().map(|&(_, b)| u.values[b]).collect()).or_default().push(u);
        }
        neighbors.push((m, label, slots, index));
    }
    for s in th {
        let src = b.state_id(s).expect("added");
        for (_, t) in net.step_successors(n, s) {
            let dst = id(&b, &t, s)?;
            b.add_transition(src, TransitionLabel::Own, dst);
        }
        for (m, label, slots, index) in &neighbors {
            let key: Vec<Value> = slots.iter().map(|&(a, _)| s.values[a]).collect();
            for u in index.get(&key).into_iter().flatten() {
                for (_, u2) in net.step_successors(*m, u) {
                    let mut t = s.clone();
                    for &(a, b) in slots {
                        t.values[a] = u2.values[b];
                    }
                    if t != *s {
                        let dst = id(&b, &t, s)?;
                        b.add_transition(src, label.clone(), dst);
                    }
                }
            }
        }
    }
    Ok(b.finish().ensure_total().0)
}

/// G_n: the reachable global system with steps of n labeled self, neighbor
/// moves that change n's local state labeled by n's port toward the neighbor,
/// and everything else τ. States carry the propositions of their n-projection.
pub fn build_global_space(
    net: &ProcessNetwork,
    n: NodeId,
    props: &PropositionSet,
    cap: usize,
) -> Result<LabeledTs<GlobalState>, SpaceError> {
    net.check_node(n)?;
    let reach = net.reachable(cap)?;
    let mut b = LtsBuilder::new(alphabet(net, n));
    for name in props.names() {
        b.declare_prop(name);
    }
    for g in &reach.states {
        let id = b.add_state(g.clone(), net.show_global(g));
        for p in props.labels_of(&net.project(g, n)) {
            b.set_prop(id, p);
        }
    }
    for &i in &reach.initial {
        b.mark_initial(i);
    }
    for (src, actor, _, dst) in &reach.transitions {
        let label = if *actor == n {
            TransitionLabel::Own
        } else if net.are_neighbors(n, *actor)
            && net.project(&reach.states[*src], n) != net.project(&reach.states[*dst], n)
        {
            TransitionLabel::port(net.neighbor_port(n, *actor).expect("neighbors share a port"))
        } else {
            TransitionLabel::Tau
        };
        b.add_transition(*src, label, *dst);
    }
    Ok(b.finish().ensure_total().0)
}
