//! Labeled transition systems `(S, S0, R, L)` over arbitrary state payloads.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;

use fixedbitset::FixedBitSet;
use serde::Serialize;

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TransitionLabel {
    /// Step of the observed node.
    Own,
    /// Move of a neighbor, named by the observed node's port toward it.
    Port(String),
    /// Not attributable to the observed node or its neighbors.
    Tau,
}

impl TransitionLabel {
    pub fn port(name: impl Into<String>) -> Self {
        TransitionLabel::Port(name.into())
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, TransitionLabel::Tau)
    }
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::Own => f.write_str("self"),
            TransitionLabel::Port(p) => f.write_str(p),
            TransitionLabel::Tau => f.write_str("tau"),
        }
    }
}

/// Index into [`LabeledTs::labels`].
pub type LabelId = usize;

#[derive(Debug, Clone)]
pub struct LabeledTs<P> {
    states: Vec<P>,
    names: Vec<String>,
    index: HashMap<P, StateId>,
    initial: Vec<StateId>,
    labels: Vec<TransitionLabel>,
    transitions: Vec<(StateId, LabelId, StateId)>,
    succ: Vec<Vec<(LabelId, StateId)>>,
    pred: Vec<Vec<(LabelId, StateId)>>,
    props: BTreeMap<String, FixedBitSet>,
}

/// Incremental construction; [`LtsBuilder::finish`] sorts and indexes.
#[derive(Debug, Clone)]
pub struct LtsBuilder<P> {
    states: Vec<P>,
    names: Vec<String>,
    index: HashMap<P, StateId>,
    initial: Vec<StateId>,
    labels: Vec<TransitionLabel>,
    transitions: Vec<(StateId, LabelId, StateId)>,
    props: BTreeMap<String, Vec<StateId>>,
}

impl<P: Clone + Eq + Hash> LtsBuilder<P> {
    /// `alphabet` lists the visible labels the system declares; τ is always present.
    pub fn new(alphabet: impl IntoIterator<Item = TransitionLabel>) -> Self {
        let mut labels: Vec<TransitionLabel> = alphabet.into_iter().filter(|l| !l.is_tau()).collect();
        labels.sort();
        labels.dedup();
        labels.push(TransitionLabel::Tau);
        Self {
            states: Vec::new(),
            names: Vec::new(),
            index: HashMap::new(),
            initial: Vec::new(),
            labels,
            transitions: Vec::new(),
            props: BTreeMap::new(),
        }
    }

    pub fn add_state(&mut self, payload: P, name: impl Into<String>) -> StateId {
        if let Some(&id) = self.index.get(&payload) {
            return id;
        }
        let id = self.states.len();
        self.index.insert(payload.clone(), id);
        self.states.push(payload);
        self.names.push(name.into());
        id
    }

    pub fn state_id(&self, payload: &P) -> Option<StateId> {
        self.index.get(payload).copied()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn mark_initial(&mut self, s: StateId) {
        self.initial.push(s);
    }

    /// Registers the label on first use.
    pub fn add_transition(&mut self, src: StateId, label: TransitionLabel, dst: StateId) {
        let l = match self.labels.iter().position(|x| *x == label) {
            Some(l) => l,
            None => {
                self.labels.push(label);
                self.labels.len() - 1
            }
        };
        self.transitions.push((src, l, dst));
    }

    pub fn declare_prop(&mut self, name: impl Into<String>) {
        self.props.entry(name.into()).or_default();
    }

    pub fn set_prop(&mut self, s: StateId, name: impl Into<String>) {
        self.props.entry(name.into()).or_default().push(s);
    }

    pub fn finish(self) -> LabeledTs<P> {
        let n = self.states.len();
        let mut transitions = self.transitions;
        transitions.sort();
        transitions.dedup();
        let mut initial = self.initial;
        initial.sort();
        initial.dedup();
        let props = self
            .props
            .into_iter()
            .map(|(k, ids)| {
                let mut set = FixedBitSet::with_capacity(n);
                ids.into_iter().for_each(|i| set.insert(i));
                (k, set)
            })
            .collect();
        let mut lts = LabeledTs {
            states: self.states,
            names: self.names,
            index: self.index,
            initial,
            labels: self.labels,
            transitions,
            succ: Vec::new(),
            pred: Vec::new(),
            props,
        };
        lts.reindex();
        lts
    }
}

impl<P: Clone + Eq + Hash> LabeledTs<P> {
    fn reindex(&mut self) {
        let n = self.states.len();
        self.succ = vec![Vec::new(); n];
        self.pred = vec![Vec::new(); n];
        for &(s, l, t) in &self.transitions {
            self.succ[s].push((l, t));
            self.pred[t].push((l, s));
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[P] {
        &self.states
    }

    pub fn state(&self, s: StateId) -> &P {
        &self.states[s]
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s]
    }

    pub fn id_of(&self, payload: &P) -> Option<StateId> {
        self.index.get(payload).copied()
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn is_initial(&self, s: StateId) -> bool {
        self.initial.binary_search(&s).is_ok()
    }

    pub fn labels(&self) -> &[TransitionLabel] {
        &self.labels
    }

    pub fn label(&self, l: LabelId) -> &TransitionLabel {
        &self.labels[l]
    }

    pub fn label_id(&self, label: &TransitionLabel) -> Option<LabelId> {
        self.labels.iter().position(|x| x == label)
    }

    pub fn tau(&self) -> LabelId {
        self.label_id(&TransitionLabel::Tau).expect("tau is always declared")
    }

    /// Visible labels, in declaration order.
    pub fn visible_labels(&self) -> impl Iterator<Item = LabelId> + '_ {
        (0..self.labels.len()).filter(|&l| !self.labels[l].is_tau())
    }

    pub fn transitions(&self) -> &[(StateId, LabelId, StateId)] {
        &self.transitions
    }

    pub fn succ(&self, s: StateId) -> &[(LabelId, StateId)] {
        &self.succ[s]
    }

    pub fn pred(&self, s: StateId) -> &[(LabelId, StateId)] {
        &self.pred[s]
    }

    pub fn props(&self) -> &BTreeMap<String, FixedBitSet> {
        &self.props
    }

    pub fn prop(&self, name: &str) -> Option<&FixedBitSet> {
        self.props.get(name)
    }

    /// Names of the propositions holding in `s`.
    pub fn props_of(&self, s: StateId) -> Vec<&str> {
        self.props
            .iter()
            .filter(|(_, set)| set.contains(s))
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn same_props(&self, s: StateId, other: &LabeledTs<impl Clone + Eq + Hash>, t: StateId) -> bool {
        self.props.iter().all(|(k, set)| match other.props.get(k) {
            Some(o) => set.contains(s) == o.contains(t),
            None => !set.contains(s),
        }) && other
            .props
            .iter()
            .all(|(k, o)| self.props.contains_key(k) || !o.contains(t))
    }

    pub fn deadlocked(&self) -> Vec<StateId> {
        (0..self.len()).filter(|&s| self.succ[s].is_empty()).collect()
    }

    /// Adds a τ self-loop to every state without successors; returns them.
    pub fn ensure_total(mut self) -> (Self, Vec<StateId>) {
        let dead = self.deadlocked();
        if dead.is_empty() {
            return (self, dead);
        }
        let tau = self.tau();
        self.transitions.extend(dead.iter().map(|&s| (s, tau, s)));
        self.transitions.sort();
        self.reindex();
        (self, dead)
    }

    /// Copy with transition number `i` (in [`Self::transitions`] order) removed.
    pub fn without_transition(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.transitions.remove(i);
        out.reindex();
        out
    }

    /// Copy whose transitions are relabeled (or dropped when `f` returns `None`).
    pub fn relabel(
        &self,
        mut f: impl FnMut(StateId, &TransitionLabel, StateId) -> Option<TransitionLabel>,
    ) -> Self {
        let mut b = LtsBuilder::new(Vec::new());
        for (i, p) in self.states.iter().enumerate() {
            b.add_state(p.clone(), self.names[i].clone());
        }
        for &s in &self.initial {
            b.mark_initial(s);
        }
        for &(s, l, t) in &self.transitions {
            if let Some(nl) = f(s, &self.labels[l], t) {
                b.add_transition(s, nl, t);
            }
        }
        let mut out = b.finish();
        out.props = self.props.clone();
        out
    }

    /// Copy with the given state labeling.
    pub fn with_props(&self, props: BTreeMap<String, FixedBitSet>) -> Self {
        let mut out = self.clone();
        out.props = props;
        out
    }

    /// `srcId label dstId` per line, then `# state` table rows
    /// `id<TAB>initial-flag<TAB>payload<TAB>props`.
    pub fn dump(&self) -> String {
        use fmt::Write as _;
        let mut out = String::new();
        for &(s, l, t) in &self.transitions {
            let _ = writeln!(out, "{s} {} {t}", self.labels[l]);
        }
        let _ = writeln!(out, "# states");
        for s in 0..self.len() {
            let _ = writeln!(
                out,
                "{s}\t{}\t{}\t{}",
                if self.is_initial(s) { "init" } else { "-" },
                self.names[s],
                self.props_of(s).join(",")
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> LabeledTs<u32> {
        let mut b = LtsBuilder::new([TransitionLabel::Own]);
        let a = b.add_state(0, "a");
        let c = b.add_state(1, "c");
        b.mark_initial(a);
        b.add_transition(a, TransitionLabel::Own, c);
        b.set_prop(c, "p");
        b.finish()
    }

    #[test]
    fn ensure_total_adds_tau_loops_only_where_needed() {
        let (lts, dead) = chain().ensure_total();
        assert_eq!(dead, vec![1]);
        assert_eq!(lts.succ(1), &[(lts.tau(), 1)]);
        assert_eq!(lts.succ(0).len(), 1);
        let (again, dead) = lts.clone().ensure_total();
        assert!(dead.is_empty());
        assert_eq!(again.transitions(), lts.transitions());
    }

    #[test]
    fn dump_lists_transitions_and_states() {
        let d = chain().dump();
        assert!(d.starts_with("0 self 1\n# states\n"));
        assert!(d.contains("1\t-\tc\tp"));
    }

    #[test]
    fn duplicate_payloads_share_an_id() {
        let mut b = LtsBuilder::<u32>::new([]);
        assert_eq!(b.add_state(7, "x"), b.add_state(7, "y"));
    }
}
