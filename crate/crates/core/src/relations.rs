//! Strong and stuttering simulations between labeled systems, and the
//! relations tying local spaces to each other and to the global space.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::hash::Hash;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::balance::{is_similarity, Similarity};
use crate::lts::{LabelId, LabeledTs, StateId, TransitionLabel};
use crate::model::{GlobalState, LocalState, ModelError, NodeId, ProcessNetwork};
use crate::spaces::{build_global_space, build_local_space, PropositionSet, SpaceError};

/// Correspondence from visible labels of one system to those of another.
pub type LabelMap = BTreeMap<TransitionLabel, TransitionLabel>;

/// Maps every visible label of `lts` to itself.
pub fn identity_map<P: Clone + Eq + Hash>(lts: &LabeledTs<P>) -> LabelMap {
    lts.labels()
        .iter()
        .filter(|l| !l.is_tau())
        .map(|l| (l.clone(), l.clone()))
        .collect()
}

pub fn invert_map(map: &LabelMap) -> LabelMap {
    map.iter().map(|(a, b)| (b.clone(), a.clone())).collect()
}

/// Pairs of states `(a, b)` of two systems, stored row-wise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateRelation {
    rows: Vec<FixedBitSet>,
    cols: usize,
}

impl StateRelation {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![FixedBitSet::with_capacity(cols); rows],
            cols,
        }
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        let mut r = Self::empty(rows, cols);
        for row in &mut r.rows {
            row.insert_range(..);
        }
        r
    }

    pub fn from_pairs(rows: usize, cols: usize, pairs: impl IntoIterator<Item = (StateId, StateId)>) -> Self {
        let mut r = Self::empty(rows, cols);
        for (a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    pub fn insert(&mut self, a: StateId, b: StateId) {
        self.rows[a].insert(b);
    }

    pub fn remove(&mut self, a: StateId, b: StateId) {
        self.rows[a].set(b, false);
    }

    pub fn contains(&self, a: StateId, b: StateId) -> bool {
        self.rows[a].contains(b)
    }

    pub fn row(&self, a: StateId) -> &FixedBitSet {
        &self.rows[a]
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairs(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(a, r)| r.ones().map(move |b| (a, b)))
    }

    pub fn inverse(&self) -> Self {
        let mut out = Self::empty(self.cols, self.rows.len());
        for (a, b) in self.pairs() {
            out.insert(b, a);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// The failing pair, by state name.
    pub pair: (String, String),
    /// Alternating states and labels, starting and ending with a state.
    pub path: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckVerdict {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
}

impl CheckVerdict {
    pub fn pass() -> Self {
        Self {
            holds: true,
            counterexample: None,
        }
    }

    pub fn fail(c: Counterexample) -> Self {
        Self {
            holds: false,
            counterexample: Some(c),
        }
    }
}

#[derive(Debug, Error)]
pub enum RelationError {
    #[error("({0}) is not a similarity of the network")]
    NotSimilarity(String),
    #[error("{n} and {m} are not neighbors")]
    NotNeighbors { n: String, m: String },
    #[error("interaction of {n} toward {m} is not outward-facing")]
    NotOutwardFacing {
        n: String,
        m: String,
        verdict: Box<CheckVerdict>,
    },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Strong,
    Stuttering,
}

/// One unmatched move found by `answering`: `s --label--> s2` with no answer from `t`.
struct Miss {
    s: StateId,
    t: StateId,
    label: LabelId,
    s2: StateId,
}

struct Side<'a, P, Q> {
    a: &'a LabeledTs<P>,
    b: &'a LabeledTs<Q>,
    /// Image in `b` of each label of `a`; `None` when unmapped.
    labels: Vec<Option<LabelId>>,
}

impl<'a, P: Clone + Eq + Hash, Q: Clone + Eq + Hash> Side<'a, P, Q> {
    fn new(a: &'a LabeledTs<P>, b: &'a LabeledTs<Q>, map: &LabelMap) -> Self {
        let labels = a
            .labels()
            .iter()
            .map(|l| {
                if l.is_tau() {
                    Some(b.tau())
                } else {
                    map.get(l).and_then(|x| b.label_id(x))
                }
            })
            .collect();
        Self { a, b, labels }
    }

    /// States of `b` able to answer `s --l--> s2` under `rel`: for strong,
    /// a direct `l`-move into `rel[s2]`; for stuttering, a τ-path inside
    /// `rel[s]` ending in such a move, or (for τ) `t ∈ rel[s2]` itself.
    fn answering(&self, rel: &StateRelation, s: StateId, l: LabelId, s2: StateId, mode: Mode) -> FixedBitSet {
        let nb = self.b.len();
        let mut ok = FixedBitSet::with_capacity(nb);
        let Some(bl) = self.labels[l] else {
            if mode == Mode::Stuttering && self.a.label(l).is_tau() {
                ok.union_with(rel.row(s2));
            }
            return ok;
        };
        let target = rel.row(s2);
        for t in rel.row(s).ones() {
            if self.b.succ(t).iter().any(|&(x, t2)| x == bl && target.contains(t2)) {
                ok.insert(t);
            }
        }
        if mode == Mode::Strong {
            return ok;
        }
        let tau_a = self.a.label(l).is_tau();
        if tau_a {
            ok.union_with(target);
        }
        // Backward τ-closure inside rel[s].
        let tau = self.b.tau();
        let within = rel.row(s);
        let mut queue: VecDeque<StateId> = ok.ones().filter(|&t| within.contains(t)).collect();
        while let Some(t) = queue.pop_front() {
            for &(x, p) in self.b.pred(t) {
                if x == tau && within.contains(p) && !ok.contains(p) {
                    ok.insert(p);
                    queue.push_back(p);
                }
            }
        }
        ok
    }

    /// Deletes unmatched pairs once over all of `rel`; returns the first miss.
    fn prune(&self, rel: &mut StateRelation, mode: Mode) -> Option<Miss> {
        let mut first = None;
        for s in 0..self.a.len() {
            if rel.row(s).is_clear() {
                continue;
            }
            for &(l, s2) in self.a.succ(s) {
                let ok = self.answering(rel, s, l, s2, mode);
                let bad: Vec<StateId> = rel.row(s).ones().filter(|&t| !ok.contains(t)).collect();
                for t in bad {
                    first.get_or_insert(Miss { s, t, label: l, s2 });
                    rel.remove(s, t);
                }
            }
        }
        first
    }

    fn describe(&self, m: &Miss, reverse: bool) -> Counterexample {
        let dir = if reverse { " (reverse direction)" } else { "" };
        Counterexample {
            pair: (self.a.name(m.s).to_string(), self.b.name(m.t).to_string()),
            path: vec![
                self.a.name(m.s).to_string(),
                self.a.label(m.label).to_string(),
                self.a.name(m.s2).to_string(),
            ],
            reason: format!(
                "move `{}` of {} has no matching answer from {}{dir}",
                self.a.label(m.label),
                self.a.name(m.s),
                self.b.name(m.t)
            ),
        }
    }
}

fn same_props_relation<P, Q>(a: &LabeledTs<P>, b: &LabeledTs<Q>) -> StateRelation
where
    P: Clone + Eq + Hash,
    Q: Clone + Eq + Hash,
{
    let mut r = StateRelation::empty(a.len(), b.len());
    for s in 0..a.len() {
        for t in 0..b.len() {
            if a.same_props(s, b, t) {
                r.insert(s, t);
            }
        }
    }
    r
}

fn restrict_props<P, Q>(a: &LabeledTs<P>, b: &LabeledTs<Q>, rel: &StateRelation) -> (StateRelation, Option<(StateId, StateId)>)
where
    P: Clone + Eq + Hash,
    Q: Clone + Eq + Hash,
{
    let mut out = rel.clone();
    let mut first = None;
    for (s, t) in rel.pairs() {
        if !a.same_props(s, b, t) {
            first.get_or_insert((s, t));
            out.remove(s, t);
        }
    }
    (out, first)
}

fn props_counterexample<P, Q>(a: &LabeledTs<P>, b: &LabeledTs<Q>, s: StateId, t: StateId) -> Counterexample
where
    P: Clone + Eq + Hash,
    Q: Clone + Eq + Hash,
{
    Counterexample {
        pair: (a.name(s).to_string(), b.name(t).to_string()),
        path: vec![a.name(s).to_string()],
        reason: format!(
            "propositions differ: {{{}}} vs {{{}}}",
            a.props_of(s).join(", "),
            b.props_of(t).join(", ")
        ),
    }
}

/// Every initial state of `a` is related to an initial state of `b`.
fn initial_coverage<P, Q>(a: &LabeledTs<P>, b: &LabeledTs<Q>, rel: &StateRelation, reverse: bool) -> Option<Counterexample>
where
    P: Clone + Eq + Hash,
    Q: Clone + Eq + Hash,
{
    let s = *a
        .initial()
        .iter()
        .find(|&&s| !b.initial().iter().any(|&t| rel.contains(s, t)))?;
    let dir = if reverse { " (reverse direction)" } else { "" };
    Some(Counterexample {
        pair: (a.name(s).to_string(), String::new()),
        path: vec![a.name(s).to_string()],
        reason: format!("initial state {} is related to no initial state{dir}", a.name(s)),
    })
}

/// Greatest (bi)simulation inside `seed`, then initial coverage.
fn greatest<P, Q>(
    a: &LabeledTs<P>,
    b: &LabeledTs<Q>,
    map: &LabelMap,
    seed: Option<&StateRelation>,
    mode: Mode,
    bisim: bool,
) -> (StateRelation, CheckVerdict)
where
    P: Clone + Eq + Hash,
    Q: Clone + Eq + Hash,
{
    let mut rel = match seed {
        Some(r) => restrict_props(a, b, r).0,
        None => same_props_relation(a, b),
    };
    let fwd = Side::new(a, b, map);
    let inv = invert_map(map);
    let back = Side::new(b, a, &inv);
    loop {
        let mut changed = fwd.prune(&mut rel, mode).is_some();
        if bisim {
            let mut r = rel.inverse();
            if back.prune(&mut r, mode).is_some() {
                changed = true;
                rel = r.inverse();
            }
        }
        if !changed {
            break;
        }
    }
    let mut verdict = CheckVerdict::pass();
    if let Some(c) = initial_coverage(a, b, &rel, false) {
        verdict = CheckVerdict::fail(c);
    } else if bisim {
        if let Some(c) = initial_coverage(b, a, &rel.inverse(), true) {
            verdict = CheckVerdict::fail(c);
        }
    }
    (rel, verdict)
}

/// Checks that `rel` itself is a (bi)simulation relating initial states.
fn verify<P, Q>(
    a: &LabeledTs<P>,
    b: &LabeledTs<Q>,
    map: &LabelMap,
    rel: &StateRelation,
    mode: Mode,
    bisim: bool,
) -> CheckVerdict
where
    P: Clone + Eq + Hash,
    Q: Clone + Eq + Hash,
{
    if let (_, Some((s, t))) = restrict_props(a, b, rel) {
        return CheckVerdict::fail(props_counterexample(a, b, s, t));
    }
    let fwd = Side::new(a, b, map);
    if let Some(m) = fwd.prune(&mut rel.clone(), mode) {
        return CheckVerdict::fail(fwd.describe(&m, false));
    }
    if bisim {
        let inv = invert_map(map);
        let back = Side::new(b, a, &inv);
        if let Some(m) = back.prune(&mut rel.inverse(), mode) {
            return CheckVerdict::fail(back.describe(&m, true));
        }
    }
    if let Some(c) = initial_coverage(a, b, rel, false) {
        return CheckVerdict::fail(c);
    }
    if bisim {
        if let Some(c) = initial_coverage(b, a, &rel.inverse(), true) {
            return CheckVerdict::fail(c);
        }
    }
    CheckVerdict::pass()
}

macro_rules! checks {
    ($($(#[$doc:meta])* $check:ident, $verify:ident, $mode:expr, $bisim:expr;)*) => {$(
        $(#[$doc])*
        pub fn $check<P, Q>(
            a: &LabeledTs<P>,
            b: &LabeledTs<Q>,
            map: &LabelMap,
            seed: Option<&StateRelation>,
        ) -> CheckVerdict
        where
            P: Clone + Eq + Hash,
            Q: Clone + Eq + Hash,
        {
            greatest(a, b, map, seed, $mode, $bisim).1
        }

        pub fn $verify<P, Q>(a: &LabeledTs<P>, b: &LabeledTs<Q>, map: &LabelMap, rel: &StateRelation) -> CheckVerdict
        where
            P: Clone + Eq + Hash,
            Q: Clone + Eq + Hash,
        {
            verify(a, b, map, rel, $mode, $bisim)
        }
    )*};
}

checks! {
    /// Greatest strong simulation of `a` by `b` inside `seed` (default: all
    /// pairs with equal propositions), then initial-state coverage.
    check_strong_simulation, verify_strong_simulation, Mode::Strong, false;
    check_strong_bisimulation, verify_strong_bisimulation, Mode::Strong, true;
    /// Branching-style, divergence-blind stuttering simulation.
    check_stuttering_simulation, verify_stuttering_simulation, Mode::Stuttering, false;
    check_stuttering_bisimulation, verify_stuttering_bisimulation, Mode::Stuttering, true;
}

/// The greatest relation computed by [`check_stuttering_simulation`] and
/// friends, for inspection.
pub fn greatest_relation<P, Q>(
    a: &LabeledTs<P>,
    b: &LabeledTs<Q>,
    map: &LabelMap,
    stuttering: bool,
    bisim: bool,
) -> StateRelation
where
    P: Clone + Eq + Hash,
    Q: Clone + Eq + Hash,
{
    let mode = if stuttering { Mode::Stuttering } else { Mode::Strong };
    greatest(a, b, map, None, mode, bisim).0
}

/// Checks that `{(s, f(s))}` is a strong bisimulation between `hm` and `hn`
/// that is a bijection on states and maps initial states onto initial states.
pub fn check_bisimulation_up_to(
    hm: &LabeledTs<LocalState>,
    hn: &LabeledTs<LocalState>,
    f: impl Fn(&LocalState) -> LocalState,
    labels: &LabelMap,
) -> CheckVerdict {
    let mut rel = StateRelation::empty(hm.len(), hn.len());
    let mut hit = BTreeSet::new();
    for (s, x) in hm.states().iter().enumerate() {
        let y = f(x);
        match hn.id_of(&y) {
            Some(t) => {
                rel.insert(s, t);
                hit.insert(t);
            }
            None => {
                return CheckVerdict::fail(Counterexample {
                    pair: (hm.name(s).to_string(), format!("{y:?}")),
                    path: vec![hm.name(s).to_string()],
                    reason: format!("image of {} is not a state of the other space", hm.name(s)),
                })
            }
        }
    }
    if hit.len() != hn.len() || hm.len() != hn.len() {
        let t = (0..hn.len()).find(|t| !hit.contains(t)).unwrap_or(0);
        return CheckVerdict::fail(Counterexample {
            pair: (String::new(), hn.name(t).to_string()),
            path: vec![hn.name(t).to_string()],
            reason: "state map is not a bijection".into(),
        });
    }
    for s in 0..hm.len() {
        let t = rel.row(s).ones().next().expect("total");
        if hm.is_initial(s) != hn.is_initial(t) {
            return CheckVerdict::fail(Counterexample {
                pair: (hm.name(s).to_string(), hn.name(t).to_string()),
                path: vec![hm.name(s).to_string()],
                reason: "initial states do not correspond".into(),
            });
        }
    }
    verify_strong_bisimulation(hm, hn, labels, &rel)
}

/// Bisimulation up to the direction-preserving correspondence between two
/// instances of the same tile type: a state of `hm` maps to the state of node
/// `n` with the same value on every direction.
pub fn check_cross_instance(
    hm: &LabeledTs<LocalState>,
    hn: &LabeledTs<LocalState>,
    n: NodeId,
) -> CheckVerdict {
    let mut labels = identity_map(hm);
    labels.extend(identity_map(hn));
    check_bisimulation_up_to(hm, hn, |x| LocalState::new(n, x.values.clone()), &labels)
}

/// Label correspondence induced by a similarity: self to self, and the port
/// of `m` on edge e to the port of `n` on β(e).
pub fn beta_label_map(net: &ProcessNetwork, s: &Similarity) -> LabelMap {
    let (nm, nn) = (net.node(s.m), net.node(s.n));
    let mut map: LabelMap = [(TransitionLabel::Own, TransitionLabel::Own)].into();
    for (e, f) in &s.beta {
        if let (Some(p), Some(q)) = (nm.port_of_edge(*e), nn.port_of_edge(*f)) {
            map.insert(TransitionLabel::port(p), TransitionLabel::port(q));
        }
    }
    map
}

/// H_m^θ and H_n^θ are bisimilar up to β, for `(m, β, n)`.
pub fn check_bisimulation_up_to_beta(
    net: &ProcessNetwork,
    theta: &[BTreeSet<LocalState>],
    s: &Similarity,
    props_m: &PropositionSet,
    props_n: &PropositionSet,
) -> Result<CheckVerdict, RelationError> {
    let vm = match is_similarity(net, s)? {
        true => s.var_map(net),
        false => None,
    }
    .ok_or_else(|| RelationError::NotSimilarity(s.display(net)))?;
    let hm = build_local_space(net, theta, s.m, props_m)?;
    let hn = build_local_space(net, theta, s.n, props_n)?;
    Ok(check_bisimulation_up_to(&hm, &hn, |x| vm.apply(x), &beta_label_map(net, s)))
}

/// R = {(g, g[m]) : g reachable and θ-consistent} between G_m and H_m^θ.
fn local_global_relation(
    net: &ProcessNetwork,
    theta: &[BTreeSet<LocalState>],
    m: NodeId,
    g: &LabeledTs<GlobalState>,
    h: &LabeledTs<LocalState>,
) -> StateRelation {
    let mut rel = StateRelation::empty(g.len(), h.len());
    for (i, x) in g.states().iter().enumerate() {
        if net.node_ids().all(|n| theta[n.0].contains(&net.project(x, n))) {
            if let Some(t) = h.id_of(&net.project(x, m)) {
                rel.insert(i, t);
            }
        }
    }
    rel
}

/// H_m^θ simulates G_m up to stuttering via R.
pub fn check_local_simulation(
    net: &ProcessNetwork,
    theta: &[BTreeSet<LocalState>],
    m: NodeId,
    props: &PropositionSet,
    cap: usize,
) -> Result<CheckVerdict, RelationError> {
    let g = build_global_space(net, m, props, cap)?;
    let h = build_local_space(net, theta, m, props)?;
    let rel = local_global_relation(net, theta, m, &g, &h);
    Ok(verify_stuttering_simulation(&g, &h, &identity_map(&g), &rel))
}

/// The system whose outward-facing status is checked: n's own steps and
/// interference from neighbors other than m, visible exactly when they change
/// an edge shared with m (label: the new values of those edges).
pub fn outward_view(
    net: &ProcessNetwork,
    theta: &[BTreeSet<LocalState>],
    n: NodeId,
    m: NodeId,
) -> Result<LabeledTs<LocalState>, RelationError> {
    if !net.are_neighbors(n, m) {
        return Err(RelationError::NotNeighbors {
            n: net.node(n).name.clone(),
            m: net.node(m).name.clone(),
        });
    }
    let h = build_local_space(net, theta, n, &PropositionSet::default())?;
    let watched: Vec<(usize, String)> = net
        .shared_edges(n, m)
        .into_iter()
        .filter_map(|e| Some((net.node(n).var_of_edge(e)?, net.edge(e).name.clone())))
        .collect();
    let toward_m = TransitionLabel::port(net.neighbor_port(n, m).expect("neighbors share a port"));
    let tpl = net.template(n);
    Ok(h.relabel(|s, l, t| {
        if *l == toward_m {
            return None;
        }
        let (x, y) = (h.state(s), h.state(t));
        if watched.iter().all(|&(v, _)| x.values[v] == y.values[v]) {
            return Some(TransitionLabel::Tau);
        }
        let shown: Vec<String> = watched
            .iter()
            .map(|(v, e)| format!("{e}={}", tpl.vars[*v].domain.value_name(y.values[*v])))
            .collect();
        Some(TransitionLabel::port(shown.join(",")))
    }))
}

/// B_{m,n} = {(u, v) ∈ θ_n² : u, v agree on every edge shared with m} is a
/// stuttering bisimulation of [`outward_view`] with itself.
pub fn check_outward_facing(
    net: &ProcessNetwork,
    theta: &[BTreeSet<LocalState>],
    n: NodeId,
    m: NodeId,
) -> Result<CheckVerdict, RelationError> {
    let view = outward_view(net, theta, n, m)?;
    let slots: Vec<usize> = net.shared_slots(n, m).into_iter().map(|(a, _)| a).collect();
    let mut rel = StateRelation::empty(view.len(), view.len());
    for (i, u) in view.states().iter().enumerate() {
        for (j, v) in view.states().iter().enumerate() {
            if slots.iter().all(|&a| u.values[a] == v.values[a]) {
                rel.insert(i, j);
            }
        }
    }
    Ok(verify_stuttering_bisimulation(&view, &view, &identity_map(&view), &rel))
}

/// R of [`check_local_simulation`] checked as a stuttering bisimulation, with no
/// precondition.
pub fn verify_local_global_bisimulation(
    net: &ProcessNetwork,
    theta: &[BTreeSet<LocalState>],
    m: NodeId,
    props: &PropositionSet,
    cap: usize,
) -> Result<CheckVerdict, RelationError> {
    let g = build_global_space(net, m, props, cap)?;
    let h = build_local_space(net, theta, m, props)?;
    let rel = local_global_relation(net, theta, m, &g, &h);
    Ok(verify_stuttering_bisimulation(&g, &h, &identity_map(&g), &rel))
}

/// As [`verify_local_global_bisimulation`], refused unless every neighbor of `m`
/// is outward-facing toward `m`.
pub fn check_local_global_bisimulation(
    net: &ProcessNetwork,
    theta: &[BTreeSet<LocalState>],
    m: NodeId,
    props: &PropositionSet,
    cap: usize,
) -> Result<CheckVerdict, RelationError> {
    for &n in net.neighbors(m) {
        let v = check_outward_facing(net, theta, n, m)?;
        if !v.holds {
            return Err(RelationError::NotOutwardFacing {
                n: net.node(n).name.clone(),
                m: net.node(m).name.clone(),
                verdict: Box::new(v),
            });
        }
    }
    verify_local_global_bisimulation(net, theta, m, props, cap)
}
