//! Neighborhood similarities and balance relations.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    CmpOp, EdgeId, Expr, LocalState, ModelError, NodeId, ProcessNetwork, UpdateSource,
    Value,
};

/// Default bound on node degree for bijection enumeration.
pub const DEGREE_CAP: usize = 6;
/// Default bound on node count for automorphism search.
pub const AUTOMORPHISM_NODE_CAP: usize = 10;

/// A triple `(m, β, n)`: `beta` maps every edge connected to `m` onto the
/// edges connected to `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Similarity {
    pub m: NodeId,
    pub beta: BTreeMap<EdgeId, EdgeId>,
    pub n: NodeId,
}

impl Similarity {
    pub fn new(m: NodeId, beta: BTreeMap<EdgeId, EdgeId>, n: NodeId) -> Self {
        Self { m, beta, n }
    }

    pub fn identity(net: &ProcessNetwork, n: NodeId) -> Self {
        Self::new(n, net.edges_of(n).into_iter().map(|e| (e, e)).collect(), n)
    }

    pub fn is_identity(&self) -> bool {
        self.m == self.n && self.beta.iter().all(|(a, b)| a == b)
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.n, self.beta.iter().map(|(a, b)| (*b, *a)).collect(), self.m)
    }

    /// `(m, β, n)` then `(n, γ, k)` gives `(m, γ∘β, k)`; `None` if not composable.
    pub fn then(&self, other: &Similarity) -> Option<Similarity> {
        if self.n != other.m {
            return None;
        }
        let beta = self
            .beta
            .iter()
            .map(|(a, b)| Some((*a, *other.beta.get(b)?)))
            .collect::<Option<_>>()?;
        Some(Self::new(self.m, beta, other.n))
    }

    /// Variable correspondence induced on the two templates: the k-th internal
    /// variable maps to the k-th internal variable, a port maps to the port
    /// bound to the image of its edge. `None` when layouts are incompatible.
    pub fn var_map(&self, net: &ProcessNetwork) -> Option<VarMap> {
        let (tm, tn) = (net.template(self.m), net.template(self.n));
        if tm.vars.len() != tn.vars.len() || !tm.same_internal_layout(tn) {
            return None;
        }
        let (nm, nn) = (net.node(self.m), net.node(self.n));
        let mut perm = vec![usize::MAX; tm.vars.len()];
        for ((i, _), (j, _)) in tm.internal_vars().zip(tn.internal_vars()) {
            perm[i] = j;
        }
        for (i, v) in tm.ports() {
            let e = nm.edge_of_var(i)?;
            let j = nn.var_of_edge(*self.beta.get(&e)?)?;
            if tn.vars[j].mode() != v.mode() || !tn.vars[j].domain.same_values(&v.domain) {
                return None;
            }
            perm[i] = j;
        }
        let mut seen = vec![false; perm.len()];
        for &j in &perm {
            if j == usize::MAX || std::mem::replace(&mut seen[j], true) {
                return None;
            }
        }
        let ports = tm
            .ports()
            .map(|(i, v)| (v.name.clone(), tn.vars[perm[i]].name.clone()))
            .collect();
        Some(VarMap {
            target: self.n,
            perm,
            ports,
        })
    }

    pub fn display(&self, net: &ProcessNetwork) -> String {
        let pairs: Vec<String> = self
            .beta
            .iter()
            .map(|(a, b)| format!("{}->{}", net.edge(*a).name, net.edge(*b).name))
            .collect();
        format!(
            "({}, {{{}}}, {})",
            net.node(self.m).name,
            pairs.join(", "),
            net.node(self.n).name
        )
    }
}

/// Local-state permutation `s ↦ β(s)` of a similarity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarMap {
    target: NodeId,
    perm: Vec<usize>,
    ports: BTreeMap<String, String>,
}

impl VarMap {
    pub fn apply(&self, s: &LocalState) -> LocalState {
        let mut values = vec![0; s.values.len()];
        for (i, &j) in self.perm.iter().enumerate() {
            values[j] = s.values[i];
        }
        LocalState::new(self.target, values)
    }

    /// Port of the target node corresponding to port `p` of the source node.
    pub fn port(&self, p: &str) -> Option<&str> {
        self.ports.get(p).map(String::as_str)
    }

    pub fn ports(&self) -> &BTreeMap<String, String> {
        &self.ports
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BalanceError {
    #[error("node `{node}` has degree {degree}, above the cap of {cap}")]
    DegreeCap { node: String, degree: usize, cap: usize },
    #[error("{nodes} nodes exceed the automorphism search cap of {cap}")]
    NodeCap { nodes: usize, cap: usize },
    #[error("permutation is not an automorphism of the communication relation")]
    NotAutomorphism,
    #[error("edge `{edge}` of `{node}` has several possible images")]
    AmbiguousLift { node: String, edge: String },
    #[error("edge `{edge}` of `{node}` has no image")]
    NotLiftable { node: String, edge: String },
    #[error("`{m}` and `{n}` are not similar under the lifted edge map")]
    NotSimilar { m: String, n: String },
    #[error("not a balance relation: {0}")]
    Invalid(BalanceViolation),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Why a candidate relation fails to be a balance relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalanceViolation {
    pub triple: Similarity,
    pub reason: ViolationReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ViolationReason {
    NotSimilarity,
    MissingInverse,
    /// `k` points to `m` but no matching triple for it exists in the relation.
    Unmatched { k: NodeId },
}

impl fmt::Display for BalanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.triple;
        match &self.reason {
            ViolationReason::NotSimilarity => write!(f, "({}, β, {}) is not a similarity", t.m, t.n),
            ViolationReason::MissingInverse => write!(f, "inverse of ({}, β, {}) is missing", t.m, t.n),
            ViolationReason::Unmatched { k } => write!(
                f,
                "{k} points to {} but no node pointing to {} matches it under β",
                t.m, t.n
            ),
        }
    }
}

/// A set of similarity triples.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct BalanceRelation {
    triples: BTreeSet<Similarity>,
}

impl BalanceRelation {
    pub fn new(triples: BTreeSet<Similarity>) -> Self {
        Self { triples }
    }

    pub fn identities(net: &ProcessNetwork) -> Self {
        Self::new(net.node_ids().map(|n| Similarity::identity(net, n)).collect())
    }

    pub fn triples(&self) -> &BTreeSet<Similarity> {
        &self.triples
    }

    pub fn iter(&self) -> impl Iterator<Item = &Similarity> {
        self.triples.iter()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, s: &Similarity) -> bool {
        self.triples.contains(s)
    }

    /// Triples from `m` to `n`, in canonical order.
    pub fn between(&self, m: NodeId, n: NodeId) -> impl Iterator<Item = &Similarity> {
        self.triples.iter().filter(move |s| s.m == m && s.n == n)
    }

    pub fn is_subset(&self, other: &BalanceRelation) -> bool {
        self.triples.is_subset(&other.triples)
    }

    pub fn inverse_closure(&self) -> Self {
        let mut t = self.triples.clone();
        t.extend(self.triples.iter().map(Similarity::inverse));
        Self::new(t)
    }

    pub fn is_inverse_closed(&self) -> bool {
        self.triples.iter().all(|s| self.triples.contains(&s.inverse()))
    }

    pub fn is_composition_closed(&self) -> bool {
        self.triples.iter().all(|a| {
            self.triples
                .iter()
                .filter(|b| b.m == a.n)
                .all(|b| a.then(b).is_some_and(|c| self.triples.contains(&c)))
        })
    }

    /// Related node pairs, ignoring the edge maps.
    pub fn node_pairs(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.triples.iter().map(|s| (s.m, s.n)).collect()
    }
}

/// Successor sets of every local state, keyed by valuation.
type StepTable = HashMap<Vec<Value>, BTreeSet<Vec<Value>>>;

fn step_table(net: &ProcessNetwork, n: NodeId) -> Result<StepTable, ModelError> {
    Ok(net
        .local_states(n)?
        .into_iter()
        .map(|s| {
            let succ = net
                .step_successors(n, &s)
                .into_iter()
                .map(|(_, t)| t.values)
                .collect();
            (s.values, succ)
        })
        .collect())
}

/// `[I_n ≡ β(I_m)]` and `[T_n ≡ β(T_m)]` over every local state of `m`.
fn isomorphic_under(
    net: &ProcessNetwork,
    map: &VarMap,
    m: NodeId,
    n: NodeId,
    tm: &StepTable,
    tn: &StepTable,
) -> bool {
    let (im, inn) = (net.template(m).init_pred(), net.template(n).init_pred());
    tm.iter().all(|(vals, succ)| {
        let t = map.apply(&LocalState::new(m, vals.clone()));
        if im.eval(vals) != inn.eval(&t.values) {
            return false;
        }
        let mapped: BTreeSet<Vec<Value>> = succ
            .iter()
            .map(|v| map.apply(&LocalState::new(m, v.clone())).values)
            .collect();
        tn.get(&t.values) == Some(&mapped)
    })
}

/// Checks that a triple is a similarity: `β` is a direction-preserving
/// bijection onto the edges of `n` and the processes are isomorphic under it.
pub fn is_similarity(net: &ProcessNetwork, s: &Similarity) -> Result<bool, ModelError> {
    let em: BTreeSet<EdgeId> = net.edges_of(s.m).into_iter().collect();
    let en: BTreeSet<EdgeId> = net.edges_of(s.n).into_iter().collect();
    let keys: BTreeSet<EdgeId> = s.beta.keys().copied().collect();
    let vals: BTreeSet<EdgeId> = s.beta.values().copied().collect();
    if keys != em || vals != en || vals.len() != keys.len() {
        return Ok(false);
    }
    let Some(map) = s.var_map(net) else {
        return Ok(false);
    };
    Ok(isomorphic_under(net, &map, s.m, s.n, &step_table(net, s.m)?, &step_table(net, s.n)?))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    fn go(i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for j in i..cur.len() {
            cur.swap(i, j);
            go(i + 1, cur, out);
            cur.swap(i, j);
        }
    }
    go(0, &mut cur, &mut out);
    out.sort();
    out
}

/// All similarities from `m` to `n`, in canonical order.
pub fn enumerate_similarities(
    net: &ProcessNetwork,
    m: NodeId,
    n: NodeId,
) -> Result<Vec<Similarity>, BalanceError> {
    enumerate_similarities_capped(net, m, n, DEGREE_CAP)
}

pub fn enumerate_similarities_capped(
    net: &ProcessNetwork,
    m: NodeId,
    n: NodeId,
    degree_cap: usize,
) -> Result<Vec<Similarity>, BalanceError> {
    let tables = (step_table(net, m)?, step_table(net, n)?);
    enumerate_with(net, m, n, degree_cap, &tables.0, &tables.1)
}

fn enumerate_with(
    net: &ProcessNetwork,
    m: NodeId,
    n: NodeId,
    degree_cap: usize,
    tm: &StepTable,
    tn: &StepTable,
) -> Result<Vec<Similarity>, BalanceError> {
    let (em, en) = (net.edges_of(m), net.edges_of(n));
    for (node, deg) in [(m, em.len()), (n, en.len())] {
        if deg > degree_cap {
            return Err(BalanceError::DegreeCap {
                node: net.node(node).name.clone(),
                degree: deg,
                cap: degree_cap,
            });
        }
    }
    if em.len() != en.len() || !net.template(m).same_internal_layout(net.template(n)) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for p in permutations(em.len()) {
        let beta: BTreeMap<EdgeId, EdgeId> = em.iter().zip(&p).map(|(a, &j)| (*a, en[j])).collect();
        let sim = Similarity::new(m, beta, n);
        let Some(map) = sim.var_map(net) else {
            continue;
        };
        if isomorphic_under(net, &map, m, n, tm, tn) {
            out.push(sim);
        }
    }
    out.sort();
    Ok(out)
}

/// Every similarity between every ordered pair of nodes.
pub fn all_similarities(net: &ProcessNetwork) -> Result<Vec<Similarity>, BalanceError> {
    let tables: Vec<StepTable> = net
        .node_ids()
        .map(|n| step_table(net, n))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for m in net.node_ids() {
        for n in net.node_ids() {
            out.extend(enumerate_with(net, m, n, DEGREE_CAP, &tables[m.0], &tables[n.0])?);
        }
    }
    Ok(out)
}

/// The pointing condition for `s` within `b`.
fn pointing_witness(net: &ProcessNetwork, s: &Similarity, b: &BTreeSet<Similarity>) -> Option<NodeId> {
    for k in net.pointers_to(s.m) {
        let shared = net.shared_edges(s.m, k);
        let ok = net.pointers_to(s.n).into_iter().any(|l| {
            b.iter()
                .filter(|g| g.m == k && g.n == l)
                .any(|g| shared.iter().all(|e| g.beta.get(e) == s.beta.get(e)))
        });
        if !ok {
            return Some(k);
        }
    }
    None
}

/// Largest balance relation: greatest fixpoint by deletion from all similarities.
pub fn largest_balance(net: &ProcessNetwork) -> Result<BalanceRelation, BalanceError> {
    Ok(refine_balance(net, all_similarities(net)?))
}

/// Deletes candidates violating the pointing condition or lacking an inverse,
/// visiting them in the given order, until nothing changes.
pub fn refine_balance(net: &ProcessNetwork, candidates: Vec<Similarity>) -> BalanceRelation {
    let mut set: BTreeSet<Similarity> = candidates.iter().cloned().collect();
    loop {
        let mut changed = false;
        for s in &candidates {
            if !set.contains(s) {
                continue;
            }
            if !set.contains(&s.inverse()) || pointing_witness(net, s, &set).is_some() {
                set.remove(s);
                changed = true;
            }
        }
        if !changed {
            return BalanceRelation::new(set);
        }
    }
}

/// Validates a candidate relation, returning the first violation in canonical order.
pub fn is_balance_relation(net: &ProcessNetwork, b: &BalanceRelation) -> Result<Result<(), BalanceViolation>, ModelError> {
    let tables: Vec<StepTable> = net
        .node_ids()
        .map(|n| step_table(net, n))
        .collect::<Result<_, _>>()?;
    for s in b.iter() {
        let viol = |reason| Ok(Err(BalanceViolation { triple: s.clone(), reason }));
        let em: BTreeSet<EdgeId> = net.edges_of(s.m).into_iter().collect();
        let en: BTreeSet<EdgeId> = net.edges_of(s.n).into_iter().collect();
        let keys: BTreeSet<EdgeId> = s.beta.keys().copied().collect();
        let vals: BTreeSet<EdgeId> = s.beta.values().copied().collect();
        let similar = keys == em
            && vals == en
            && s.var_map(net)
                .is_some_and(|map| isomorphic_under(net, &map, s.m, s.n, &tables[s.m.0], &tables[s.n.0]));
        if !similar {
            return viol(ViolationReason::NotSimilarity);
        }
        if !b.contains(&s.inverse()) {
            return viol(ViolationReason::MissingInverse);
        }
        if let Some(k) = pointing_witness(net, s, &b.triples) {
            return viol(ViolationReason::Unmatched { k });
        }
    }
    Ok(Ok(()))
}

/// Classes of `≃_B` with a representative and a transfer similarity per node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepresentativeScheme {
    /// Each class ascending; classes ordered by representative.
    pub classes: Vec<Vec<NodeId>>,
    rep_of: Vec<NodeId>,
    /// `gamma[n] = (rep(n), γ, n)`.
    gamma: Vec<Similarity>,
}

impl RepresentativeScheme {
    pub fn representative(&self, n: NodeId) -> NodeId {
        self.rep_of[n.0]
    }

    pub fn representatives(&self) -> Vec<NodeId> {
        self.classes.iter().map(|c| c[0]).collect()
    }

    pub fn gamma(&self, n: NodeId) -> &Similarity {
        &self.gamma[n.0]
    }

    pub fn class_of(&self, n: NodeId) -> &[NodeId] {
        self.classes
            .iter()
            .find(|c| c.contains(&n))
            .map(Vec::as_slice)
            .expect("every node is in a class")
    }
}

/// Builds the representative scheme of a valid balance relation.
pub fn representatives(net: &ProcessNetwork, b: &BalanceRelation) -> Result<RepresentativeScheme, BalanceError> {
    if let Err(v) = is_balance_relation(net, b)? {
        return Err(BalanceError::Invalid(v));
    }
    Ok(representatives_unchecked(net, b))
}

/// As [`representatives`] without validating `b` first.
pub fn representatives_unchecked(net: &ProcessNetwork, b: &BalanceRelation) -> RepresentativeScheme {
    let count = net.nodes().len();
    let mut parent: Vec<usize> = (0..count).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for s in b.iter() {
        let (a, c) = (find(&mut parent, s.m.0), find(&mut parent, s.n.0));
        if a != c {
            parent[a.max(c)] = a.min(c);
        }
    }
    let mut classes: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for n in 0..count {
        let r = find(&mut parent, n);
        classes.entry(r).or_default().push(NodeId(n));
    }
    let classes: Vec<Vec<NodeId>> = classes.into_values().collect();
    let mut rep_of = vec![NodeId(0); count];
    for c in &classes {
        for &n in c {
            rep_of[n.0] = c[0];
        }
    }
    let gamma = net
        .node_ids()
        .map(|n| {
            let r = rep_of[n.0];
            if r == n {
                return Similarity::identity(net, n);
            }
            if let Some(g) = b.between(r, n).next() {
                return g.clone();
            }
            // Not composition-closed: compose along a shortest path from r.
            let mut prev: HashMap<NodeId, Similarity> = HashMap::new();
            let mut queue = VecDeque::from([r]);
            prev.insert(r, Similarity::identity(net, r));
            while let Some(x) = queue.pop_front() {
                for s in b.iter().filter(|s| s.m == x) {
                    if !prev.contains_key(&s.n) {
                        let so_far = prev[&x].then(s).expect("composable");
                        prev.insert(s.n, so_far);
                        queue.push_back(s.n);
                    }
                }
            }
            prev.remove(&n).expect("same class")
        })
        .collect();
    RepresentativeScheme {
        classes,
        rep_of,
        gamma,
    }
}

/// Undirected graph over nodes: adjacent iff they share an edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommunicationRelation {
    pub adjacency: Vec<BTreeSet<usize>>,
}

impl CommunicationRelation {
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }

    /// Graph from an adjacency list; symmetric closure is applied.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            if a != b {
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
        Self { adjacency }
    }
}

pub fn communication_relation(net: &ProcessNetwork) -> CommunicationRelation {
    CommunicationRelation {
        adjacency: net
            .node_ids()
            .map(|n| net.neighbors(n).iter().map(|m| m.0).collect())
            .collect(),
    }
}

/// All automorphisms of `cr` as images `π[i]`, lexicographically ordered.
pub fn find_automorphisms(cr: &CommunicationRelation, cap: usize) -> Result<Vec<Vec<usize>>, BalanceError> {
    let n = cr.node_count();
    if n > cap {
        return Err(BalanceError::NodeCap { nodes: n, cap });
    }
    let deg: Vec<usize> = cr.adjacency.iter().map(BTreeSet::len).collect();
    let mut out = Vec::new();
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        i: usize,
        cr: &CommunicationRelation,
        deg: &[usize],
        image: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == image.len() {
            out.push(image.clone());
            return;
        }
        for c in 0..image.len() {
            if used[c] || deg[c] != deg[i] {
                continue;
            }
            if (0..i).any(|j| cr.adjacent(i, j) != cr.adjacent(c, image[j])) {
                continue;
            }
            image[i] = c;
            used[c] = true;
            go(i + 1, cr, deg, image, used, out);
            used[c] = false;
        }
        image[i] = usize::MAX;
    }
    go(0, cr, &deg, &mut image, &mut used, &mut out);
    Ok(out)
}

pub fn is_automorphism(cr: &CommunicationRelation, pi: &[usize]) -> bool {
    let n = cr.node_count();
    if pi.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    if pi.iter().any(|&c| c >= n || std::mem::replace(&mut seen[c], true)) {
        return false;
    }
    (0..n).all(|a| (0..n).all(|b| cr.adjacent(a, b) == cr.adjacent(pi[a], pi[b])))
}

/// Lifts a CR automorphism to triples `(m, β_π, π(m))`. Each edge of `m` maps
/// to the edge of `π(m)` joining the images of its other endpoints; parallel
/// candidates are disambiguated by port name. Every triple is checked to be a
/// similarity. The result is generally not inverse-closed; see
/// [`BalanceRelation::inverse_closure`].
pub fn balance_from_automorphism(net: &ProcessNetwork, pi: &[usize]) -> Result<BalanceRelation, BalanceError> {
    let cr = communication_relation(net);
    if !is_automorphism(&cr, pi) {
        return Err(BalanceError::NotAutomorphism);
    }
    let others = |n: NodeId, e: EdgeId| -> BTreeSet<usize> {
        net.nodes_on_edge(e).iter().filter(|&&x| x != n).map(|x| x.0).collect()
    };
    let mut triples = BTreeSet::new();
    for m in net.node_ids() {
        let n = NodeId(pi[m.0]);
        let mut beta = BTreeMap::new();
        for e in net.edges_of(m) {
            let want: BTreeSet<usize> = others(m, e).into_iter().map(|k| pi[k]).collect();
            let cands: Vec<EdgeId> = net
                .edges_of(n)
                .into_iter()
                .filter(|&f| others(n, f) == want)
                .collect();
            let lift_err = |ambiguous: bool| {
                let node = net.node(m).name.clone();
                let edge = net.edge(e).name.clone();
                if ambiguous {
                    BalanceError::AmbiguousLift { node, edge }
                } else {
                    BalanceError::NotLiftable { node, edge }
                }
            };
            let f = match cands[..] {
                [] => return Err(lift_err(false)),
                [f] => f,
                _ => {
                    let port = net.node(m).port_of_edge(e);
                    let by_port: Vec<EdgeId> = cands
                        .iter()
                        .copied()
                        .filter(|&f| net.node(n).port_of_edge(f) == port)
                        .collect();
                    match by_port[..] {
                        [f] => f,
                        _ => return Err(lift_err(true)),
                    }
                }
            };
            beta.insert(e, f);
        }
        let sim = Similarity::new(m, beta, n);
        if !is_similarity(net, &sim)? {
            return Err(BalanceError::NotSimilar {
                m: net.node(m).name.clone(),
                n: net.node(n).name.clone(),
            });
        }
        triples.insert(sim);
    }
    Ok(BalanceRelation::new(triples))
}

/// Normal-form conformance: guards are conjunctions of per-neighbor
/// expressions, actions assign constants or swap variables.
pub fn is_normal(net: &ProcessNetwork) -> bool {
    normal_form_violation(net).is_none()
}

/// First reason the network is not in normal form, if any.
pub fn normal_form_violation(net: &ProcessNetwork) -> Option<String> {
    for n in net.node_ids() {
        let node = net.node(n);
        let tpl = &node.template;
        // Group of a variable: the neighbors across its edge; internals belong to none.
        let group = |name: &str| -> Option<BTreeSet<NodeId>> {
            let i = tpl.var_index(name)?;
            let e = node.edge_of_var(i)?;
            let g: BTreeSet<NodeId> = net.nodes_on_edge(e).iter().copied().filter(|&x| x != n).collect();
            (!g.is_empty()).then_some(g)
        };
        for c in &tpl.commands {
            for conj in c.guard.conjuncts() {
                let mut groups = BTreeSet::new();
                conj.visit_cmps(&mut |lhs: &str, _: CmpOp, rhs: &str| {
                    groups.extend(group(lhs));
                    groups.extend(group(rhs));
                });
                if groups.len() > 1 || matches!(conj, Expr::Exactly { .. }) {
                    return Some(format!(
                        "node `{}` command `{}`: conjunct `{conj}` couples several neighbors",
                        node.name, c.name
                    ));
                }
            }
            let ups = c.compiled_updates();
            for &(t, src) in ups {
                if let UpdateSource::Var(s) = src {
                    let swapped = ups.iter().any(|&(t2, s2)| t2 == s && s2 == UpdateSource::Var(t));
                    if !swapped {
                        return Some(format!(
                            "node `{}` command `{}`: `{} := {}` is a copy, not a swap",
                            node.name, c.name, tpl.vars[t].name, tpl.vars[s].name
                        ));
                    }
                }
            }
        }
    }
    None
}
