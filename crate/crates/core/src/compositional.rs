//! Compositional inductive invariants: per-node sets of local states closed
//! under Init, Step and Non-Interference.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::balance::{
    is_similarity, representatives, representatives_unchecked, BalanceError, BalanceRelation,
    RepresentativeScheme, VarMap,
};
use crate::model::{GlobalState, LocalState, ModelError, NodeId, ProcessNetwork, Value};

/// One set of local states per node, indexed by `NodeId`.
pub type Theta = Vec<BTreeSet<LocalState>>;

#[derive(Debug, Error)]
pub enum CompositionalError {
    #[error("γ for node {node} is not a similarity of the network")]
    SchemeInconsistent { node: String },
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone)]
pub struct CompositionalInvariant {
    scheme: RepresentativeScheme,
    per_rep: BTreeMap<NodeId, BTreeSet<LocalState>>,
    theta: Theta,
}

impl CompositionalInvariant {
    pub fn scheme(&self) -> &RepresentativeScheme {
        &self.scheme
    }

    pub fn per_representative(&self) -> &BTreeMap<NodeId, BTreeSet<LocalState>> {
        &self.per_rep
    }

    /// θ_n, materialized as γ(θ_rep(n)).
    pub fn theta(&self, n: NodeId) -> &BTreeSet<LocalState> {
        &self.theta[n.0]
    }

    pub fn all(&self) -> &Theta {
        &self.theta
    }

    pub fn into_theta(self) -> Theta {
        self.theta
    }
}

fn gamma_maps(
    net: &ProcessNetwork,
    scheme: &RepresentativeScheme,
) -> Result<Vec<(VarMap, VarMap)>, CompositionalError> {
    net.node_ids()
        .map(|n| {
            let g = scheme.gamma(n);
            let bad = || CompositionalError::SchemeInconsistent {
                node: net.node(n).name.clone(),
            };
            if g.n != n || g.m != scheme.representative(n) || !is_similarity(net, g)? {
                return Err(bad());
            }
            let fwd = g.var_map(net).ok_or_else(bad)?;
            let back = g.inverse().var_map(net).ok_or_else(bad)?;
            Ok((fwd, back))
        })
        .collect()
}

/// Least fixpoint over the representatives of `scheme`.
pub fn strongest_compositional_invariant(
    net: &ProcessNetwork,
    scheme: &RepresentativeScheme,
) -> Result<CompositionalInvariant, CompositionalError> {
    let maps = gamma_maps(net, scheme)?;
    let reps = scheme.representatives();
    let mut per_rep: BTreeMap<NodeId, BTreeSet<LocalState>> =
        reps.iter().map(|&r| (r, BTreeSet::new())).collect();
    for n in net.node_ids() {
        let r = scheme.representative(n);
        let back = &maps[n.0].1;
        let set = per_rep.get_mut(&r).expect("representative");
        for s in net.seed_local_states(n)? {
            set.insert(back.apply(&s));
        }
    }

    // Transferred view of θ_m restricted to the slots m shares with n.
    let view = |per_rep: &BTreeMap<NodeId, BTreeSet<LocalState>>, m: NodeId| -> Vec<LocalState> {
        per_rep[&scheme.representative(m)]
            .iter()
            .map(|s| maps[m.0].0.apply(s))
            .collect()
    };

    let mut changed = true;
    while changed {
        changed = false;
        for &r in &reps {
            let mut fresh: BTreeSet<LocalState> = BTreeSet::new();
            let current = &per_rep[&r];
            for s in current {
                for (_, t) in net.step_successors(r, s) {
                    if !current.contains(&t) {
                        fresh.insert(t);
                    }
                }
            }
            for &m in net.neighbors(r) {
                let slots = net.shared_slots(r, m);
                let mut index: HashMap<Vec<Value>, Vec<LocalState>> = HashMap::new();
                for u in view(&per_rep, m) {
                    let key = slots.iter().map(|&(_, b)| u.values[b]).collect();
                    index.entry(key).or_default().push(u);
                }
                for s in current {
                    let key: Vec<Value> = slots.iter().map(|&(a, _)| s.values[a]).collect();
                    for u in index.get(&key).into_iter().flatten() {
                        for (_, u2) in net.step_successors(m, u) {
                            let t = net.absorb(r, s, m, &u2);
                            if !current.contains(&t) {
                                fresh.insert(t);
                            }
                        }
                    }
                }
            }
            if !fresh.is_empty() {
                changed = true;
                per_rep.get_mut(&r).expect("representative").extend(fresh);
            }
        }
    }

    let theta = net
        .node_ids()
        .map(|n| view(&per_rep, n).into_iter().collect())
        .collect();
    Ok(CompositionalInvariant {
        scheme: scheme.clone(),
        per_rep,
        theta,
    })
}

/// Validates `b`, derives its representative scheme and computes the fixpoint.
pub fn invariant_for_balance(
    net: &ProcessNetwork,
    b: &BalanceRelation,
) -> Result<CompositionalInvariant, CompositionalError> {
    let scheme = representatives(net, b)?;
    strongest_compositional_invariant(net, &scheme)
}

/// The fixpoint computed separately at every node.
pub fn all_nodes_invariant(net: &ProcessNetwork) -> Result<CompositionalInvariant, CompositionalError> {
    let scheme = representatives_unchecked(net, &BalanceRelation::identities(net));
    strongest_compositional_invariant(net, &scheme)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CompositionalViolation {
    Init {
        node: NodeId,
        state: LocalState,
    },
    Step {
        node: NodeId,
        command: String,
        from: LocalState,
        to: LocalState,
    },
    NonInterference {
        node: NodeId,
        neighbor: NodeId,
        command: String,
        state: LocalState,
        neighbor_state: LocalState,
        to: LocalState,
    },
}

impl CompositionalViolation {
    pub fn node(&self) -> NodeId {
        match self {
            Self::Init { node, .. } | Self::Step { node, .. } | Self::NonInterference { node, .. } => *node,
        }
    }

    pub fn describe(&self, net: &ProcessNetwork) -> String {
        let name = |n: &NodeId| net.node(*n).name.clone();
        match self {
            Self::Init { node, state } => format!(
                "Init: initial state {} of {} is outside θ",
                net.show_local(state),
                name(node)
            ),
            Self::Step { node, command, from, to } => format!(
                "Step: {} leaves θ by `{command}`: {} -> {}",
                name(node),
                net.show_local(from),
                net.show_local(to)
            ),
            Self::NonInterference {
                node,
                neighbor,
                command,
                state,
                neighbor_state,
                to,
            } => format!(
                "Non-Interference: `{command}` of {} from {} moves {} from {} to {} outside θ",
                name(neighbor),
                net.show_local(neighbor_state),
                name(node),
                net.show_local(state),
                net.show_local(to)
            ),
        }
    }
}

/// Checks the three closure rules exhaustively; the first violation found,
/// by node, then Init, Step, Non-Interference.
pub fn check_compositional(
    net: &ProcessNetwork,
    theta: &[BTreeSet<LocalState>],
) -> Result<Result<(), CompositionalViolation>, ModelError> {
    if theta.len() != net.nodes().len() {
        return Err(ModelError::ThetaShape {
            sets: theta.len(),
            nodes: net.nodes().len(),
        });
    }
    for n in net.node_ids() {
        let th = &theta[n.0];
        for s in net.seed_local_states(n)? {
            if !th.contains(&s) {
                return Ok(Err(CompositionalViolation::Init { node: n, state: s }));
            }
        }
        for s in th {
            for (cmd, t) in net.step_successors(n, s) {
                if !th.contains(&t) {
                    return Ok(Err(CompositionalViolation::Step {
                        node: n,
                        command: cmd.to_string(),
                        from: s.clone(),
                        to: t,
                    }));
                }
            }
        }
        for &m in net.neighbors(n) {
            for s in th {
                for u in theta[m.0].iter().filter(|u| net.is_joint(n, s, m, u)) {
                    for (cmd, t, _) in net.interference_successors(n, s, m, u)? {
                        if !th.contains(&t) {
                            return Ok(Err(CompositionalViolation::NonInterference {
                                node: n,
                                neighbor: m,
                                command: cmd.to_string(),
                                state: s.clone(),
                                neighbor_state: u.clone(),
                                to: t,
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(Ok(()))
}

/// For every `(m, β, n) ∈ b`, θ_n is the β-image of θ_m.
pub fn respects_invariant(net: &ProcessNetwork, theta: &[BTreeSet<LocalState>], b: &BalanceRelation) -> bool {
    b.iter().all(|s| {
        let Some(map) = s.var_map(net) else {
            return false;
        };
        let image: BTreeSet<LocalState> = theta[s.m.0].iter().map(|x| map.apply(x)).collect();
        image == theta[s.n.0]
    })
}

/// Default cap on explored global states.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleFailure {
    /// A reachable global state whose projection onto `node` lies outside θ.
    NotCovered {
        node: NodeId,
        state: GlobalState,
        trace: Vec<GlobalState>,
    },
    /// A global state satisfying every θ whose successor does not.
    NotInductive {
        from: GlobalState,
        actor: NodeId,
        command: String,
        to: GlobalState,
        node: NodeId,
    },
}

impl OracleFailure {
    pub fn describe(&self, net: &ProcessNetwork) -> String {
        match self {
            Self::NotCovered { node, state, trace } => {
                let mut s = format!(
                    "reachable state {} projects outside θ_{}\ntrace:",
                    net.show_global(state),
                    net.node(*node).name
                );
                for g in trace {
                    s.push_str("\n  ");
                    s.push_str(&net.show_global(g));
                }
                s
            }
            Self::NotInductive {
                from,
                actor,
                command,
                to,
                node,
            } => format!(
                "`{command}` of {} takes {} to {}, leaving θ_{}",
                net.node(*actor).name,
                net.show_global(from),
                net.show_global(to),
                net.node(*node).name
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub reachable: usize,
    /// θ-consistent global witnesses examined for inductiveness.
    pub consistent: usize,
    pub failure: Option<OracleFailure>,
}

impl OracleReport {
    pub fn holds(&self) -> bool {
        self.failure.is_none()
    }
}

/// A global state fixing the given local states whose every projection lies
/// in θ, if one exists. Nodes are assigned breadth-first from the fixed ones.
pub fn extend_to_global(
    net: &ProcessNetwork,
    theta: &[BTreeSet<LocalState>],
    fixed: &[&LocalState],
) -> Option<GlobalState> {
    let mut order: Vec<NodeId> = Vec::new();
    let mut seen = vec![false; theta.len()];
    let mut queue: std::collections::VecDeque<NodeId> = fixed.iter().map(|s| s.node).collect();
    for s in fixed {
        seen[s.node.0] = true;
    }
    loop {
        while let Some(n) = queue.pop_front() {
            order.push(n);
            for &m in net.neighbors(n) {
                if !seen[m.0] {
                    seen[m.0] = true;
                    queue.push_back(m);
                }
            }
        }
        match seen.iter().position(|x| !x) {
            Some(i) => {
                seen[i] = true;
                queue.push_back(NodeId(i));
            }
            None => break,
        }
    }

    fn go(
        net: &ProcessNetwork,
        theta: &[BTreeSet<LocalState>],
        fixed: &[&LocalState],
        order: &[NodeId],
        cur: &mut Vec<Option<Value>>,
    ) -> bool {
        let Some((&n, rest)) = order.split_first() else {
            return true;
        };
        let slots = net.slots(n);
        let pinned = fixed.iter().find(|s| s.node == n);
        let candidates: Box<dyn Iterator<Item = &LocalState>> = match pinned {
            Some(s) if theta[n.0].contains(*s) => Box::new(std::iter::once(*s)),
            Some(_) => return false,
            None => Box::new(theta[n.0].iter()),
        };
        for s in candidates {
            if slots
                .iter()
                .zip(&s.values)
                .any(|(&g, &v)| cur[g].is_some_and(|x| x != v))
            {
                continue;
            }
            let fresh: Vec<usize> = slots.iter().copied().filter(|&g| cur[g].is_none()).collect();
            for (&g, &v) in slots.iter().zip(&s.values) {
                cur[g] = Some(v);
            }
            if go(net, theta, fixed, rest, cur) {
                return true;
            }
            for g in fresh {
                cur[g] = None;
            }
        }
        false
    }

    let mut cur = vec![None; net.global_width()];
    go(net, theta, fixed, &order, &mut cur)
        .then(|| GlobalState(cur.into_iter().map(|v| v.expect("assigned")).collect()))
}

/// Brute-force check that ∧θ_n covers every reachable global state and is
/// preserved by every global transition.
///
/// A step of node k changes only the projections of k and its neighbors, and
/// each new projection depends only on the old projections of k and of the
/// observed node. Inductiveness is therefore decided by one θ-consistent
/// global witness per acting state and per joint state with a neighbor.
pub fn global_invariant_oracle(
    net: &ProcessNetwork,
    theta: &[BTreeSet<LocalState>],
    cap: usize,
) -> Result<OracleReport, ModelError> {
    if theta.len() != net.nodes().len() {
        return Err(ModelError::ThetaShape {
            sets: theta.len(),
            nodes: net.nodes().len(),
        });
    }
    let reach = net.reachable(cap)?;
    for (i, g) in reach.states.iter().enumerate() {
        let outside = net.node_ids().find(|&n| !theta[n.0].contains(&net.project(g, n)));
        if let Some(node) = outside {
            let (first, steps) = reach.trace(i);
            let mut trace = vec![reach.states[first].clone()];
            trace.extend(steps.into_iter().map(|(_, _, j)| reach.states[j].clone()));
            return Ok(OracleReport {
                reachable: reach.len(),
                consistent: 0,
                failure: Some(OracleFailure::NotCovered {
                    node,
                    state: g.clone(),
                    trace,
                }),
            });
        }
    }
    let mut witnesses = 0;
    let mut check = |g: &GlobalState, k: NodeId, watch: NodeId| -> Option<OracleFailure> {
        witnesses += 1;
        net.global_successors(g)
            .into_iter()
            .filter(|(actor, _, _)| *actor == k)
            .find(|(_, _, g2)| !theta[watch.0].contains(&net.project(g2, watch)))
            .map(|(actor, cmd, to)| OracleFailure::NotInductive {
                from: g.clone(),
                actor,
                command: cmd.to_string(),
                to,
                node: watch,
            })
    };
    for k in net.node_ids() {
        for s in &theta[k.0] {
            if net.step_successors(k, s).is_empty() {
                continue;
            }
            if let Some(g) = extend_to_global(net, theta, &[s]) {
                if let Some(f) = check(&g, k, k) {
                    return Ok(OracleReport {
                        reachable: reach.len(),
                        consistent: witnesses,
                        failure: Some(f),
                    });
                }
            }
            for &m in net.neighbors(k) {
                for u in theta[m.0].iter().filter(|u| net.is_joint(k, s, m, u)) {
                    if let Some(g) = extend_to_global(net, theta, &[s, u]) {
                        if let Some(f) = check(&g, k, m) {
                            return Ok(OracleReport {
                                reachable: reach.len(),
                                consistent: witnesses,
                                failure: Some(f),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(OracleReport {
        reachable: reach.len(),
        consistent: witnesses,
        failure: None,
    })
}
