use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use super::{product, EdgeId, ModelError, NodeId, ProcessNetwork, Value, CONSTRAINT_ENUM_CAP};

/// Valuation of one node's variables, indexed like its template's `vars`.
///
/// Ports hold the value of their bound edge, so `s[e]` for a connected edge
/// is `values[node.var_of_edge(e)]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LocalState {
    pub node: NodeId,
    pub values: Vec<Value>,
}

impl LocalState {
    pub fn new(node: NodeId, values: Vec<Value>) -> Self {
        Self { node, values }
    }
}

/// Valuation of every edge followed by every internal variable of every node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct GlobalState(pub Vec<Value>);

/// Reachable fragment of the global transition system, in breadth-first order.
#[derive(Debug, Clone)]
pub struct Reachable {
    pub states: Vec<GlobalState>,
    pub index: HashMap<GlobalState, usize>,
    /// Initial state ids, ascending.
    pub initial: Vec<usize>,
    /// `(src, acting node, command, dst)` in discovery order.
    pub transitions: Vec<(usize, NodeId, String, usize)>,
    /// First transition reaching each state; `None` for initial states.
    parent: Vec<Option<usize>>,
}

impl Reachable {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Shortest path from an initial state to `target`: the initial state, then
    /// `(node, command, state)` per step.
    pub fn trace(&self, target: usize) -> (usize, Vec<(NodeId, String, usize)>) {
        let mut steps = Vec::new();
        let mut cur = target;
        while let Some(t) = self.parent[cur] {
            let (src, n, cmd, dst) = &self.transitions[t];
            steps.push((*n, cmd.clone(), *dst));
            cur = *src;
        }
        steps.reverse();
        (cur, steps)
    }
}

/// Largest local state space `local_states` will enumerate.
pub const LOCAL_ENUM_CAP: usize = 1 << 20;

impl ProcessNetwork {
    fn domain_sizes(&self, n: NodeId) -> Vec<usize> {
        self.template(n).vars.iter().map(|v| v.domain.len()).collect()
    }

    /// Full Cartesian product over the node's variables, ascending.
    pub fn local_states(&self, n: NodeId) -> Result<Vec<LocalState>, ModelError> {
        self.check_node(n)?;
        let sizes = self.domain_sizes(n);
        let total = sizes
            .iter()
            .try_fold(1usize, |a, &s| a.checked_mul(s))
            .filter(|&t| t <= LOCAL_ENUM_CAP)
            .ok_or(ModelError::EnumerationCap(LOCAL_ENUM_CAP))?;
        Ok(product(&sizes)
            .take(total)
            .map(|v| LocalState::new(n, v))
            .collect())
    }

    /// Local states satisfying the node's own initial predicate.
    pub fn initial_local_states(&self, n: NodeId) -> Result<Vec<LocalState>, ModelError> {
        let init = self.template(n).init_pred();
        Ok(self
            .local_states(n)?
            .into_iter()
            .filter(|s| init.eval(&s.values))
            .collect())
    }

    /// Initial local states that agree on their edges with some valuation
    /// satisfying the network-level constraint.
    pub fn seed_local_states(&self, n: NodeId) -> Result<Vec<LocalState>, ModelError> {
        let init = self.initial_local_states(n)?;
        let Some(c) = self.initially() else {
            return Ok(init);
        };
        let node = self.node(n);
        let watched: Vec<(usize, usize)> = c
            .mentioned()
            .iter()
            .enumerate()
            .filter_map(|(i, e)| node.var_of_edge(*e).map(|v| (i, v)))
            .collect();
        let allowed: BTreeSet<Vec<Value>> = c
            .satisfying()
            .iter()
            .map(|combo| watched.iter().map(|&(i, _)| combo[i]).collect())
            .collect();
        Ok(init
            .into_iter()
            .filter(|s| {
                let key: Vec<Value> = watched.iter().map(|&(_, v)| s.values[v]).collect();
                allowed.contains(&key)
            })
            .collect())
    }

    /// Own steps of `n` from `s`, in command declaration order.
    pub fn step_successors(&self, n: NodeId, s: &LocalState) -> Vec<(&str, LocalState)> {
        self.template(n)
            .commands
            .iter()
            .filter(|c| c.enabled(&s.values))
            .map(|c| (c.name.as_str(), LocalState::new(n, c.apply(&s.values))))
            .collect()
    }

    /// Pairs `(n-var, m-var)` reading the same shared edge.
    pub fn shared_slots(&self, n: NodeId, m: NodeId) -> Vec<(usize, usize)> {
        let (nn, mm) = (self.node(n), self.node(m));
        self.shared_edges(n, m)
            .into_iter()
            .filter_map(|e| Some((nn.var_of_edge(e)?, mm.var_of_edge(e)?)))
            .collect()
    }

    /// `(s, u)` agree on every edge shared by `n` and `m`.
    pub fn is_joint(&self, n: NodeId, s: &LocalState, m: NodeId, u: &LocalState) -> bool {
        self.shared_slots(n, m)
            .iter()
            .all(|&(a, b)| s.values[a] == u.values[b])
    }

    /// Copies the shared-edge values of `u_next` (a state of `m`) into `s`.
    pub fn absorb(&self, n: NodeId, s: &LocalState, m: NodeId, u_next: &LocalState) -> LocalState {
        let mut values = s.values.clone();
        for (a, b) in self.shared_slots(n, m) {
            values[a] = u_next.values[b];
        }
        LocalState::new(n, values)
    }

    /// Steps of neighbor `m` from the joint state `(s, u)`, seen from `n`.
    pub fn interference_successors(
        &self,
        n: NodeId,
        s: &LocalState,
        m: NodeId,
        u: &LocalState,
    ) -> Result<Vec<(&str, LocalState, LocalState)>, ModelError> {
        self.check_node(n)?;
        self.check_node(m)?;
        if !self.are_neighbors(n, m) {
            return Err(ModelError::NotNeighbors {
                n: self.node(n).name.clone(),
                m: self.node(m).name.clone(),
            });
        }
        let shared = self.shared_slots(n, m);
        if let Some(&(a, _)) = shared.iter().find(|&&(a, b)| s.values[a] != u.values[b]) {
            let edge = self.node(n).edge_of_var(a).expect("shared slot is a port");
            return Err(ModelError::NotJoint {
                n: self.node(n).name.clone(),
                m: self.node(m).name.clone(),
                edge: self.edge(edge).name.clone(),
            });
        }
        Ok(self
            .step_successors(m, u)
            .into_iter()
            .map(|(cmd, u2)| (cmd, self.absorb(n, s, m, &u2), u2))
            .collect())
    }

    pub fn project(&self, g: &GlobalState, n: NodeId) -> LocalState {
        LocalState::new(n, self.slots(n).iter().map(|&i| g.0[i]).collect())
    }

    fn embed(&self, g: &mut GlobalState, s: &LocalState) {
        for (i, &slot) in self.slots(s.node).iter().enumerate() {
            g.0[slot] = s.values[i];
        }
    }

    /// All global valuations satisfying every node's init and the network constraint.
    pub fn global_initial(&self, cap: usize) -> Result<Vec<GlobalState>, ModelError> {
        let edge_vals = self.initial_edge_valuations()?;
        let mut out = Vec::new();
        for ev in edge_vals {
            // Per node, all internal completions satisfying its init.
            let mut per_node: Vec<Vec<Vec<Value>>> = Vec::with_capacity(self.nodes().len());
            for n in self.node_ids() {
                let tpl = self.template(n);
                let internals: Vec<usize> = tpl.internal_vars().map(|(i, _)| i).collect();
                let sizes: Vec<usize> = internals
                    .iter()
                    .map(|&i| tpl.vars[i].domain.len())
                    .collect();
                let mut vals: Vec<Value> = self.slots(n).iter().map(|&s| ev.get(s).copied().unwrap_or(0)).collect();
                let mut options = Vec::new();
                for combo in product(&sizes) {
                    for (k, &i) in internals.iter().enumerate() {
                        vals[i] = combo[k];
                    }
                    if tpl.init_pred().eval(&vals) {
                        options.push(combo);
                    }
                }
                if options.is_empty() {
                    per_node.clear();
                    break;
                }
                per_node.push(options);
            }
            if per_node.len() != self.nodes().len() {
                continue;
            }
            let sizes: Vec<usize> = per_node.iter().map(Vec::len).collect();
            for pick in product(&sizes) {
                let mut g = GlobalState(vec![0; self.global_width()]);
                g.0[..ev.len()].copy_from_slice(&ev);
                for n in self.node_ids() {
                    let tpl = self.template(n);
                    let combo = &per_node[n.0][usize::from(pick[n.0])];
                    for (k, (i, _)) in tpl.internal_vars().enumerate() {
                        g.0[self.slots(n)[i]] = combo[k];
                    }
                }
                out.push(g);
                if out.len() > cap {
                    return Err(ModelError::StateCap(cap));
                }
            }
        }
        out.sort();
        Ok(out)
    }

    fn initial_edge_valuations(&self) -> Result<Vec<Vec<Value>>, ModelError> {
        let width = self.edges().len();
        let (mentioned, combos): (Vec<EdgeId>, Vec<Vec<Value>>) = match self.initially() {
            Some(c) => (c.mentioned().to_vec(), c.satisfying().to_vec()),
            None => (Vec::new(), vec![Vec::new()]),
        };
        let free: Vec<EdgeId> = (0..width)
            .map(EdgeId)
            .filter(|e| !mentioned.contains(e))
            .collect();
        let free_sizes: Vec<usize> = free.iter().map(|e| self.edge(*e).domain.len()).collect();
        let free_total = free_sizes
            .iter()
            .try_fold(1usize, |a, &s| a.checked_mul(s))
            .and_then(|t| t.checked_mul(combos.len()))
            .filter(|&t| t <= CONSTRAINT_ENUM_CAP)
            .ok_or(ModelError::EnumerationCap(CONSTRAINT_ENUM_CAP))?;
        let mut out = Vec::with_capacity(free_total);
        for combo in &combos {
            for fv in product(&free_sizes) {
                let mut ev = vec![0; width];
                for (e, v) in mentioned.iter().zip(combo) {
                    ev[e.0] = *v;
                }
                for (e, v) in free.iter().zip(&fv) {
                    ev[e.0] = *v;
                }
                out.push(ev);
            }
        }
        Ok(out)
    }

    /// Interleaving successors: one node steps, everything outside it is unchanged.
    pub fn global_successors(&self, g: &GlobalState) -> Vec<(NodeId, &str, GlobalState)> {
        let mut out = Vec::new();
        for n in self.node_ids() {
            let local = self.project(g, n);
            for (cmd, next) in self.step_successors(n, &local) {
                let mut g2 = g.clone();
                self.embed(&mut g2, &next);
                out.push((n, cmd, g2));
            }
        }
        out
    }

    /// Breadth-first exploration from [`Self::global_initial`]; fails once more
    /// than `cap` states are found.
    pub fn reachable(&self, cap: usize) -> Result<Reachable, ModelError> {
        let init = self.global_initial(cap)?;
        let mut r = Reachable {
            states: Vec::new(),
            index: HashMap::new(),
            initial: Vec::new(),
            transitions: Vec::new(),
            parent: Vec::new(),
        };
        let mut queue = VecDeque::new();
        for g in init {
            let id = r.states.len();
            r.index.insert(g.clone(), id);
            r.states.push(g);
            r.parent.push(None);
            r.initial.push(id);
            queue.push_back(id);
        }
        while let Some(i) = queue.pop_front() {
            let g = r.states[i].clone();
            for (n, cmd, g2) in self.global_successors(&g) {
                let j = match r.index.get(&g2) {
                    Some(&j) => j,
                    None => {
                        if r.states.len() >= cap {
                            return Err(ModelError::StateCap(cap));
                        }
                        let j = r.states.len();
                        r.index.insert(g2.clone(), j);
                        r.states.push(g2);
                        r.parent.push(Some(r.transitions.len()));
                        queue.push_back(j);
                        j
                    }
                };
                r.transitions.push((i, n, cmd.to_string(), j));
            }
        }
        Ok(r)
    }

    /// `(state=T, xin=tok, xout=none)`
    pub fn show_local(&self, s: &LocalState) -> String {
        let tpl = self.template(s.node);
        let mut out = String::from("(");
        for (i, v) in tpl.vars.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{}={}", v.name, v.domain.value_name(s.values[i]));
        }
        out.push(')');
        out
    }

    /// `[e0=tok e1=none | p0(state=T) ...]`
    pub fn show_global(&self, g: &GlobalState) -> String {
        let mut out = String::from("[");
        for (i, e) in self.edges().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}={}", e.name, e.domain.value_name(g.0[i]));
        }
        out.push_str(" |");
        for n in self.node_ids() {
            let tpl = self.template(n);
            let _ = write!(out, " {}(", self.node(n).name);
            let mut first = true;
            for (i, v) in tpl.internal_vars() {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{}={}", v.name, v.domain.value_name(g.0[self.slots(n)[i]]));
            }
            out.push(')');
        }
        out.push(']');
        out
    }
}
