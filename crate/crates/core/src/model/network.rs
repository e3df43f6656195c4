use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::expr::{Expr, Pred, Scope};
use super::{Domain, ModelError, PortMode, Template, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub name: String,
    pub domain: Domain,
}

/// Port-to-edge binding of one node. `declared` carries an explicit
/// direction when the model states one; it must agree with the port mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Binding {
    pub port: String,
    pub edge: EdgeId,
    pub declared: Option<PortMode>,
}

impl Binding {
    pub fn new(port: impl Into<String>, edge: EdgeId) -> Self {
        Self {
            port: port.into(),
            edge,
            declared: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NodeSpec {
    pub name: String,
    pub template: Arc<Template>,
    pub bindings: Vec<Binding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub name: String,
    pub template: Arc<Template>,
    pub bindings: Vec<Binding>,
    /// Per template variable: the bound edge for ports, `None` for internals.
    port_edges: Vec<Option<EdgeId>>,
}

impl Node {
    pub fn edge_of_var(&self, var: usize) -> Option<EdgeId> {
        self.port_edges[var]
    }

    pub fn var_of_edge(&self, edge: EdgeId) -> Option<usize> {
        self.port_edges.iter().position(|e| *e == Some(edge))
    }

    pub fn port_of_edge(&self, edge: EdgeId) -> Option<&str> {
        self.var_of_edge(edge)
            .map(|i| self.template.vars[i].name.as_str())
    }
}

/// Cross-process initial condition over edge variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkConstraint {
    pub expr: Expr,
    pred: Pred,
    /// Edges the constraint mentions, ascending.
    mentioned: Vec<EdgeId>,
    /// All valuations of `mentioned` satisfying the constraint.
    satisfying: Vec<Vec<Value>>,
}

impl NetworkConstraint {
    pub fn mentioned(&self) -> &[EdgeId] {
        &self.mentioned
    }

    pub fn satisfying(&self) -> &[Vec<Value>] {
        &self.satisfying
    }

    pub fn pred(&self) -> &Pred {
        &self.pred
    }
}

/// Upper bound on the valuations enumerated for a network-level constraint.
pub const CONSTRAINT_ENUM_CAP: usize = 1 << 22;

/// A process network: graph, templates and the port/edge assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProcessNetwork {
    pub name: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    initially: Option<NetworkConstraint>,
    in_conn: Vec<BTreeSet<EdgeId>>,
    out_conn: Vec<BTreeSet<EdgeId>>,
    edge_nodes: Vec<Vec<NodeId>>,
    neighbors: Vec<BTreeSet<NodeId>>,
    /// Global slot of every (node, template variable).
    slots: Vec<Vec<usize>>,
    global_width: usize,
}

struct EdgeScope<'a>(&'a [Edge]);

impl Scope for EdgeScope<'_> {
    fn lookup(&self, name: &str) -> Option<(usize, &Domain)> {
        self.0
            .iter()
            .position(|e| e.name == name)
            .map(|i| (i, &self.0[i].domain))
    }
}

impl ProcessNetwork {
    pub fn new(
        name: impl Into<String>,
        nodes: Vec<NodeSpec>,
        edges: Vec<Edge>,
        initially: Option<Expr>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        for (i, e) in edges.iter().enumerate() {
            if edges[..i].iter().any(|f| f.name == e.name) {
                return Err(ModelError::Duplicate {
                    what: "edge",
                    name: e.name.clone(),
                });
            }
        }
        let mut built: Vec<Node> = Vec::with_capacity(nodes.len());
        let mut in_conn = Vec::with_capacity(nodes.len());
        let mut out_conn = Vec::with_capacity(nodes.len());
        let mut edge_nodes = vec![Vec::new(); edges.len()];

        for node in nodes {
            if built.iter().any(|n| n.name == node.name) {
                return Err(ModelError::Duplicate {
                    what: "node",
                    name: node.name,
                });
            }
            let tpl = &node.template;
            let mut port_edges = vec![None; tpl.vars.len()];
            let mut ins = BTreeSet::new();
            let mut outs = BTreeSet::new();
            for b in &node.bindings {
                let var = tpl.var_index(&b.port).ok_or_else(|| ModelError::UnknownPort {
                    node: node.name.clone(),
                    port: b.port.clone(),
                })?;
                let mode = tpl.vars[var].mode().ok_or_else(|| ModelError::InternalBound {
                    node: node.name.clone(),
                    var: b.port.clone(),
                })?;
                let edge = edges.get(b.edge.0).ok_or_else(|| {
                    ModelError::UnknownEdge(format!("{}", b.edge.0))
                })?;
                if port_edges[var].is_some() {
                    return Err(ModelError::Duplicate {
                        what: "port binding",
                        name: format!("{}.{}", node.name, b.port),
                    });
                }
                if port_edges.contains(&Some(b.edge)) {
                    return Err(ModelError::EdgeBoundTwice {
                        node: node.name.clone(),
                        edge: edge.name.clone(),
                    });
                }
                if !edge.domain.same_values(&tpl.vars[var].domain) {
                    return Err(ModelError::DomainMismatch {
                        lhs: format!("{}.{}", node.name, b.port),
                        rhs: edge.name.clone(),
                    });
                }
                if let Some(declared) = b.declared {
                    if declared != mode {
                        return Err(ModelError::AssignmentViolation {
                            node: node.name.clone(),
                            port: b.port.clone(),
                            edge: edge.name.clone(),
                            declared,
                            mode,
                        });
                    }
                }
                port_edges[var] = Some(b.edge);
                if mode.can_read() {
                    ins.insert(b.edge);
                }
                if mode.can_write() {
                    outs.insert(b.edge);
                }
                edge_nodes[b.edge.0].push(NodeId(built.len()));
            }
            if let Some((_, v)) = tpl.ports().find(|(i, _)| port_edges[*i].is_none()) {
                return Err(ModelError::UnboundPort {
                    node: node.name.clone(),
                    port: v.name.clone(),
                });
            }
            in_conn.push(ins);
            out_conn.push(outs);
            built.push(Node {
                name: node.name,
                template: node.template,
                bindings: node.bindings,
                port_edges,
            });
        }
        if let Some(e) = edges.iter().zip(&edge_nodes).find(|(_, ns)| ns.is_empty()) {
            return Err(ModelError::DanglingEdge(e.0.name.clone()));
        }

        let mut neighbors = vec![BTreeSet::new(); built.len()];
        for ns in &edge_nodes {
            for &a in ns {
                for &b in ns {
                    if a != b {
                        neighbors[a.0].insert(b);
                    }
                }
            }
        }

        let mut next = edges.len();
        let slots = built
            .iter()
            .map(|n| {
                n.port_edges
                    .iter()
                    .map(|pe| match pe {
                        Some(e) => e.0,
                        None => {
                            next += 1;
                            next - 1
                        }
                    })
                    .collect()
            })
            .collect();

        let initially = initially
            .map(|expr| Self::compile_constraint(&edges, expr))
            .transpose()?;

        Ok(Self {
            name,
            nodes: built,
            edges,
            initially,
            in_conn,
            out_conn,
            edge_nodes,
            neighbors,
            slots,
            global_width: next,
        })
    }

    fn compile_constraint(edges: &[Edge], expr: Expr) -> Result<NetworkConstraint, ModelError> {
        let pred = expr.compile(&EdgeScope(edges))?;
        let mentioned: Vec<EdgeId> = pred.slots().into_iter().map(EdgeId).collect();
        let sizes: Vec<usize> = mentioned.iter().map(|e| edges[e.0].domain.len()).collect();
        let total = sizes
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .filter(|&t| t <= CONSTRAINT_ENUM_CAP)
            .ok_or(ModelError::EnumerationCap(CONSTRAINT_ENUM_CAP))?;
        let mut scratch = vec![0 as Value; edges.len()];
        let mut satisfying = Vec::new();
        for combo in super::product(&sizes).take(total) {
            for (e, v) in mentioned.iter().zip(&combo) {
                scratch[e.0] = *v;
            }
            if pred.eval(&scratch) {
                satisfying.push(combo);
            }
        }
        Ok(NetworkConstraint {
            expr,
            pred,
            mentioned,
            satisfying,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n.0]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(NodeId)
    }

    pub fn check_node(&self, n: NodeId) -> Result<&Node, ModelError> {
        self.nodes
            .get(n.0)
            .ok_or_else(|| ModelError::UnknownNode(n.to_string()))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.name == name).map(EdgeId)
    }

    pub fn initially(&self) -> Option<&NetworkConstraint> {
        self.initially.as_ref()
    }

    pub fn template(&self, n: NodeId) -> &Template {
        &self.nodes[n.0].template
    }

    /// Edges read by `n` (`In(n)`).
    pub fn in_edges(&self, n: NodeId) -> &BTreeSet<EdgeId> {
        &self.in_conn[n.0]
    }

    /// Edges written by `n` (`Out(n)`).
    pub fn out_edges(&self, n: NodeId) -> &BTreeSet<EdgeId> {
        &self.out_conn[n.0]
    }

    /// All edges connected to `n`, ascending.
    pub fn edges_of(&self, n: NodeId) -> Vec<EdgeId> {
        let mut v: Vec<EdgeId> = self.nodes[n.0].port_edges.iter().flatten().copied().collect();
        v.sort();
        v
    }

    pub fn nodes_on_edge(&self, e: EdgeId) -> &[NodeId] {
        &self.edge_nodes[e.0]
    }

    pub fn neighbors(&self, n: NodeId) -> &BTreeSet<NodeId> {
        &self.neighbors[n.0]
    }

    pub fn are_neighbors(&self, a: NodeId, b: NodeId) -> bool {
        self.neighbors[a.0].contains(&b)
    }

    /// Edges connected to both nodes, ascending.
    pub fn shared_edges(&self, a: NodeId, b: NodeId) -> Vec<EdgeId> {
        let eb: BTreeSet<EdgeId> = self.edges_of(b).into_iter().collect();
        self.edges_of(a).into_iter().filter(|e| eb.contains(e)).collect()
    }

    /// `m` points to `n` when some edge is in `Out(m) ∩ In(n)`.
    pub fn points_to(&self, m: NodeId, n: NodeId) -> bool {
        !self.out_conn[m.0].is_disjoint(&self.in_conn[n.0])
    }

    /// Nodes `k` that point to `n` (possibly `n` itself), ascending.
    pub fn pointers_to(&self, n: NodeId) -> Vec<NodeId> {
        self.node_ids().filter(|&k| self.points_to(k, n)).collect()
    }

    /// Least port of `n` bound to an edge shared with neighbor `m`.
    pub fn neighbor_port(&self, n: NodeId, m: NodeId) -> Option<&str> {
        let node = &self.nodes[n.0];
        self.shared_edges(n, m)
            .into_iter()
            .filter_map(|e| node.port_of_edge(e))
            .min()
    }

    pub fn slots(&self, n: NodeId) -> &[usize] {
        &self.slots[n.0]
    }

    pub fn global_width(&self) -> usize {
        self.global_width
    }

    /// Network with the same graph and templates but another initial constraint.
    pub fn with_initially(&self, initially: Option<Expr>) -> Result<Self, ModelError> {
        let mut out = self.clone();
        out.initially = initially
            .map(|e| Self::compile_constraint(&self.edges, e))
            .transpose()?;
        Ok(out)
    }

    pub fn node_specs(&self) -> Vec<NodeSpec> {
        self.nodes
            .iter()
            .map(|n| NodeSpec {
                name: n.name.clone(),
                template: n.template.clone(),
                bindings: n.bindings.clone(),
            })
            .collect()
    }

    /// Templates used by the network, keyed by name.
    pub fn templates(&self) -> BTreeMap<&str, &Arc<Template>> {
        self.nodes
            .iter()
            .map(|n| (n.template.name.as_str(), &n.template))
            .collect()
    }
}
