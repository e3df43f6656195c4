//! Tile sets: depth-1 neighborhood patterns generating network families.
//!
//! A tile type is a template; its directions are the template's ports. An
//! entry `dir d -> B.d2` says the edge on port `d` is shared with a node of
//! type `B` that binds it on port `d2`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::balance::{BalanceRelation, Similarity};
use crate::model::{
    Binding, Edge, EdgeId, Expr, ModelError, NodeId, NodeSpec, ProcessNetwork, Template,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TileDir {
    pub dir: String,
    pub neighbor_type: String,
    pub neighbor_dir: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tile {
    pub template: Arc<Template>,
    pub dirs: Vec<TileDir>,
}

impl Tile {
    pub fn type_name(&self) -> &str {
        &self.template.name
    }

    pub fn dir(&self, d: &str) -> Option<&TileDir> {
        self.dirs.iter().find(|t| t.dir == d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TileSet {
    pub name: String,
    pub tiles: Vec<Tile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TileError {
    #[error("duplicate tile for type `{0}`")]
    DuplicateTile(String),
    #[error("tile `{ty}` lists direction `{dir}` twice")]
    DuplicateDirection { ty: String, dir: String },
    #[error("tile `{ty}`: `{dir}` is not a port of the template")]
    UnknownDirection { ty: String, dir: String },
    #[error("tile `{ty}` gives no direction for port `{dir}`")]
    MissingDirection { ty: String, dir: String },
    #[error("tile `{ty}` refers to unknown type `{other}`")]
    UnknownType { ty: String, other: String },
    #[error("tile `{ty}` direction `{dir}`: {reason}")]
    Inconsistent { ty: String, dir: String, reason: String },
    #[error("node `{node}` direction `{dir}`: {reason}")]
    Violation { node: String, dir: String, reason: String },
    #[error("node `{node}` has type `{ty}`, which no tile describes")]
    Untyped { node: String, ty: String },
    #[error("unknown family `{0}` (expected ring, red_black_ring or torus)")]
    UnknownFamily(String),
    #[error("{0}")]
    BadParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl TileSet {
    pub fn new(name: impl Into<String>, tiles: Vec<Tile>) -> Result<Self, TileError> {
        let set = Self {
            name: name.into(),
            tiles,
        };
        set.check()?;
        Ok(set)
    }

    pub fn tile(&self, ty: &str) -> Option<&Tile> {
        self.tiles.iter().find(|t| t.type_name() == ty)
    }

    fn check(&self) -> Result<(), TileError> {
        let mut seen = BTreeSet::new();
        for t in &self.tiles {
            let ty = t.type_name().to_string();
            if !seen.insert(ty.clone()) {
                return Err(TileError::DuplicateTile(ty));
            }
            let ports: BTreeSet<&str> = t.template.port_names().into_iter().collect();
            let mut dirs = BTreeSet::new();
            for d in &t.dirs {
                if !dirs.insert(d.dir.as_str()) {
                    return Err(TileError::DuplicateDirection {
                        ty,
                        dir: d.dir.clone(),
                    });
                }
                if !ports.contains(d.dir.as_str()) {
                    return Err(TileError::UnknownDirection {
                        ty,
                        dir: d.dir.clone(),
                    });
                }
            }
            if let Some(p) = ports.iter().find(|p| !dirs.contains(*p)) {
                return Err(TileError::MissingDirection {
                    ty,
                    dir: p.to_string(),
                });
            }
        }
        for t in &self.tiles {
            let ty = t.type_name();
            for d in &t.dirs {
                let bad = |reason: String| TileError::Inconsistent {
                    ty: ty.to_string(),
                    dir: d.dir.clone(),
                    reason,
                };
                let other = self.tile(&d.neighbor_type).ok_or_else(|| TileError::UnknownType {
                    ty: ty.to_string(),
                    other: d.neighbor_type.clone(),
                })?;
                let back = other.dir(&d.neighbor_dir).ok_or_else(|| {
                    bad(format!("`{}` has no direction `{}`", other.type_name(), d.neighbor_dir))
                })?;
                if back.neighbor_type != ty || back.neighbor_dir != d.dir {
                    return Err(bad(format!(
                        "`{}.{}` points back to `{}.{}`",
                        other.type_name(),
                        d.neighbor_dir,
                        back.neighbor_type,
                        back.neighbor_dir
                    )));
                }
                let mine = &t.template.vars[t.template.var_index(&d.dir).expect("checked")];
                let theirs = &other.template.vars[other.template.var_index(&d.neighbor_dir).expect("checked")];
                if !mine.domain.same_values(&theirs.domain) {
                    return Err(bad("edge domains differ".into()));
                }
            }
        }
        Ok(())
    }

    /// Checks that every node's type has a tile and its neighborhood matches it.
    /// Node types are template names; edge directions are the ports binding them.
    pub fn validate_instance(&self, net: &ProcessNetwork) -> Result<(), TileError> {
        for n in net.node_ids() {
            let node = net.node(n);
            let ty = node.template.name.as_str();
            let tile = self.tile(ty).ok_or_else(|| TileError::Untyped {
                node: node.name.clone(),
                ty: ty.to_string(),
            })?;
            for d in &tile.dirs {
                let violation = |reason: String| TileError::Violation {
                    node: node.name.clone(),
                    dir: d.dir.clone(),
                    reason,
                };
                let var = node.template.var_index(&d.dir).expect("tile checked");
                let e = node
                    .edge_of_var(var)
                    .ok_or_else(|| violation("port is unbound".into()))?;
                let others: Vec<NodeId> = net
                    .nodes_on_edge(e)
                    .iter()
                    .copied()
                    .filter(|&m| m != n)
                    .collect();
                let [m] = others[..] else {
                    return Err(violation(format!(
                        "edge `{}` joins {} other nodes, expected 1",
                        net.edge(e).name,
                        others.len()
                    )));
                };
                let mnode = net.node(m);
                if mnode.template.name != d.neighbor_type {
                    return Err(violation(format!(
                        "neighbor `{}` has type `{}`, expected `{}`",
                        mnode.name, mnode.template.name, d.neighbor_type
                    )));
                }
                if mnode.port_of_edge(e) != Some(d.neighbor_dir.as_str()) {
                    return Err(violation(format!(
                        "neighbor `{}` binds edge `{}` on `{}`, expected `{}`",
                        mnode.name,
                        net.edge(e).name,
                        mnode.port_of_edge(e).unwrap_or("?"),
                        d.neighbor_dir
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same-type nodes related by the direction-respecting edge map.
    pub fn induced_balance(&self, net: &ProcessNetwork) -> Result<BalanceRelation, TileError> {
        self.validate_instance(net)?;
        let mut by_type: BTreeMap<&str, Vec<NodeId>> = BTreeMap::new();
        for n in net.node_ids() {
            by_type.entry(net.node(n).template.name.as_str()).or_default().push(n);
        }
        let mut triples = BTreeSet::new();
        for nodes in by_type.values() {
            for &m in nodes {
                for &n in nodes {
                    let (mm, nn) = (net.node(m), net.node(n));
                    let map: BTreeMap<EdgeId, EdgeId> = mm
                        .template
                        .ports()
                        .map(|(i, _)| {
                            (
                                mm.edge_of_var(i).expect("bound"),
                                nn.edge_of_var(i).expect("bound"),
                            )
                        })
                        .collect();
                    triples.insert(Similarity::new(m, map, n));
                }
            }
        }
        Ok(BalanceRelation::new(triples))
    }

    /// Number of distinct tile types.
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }
}

/// Built-in network families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    /// Uniform ring of `n >= 2` nodes over a single tile with two directions.
    Ring(usize),
    /// Alternating ring of `n` nodes (even, `>= 4`) over two tiles.
    RedBlackRing(usize),
    /// `w x h` torus (`w, h >= 3`) over a single tile with four directions.
    Torus(usize, usize),
}

impl Family {
    /// Parses `ring 5`, `red_black_ring 6`, `torus 3 4`.
    pub fn parse(name: &str, params: &[usize]) -> Result<Self, TileError> {
        let bad = || TileError::BadParams(format!("wrong parameter count for `{name}`"));
        Ok(match name {
            "ring" => match params {
                [n] => Family::Ring(*n),
                _ => return Err(bad()),
            },
            "red_black_ring" => match params {
                [n] => Family::RedBlackRing(*n),
                _ => return Err(bad()),
            },
            "torus" => match params {
                [w, h] => Family::Torus(*w, *h),
                _ => return Err(bad()),
            },
            other => return Err(TileError::UnknownFamily(other.to_string())),
        })
    }
}

/// First appearance order of direction pairs `(d, d')` with `d < d'` by tile order.
fn direction_pairs(tile: &Tile) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    for d in &tile.dirs {
        if out.iter().any(|(a, b)| *a == d.dir || *b == d.dir) {
            continue;
        }
        out.push((d.dir.clone(), d.neighbor_dir.clone()));
    }
    out
}

/// `exactly(count, e0 == value, e1 == value, ...)` over every edge of `net`,
/// for use with [`ProcessNetwork::with_initially`].
pub fn exactly_on_edges(net: &ProcessNetwork, count: usize, value: &str) -> Expr {
    Expr::Exactly {
        count,
        items: net.edges().iter().map(|e| Expr::eq(e.name.clone(), value)).collect(),
    }
}

/// Builds a member of `family` from the tile set. Edges are named `e0, e1, ...`
/// and nodes `p0, p1, ...` (torus: `c{x}_{y}`). The network has no initial
/// constraint; callers add one with [`ProcessNetwork::with_initially`].
pub fn generate(tiles: &TileSet, family: Family) -> Result<ProcessNetwork, TileError> {
    match family {
        Family::Ring(n) => {
            if n < 2 {
                return Err(TileError::BadParams("ring needs at least 2 nodes".into()));
            }
            let [t] = &tiles.tiles[..] else {
                return Err(TileError::BadParams("ring needs a tile set with one tile".into()));
            };
            ring(&[t, t], n, &format!("ring{n}"))
        }
        Family::RedBlackRing(n) => {
            if n < 4 || n % 2 != 0 {
                return Err(TileError::BadParams(
                    "red_black_ring needs an even size of at least 4".into(),
                ));
            }
            let [a, b] = &tiles.tiles[..] else {
                return Err(TileError::BadParams(
                    "red_black_ring needs a tile set with two tiles".into(),
                ));
            };
            ring(&[a, b], n, &format!("red_black_ring{n}"))
        }
        Family::Torus(w, h) => {
            if w < 3 || h < 3 {
                return Err(TileError::BadParams("torus needs width and height of at least 3".into()));
            }
            let [t] = &tiles.tiles[..] else {
                return Err(TileError::BadParams("torus needs a tile set with one tile".into()));
            };
            torus(t, w, h)
        }
    }
}

fn edge_domain(tile: &Tile, dir: &str) -> crate::model::Domain {
    let tpl = &tile.template;
    tpl.vars[tpl.var_index(dir).expect("tile direction is a port")].domain.clone()
}

/// Node `i` binds its first direction to edge `e{(i+1) % n}`, shared with node
/// `i + 1` on the partner direction; so node `i`'s partner direction is `e{i}`.
fn ring(types: &[&Tile; 2], n: usize, name: &str) -> Result<ProcessNetwork, TileError> {
    let pairs = direction_pairs(types[0]);
    let [(fwd, back)] = &pairs[..] else {
        return Err(TileError::BadParams("ring tiles need exactly two directions".into()));
    };
    let edges: Vec<Edge> = (0..n)
        .map(|i| Edge {
            name: format!("e{i}"),
            domain: edge_domain(types[0], back),
        })
        .collect();
    let nodes = (0..n)
        .map(|i| NodeSpec {
            name: format!("p{i}"),
            template: types[i % 2].template.clone(),
            bindings: vec![
                Binding::new(back.clone(), EdgeId(i)),
                Binding::new(fwd.clone(), EdgeId((i + 1) % n)),
            ],
        })
        .collect();
    Ok(ProcessNetwork::new(name, nodes, edges, None)?)
}

/// The first direction pair runs along x, the second along y. Cell `(x, y)`
/// binds the first direction of each pair to the edge it shares with the next
/// cell along that axis.
fn torus(tile: &Tile, w: usize, h: usize) -> Result<ProcessNetwork, TileError> {
    let pairs = direction_pairs(tile);
    let [(xf, xb), (yf, yb)] = &pairs[..] else {
        return Err(TileError::BadParams("torus tiles need exactly four directions".into()));
    };
    let id = |x: usize, y: usize| y * w + x;
    let mut edges = Vec::with_capacity(2 * w * h);
    // edge 2k joins cell k to its x-successor, 2k+1 to its y-successor
    for y in 0..h {
        for x in 0..w {
            edges.push(Edge {
                name: format!("ex{x}_{y}"),
                domain: edge_domain(tile, xf),
            });
            edges.push(Edge {
                name: format!("ey{x}_{y}"),
                domain: edge_domain(tile, yf),
            });
        }
    }
    let mut nodes = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let k = id(x, y);
            let left = id((x + w - 1) % w, y);
            let up = id(x, (y + h - 1) % h);
            nodes.push(NodeSpec {
                name: format!("c{x}_{y}"),
                template: tile.template.clone(),
                bindings: vec![
                    Binding::new(xf.clone(), EdgeId(2 * k)),
                    Binding::new(xb.clone(), EdgeId(2 * left)),
                    Binding::new(yf.clone(), EdgeId(2 * k + 1)),
                    Binding::new(yb.clone(), EdgeId(2 * up + 1)),
                ],
            });
        }
    }
    Ok(ProcessNetwork::new(format!("torus{w}x{h}"), nodes, edges, None)?)
}
