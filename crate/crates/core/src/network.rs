//! Network models: directed multigraphs whose edges are the resources and
//! whose strategies are simple `s_i -> t_i` paths.

use std::collections::HashMap;

use crate::cost::SetCostFunction;
use crate::error::{Error, Result};
use crate::game::{GameModel, Resource};

/// Hard cap on the number of paths [`enumerate_paths`] returns.
pub const PATH_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub cost: SetCostFunction,
}

impl Edge {
    pub fn new(id: impl Into<String>, from: impl Into<String>, to: impl Into<String>, cost: SetCostFunction) -> Self {
        Edge {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            cost,
        }
    }
}

/// A directed multigraph plus one terminal pair per player. A player may
/// also carry a forced strategy list: a subset of her paths (as edge-id
/// sets) that replaces the full path set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkModel {
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
    pub terminals: Vec<(String, String)>,
    pub forced: Vec<Option<Vec<Vec<String>>>>,
}

impl NetworkModel {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>, terminals: Vec<(String, String)>) -> Self {
        let forced = vec![None; terminals.len()];
        NetworkModel {
            vertices,
            edges,
            terminals,
            forced,
        }
    }

    pub fn players(&self) -> usize {
        self.terminals.len()
    }

    /// Restricts player `i` to the given edge-id sets.
    pub fn force(&mut self, i: usize, strategies: Vec<Vec<String>>) {
        self.forced[i] = Some(strategies);
    }

    fn graph(&self) -> Result<Graph> {
        let mut vertex_index = HashMap::with_capacity(self.vertices.len());
        for (v, name) in self.vertices.iter().enumerate() {
            if vertex_index.insert(name.as_str(), v).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate vertex `{name}`")));
            }
        }
        let mut out = vec![Vec::new(); self.vertices.len()];
        let mut seen = HashMap::with_capacity(self.edges.len());
        for (e, edge) in self.edges.iter().enumerate() {
            if seen.insert(edge.id.as_str(), e).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate edge `{}`", edge.id)));
            }
            let lookup = |name: &str| {
                vertex_index.get(name).copied().ok_or_else(|| {
                    Error::InvalidNetwork(format!("edge `{}` references unknown vertex `{name}`", edge.id))
                })
            };
            let (from, to) = (lookup(&edge.from)?, lookup(&edge.to)?);
            out[from].push((e, to));
        }
        Ok(Graph {
            vertex_index: vertex_index.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            out,
        })
    }
}

struct Graph {
    vertex_index: HashMap<String, usize>,
    /// Outgoing `(edge index, head)` per vertex, in edge declaration order.
    out: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    fn vertex(&self, name: &str) -> Result<usize> {
        self.vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidNetwork(format!("unknown vertex `{name}`")))
    }
}

/// All simple directed `s -> t` paths as edge-index sequences in path order.
/// Depth-first, exploring outgoing edges in declaration order, so the output
/// order is deterministic. An unreachable `t` yields no paths.
pub fn enumerate_paths(network: &NetworkModel, s: &str, t: &str) -> Result<Vec<Vec<usize>>> {
    let graph = network.graph()?;
    paths_in(&graph, graph.vertex(s)?, graph.vertex(t)?, s, t)
}

fn paths_in(graph: &Graph, s: usize, t: usize, s_name: &str, t_name: &str) -> Result<Vec<Vec<usize>>> {
    let mut paths = Vec::new();
    if s == t {
        paths.push(Vec::new());
        return Ok(paths);
    }
    let mut on_path = vec![false; graph.out.len()];
    let mut edges = Vec::new();
    // Explicit stack of (vertex, next outgoing slot).
    let mut stack = vec![(s, 0usize)];
    on_path[s] = true;
    while let Some(&mut (v, ref mut slot)) = stack.last_mut() {
        if let Some(&(e, head)) = graph.out[v].get(*slot) {
            *slot += 1;
            if on_path[head] {
                continue;
            }
            if head == t {
                let mut path = edges.clone();
                path.push(e);
                paths.push(path);
                if paths.len() > PATH_CAP {
                    return Err(Error::PathCap {
                        from: s_name.to_string(),
                        to: t_name.to_string(),
                        cap: PATH_CAP,
                    });
                }
                continue;
            }
            on_path[head] = true;
            edges.push(e);
            stack.push((head, 0));
        } else {
            on_path[v] = false;
            stack.pop();
            edges.pop();
        }
    }
    Ok(paths)
}

/// The resource allocation model of the network: edges become resources
/// (in declaration order) and each player's strategies are her simple paths,
/// or her forced list when one is given.
pub fn to_game(network: &NetworkModel) -> Result<GameModel> {
    let graph = network.graph()?;
    let n = network.players();
    if network.forced.len() != n {
        return Err(Error::InvalidNetwork(format!(
            "forced list has {} entries for {n} players",
            network.forced.len()
        )));
    }
    let edge_index: HashMap<&str, usize> = network
        .edges
        .iter()
        .enumerate()
        .map(|(e, edge)| (edge.id.as_str(), e))
        .collect();
    let mut strategies = Vec::with_capacity(n);
    for (i, (s, t)) in network.terminals.iter().enumerate() {
        let mut paths: Vec<Vec<usize>> = paths_in(&graph, graph.vertex(s)?, graph.vertex(t)?, s, t)?
            .into_iter()
            .map(|mut p| {
                p.sort_unstable();
                p
            })
            .collect();
        if paths.is_empty() {
            return Err(Error::InvalidNetwork(format!(
                "player {i} has no path from `{s}` to `{t}`"
            )));
        }
        if let Some(forced) = &network.forced[i] {
            if forced.is_empty() {
                return Err(Error::InvalidNetwork(format!("player {i} has an empty forced list")));
            }
            let mut chosen = Vec::with_capacity(forced.len());
            for strategy in forced {
                let mut edges = strategy
                    .iter()
                    .map(|id| {
                        edge_index
                            .get(id.as_str())
                            .copied()
                            .ok_or_else(|| Error::InvalidNetwork(format!("forced strategy names unknown edge `{id}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                edges.sort_unstable();
                edges.dedup();
                if !paths.contains(&edges) {
                    return Err(Error::InvalidNetwork(format!(
                        "forced strategy {strategy:?} of player {i} is not an `{s}` -> `{t}` path"
                    )));
                }
                chosen.push(edges);
            }
            paths = chosen;
        }
        strategies.push(paths);
    }
    let resources = network
        .edges
        .iter()
        .map(|edge| Resource::new(edge.id.clone(), edge.cost.clone()))
        .collect();
    GameModel::new(n, resources, strategies)
}
