use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Open pipes of one period arranged as rooted trees.
#[derive(Debug, Clone)]
pub struct Forest {
    /// Nodes in breadth-first order, tree by tree.
    pub order: Vec<usize>,
    /// Pipe connecting each node to its parent; `None` for roots.
    pub parent_pipe: Vec<Option<usize>>,
    pub parent: Vec<Option<usize>>,
    /// Station feeding the tree of each node, if any.
    pub station: Vec<Option<usize>>,
}

/// Checks that the open pipes form a forest in which every tree with heat
/// load has exactly one station, and roots each tree at its station.
pub fn build_forest(inst: &Instance, status: &[bool], hes_heat: &[f64], period: usize) -> Result<Forest> {
    let n = inst.nodes.len();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (b, p) in inst.pipes.iter().enumerate() {
        if status[b] {
            adj[p.from_node].push((p.to_node, b));
            adj[p.to_node].push((p.from_node, b));
        }
    }
    let mut station_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, s) in inst.heat_stations.iter().enumerate() {
        station_at[s.node].push(j);
    }

    let mut seen = vec![false; n];
    let mut forest = Forest {
        order: Vec::with_capacity(n),
        parent_pipe: vec![None; n],
        parent: vec![None; n],
        station: vec![None; n],
    };
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // Collect the component first to pick the root.
        let mut comp = vec![start];
        seen[start] = true;
        let mut i = 0;
        let mut edges = 0;
        while i < comp.len() {
            for &(m, _) in &adj[comp[i]] {
                edges += 1;
                if !seen[m] {
                    seen[m] = true;
                    comp.push(m);
                }
            }
            i += 1;
        }
        let edges = edges / 2;
        let topo_err = |message: String| Error::Topology { period, message };
        let ids = || comp.iter().map(|&k| inst.nodes[k].id.as_str()).collect::<Vec<_>>().join(", ");
        if edges != comp.len() - 1 {
            return Err(topo_err(format!("open pipes form a loop among nodes {}", ids())));
        }
        let stations: Vec<usize> = comp.iter().flat_map(|&k| station_at[k].iter().copied()).collect();
        let loaded = inst
            .hes
            .iter()
            .enumerate()
            .any(|(k, h)| comp.contains(&h.node) && hes_heat[k] > 0.0);
        if stations.len() > 1 {
            return Err(topo_err(format!("nodes {} are fed by {} heat stations", ids(), stations.len())));
        }
        if loaded && stations.is_empty() {
            return Err(topo_err(format!("nodes {} carry heat load but no heat station", ids())));
        }
        let root = stations.first().map_or(start, |&j| inst.heat_stations[j].node);
        let station = stations.first().copied();

        let mut queue = VecDeque::from([root]);
        let mut visited = vec![false; n];
        visited[root] = true;
        while let Some(k) = queue.pop_front() {
            forest.order.push(k);
            forest.station[k] = station;
            for &(m, b) in &adj[k] {
                if !visited[m] {
                    visited[m] = true;
                    forest.parent[m] = Some(k);
                    forest.parent_pipe[m] = Some(b);
                    queue.push_back(m);
                }
            }
        }
    }
    Ok(forest)
}

/// Mass flow rates of one period, kg/s. Pipe flows are signed against the
/// pipe's reference direction on the supply side; the return pipe carries
/// the same flow in the opposite direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassFlows {
    pub pipe: Vec<f64>,
    pub station: Vec<f64>,
    pub hes: Vec<f64>,
}

/// HES flows from `m = h / (c·ΔT)`, then pipe and station flows by
/// accumulating nodal withdrawals from the leaves towards each station.
pub fn solve_mass_flows(
    inst: &Instance,
    status: &[bool],
    hes_heat: &[f64],
    delta_t: &[f64],
    period: usize,
) -> Result<MassFlows> {
    let forest = build_forest(inst, status, hes_heat, period)?;
    mass_flows_on(inst, &forest, hes_heat, delta_t)
}

pub(crate) fn mass_flows_on(inst: &Instance, forest: &Forest, hes_heat: &[f64], delta_t: &[f64]) -> Result<MassFlows> {
    let c = inst.constants.c;
    let mut hes = vec![0.0; inst.hes.len()];
    let mut withdrawal = vec![0.0; inst.nodes.len()];
    for (k, h) in inst.hes.iter().enumerate() {
        if hes_heat[k] == 0.0 {
            continue;
        }
        if delta_t[k].is_nan() || delta_t[k] <= 0.0 {
            return Err(Error::NonPositiveDeltaT {
                element: h.id.clone(),
                delta_t: delta_t[k],
            });
        }
        hes[k] = hes_heat[k] * crate::dhn_flow::W_PER_MW / (c * delta_t[k]);
        withdrawal[h.node] += hes[k];
    }

    let mut subtree = withdrawal;
    let mut pipe = vec![0.0; inst.pipes.len()];
    for &k in forest.order.iter().rev() {
        if let (Some(b), Some(parent)) = (forest.parent_pipe[k], forest.parent[k]) {
            let f = subtree[k];
            pipe[b] = if inst.pipes[b].from_node == parent { f } else { -f };
            subtree[parent] += f;
        }
    }
    let mut station = vec![0.0; inst.heat_stations.len()];
    for (j, s) in inst.heat_stations.iter().enumerate() {
        station[j] = subtree[s.node];
    }
    for (b, p) in inst.pipes.iter().enumerate() {
        let limit = p.m_max_supply.min(p.m_max_return);
        if pipe[b].abs() > limit * (1.0 + 1e-12) {
            return Err(Error::FlowBound {
                pipe: p.id.clone(),
                flow: pipe[b],
                limit,
            });
        }
    }
    Ok(MassFlows { pipe, station, hes })
}
