use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Instance, PhysicalConstants, Pipe};

use super::flows::MassFlows;

/// Water temperature leaving a pipe of inlet temperature `t_in`.
///
/// Depends on `|flow|` only, so it holds for either flow direction. With no
/// flow the water is taken to be stagnant at `t_in`.
pub fn pipe_outlet_temperature(pipe: &Pipe, flow: f64, t_in: f64, ambient: f64, k: &PhysicalConstants) -> f64 {
    if flow == 0.0 || pipe.conductivity == 0.0 {
        return t_in;
    }
    let x = pipe.conductivity * pipe.length / (flow.abs() * pipe.cross_area * k.rho * k.c);
    ambient + (t_in - ambient) * (-x).exp()
}

/// Node and pipe temperatures of one period, °C. Pipe temperatures are at
/// the physical inlet and outlet. Nodes without throughput are `NaN`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Temperatures {
    pub node_supply: Vec<f64>,
    pub node_return: Vec<f64>,
    pub pipe_supply_in: Vec<f64>,
    pub pipe_supply_out: Vec<f64>,
    pub pipe_return_in: Vec<f64>,
    pub pipe_return_out: Vec<f64>,
}

/// A directed edge `(from, to, pipe, |flow|)`.
type Edge = (usize, usize, usize, f64);

/// `(inlet, outlet)` temperature of an edge.
type Mixed = (f64, f64);

/// Flow-weighted mixing in topological order. `inject[n]` lists the
/// `(flow, temperature)` streams entering node `n` from outside the network.
/// Returns node temperatures and per-edge `(inlet, outlet)` temperatures.
fn sweep(
    inst: &Instance,
    edges: &[Edge],
    inject: &[Vec<(f64, f64)>],
    ambient: f64,
    period: usize,
) -> Result<(Vec<f64>, Vec<Mixed>)> {
    let n = inst.nodes.len();
    let mut indeg = vec![0usize; n];
    let mut outs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut ins: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(a, b, _, _)) in edges.iter().enumerate() {
        indeg[b] += 1;
        outs[a].push(e);
        ins[b].push(e);
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut node_t = vec![f64::NAN; n];
    let mut edge_t = vec![(f64::NAN, f64::NAN); edges.len()];
    let mut done = 0;
    while let Some(i) = queue.pop_front() {
        done += 1;
        let mut flow = 0.0;
        let mut energy = 0.0;
        for &e in &ins[i] {
            flow += edges[e].3;
            energy += edges[e].3 * edge_t[e].1;
        }
        for &(m, t) in &inject[i] {
            flow += m;
            energy += m * t;
        }
        if flow > 0.0 {
            node_t[i] = energy / flow;
        } else if !outs[i].is_empty() {
            return Err(Error::ZeroInflow {
                node: inst.nodes[i].id.clone(),
            });
        }
        for &e in &outs[i] {
            let (_, to, b, m) = edges[e];
            let t_in = node_t[i];
            edge_t[e] = (t_in, pipe_outlet_temperature(&inst.pipes[b], m, t_in, ambient, &inst.constants));
            indeg[to] -= 1;
            if indeg[to] == 0 {
                queue.push_back(to);
            }
        }
    }
    if done != n {
        return Err(Error::Topology {
            period,
            message: "mass flows form a directed cycle".into(),
        });
    }
    Ok((node_t, edge_t))
}

/// Supply temperatures by sweeping from the stations along the flow, then
/// return temperatures by sweeping from the heat-exchange stations back.
pub fn propagate_temperatures(
    inst: &Instance,
    flows: &MassFlows,
    station_supply: &[f64],
    hes_return: &[f64],
    ambient: f64,
    period: usize,
) -> Result<Temperatures> {
    let n = inst.nodes.len();
    let np = inst.pipes.len();
    let mut supply_edges = Vec::new();
    let mut return_edges = Vec::new();
    for (b, p) in inst.pipes.iter().enumerate() {
        let m = flows.pipe[b];
        if m > 0.0 {
            supply_edges.push((p.from_node, p.to_node, b, m));
            return_edges.push((p.to_node, p.from_node, b, m));
        } else if m < 0.0 {
            supply_edges.push((p.to_node, p.from_node, b, -m));
            return_edges.push((p.from_node, p.to_node, b, -m));
        }
    }

    let mut inject = vec![Vec::new(); n];
    for (j, s) in inst.heat_stations.iter().enumerate() {
        if flows.station[j] > 0.0 {
            inject[s.node].push((flows.station[j], station_supply[j]));
        }
    }
    let (mut node_supply, supply_t) = sweep(inst, &supply_edges, &inject, ambient, period)?;
    for (j, s) in inst.heat_stations.iter().enumerate() {
        if node_supply[s.node].is_nan() {
            node_supply[s.node] = station_supply[j];
        }
    }

    let mut inject = vec![Vec::new(); n];
    for (k, h) in inst.hes.iter().enumerate() {
        if flows.hes[k] > 0.0 {
            inject[h.node].push((flows.hes[k], hes_return[k]));
        }
    }
    let (node_return, return_t) = sweep(inst, &return_edges, &inject, ambient, period)?;

    let mut t = Temperatures {
        node_supply,
        node_return,
        pipe_supply_in: vec![f64::NAN; np],
        pipe_supply_out: vec![f64::NAN; np],
        pipe_return_in: vec![f64::NAN; np],
        pipe_return_out: vec![f64::NAN; np],
    };
    for (e, &(_, _, b, _)) in supply_edges.iter().enumerate() {
        t.pipe_supply_in[b] = supply_t[e].0;
        t.pipe_supply_out[b] = supply_t[e].1;
    }
    for (e, &(_, _, b, _)) in return_edges.iter().enumerate() {
        t.pipe_return_in[b] = return_t[e].0;
        t.pipe_return_out[b] = return_t[e].1;
    }
    Ok(t)
}

/// Largest `|Σ m·τ (in) − (Σ m)·τ_node|` over all nodes, supply and return.
pub fn mixing_residual(inst: &Instance, flows: &MassFlows, temps: &Temperatures, station_supply: &[f64], hes_return: &[f64]) -> f64 {
    let n = inst.nodes.len();
    let mut s_in = vec![(0.0, 0.0); n];
    let mut r_in = vec![(0.0, 0.0); n];
    let add = |acc: &mut (f64, f64), m: f64, t: f64| {
        acc.0 += m;
        acc.1 += m * t;
    };
    for (b, p) in inst.pipes.iter().enumerate() {
        let m = flows.pipe[b];
        if m == 0.0 {
            continue;
        }
        let (s_to, r_to) = if m > 0.0 { (p.to_node, p.from_node) } else { (p.from_node, p.to_node) };
        add(&mut s_in[s_to], m.abs(), temps.pipe_supply_out[b]);
        add(&mut r_in[r_to], m.abs(), temps.pipe_return_out[b]);
    }
    for (j, s) in inst.heat_stations.iter().enumerate() {
        if flows.station[j] > 0.0 {
            add(&mut s_in[s.node], flows.station[j], station_supply[j]);
        }
    }
    for (k, h) in inst.hes.iter().enumerate() {
        if flows.hes[k] > 0.0 {
            add(&mut r_in[h.node], flows.hes[k], hes_return[k]);
        }
    }
    (0..n)
        .flat_map(|i| {
            [
                (s_in[i], temps.node_supply[i]),
                (r_in[i], temps.node_return[i]),
            ]
        })
        .filter(|((m, _), _)| *m > 0.0)
        .map(|((m, e), t)| (e - m * t).abs())
        .fold(0.0, f64::max)
}
