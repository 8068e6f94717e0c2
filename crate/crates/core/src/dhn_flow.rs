//! Linearized energy-flow model of the primary heating network.
//!
//! Temperatures and mass flows are replaced by signed heat quantities at pipe
//! ends, and the pipe heat loss is approximated by a constant evaluated at
//! the lower temperature limits. Valves are modeled with status, open and
//! close binaries.

use serde::Serialize;

use crate::instance::{DhnNode, Instance, PhysicalConstants, Pipe};
use crate::milp::model::{Constraint, LinExpr};
use crate::milp::registry::{Registry, VarKey};
use crate::milp::solution::Schedule;

pub const W_PER_MW: f64 = 1e6;

/// Upper bound on the heat quantity a pipe can carry, MWth.
pub fn pipe_heat_capacity(pipe: &Pipe, nodes: &[DhnNode], constants: &PhysicalConstants) -> f64 {
    let (a, b) = (&nodes[pipe.from_node], &nodes[pipe.to_node]);
    let supply_max = a.supply_temp_bounds.1.max(b.supply_temp_bounds.1);
    let return_min = a.return_temp_bounds.0.min(b.return_temp_bounds.0);
    let window = (supply_max - return_min).max(0.0);
    constants.c * pipe.m_max_supply.max(pipe.m_max_return) * window / W_PER_MW
}

/// Constant heat loss of a pipe for one period, MWth.
///
/// `conductivity · length / (cross_area · rho)` times the excess of the
/// from-node's lower supply and return limits over ambient gives watts.
pub fn constant_pipe_loss(
    pipe: &Pipe,
    nodes: &[DhnNode],
    ambient: f64,
    constants: &PhysicalConstants,
) -> f64 {
    let n = &nodes[pipe.from_node];
    let excess = n.supply_temp_bounds.0 + n.return_temp_bounds.0 - 2.0 * ambient;
    let watts = pipe.conductivity * pipe.length / (pipe.cross_area * constants.rho) * excess;
    watts.max(0.0) / W_PER_MW
}

/// Loss of pipe `b` in every period.
pub fn pipe_loss_series(inst: &Instance, b: usize) -> Vec<f64> {
    inst.ambient
        .iter()
        .map(|&am| constant_pipe_loss(&inst.pipes[b], &inst.nodes, am, &inst.constants))
        .collect()
}

/// Relative error of the first-order loss approximation `1 − e^{−x} ≈ x`.
pub fn first_order_loss_error(x: f64) -> f64 {
    let exact = -(-x).exp_m1();
    ((exact - x) / exact).abs()
}

/// Station aggregation, nodal balance, loss coupling and status bounds.
#[allow(clippy::needless_range_loop)]
pub fn build_flow_constraints(inst: &Instance, reg: &Registry) -> Vec<Constraint> {
    let mut out = Vec::new();
    let (pipes_out, pipes_in) = inst.node_incidence();
    let losses: Vec<Vec<f64>> = (0..inst.pipes.len()).map(|b| pipe_loss_series(inst, b)).collect();
    let caps: Vec<f64> = inst
        .pipes
        .iter()
        .map(|p| pipe_heat_capacity(p, &inst.nodes, &inst.constants))
        .collect();

    for t in 0..inst.horizon {
        let tt = t + 1;
        for (station, s) in inst.heat_stations.iter().enumerate() {
            let mut e = LinExpr::new().with(reg.get(VarKey::StationHeat { station, t }), 1.0);
            for &chp in &s.chp_units {
                e.add(reg.get(VarKey::ChpHeat { chp, t }), -1.0);
            }
            for &boiler in &s.boilers {
                e.add(reg.get(VarKey::BoilerHeat { boiler, t }), -1.0);
            }
            out.push(Constraint::eq(format!("hs_{}_{tt}", s.id), e, 0.0));
        }

        for (n, node) in inst.nodes.iter().enumerate() {
            // Outflow (pipe inlets and loads) equals inflow (pipe outlets and stations).
            let mut e = LinExpr::new();
            for &b in &pipes_out[n] {
                e.add(reg.get(VarKey::PipeIn { pipe: b, t }), 1.0);
            }
            for &b in &pipes_in[n] {
                e.add(reg.get(VarKey::PipeOut { pipe: b, t }), -1.0);
            }
            for (hes, h) in inst.hes.iter().enumerate() {
                if h.node == n {
                    e.add(reg.get(VarKey::HesHeat { hes, t }), 1.0);
                }
            }
            for (station, s) in inst.heat_stations.iter().enumerate() {
                if s.node == n {
                    e.add(reg.get(VarKey::StationHeat { station, t }), -1.0);
                }
            }
            if !e.terms().is_empty() {
                out.push(Constraint::eq(format!("node_{}_{tt}", node.id), e, 0.0));
            }
        }

        for (b, pipe) in inst.pipes.iter().enumerate() {
            let h_in = reg.get(VarKey::PipeIn { pipe: b, t });
            let h_out = reg.get(VarKey::PipeOut { pipe: b, t });
            let mu = reg.get(VarKey::PipeStatus { pipe: b, t });
            out.push(Constraint::eq(
                format!("loss_{}_{tt}", pipe.id),
                LinExpr::new().with(h_out, 1.0).with(h_in, -1.0).with(mu, losses[b][t]),
                0.0,
            ));
            let cap = caps[b];
            for (tag, h) in [("in", h_in), ("out", h_out)] {
                out.push(Constraint::le(
                    format!("cap_{tag}_hi_{}_{tt}", pipe.id),
                    LinExpr::new().with(h, 1.0).with(mu, -cap),
                    0.0,
                ));
                out.push(Constraint::ge(
                    format!("cap_{tag}_lo_{}_{tt}", pipe.id),
                    LinExpr::new().with(h, 1.0).with(mu, cap),
                    0.0,
                ));
            }
        }
    }
    out
}

/// Valve status transitions, minimum switching intervals and the constant
/// open-pipe count.
pub fn build_valve_constraints(inst: &Instance, reg: &Registry) -> Vec<Constraint> {
    let mut out = Vec::new();
    if inst.pipes.is_empty() {
        return out;
    }
    for (b, pipe) in inst.pipes.iter().enumerate() {
        if !pipe.has_valve {
            continue;
        }
        let mr = pipe.min_switch_interval.max(1) as usize;
        for t in 0..inst.horizon {
            let tt = t + 1;
            let mu = reg.get(VarKey::PipeStatus { pipe: b, t });
            let x = reg.get(VarKey::ValveOpen { pipe: b, t });
            let y = reg.get(VarKey::ValveClose { pipe: b, t });
            let mut e = LinExpr::new().with(mu, 1.0).with(x, -1.0).with(y, 1.0);
            if t == 0 {
                e.add_constant(-f64::from(u8::from(pipe.initial_status)));
            } else {
                e.add(reg.get(VarKey::PipeStatus { pipe: b, t: t - 1 }), -1.0);
            }
            out.push(Constraint::eq(format!("vs_{}_{tt}", pipe.id), e, 0.0));

            let window = t.saturating_sub(mr - 1)..=t;
            let mut opens = LinExpr::new().with(mu, -1.0);
            let mut closes = LinExpr::new().with(mu, 1.0);
            for k in window {
                opens.add(reg.get(VarKey::ValveOpen { pipe: b, t: k }), 1.0);
                closes.add(reg.get(VarKey::ValveClose { pipe: b, t: k }), 1.0);
            }
            out.push(Constraint::le(format!("vopen_{}_{tt}", pipe.id), opens, 0.0));
            out.push(Constraint::le(format!("vclose_{}_{tt}", pipe.id), closes, 1.0));
        }
    }
    let initial_open = inst.pipes.iter().filter(|p| p.initial_status).count() as f64;
    for t in 0..inst.horizon {
        let mut e = LinExpr::new();
        for b in 0..inst.pipes.len() {
            e.add(reg.get(VarKey::PipeStatus { pipe: b, t }), 1.0);
        }
        out.push(Constraint::eq(format!("vcount_{}", t + 1), e, initial_open));
    }
    out
}

/// Valve statuses and switching events of a schedule, `[pipe][period]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValveSchedule {
    pub status: Vec<Vec<bool>>,
    pub opened: Vec<Vec<bool>>,
    pub closed: Vec<Vec<bool>>,
}

impl ValveSchedule {
    pub fn from_schedule(s: &Schedule) -> Self {
        ValveSchedule {
            status: s.pipe_status.clone(),
            opened: s.valve_open.clone(),
            closed: s.valve_close.clone(),
        }
    }

    pub fn open_count(&self, t: usize) -> usize {
        self.status.iter().filter(|s| s[t]).count()
    }

    /// Violations of the transition, switching-interval and open-count rules.
    pub fn violations(&self, inst: &Instance) -> Vec<String> {
        let mut v = Vec::new();
        let initial = inst.pipes.iter().filter(|p| p.initial_status).count();
        for (b, pipe) in inst.pipes.iter().enumerate() {
            let mr = pipe.min_switch_interval.max(1) as usize;
            let mut prev = pipe.initial_status;
            for t in 0..inst.horizon {
                let (s, x, y) = (self.status[b][t], self.opened[b][t], self.closed[b][t]);
                let lhs = i32::from(s) - i32::from(prev);
                let rhs = i32::from(x) - i32::from(y);
                if lhs != rhs {
                    v.push(format!("pipe {} period {}: status transition", pipe.id, t + 1));
                }
                if !pipe.has_valve && s != pipe.initial_status {
                    v.push(format!("pipe {} period {}: valve-less pipe switched", pipe.id, t + 1));
                }
                let lo = t.saturating_sub(mr - 1);
                let opens = (lo..=t).filter(|&k| self.opened[b][k]).count();
                let closes = (lo..=t).filter(|&k| self.closed[b][k]).count();
                if opens > usize::from(s) || closes > usize::from(!s) {
                    v.push(format!("pipe {} period {}: switching interval", pipe.id, t + 1));
                }
                prev = s;
            }
        }
        for t in 0..inst.horizon {
            if self.open_count(t) != initial {
                v.push(format!(
                    "period {}: {} open pipes, expected {initial}",
                    t + 1,
                    self.open_count(t)
                ));
            }
        }
        v
    }
}

/// Heat delivered by one station to the component it feeds in one period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationSupply {
    pub station: usize,
    pub period: usize,
    /// Heat-exchange stations in the station's component.
    pub hes: Vec<usize>,
    /// Open pipes in the component.
    pub pipes: Vec<usize>,
    pub supplied: f64,
    pub served: f64,
    pub losses: f64,
    /// `supplied − served − losses`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsolationViolation {
    pub period: usize,
    pub nodes: Vec<usize>,
    pub stations: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SupplyLedger {
    pub entries: Vec<StationSupply>,
    pub violations: Vec<IsolationViolation>,
}

impl SupplyLedger {
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual.abs()).fold(0.0, f64::max)
    }

    /// HES served by `station` in `period`.
    pub fn served_by(&self, station: usize, period: usize) -> Option<&[usize]> {
        self.entries
            .iter()
            .find(|e| e.station == station && e.period == period)
            .map(|e| e.hes.as_slice())
    }
}

/// Connected components of the nodes under the open pipes of period `t`.
pub fn open_components(inst: &Instance, status: &[Vec<bool>], t: usize) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..inst.nodes.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (b, p) in inst.pipes.iter().enumerate() {
        if status[b][t] {
            let (a, c) = (find(&mut parent, p.from_node), find(&mut parent, p.to_node));
            if a != c {
                parent[a.max(c)] = a.min(c);
            }
        }
    }
    (0..inst.nodes.len()).map(|n| find(&mut parent, n)).collect()
}

/// Splits the network into the components fed by each station and checks
/// that every station covers exactly the loads and losses of its component.
pub fn station_supply_ledger(inst: &Instance, s: &Schedule) -> SupplyLedger {
    let mut ledger = SupplyLedger::default();
    for t in 0..inst.horizon {
        let comp = open_components(inst, &s.pipe_status, t);
        let mut roots: Vec<usize> = comp.clone();
        roots.sort_unstable();
        roots.dedup();
        for root in roots {
            let nodes: Vec<usize> = (0..inst.nodes.len()).filter(|&n| comp[n] == root).collect();
            let stations: Vec<usize> = (0..inst.heat_stations.len())
                .filter(|&j| comp[inst.heat_stations[j].node] == root)
                .collect();
            let hes: Vec<usize> = (0..inst.hes.len()).filter(|&k| comp[inst.hes[k].node] == root).collect();
            let pipes: Vec<usize> = (0..inst.pipes.len())
                .filter(|&b| s.pipe_status[b][t] && comp[inst.pipes[b].from_node] == root)
                .collect();
            if stations.len() != 1 {
                if stations.len() > 1 || !hes.is_empty() || !pipes.is_empty() {
                    ledger.violations.push(IsolationViolation { period: t, nodes, stations });
                }
                continue;
            }
            let supplied = s.station_heat[stations[0]][t];
            let served: f64 = hes.iter().map(|&k| s.hes_heat[k][t]).sum();
            let losses: f64 = pipes.iter().map(|&b| s.pipe_in[b][t] - s.pipe_out[b][t]).sum();
            ledger.entries.push(StationSupply {
                station: stations[0],
                period: t,
                hes,
                pipes,
                supplied,
                served,
                losses,
                residual: supplied - served - losses,
            });
        }
    }
    ledger.entries.sort_by_key(|e| (e.period, e.station));
    ledger
}

/// `Σ h^HS − Σ h^HES − Σ losses` per period.
pub fn global_heat_residuals(inst: &Instance, s: &Schedule) -> Vec<f64> {
    (0..inst.horizon)
        .map(|t| {
            let supplied: f64 = s.station_heat.iter().map(|h| h[t]).sum();
            let served: f64 = s.hes_heat.iter().map(|h| h[t]).sum();
            let losses: f64 = (0..inst.pipes.len()).map(|b| s.pipe_in[b][t] - s.pipe_out[b][t]).sum();
            supplied - served - losses
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn node(id: &str, s: (f64, f64), r: (f64, f64)) -> DhnNode {
        DhnNode {
            id: id.into(),
            supply_temp_bounds: s,
            return_temp_bounds: r,
        }
    }

    fn pipe(m: f64, lambda: f64, l: f64, a: f64) -> Pipe {
        Pipe {
            id: "P".into(),
            from_node: 0,
            to_node: 1,
            length: l,
            cross_area: a,
            conductivity: lambda,
            m_max_supply: m,
            m_max_return: m,
            has_valve: false,
            min_switch_interval: 1,
            initial_status: true,
        }
    }

    #[test]
    fn capacity_arithmetic() {
        let nodes = [node("a", (80.0, 100.0), (30.0, 50.0)), node("b", (80.0, 90.0), (40.0, 50.0))];
        let k = PhysicalConstants::default();
        // 4182 J/(kg K) * 100 kg/s * 70 K = 29 274 000 W
        assert_relative_eq!(pipe_heat_capacity(&pipe(100.0, 0.0, 1.0, 1.0), &nodes, &k), 29.274, epsilon = 1e-12);
        assert_eq!(pipe_heat_capacity(&pipe(0.0, 0.0, 1.0, 1.0), &nodes, &k), 0.0);
        let flat = [node("a", (50.0, 50.0), (50.0, 50.0)), node("b", (50.0, 50.0), (50.0, 50.0))];
        assert_eq!(pipe_heat_capacity(&pipe(100.0, 0.0, 1.0, 1.0), &flat, &k), 0.0);
    }

    #[test]
    fn loss_arithmetic() {
        let nodes = [node("a", (80.0, 100.0), (40.0, 60.0)), node("b", (80.0, 100.0), (40.0, 60.0))];
        let k = PhysicalConstants::default();
        let p = pipe(100.0, 0.2, 1000.0, 0.3);
        // 0.2 * 1000 / (0.3 * 1000) * 120 = 80 W
        assert_relative_eq!(constant_pipe_loss(&p, &nodes, 0.0, &k), 80.0 / W_PER_MW, max_relative = 1e-14);
        assert_eq!(constant_pipe_loss(&pipe(100.0, 0.0, 1000.0, 0.3), &nodes, 0.0, &k), 0.0);
        let same = [node("a", (20.0, 100.0), (20.0, 60.0)), node("b", (80.0, 100.0), (40.0, 60.0))];
        assert_eq!(constant_pipe_loss(&p, &same, 20.0, &k), 0.0);
        // warmer ambient than the water: floored
        assert_eq!(constant_pipe_loss(&p, &same, 30.0, &k), 0.0);
    }

    #[test]
    fn first_order_loss_bound_on_grid() {
        let worst = (1..=1000)
            .map(|i| first_order_loss_error(i as f64 * 1e-6))
            .fold(0.0, f64::max);
        assert!(worst <= 5.1e-4, "{worst}");
        // the error grows like x/2
        assert_relative_eq!(first_order_loss_error(1e-3), 5e-4, max_relative = 1e-3);
    }
}
