//! Exact thermal-hydraulic state of the heating network for a solved
//! schedule, and the error of the linearized heat-loss model against it.
//!
//! Recovery fixes valve statuses and heat quantities from the schedule and
//! iterates between mass flows (from temperature differences) and
//! temperatures (from mass flows). Station supply temperatures are set by a
//! [`SetpointPolicy`]; each HES returns water at the midpoint of its node's
//! return temperature bounds.

mod flows;
mod temps;

use std::fmt::Write as _;

use serde::Serialize;

use crate::dhn_flow::W_PER_MW;
use crate::error::{Error, Result};
use crate::instance::{Instance, SetpointPolicy};
use crate::milp::Schedule;

pub use flows::{build_forest, solve_mass_flows, Forest, MassFlows};
pub use temps::{mixing_residual, pipe_outlet_temperature, propagate_temperatures, Temperatures};

pub const MAX_ITERATIONS: usize = 100;
pub const TEMPERATURE_TOL: f64 = 1e-6;

/// Heat quantities below this are treated as zero load.
const ZERO_HEAT: f64 = 1e-9;

/// A bound of the exact model violated by a recovered state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    pub element: String,
    pub quantity: &'static str,
    pub value: f64,
    pub bound: f64,
}

impl std::fmt::Display for BoundViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {} = {:.6} violates bound {:.6} by {:.3e}",
            self.element,
            self.quantity,
            self.value,
            self.bound,
            (self.value - self.bound).abs()
        )
    }
}

/// Recovered state of one period. Return-pipe flows equal the supply flows
/// in the opposite direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DhnState {
    pub period: usize,
    pub flows: MassFlows,
    pub temps: Temperatures,
    pub station_supply: Vec<f64>,
    pub hes_return: Vec<f64>,
    pub iterations: usize,
    /// `h_HS − c·ṁ_HS·(τ_supply − τ_return)` per station, MWth.
    pub station_residual: Vec<f64>,
    pub mixing_residual: f64,
    pub violations: Vec<BoundViolation>,
}

impl DhnState {
    /// Heat absorbed by each HES, recomputed from flows and temperatures.
    pub fn hes_heat(&self, inst: &Instance) -> Vec<f64> {
        inst.hes
            .iter()
            .enumerate()
            .map(|(k, h)| {
                let m = self.flows.hes[k];
                if m == 0.0 {
                    0.0
                } else {
                    inst.constants.c * m * (self.temps.node_supply[h.node] - self.hes_return[k]) / W_PER_MW
                }
            })
            .collect()
    }

    /// Heat quantity carried at the reference `from` end of pipe `b`, MWth,
    /// signed like the flow. `None` when the pipe carries no flow.
    pub fn pipe_heat(&self, inst: &Instance, b: usize) -> Option<f64> {
        let m = self.flows.pipe[b];
        if m == 0.0 {
            return None;
        }
        let from = inst.pipes[b].from_node;
        let (ts, tr) = if m > 0.0 {
            (self.temps.node_supply[from], self.temps.pipe_return_out[b])
        } else {
            (self.temps.pipe_supply_out[b], self.temps.node_return[from])
        };
        Some(inst.constants.c * m * (ts - tr) / W_PER_MW)
    }
}

fn midpoint((lo, hi): (f64, f64)) -> f64 {
    0.5 * (lo + hi)
}

fn max_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x.is_nan(), y.is_nan()) {
            (true, true) => 0.0,
            (false, false) => (x - y).abs(),
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// Recovers flows and temperatures for `period` of a solved schedule.
pub fn recover_state(inst: &Instance, schedule: &Schedule, period: usize, policy: SetpointPolicy) -> Result<DhnState> {
    if period >= inst.horizon {
        return Err(Error::InvalidInstance(format!(
            "period {period} outside horizon {}",
            inst.horizon
        )));
    }
    let status: Vec<bool> = schedule.pipe_status.iter().map(|s| s[period]).collect();
    let hes_heat: Vec<f64> = schedule
        .hes_heat
        .iter()
        .map(|h| if h[period].abs() < ZERO_HEAT { 0.0 } else { h[period] })
        .collect();
    let ambient = inst.ambient[period];
    let station_supply: Vec<f64> = inst
        .heat_stations
        .iter()
        .map(|s| {
            let (lo, hi) = inst.nodes[s.node].supply_temp_bounds;
            match policy {
                SetpointPolicy::Upper => hi,
                SetpointPolicy::Lower => lo,
            }
        })
        .collect();
    let hes_return: Vec<f64> = inst
        .hes
        .iter()
        .map(|h| midpoint(inst.nodes[h.node].return_temp_bounds))
        .collect();
    let mut delta_t: Vec<f64> = inst
        .hes
        .iter()
        .map(|h| {
            let node = &inst.nodes[h.node];
            midpoint(node.supply_temp_bounds) - midpoint(node.return_temp_bounds)
        })
        .collect();

    let forest = build_forest(inst, &status, &hes_heat, period)?;
    let mut previous: Option<Temperatures> = None;
    let mut last_change = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        let flows = flows::mass_flows_on(inst, &forest, &hes_heat, &delta_t)?;
        let temps = propagate_temperatures(inst, &flows, &station_supply, &hes_return, ambient, period)?;
        for (k, h) in inst.hes.iter().enumerate() {
            if hes_heat[k] > 0.0 {
                delta_t[k] = temps.node_supply[h.node] - hes_return[k];
            }
        }
        if let Some(prev) = &previous {
            last_change = max_change(&prev.node_supply, &temps.node_supply)
                .max(max_change(&prev.node_return, &temps.node_return));
            if last_change <= TEMPERATURE_TOL {
                return Ok(finish(inst, schedule, period, flows, temps, station_supply, hes_return, iteration));
            }
        }
        previous = Some(temps);
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        last_change,
    })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    inst: &Instance,
    schedule: &Schedule,
    period: usize,
    flows: MassFlows,
    temps: Temperatures,
    station_supply: Vec<f64>,
    hes_return: Vec<f64>,
    iterations: usize,
) -> DhnState {
    let c = inst.constants.c;
    let station_residual = inst
        .heat_stations
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let exact = if flows.station[j] > 0.0 {
                c * flows.station[j] * (station_supply[j] - temps.node_return[s.node]) / W_PER_MW
            } else {
                0.0
            };
            schedule.station_heat[j][period] - exact
        })
        .collect();
    let mixing = mixing_residual(inst, &flows, &temps, &station_supply, &hes_return);

    let mut violations = Vec::new();
    let mut check = |element: &str, quantity: &'static str, value: f64, (lo, hi): (f64, f64)| {
        let slack = 1e-9 * hi.abs().max(1.0);
        if value < lo - slack {
            violations.push(BoundViolation {
                element: element.to_string(),
                quantity,
                value,
                bound: lo,
            });
        } else if value > hi + slack {
            violations.push(BoundViolation {
                element: element.to_string(),
                quantity,
                value,
                bound: hi,
            });
        }
    };
    for (i, node) in inst.nodes.iter().enumerate() {
        if !temps.node_supply[i].is_nan() {
            check(&node.id, "supply temperature", temps.node_supply[i], node.supply_temp_bounds);
        }
        if !temps.node_return[i].is_nan() {
            check(&node.id, "return temperature", temps.node_return[i], node.return_temp_bounds);
        }
    }
    for (b, p) in inst.pipes.iter().enumerate() {
        check(&p.id, "supply mass flow", flows.pipe[b], (-p.m_max_supply, p.m_max_supply));
        check(&p.id, "return mass flow", flows.pipe[b], (-p.m_max_return, p.m_max_return));
    }

    DhnState {
        period,
        flows,
        temps,
        station_supply,
        hes_return,
        iterations,
        station_residual,
        mixing_residual: mixing,
        violations,
    }
}

/// One pipe-period row of the approximation error table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub period: usize,
    pub pipe: String,
    /// Heat quantity `h_in` of the linearized model, MWth.
    pub ef_mwth: f64,
    /// Exact heat quantity at the same pipe end; `None` for zero flow.
    pub exact_mwth: Option<f64>,
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodFailure {
    pub period: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
    pub states: Vec<DhnState>,
    pub failures: Vec<PeriodFailure>,
}

impl ErrorReport {
    pub fn max_rel_error(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.rel_error).fold(0.0, f64::max)
    }

    /// Delimited table with columns `period,pipe,ef_mwth,exact_mwth,rel_error`.
    /// Periods are 1-based. Zero-flow pipes print `-`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period,pipe,ef_mwth,exact_mwth,rel_error\n");
        for r in &self.rows {
            let dash = |v: Option<f64>, f: &dyn Fn(f64) -> String| v.map_or("-".to_string(), f);
            let _ = writeln!(
                out,
                "{},{},{:.6},{},{}",
                r.period + 1,
                r.pipe,
                r.ef_mwth,
                dash(r.exact_mwth, &|v| format!("{v:.6}")),
                dash(r.rel_error, &|v| format!("{v:.6e}")),
            );
        }
        out
    }
}

/// Recovers each requested period (concurrently) and compares pipe heat
/// quantities. Periods that fail to recover are listed in `failures`.
pub fn approximation_error_report(
    inst: &Instance,
    schedule: &Schedule,
    periods: &[usize],
    policy: SetpointPolicy,
) -> ErrorReport {
    let results: Vec<Result<DhnState>> = std::thread::scope(|scope| {
        let handles: Vec<_> = periods
            .iter()
            .map(|&t| scope.spawn(move || recover_state(inst, schedule, t, policy)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("recovery thread panicked"))
            .collect()
    });

    let mut report = ErrorReport {
        rows: Vec::new(),
        states: Vec::new(),
        failures: Vec::new(),
    };
    for (&t, result) in periods.iter().zip(results) {
        match result {
            Ok(state) => {
                for (b, p) in inst.pipes.iter().enumerate() {
                    let ef = schedule.pipe_in[b][t];
                    let exact = state.pipe_heat(inst, b);
                    let rel_error = exact.map(|x| if x == 0.0 { 0.0 } else { ((ef - x) / x).abs() });
                    report.rows.push(ErrorRow {
                        period: t,
                        pipe: p.id.clone(),
                        ef_mwth: ef,
                        exact_mwth: exact,
                        rel_error,
                    });
                }
                report.states.push(state);
            }
            Err(e) => report.failures.push(PeriodFailure {
                period: t,
                message: e.to_string(),
            }),
        }
    }
    report
}
