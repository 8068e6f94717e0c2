//! Run reports and CSV time series.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dhn_exact::{approximation_error_report, ErrorReport};
use crate::instance::{Instance, SetpointPolicy};
use crate::milp::{Assembled, CostLedger, Schedule, ScheduleSolution, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValveAction {
    Open,
    Close,
}

/// One valve switching event. `direction` is the recovered supply flow
/// direction around the event, e.g. `N3→N7`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValveEvent {
    pub period: usize,
    pub pipe: String,
    pub action: ValveAction,
    pub direction: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximationSummary {
    pub periods_recovered: usize,
    pub max_rel_error: f64,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub status: SolveStatus,
    pub backend: String,
    pub objective: f64,
    pub ledger: CostLedger,
    /// `(unit id, on/off per period)`.
    pub commitment: Vec<(String, Vec<bool>)>,
    pub valve_events: Vec<ValveEvent>,
    pub wind_curtailment: Vec<f64>,
    pub load_shed: Vec<f64>,
    pub approximation: Option<ApproximationSummary>,
}

fn flow_direction(inst: &Instance, b: usize, flow: f64) -> Option<String> {
    let p = &inst.pipes[b];
    let (a, z) = if flow > 0.0 {
        (p.from_node, p.to_node)
    } else if flow < 0.0 {
        (p.to_node, p.from_node)
    } else {
        return None;
    };
    Some(format!("{}→{}", inst.nodes[a].id, inst.nodes[z].id))
}

/// Valve events with directions taken from `errors.states`. An opening is
/// annotated with the flow in its period, a closing with the flow just
/// before it.
pub fn valve_events(inst: &Instance, schedule: &Schedule, errors: Option<&ErrorReport>) -> Vec<ValveEvent> {
    let flow_at = |b: usize, t: usize| -> Option<f64> {
        errors?.states.iter().find(|s| s.period == t).map(|s| s.flows.pipe[b])
    };
    let mut events = Vec::new();
    for t in 0..inst.horizon {
        for (b, p) in inst.pipes.iter().enumerate() {
            if !p.has_valve {
                continue;
            }
            let before = if t == 0 { p.initial_status } else { schedule.pipe_status[b][t - 1] };
            let now = schedule.pipe_status[b][t];
            let (action, probe) = match (before, now) {
                (false, true) => (ValveAction::Open, Some(t)),
                (true, false) => (ValveAction::Close, t.checked_sub(1)),
                _ => continue,
            };
            events.push(ValveEvent {
                period: t,
                pipe: p.id.clone(),
                action,
                direction: probe.and_then(|s| flow_at(b, s)).and_then(|f| flow_direction(inst, b, f)),
            });
        }
    }
    events
}

pub fn wind_curtailment(inst: &Instance, schedule: &Schedule) -> Vec<f64> {
    (0..inst.horizon)
        .map(|t| {
            inst.wind_farms
                .iter()
                .enumerate()
                .map(|(w, f)| f.available[t] - schedule.wind[w][t])
                .sum()
        })
        .collect()
}

impl RunReport {
    /// Builds the report. When the instance has a heat network and the
    /// solve produced a schedule, every period is recovered to annotate
    /// valve events and summarize the approximation error.
    pub fn build(inst: &Instance, assembled: &Assembled, solution: &ScheduleSolution, policy: SetpointPolicy) -> Self {
        let mut report = RunReport {
            instance: inst.name.clone(),
            status: solution.status,
            backend: solution.metadata.backend.clone(),
            objective: solution.objective,
            ledger: solution.ledger,
            commitment: Vec::new(),
            valve_events: Vec::new(),
            wind_curtailment: Vec::new(),
            load_shed: Vec::new(),
            approximation: None,
        };
        if !solution.status.has_solution() {
            return report;
        }
        let schedule = Schedule::from_values(inst, &assembled.registry, &solution.values);
        let errors = inst.has_heat_network().then(|| {
            let periods: Vec<usize> = (0..inst.horizon).collect();
            approximation_error_report(inst, &schedule, &periods, policy)
        });
        report.commitment = inst
            .generators()
            .enumerate()
            .map(|(g, (_, unit))| (unit.id.clone(), schedule.status[g].clone()))
            .collect();
        report.valve_events = valve_events(inst, &schedule, errors.as_ref());
        report.wind_curtailment = wind_curtailment(inst, &schedule);
        report.load_shed = (0..inst.horizon).map(|t| schedule.total_shed(t)).collect();
        report.approximation = errors.map(|e| ApproximationSummary {
            periods_recovered: e.states.len(),
            max_rel_error: e.max_rel_error(),
            failures: e.failures.iter().map(|f| format!("period {}: {}", f.period + 1, f.message)).collect(),
        });
        report
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "instance: {}", self.instance);
        let _ = writeln!(s, "status:   {:?}", self.status);
        let _ = writeln!(s, "backend:  {}", self.backend);
        if !self.status.has_solution() {
            return s;
        }
        let l = &self.ledger;
        let _ = writeln!(s, "\ncost");
        for (name, v) in [
            ("thermal", l.thermal),
            ("chp", l.chp),
            ("wind curtailment", l.wind_curtailment),
            ("boiler", l.boiler),
            ("load shed", l.load_shed),
            ("total", l.total()),
        ] {
            let _ = writeln!(s, "  {name:<17}{v:>14.2}");
        }

        let horizon = self.load_shed.len();
        let _ = writeln!(s, "\ncommitment (period 1..{horizon})");
        let width = self.commitment.iter().map(|(id, _)| id.len()).max().unwrap_or(0);
        for (id, on) in &self.commitment {
            let row: String = on.iter().map(|&u| if u { '1' } else { '0' }).collect();
            let _ = writeln!(s, "  {id:<width$}  {row}");
        }

        let _ = writeln!(s, "\nvalve operations");
        if self.valve_events.is_empty() {
            let _ = writeln!(s, "  none");
        }
        for e in &self.valve_events {
            let action = match e.action {
                ValveAction::Open => "open",
                ValveAction::Close => "close",
            };
            let _ = writeln!(
                s,
                "  period {:>3}  {:<6} {:<8} {}",
                e.period + 1,
                action,
                e.pipe,
                e.direction.as_deref().unwrap_or("-")
            );
        }

        let curtailed: f64 = self.wind_curtailment.iter().sum();
        let shed: f64 = self.load_shed.iter().sum();
        let _ = writeln!(s, "\nwind curtailment {curtailed:.4} MW·periods, load shed {shed:.4} MW·periods");
        if let Some(a) = &self.approximation {
            let _ = writeln!(
                s,
                "heat-loss approximation: {} periods recovered, max relative error {:.4}%",
                a.periods_recovered,
                100.0 * a.max_rel_error
            );
            for f in &a.failures {
                let _ = writeln!(s, "  {f}");
            }
        }
        s
    }
}

/// A CSV table with a `period` column and one column per element.
fn series_csv(names: &[String], columns: &[Vec<f64>], horizon: usize) -> String {
    let mut s = String::from("period");
    for n in names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for t in 0..horizon {
        let _ = write!(s, "{}", t + 1);
        for c in columns {
            let _ = write!(s, ",{}", c[t]);
        }
        s.push('\n');
    }
    s
}

/// CSV time series keyed by file name: unit generation, heat per source,
/// valve statuses and wind curtailment / load shed.
pub fn csv_series(inst: &Instance, schedule: &Schedule) -> Vec<(&'static str, String)> {
    let h = inst.horizon;
    let units: Vec<String> = inst.generators().map(|(_, u)| u.id.clone()).collect();
    let generation = series_csv(&units, &schedule.output, h);

    let mut names: Vec<String> = inst.chp_units.iter().map(|c| c.unit.id.clone()).collect();
    names.extend(inst.boilers.iter().map(|b| b.id.clone()));
    let mut cols = schedule.chp_heat.clone();
    cols.extend(schedule.boiler_heat.iter().cloned());
    let heat = series_csv(&names, &cols, h);

    let pipes: Vec<String> = inst.pipes.iter().map(|p| p.id.clone()).collect();
    let status: Vec<Vec<f64>> = schedule
        .pipe_status
        .iter()
        .map(|r| r.iter().map(|&o| if o { 1.0 } else { 0.0 }).collect())
        .collect();
    let valves = series_csv(&pipes, &status, h);

    let mut names: Vec<String> = inst.wind_farms.iter().map(|w| w.id.clone()).collect();
    let mut cols: Vec<Vec<f64>> = inst
        .wind_farms
        .iter()
        .enumerate()
        .map(|(w, f)| (0..h).map(|t| f.available[t] - schedule.wind[w][t]).collect())
        .collect();
    names.push("load_shed".into());
    cols.push((0..h).map(|t| schedule.total_shed(t)).collect());
    let curtailment = series_csv(&names, &cols, h);

    vec![
        ("generation.csv", generation),
        ("heat.csv", heat),
        ("valves.csv", valves),
        ("curtailment.csv", curtailment),
    ]
}
