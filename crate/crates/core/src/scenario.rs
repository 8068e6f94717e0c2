//! Line-capacity sweeps comparing fixed and reconfigurable topologies.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::milp::{solve, Backend, Schedule, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Fixed,
    Reconfigurable,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Fixed => "fixed",
            Variant::Reconfigurable => "reconfigurable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub capacity: f64,
    pub variant: Variant,
    pub status: SolveStatus,
    /// Largest per-period load shed, MW.
    pub max_shed: f64,
    /// Energy output of each CHP unit over the horizon, MWh.
    pub chp_energy: Vec<(String, f64)>,
    pub total_cost: f64,
}

/// Copy of `inst` with line `line` derated to `capacity` and the topology
/// variant applied.
pub fn sweep_instance(inst: &Instance, line: usize, capacity: f64, variant: Variant) -> Instance {
    let mut cell = inst.clone();
    cell.lines[line].capacity = capacity;
    cell.options.fixed_topology = variant == Variant::Fixed;
    cell
}

fn run_cell(inst: &Instance, line: usize, capacity: f64, variant: Variant, backend: &Backend) -> Result<SweepCell> {
    let cell = sweep_instance(inst, line, capacity, variant);
    let (assembled, sol) = solve(&cell, backend)?;
    let mut out = SweepCell {
        capacity,
        variant,
        status: sol.status,
        max_shed: f64::NAN,
        chp_energy: Vec::new(),
        total_cost: sol.objective,
    };
    if sol.status.has_solution() {
        let schedule = Schedule::from_values(&cell, &assembled.registry, &sol.values);
        out.max_shed = (0..cell.horizon).map(|t| schedule.total_shed(t)).fold(0.0, f64::max);
        let first_chp = cell.thermal_units.len();
        out.chp_energy = cell
            .chp_units
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mwh = schedule.output[first_chp + i].iter().sum::<f64>() * cell.period_weight();
                (c.unit.id.clone(), mwh)
            })
            .collect();
    }
    Ok(out)
}

/// Solves both variants for each capacity in `values`, concurrently. Cells
/// come back ordered by value, fixed before reconfigurable.
pub fn line_capacity_sweep(inst: &Instance, line_id: &str, values: &[f64], backend: &Backend) -> Result<Vec<SweepCell>> {
    let line = inst
        .line_index(line_id)
        .ok_or_else(|| Error::InvalidInstance(format!("no transmission line `{line_id}`")))?;
    let jobs: Vec<(f64, Variant)> = values
        .iter()
        .flat_map(|&v| [(v, Variant::Fixed), (v, Variant::Reconfigurable)])
        .collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(v, variant)| scope.spawn(move || run_cell(inst, line, v, variant, backend)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep thread panicked"))
            .collect()
    })
}

pub fn sweep_table(cells: &[SweepCell]) -> String {
    let mut s = String::from("capacity_mw,variant,status,max_shed_mw,total_cost");
    let chp: Vec<&str> = cells
        .iter()
        .find(|c| !c.chp_energy.is_empty())
        .map(|c| c.chp_energy.iter().map(|(id, _)| id.as_str()).collect())
        .unwrap_or_default();
    for id in &chp {
        let _ = write!(s, ",{id}_mwh");
    }
    s.push('\n');
    for c in cells {
        let status = serde_json::to_value(c.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let _ = write!(s, "{},{},{},{:.6},{:.2}", c.capacity, c.variant.label(), status, c.max_shed, c.total_cost);
        for i in 0..chp.len() {
            match c.chp_energy.get(i) {
                Some((_, e)) => {
                    let _ = write!(s, ",{e:.2}");
                }
                None => s.push_str(",-"),
            }
        }
        s.push('\n');
    }
    s
}
