//! Solver results: status, raw values, cost ledger and the typed schedule
//! view used by the reports and the verification code.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::assemble::Assembled;
use crate::milp::model::MilpModel;
use crate::milp::registry::{Registry, VarKey};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Error,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMetadata {
    pub backend: String,
    pub wall_time_s: f64,
    /// Relative MILP gap requested from the backend.
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// Objective split into the five cost categories.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub thermal: f64,
    pub chp: f64,
    pub wind_curtailment: f64,
    pub boiler: f64,
    pub load_shed: f64,
}

impl CostLedger {
    pub fn total(&self) -> f64 {
        self.thermal + self.chp + self.wind_curtailment + self.boiler + self.load_shed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSolution {
    pub status: SolveStatus,
    pub objective: f64,
    /// Indexed by model variable.
    pub values: Vec<f64>,
    pub ledger: CostLedger,
    pub metadata: SolverMetadata,
}

/// Evaluates each cost category at `values`.
pub fn extract_ledger(assembled: &Assembled, values: &[f64]) -> CostLedger {
    let c = &assembled.costs;
    CostLedger {
        thermal: c.thermal.eval(values),
        chp: c.chp.eval(values),
        wind_curtailment: c.wind.eval(values),
        boiler: c.boiler.eval(values),
        load_shed: c.load_shed.eval(values),
    }
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    status: SolveStatus,
    objective: f64,
    ledger: CostLedger,
    metadata: SolverMetadata,
    values: BTreeMap<String, f64>,
}

impl ScheduleSolution {
    pub fn to_json(&self, model: &MilpModel) -> Result<String> {
        let file = SolutionFile {
            status: self.status,
            objective: self.objective,
            ledger: self.ledger,
            metadata: self.metadata.clone(),
            values: model
                .variables
                .iter()
                .zip(&self.values)
                .map(|(v, x)| (v.name.clone(), *x))
                .collect(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Solution(e.to_string()))
    }

    /// Reads a solution written by [`ScheduleSolution::to_json`] for `model`.
    pub fn from_json(text: &str, model: &MilpModel) -> Result<Self> {
        let file: SolutionFile = serde_json::from_str(text).map_err(|e| Error::Solution(e.to_string()))?;
        if file.values.is_empty() && !file.status.has_solution() {
            return Ok(ScheduleSolution {
                status: file.status,
                objective: file.objective,
                values: vec![0.0; model.variables.len()],
                ledger: file.ledger,
                metadata: file.metadata,
            });
        }
        if file.values.len() != model.variables.len() {
            return Err(Error::Solution(format!(
                "solution has {} values, model has {} variables",
                file.values.len(),
                model.variables.len()
            )));
        }
        let values = model
            .variables
            .iter()
            .map(|v| {
                file.values
                    .get(&v.name)
                    .copied()
                    .ok_or_else(|| Error::Solution(format!("no value for variable `{}`", v.name)))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(ScheduleSolution {
            status: file.status,
            objective: file.objective,
            values,
            ledger: file.ledger,
            metadata: file.metadata,
        })
    }

    pub fn save(&self, model: &MilpModel, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json(model)?).map_err(|e| crate::error::io(path, e))
    }

    pub fn load(path: &Path, model: &MilpModel) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::error::io(path, e))?;
        Self::from_json(&text, model)
    }
}

/// Decision values arranged by element and period (`[element][period]`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub status: Vec<Vec<bool>>,
    pub startup: Vec<Vec<bool>>,
    pub shutdown: Vec<Vec<bool>>,
    pub output: Vec<Vec<f64>>,
    pub reserve_up: Vec<Vec<f64>>,
    pub reserve_down: Vec<Vec<f64>>,
    /// `[chp][period][extreme point]`.
    pub alphas: Vec<Vec<Vec<f64>>>,
    pub chp_heat: Vec<Vec<f64>>,
    pub boiler_fuel: Vec<Vec<f64>>,
    pub boiler_heat: Vec<Vec<f64>>,
    pub station_heat: Vec<Vec<f64>>,
    pub hes_heat: Vec<Vec<f64>>,
    pub pipe_in: Vec<Vec<f64>>,
    pub pipe_out: Vec<Vec<f64>>,
    pub pipe_status: Vec<Vec<bool>>,
    pub valve_open: Vec<Vec<bool>>,
    pub valve_close: Vec<Vec<bool>>,
    pub wind: Vec<Vec<f64>>,
    pub shed: Vec<Vec<f64>>,
}

impl Schedule {
    pub fn from_values(inst: &Instance, reg: &Registry, values: &[f64]) -> Self {
        let horizon = inst.horizon;
        let real = |n: usize, key: &dyn Fn(usize, usize) -> VarKey| -> Vec<Vec<f64>> {
            (0..n)
                .map(|e| {
                    (0..horizon)
                        .map(|t| reg.try_get(key(e, t)).map_or(0.0, |v| values[v.0]))
                        .collect()
                })
                .collect()
        };
        let flag = |n: usize, key: &dyn Fn(usize, usize) -> VarKey| -> Vec<Vec<bool>> {
            real(n, key)
                .into_iter()
                .map(|row| row.into_iter().map(|v| v > 0.5).collect())
                .collect()
        };
        let ng = inst.thermal_units.len() + inst.chp_units.len();
        let np = inst.pipes.len();
        Schedule {
            status: flag(ng, &|gen, t| VarKey::Status { gen, t }),
            startup: flag(ng, &|gen, t| VarKey::Startup { gen, t }),
            shutdown: flag(ng, &|gen, t| VarKey::Shutdown { gen, t }),
            output: real(ng, &|gen, t| VarKey::Output { gen, t }),
            reserve_up: real(ng, &|gen, t| VarKey::ReserveUp { gen, t }),
            reserve_down: real(ng, &|gen, t| VarKey::ReserveDown { gen, t }),
            alphas: inst
                .chp_units
                .iter()
                .enumerate()
                .map(|(chp, c)| {
                    (0..horizon)
                        .map(|t| {
                            (0..c.region.extreme_points.len())
                                .map(|k| values[reg.get(VarKey::Alpha { chp, k, t }).0])
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            chp_heat: real(inst.chp_units.len(), &|chp, t| VarKey::ChpHeat { chp, t }),
            boiler_fuel: real(inst.boilers.len(), &|boiler, t| VarKey::BoilerFuel { boiler, t }),
            boiler_heat: real(inst.boilers.len(), &|boiler, t| VarKey::BoilerHeat { boiler, t }),
            station_heat: real(inst.heat_stations.len(), &|station, t| VarKey::StationHeat { station, t }),
            hes_heat: real(inst.hes.len(), &|hes, t| VarKey::HesHeat { hes, t }),
            pipe_in: real(np, &|pipe, t| VarKey::PipeIn { pipe, t }),
            pipe_out: real(np, &|pipe, t| VarKey::PipeOut { pipe, t }),
            pipe_status: flag(np, &|pipe, t| VarKey::PipeStatus { pipe, t }),
            valve_open: flag(np, &|pipe, t| VarKey::ValveOpen { pipe, t }),
            valve_close: flag(np, &|pipe, t| VarKey::ValveClose { pipe, t }),
            wind: real(inst.wind_farms.len(), &|farm, t| VarKey::Wind { farm, t }),
            shed: real(inst.buses.len(), &|bus, t| VarKey::Shed { bus, t }),
        }
    }

    pub fn total_shed(&self, t: usize) -> f64 {
        self.shed.iter().map(|s| s[t]).sum()
    }
}
