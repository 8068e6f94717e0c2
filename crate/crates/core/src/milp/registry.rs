//! Typed lookup from model elements to MILP columns.
//!
//! The registry creates every decision variable of the coupled model in a
//! fixed order (power side, heat sources, heating network; element then
//! period), so two assemblies of the same instance produce identical columns.

use std::collections::HashMap;

use crate::dhn_flow::pipe_heat_capacity;
use crate::instance::{GenRef, Instance, ReserveScope};
use crate::milp::model::{MilpModel, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKey {
    /// Commitment `u`.
    Status { gen: usize, t: usize },
    /// Start-up indicator `x`.
    Startup { gen: usize, t: usize },
    /// Shut-down indicator `y`.
    Shutdown { gen: usize, t: usize },
    Output { gen: usize, t: usize },
    /// Epigraph variable of a piecewise-linearized quadratic cost.
    GenCost { gen: usize, t: usize },
    ReserveUp { gen: usize, t: usize },
    ReserveDown { gen: usize, t: usize },
    Alpha { chp: usize, k: usize, t: usize },
    ChpHeat { chp: usize, t: usize },
    BoilerFuel { boiler: usize, t: usize },
    BoilerHeat { boiler: usize, t: usize },
    StationHeat { station: usize, t: usize },
    HesHeat { hes: usize, t: usize },
    PipeIn { pipe: usize, t: usize },
    PipeOut { pipe: usize, t: usize },
    PipeStatus { pipe: usize, t: usize },
    ValveOpen { pipe: usize, t: usize },
    ValveClose { pipe: usize, t: usize },
    Wind { farm: usize, t: usize },
    Shed { bus: usize, t: usize },
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    map: HashMap<VarKey, VarId>,
}

impl Registry {
    pub fn get(&self, key: VarKey) -> VarId {
        match self.map.get(&key) {
            Some(v) => *v,
            None => panic!("variable {key:?} is not registered"),
        }
    }

    pub fn try_get(&self, key: VarKey) -> Option<VarId> {
        self.map.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn insert(&mut self, key: VarKey, id: VarId) {
        let prev = self.map.insert(key, id);
        debug_assert!(prev.is_none(), "{key:?} registered twice");
    }

    /// Creates all decision variables of `inst` in `model`.
    pub fn build(inst: &Instance, model: &mut MilpModel) -> Registry {
        let mut reg = Registry::default();
        let horizon = inst.horizon;
        let quadratic_chp = inst.options.cost_mode == crate::instance::CostMode::Quadratic;
        let inf = f64::INFINITY;

        for (gen, (gref, unit)) in inst.generators().enumerate() {
            let id = &unit.id;
            for t in 0..horizon {
                let v = model.add_binary(format!("u_{id}_{}", t + 1));
                reg.insert(VarKey::Status { gen, t }, v);
            }
            for t in 0..horizon {
                let v = model.add_binary(format!("x_{id}_{}", t + 1));
                reg.insert(VarKey::Startup { gen, t }, v);
            }
            for t in 0..horizon {
                let v = model.add_binary(format!("y_{id}_{}", t + 1));
                reg.insert(VarKey::Shutdown { gen, t }, v);
            }
            for t in 0..horizon {
                let v = model.add_continuous(format!("p_{id}_{}", t + 1), 0.0, unit.p_max.max(0.0));
                reg.insert(VarKey::Output { gen, t }, v);
            }
            let has_cost_var = matches!(gref, GenRef::Thermal(_)) || quadratic_chp;
            if has_cost_var {
                for t in 0..horizon {
                    let v = model.add_continuous(format!("z_{id}_{}", t + 1), -inf, inf);
                    reg.insert(VarKey::GenCost { gen, t }, v);
                }
            }
            if in_reserve_scope(inst, gref) {
                for t in 0..horizon {
                    let v = model.add_continuous(format!("ru_{id}_{}", t + 1), 0.0, inf);
                    reg.insert(VarKey::ReserveUp { gen, t }, v);
                }
                for t in 0..horizon {
                    let v = model.add_continuous(format!("rd_{id}_{}", t + 1), 0.0, inf);
                    reg.insert(VarKey::ReserveDown { gen, t }, v);
                }
            }
        }
        for (farm, w) in inst.wind_farms.iter().enumerate() {
            for t in 0..horizon {
                let v = model.add_continuous(
                    format!("wd_{}_{}", w.id, t + 1),
                    0.0,
                    w.available[t].max(0.0),
                );
                reg.insert(VarKey::Wind { farm, t }, v);
            }
        }
        for (bus, b) in inst.buses.iter().enumerate() {
            for t in 0..horizon {
                let v = model.add_continuous(
                    format!("shed_{}_{}", b.id, t + 1),
                    0.0,
                    b.demand[t].max(0.0),
                );
                reg.insert(VarKey::Shed { bus, t }, v);
            }
        }

        for (chp, c) in inst.chp_units.iter().enumerate() {
            let id = &c.unit.id;
            for k in 0..c.region.extreme_points.len() {
                for t in 0..horizon {
                    let v = model.add_continuous(format!("alpha_{id}_{}_{}", k + 1, t + 1), 0.0, 1.0);
                    reg.insert(VarKey::Alpha { chp, k, t }, v);
                }
            }
            for t in 0..horizon {
                let v = model.add_continuous(format!("hchp_{id}_{}", t + 1), 0.0, inf);
                reg.insert(VarKey::ChpHeat { chp, t }, v);
            }
        }
        for (boiler, b) in inst.boilers.iter().enumerate() {
            for t in 0..horizon {
                let v = model.add_continuous(format!("fuel_{}_{}", b.id, t + 1), 0.0, inf);
                reg.insert(VarKey::BoilerFuel { boiler, t }, v);
            }
            for t in 0..horizon {
                let v = model.add_continuous(format!("hhb_{}_{}", b.id, t + 1), 0.0, b.h_max.max(0.0));
                reg.insert(VarKey::BoilerHeat { boiler, t }, v);
            }
        }

        for (station, s) in inst.heat_stations.iter().enumerate() {
            for t in 0..horizon {
                let v = model.add_continuous(format!("hhs_{}_{}", s.id, t + 1), 0.0, inf);
                reg.insert(VarKey::StationHeat { station, t }, v);
            }
        }
        for (hes, s) in inst.hes.iter().enumerate() {
            for t in 0..horizon {
                let d = s.demand[t];
                let v = model.add_continuous(format!("hhes_{}_{}", s.id, t + 1), d, d);
                reg.insert(VarKey::HesHeat { hes, t }, v);
            }
        }
        let fixed = inst.options.fixed_topology;
        for (pipe, b) in inst.pipes.iter().enumerate() {
            let cap = pipe_heat_capacity(b, &inst.nodes, &inst.constants);
            let id = &b.id;
            for t in 0..horizon {
                let v = model.add_continuous(format!("hin_{id}_{}", t + 1), -cap, cap);
                reg.insert(VarKey::PipeIn { pipe, t }, v);
            }
            for t in 0..horizon {
                let v = model.add_continuous(format!("hout_{id}_{}", t + 1), -cap, cap);
                reg.insert(VarKey::PipeOut { pipe, t }, v);
            }
            // Pipes without a valve, and every pipe under a fixed topology,
            // keep their initial status for the whole horizon.
            let frozen = fixed || !b.has_valve;
            let initial = if b.initial_status { 1.0 } else { 0.0 };
            for t in 0..horizon {
                let v = model.add_binary(format!("mu_{id}_{}", t + 1));
                if frozen {
                    model.variables[v.0].lower = initial;
                    model.variables[v.0].upper = initial;
                }
                reg.insert(VarKey::PipeStatus { pipe, t }, v);
            }
            for t in 0..horizon {
                let v = model.add_binary(format!("xr_{id}_{}", t + 1));
                if frozen {
                    model.variables[v.0].upper = 0.0;
                }
                reg.insert(VarKey::ValveOpen { pipe, t }, v);
            }
            for t in 0..horizon {
                let v = model.add_binary(format!("yr_{id}_{}", t + 1));
                if frozen {
                    model.variables[v.0].upper = 0.0;
                }
                reg.insert(VarKey::ValveClose { pipe, t }, v);
            }
        }
        reg
    }
}

pub fn in_reserve_scope(inst: &Instance, gen: GenRef) -> bool {
    match (gen, inst.options.reserve_scope) {
        (GenRef::Thermal(_), _) => true,
        (GenRef::Chp(_), ReserveScope::ThermalAndChp) => true,
        (GenRef::Chp(_), ReserveScope::Thermal) => false,
    }
}

/// Generator index (position in [`Instance::generators`]) of CHP unit `chp`.
pub fn chp_gen(inst: &Instance, chp: usize) -> usize {
    inst.thermal_units.len() + chp
}
