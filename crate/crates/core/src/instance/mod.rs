//! Domain types for the coupled power / district-heating system.
//!
//! An [`Instance`] is fully cross-linked: every reference to another element
//! is stored as an index into the owning collection, and every time series has
//! exactly `horizon` entries. Instances are immutable once loaded.

mod io;
mod validate;

pub use io::{load_instance, parse_instance, save_instance, to_toml_string};
pub use validate::{validate, Diagnostic, Severity};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Specific heat capacity of water, J/(kg·K).
    pub c: f64,
    /// Water density, kg/m³.
    pub rho: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            c: 4182.0,
            rho: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: String,
    /// Electrical load per period, MW.
    pub demand: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionLine {
    pub id: String,
    /// Flow limit, MW.
    pub capacity: f64,
    /// Injection sensitivity per bus, indexed like [`Instance::buses`].
    pub shift_factors: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCost {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default)]
    pub startup: f64,
    #[serde(default)]
    pub shutdown: f64,
}

impl QuadraticCost {
    pub fn eval(&self, p: f64) -> f64 {
        self.a * p * p + self.b * p + self.c
    }
}

/// Unit state before the first scheduled period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialStatus {
    pub on: bool,
    /// Number of periods the unit has already spent in its current state.
    pub periods: u32,
    /// Output in the period before the horizon. Without it the first-period
    /// ramp constraint is skipped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalUnit {
    pub id: String,
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub startup_ramp: f64,
    pub shutdown_ramp: f64,
    pub min_up: u32,
    pub min_down: u32,
    pub initial: InitialStatus,
    pub cost: QuadraticCost,
}

/// Feasible (power, heat) polygon of a CHP unit, given by its extreme points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChpOperatingRegion {
    /// `(P MW, H MWth)` vertices in polygon order.
    pub extreme_points: Vec<(f64, f64)>,
    /// Hourly cost at each vertex, used by [`CostMode::Interpolated`].
    #[serde(default)]
    pub cost_at_points: Vec<f64>,
}

impl ChpOperatingRegion {
    pub fn p_range(&self) -> (f64, f64) {
        min_max(self.extreme_points.iter().map(|p| p.0))
    }

    pub fn h_range(&self) -> (f64, f64) {
        min_max(self.extreme_points.iter().map(|p| p.1))
    }
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChpUnit {
    pub unit: ThermalUnit,
    pub region: ChpOperatingRegion,
    pub heat_station: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatingBoiler {
    pub id: String,
    pub heat_station: usize,
    pub efficiency: f64,
    /// MWth.
    pub h_max: f64,
    /// Price per unit of fuel.
    pub fuel_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatStation {
    pub id: String,
    pub node: usize,
    pub chp_units: Vec<usize>,
    pub boilers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatExchangeStation {
    pub id: String,
    pub node: usize,
    /// MWth per period.
    pub demand: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DhnNode {
    pub id: String,
    /// `[lower, upper]` supply temperature, °C.
    pub supply_temp_bounds: (f64, f64),
    /// `[lower, upper]` return temperature, °C.
    pub return_temp_bounds: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pipe {
    pub id: String,
    pub from_node: usize,
    pub to_node: usize,
    /// m.
    pub length: f64,
    /// m².
    pub cross_area: f64,
    /// Effective heat-loss coefficient; `conductivity * length / (cross_area * rho)`
    /// is the loss in W per kelvin of (supply + return − 2·ambient).
    pub conductivity: f64,
    /// kg/s.
    pub m_max_supply: f64,
    /// kg/s.
    pub m_max_return: f64,
    pub has_valve: bool,
    /// Minimum number of periods between two operations of the same kind.
    pub min_switch_interval: u32,
    /// Status before the horizon; also the permanent status of valve-less pipes.
    pub initial_status: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindFarm {
    pub id: String,
    pub bus: usize,
    /// MW per period.
    pub available: Vec<f64>,
    /// $/MWh of curtailed energy.
    pub curtailment_price: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// CHP cost is `Σ α_k · cost_at_points[k]`.
    #[default]
    Interpolated,
    /// CHP cost is the unit's quadratic curve, piecewise linearized.
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReserveScope {
    /// Only non-CHP thermal units contribute spinning reserve.
    #[default]
    Thermal,
    ThermalAndChp,
}

/// Station supply temperature used when recovering the exact network state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetpointPolicy {
    #[default]
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub cost_mode: CostMode,
    pub reserve_scope: ReserveScope,
    pub fixed_topology: bool,
    /// Piecewise-linear segments per quadratic cost curve.
    pub segments: usize,
    pub supply_setpoint: SetpointPolicy,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            cost_mode: CostMode::default(),
            reserve_scope: ReserveScope::default(),
            fixed_topology: false,
            segments: 8,
            supply_setpoint: SetpointPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub horizon: usize,
    pub period_hours: f64,
    pub constants: PhysicalConstants,
    /// Ambient (ground) temperature per period, °C.
    pub ambient: Vec<f64>,
    pub buses: Vec<Bus>,
    pub lines: Vec<TransmissionLine>,
    pub thermal_units: Vec<ThermalUnit>,
    pub chp_units: Vec<ChpUnit>,
    pub wind_farms: Vec<WindFarm>,
    pub nodes: Vec<DhnNode>,
    pub pipes: Vec<Pipe>,
    pub heat_stations: Vec<HeatStation>,
    pub boilers: Vec<HeatingBoiler>,
    pub hes: Vec<HeatExchangeStation>,
    /// Upward spinning reserve requirement per period, MW.
    pub sru: Vec<f64>,
    /// Downward spinning reserve requirement per period, MW.
    pub srd: Vec<f64>,
    /// $/MWh of shed load.
    pub load_shed_price: f64,
    pub options: Options,
}

/// A dispatchable generator: either a plain thermal unit or a CHP unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenRef {
    Thermal(usize),
    Chp(usize),
}

impl Instance {
    /// Thermal units first, then CHP units. The position in this sequence is
    /// the generator index used throughout the model.
    pub fn generators(&self) -> impl Iterator<Item = (GenRef, &ThermalUnit)> {
        let thermal = self
            .thermal_units
            .iter()
            .enumerate()
            .map(|(i, u)| (GenRef::Thermal(i), u));
        let chp = self
            .chp_units
            .iter()
            .enumerate()
            .map(|(i, c)| (GenRef::Chp(i), &c.unit));
        thermal.chain(chp)
    }

    pub fn generator(&self, g: GenRef) -> &ThermalUnit {
        match g {
            GenRef::Thermal(i) => &self.thermal_units[i],
            GenRef::Chp(i) => &self.chp_units[i].unit,
        }
    }

    pub fn has_heat_network(&self) -> bool {
        !self.nodes.is_empty()
    }

    /// Pipes leaving (`S⁺`) and entering (`S⁻`) each node, by reference direction.
    pub fn node_incidence(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let mut out = vec![Vec::new(); self.nodes.len()];
        let mut inc = vec![Vec::new(); self.nodes.len()];
        for (b, pipe) in self.pipes.iter().enumerate() {
            out[pipe.from_node].push(b);
            inc[pipe.to_node].push(b);
        }
        (out, inc)
    }

    /// Period weight applied to hourly cost rates.
    pub fn period_weight(&self) -> f64 {
        self.period_hours
    }

    pub fn total_demand(&self, t: usize) -> f64 {
        self.buses.iter().map(|b| b.demand[t]).sum()
    }

    pub fn total_heat_demand(&self, t: usize) -> f64 {
        self.hes.iter().map(|h| h.demand[t]).sum()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn pipe_index(&self, id: &str) -> Option<usize> {
        self.pipes.iter().position(|p| p.id == id)
    }

    pub fn line_index(&self, id: &str) -> Option<usize> {
        self.lines.iter().position(|l| l.id == id)
    }
}
