//! Instance document (TOML) ingestion and serialization.
//!
//! The file schema mirrors the domain types but references elements by id.
//! Loading resolves every id to an index and checks series lengths; saving
//! writes the normalized form back, so `parse(save(x)) == x`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::*;
use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    meta: RawMeta,
    #[serde(default)]
    constants: PhysicalConstants,
    power: RawPower,
    #[serde(default)]
    heat: RawHeat,
    #[serde(default)]
    profiles: RawProfiles,
    #[serde(default)]
    options: Options,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeta {
    #[serde(default)]
    name: String,
    horizon: usize,
    #[serde(default = "one")]
    period_hours: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    #[serde(default)]
    load_shed_price: f64,
    buses: Vec<RawBus>,
    #[serde(default)]
    lines: Vec<RawLine>,
    #[serde(default)]
    thermal_units: Vec<RawThermalUnit>,
    #[serde(default)]
    chp_units: Vec<RawChpUnit>,
    #[serde(default)]
    wind_farms: Vec<RawWindFarm>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBus {
    id: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    id: String,
    capacity: f64,
    shift_factors: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThermalUnit {
    id: String,
    bus: String,
    p_min: f64,
    p_max: f64,
    ramp_up: f64,
    ramp_down: f64,
    startup_ramp: f64,
    shutdown_ramp: f64,
    min_up: u32,
    min_down: u32,
    initial_status: InitialStatus,
    cost: QuadraticCost,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChpUnit {
    id: String,
    bus: String,
    heat_station: String,
    p_min: f64,
    p_max: f64,
    ramp_up: f64,
    ramp_down: f64,
    startup_ramp: f64,
    shutdown_ramp: f64,
    min_up: u32,
    min_down: u32,
    initial_status: InitialStatus,
    cost: QuadraticCost,
    region: ChpOperatingRegion,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindFarm {
    id: String,
    bus: String,
    curtailment_price: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeat {
    #[serde(default)]
    nodes: Vec<RawNode>,
    #[serde(default)]
    pipes: Vec<RawPipe>,
    #[serde(default)]
    heat_stations: Vec<RawHeatStation>,
    #[serde(default)]
    boilers: Vec<RawBoiler>,
    #[serde(default)]
    hes: Vec<RawHes>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    supply_temp_bounds: (f64, f64),
    return_temp_bounds: (f64, f64),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPipe {
    id: String,
    from_node: String,
    to_node: String,
    length: f64,
    cross_area: f64,
    conductivity: f64,
    m_max_supply: f64,
    m_max_return: f64,
    has_valve: bool,
    #[serde(default = "one_u32")]
    min_switch_interval: u32,
    initial_status: bool,
}

fn one_u32() -> u32 {
    1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeatStation {
    id: String,
    node: String,
    #[serde(default)]
    chp_units: Vec<String>,
    #[serde(default)]
    boilers: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoiler {
    id: String,
    heat_station: String,
    efficiency: f64,
    h_max: f64,
    fuel_cost: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHes {
    id: String,
    node: String,
}

/// Omitted `ambient`, `sru` and `srd` series are read as all zeros.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfiles {
    #[serde(default)]
    demand: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    wind: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    heat_demand: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    ambient: Vec<f64>,
    #[serde(default)]
    sru: Vec<f64>,
    #[serde(default)]
    srd: Vec<f64>,
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| crate::error::io(path, e))?;
    parse_instance_at(&text, path)
}

/// Parses an instance document held in memory.
pub fn parse_instance(text: &str) -> Result<Instance> {
    parse_instance_at(text, Path::new("<memory>"))
}

fn parse_instance_at(text: &str, path: &Path) -> Result<Instance> {
    let raw: RawInstance = toml::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string().trim_end().to_owned(),
    })?;
    link(raw)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_toml_string(instance)?).map_err(|e| crate::error::io(path, e))
}

pub fn to_toml_string(instance: &Instance) -> Result<String> {
    toml::to_string(&unlink(instance)).map_err(|e| Error::InvalidInstance(e.to_string()))
}

struct Ids<'a> {
    kind: &'static str,
    ids: Vec<&'a str>,
}

impl<'a> Ids<'a> {
    fn new(kind: &'static str, ids: impl Iterator<Item = &'a str>) -> Self {
        Ids {
            kind,
            ids: ids.collect(),
        }
    }

    fn resolve(&self, owner_kind: &'static str, owner: &str, id: &str) -> Result<usize> {
        self.ids
            .iter()
            .position(|x| *x == id)
            .ok_or_else(|| Error::DanglingReference {
                kind: owner_kind,
                owner: owner.to_owned(),
                target_kind: self.kind,
                id: id.to_owned(),
            })
    }
}

fn series(
    name: impl Into<String>,
    values: Option<&Vec<f64>>,
    horizon: usize,
) -> Result<Vec<f64>> {
    let actual = values.map_or(0, Vec::len);
    if actual != horizon {
        return Err(Error::SeriesLength {
            series: name.into(),
            expected: horizon,
            actual,
        });
    }
    Ok(values.cloned().unwrap_or_default())
}

/// Empty series default to zeros; anything else must match the horizon.
fn optional_series(name: &str, values: &[f64], horizon: usize) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Ok(vec![0.0; horizon]);
    }
    series(name, Some(&values.to_vec()), horizon)
}

fn check_profile_keys(
    profile: &str,
    map: &BTreeMap<String, Vec<f64>>,
    ids: &Ids<'_>,
) -> Result<()> {
    for key in map.keys() {
        ids.resolve("profile", profile, key)?;
    }
    Ok(())
}

fn link(raw: RawInstance) -> Result<Instance> {
    let horizon = raw.meta.horizon;
    if horizon == 0 {
        return Err(Error::InvalidInstance("horizon must be at least 1".into()));
    }
    let p = &raw.power;
    let h = &raw.heat;
    let prof = &raw.profiles;

    let bus_ids = Ids::new("bus", p.buses.iter().map(|b| b.id.as_str()));
    let chp_ids = Ids::new("CHP unit", p.chp_units.iter().map(|u| u.id.as_str()));
    let wind_ids = Ids::new("wind farm", p.wind_farms.iter().map(|w| w.id.as_str()));
    let node_ids = Ids::new("node", h.nodes.iter().map(|n| n.id.as_str()));
    let hs_ids = Ids::new("heat station", h.heat_stations.iter().map(|s| s.id.as_str()));
    let boiler_ids = Ids::new("boiler", h.boilers.iter().map(|b| b.id.as_str()));
    let hes_ids = Ids::new("heat exchange station", h.hes.iter().map(|s| s.id.as_str()));

    check_profile_keys("demand", &prof.demand, &bus_ids)?;
    check_profile_keys("wind", &prof.wind, &wind_ids)?;
    check_profile_keys("heat_demand", &prof.heat_demand, &hes_ids)?;

    let buses = p
        .buses
        .iter()
        .map(|b| {
            Ok(Bus {
                id: b.id.clone(),
                demand: series(
                    format!("demand.{}", b.id),
                    prof.demand.get(&b.id),
                    horizon,
                )?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let lines = p
        .lines
        .iter()
        .map(|l| {
            for key in l.shift_factors.keys() {
                bus_ids.resolve("line", &l.id, key)?;
            }
            let shift_factors = p
                .buses
                .iter()
                .map(|b| {
                    l.shift_factors.get(&b.id).copied().ok_or_else(|| {
                        Error::InvalidInstance(format!(
                            "line `{}` has no shift factor for bus `{}`",
                            l.id, b.id
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TransmissionLine {
                id: l.id.clone(),
                capacity: l.capacity,
                shift_factors,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let thermal_units = p
        .thermal_units
        .iter()
        .map(|u| {
            Ok(ThermalUnit {
                id: u.id.clone(),
                bus: bus_ids.resolve("thermal unit", &u.id, &u.bus)?,
                p_min: u.p_min,
                p_max: u.p_max,
                ramp_up: u.ramp_up,
                ramp_down: u.ramp_down,
                startup_ramp: u.startup_ramp,
                shutdown_ramp: u.shutdown_ramp,
                min_up: u.min_up,
                min_down: u.min_down,
                initial: u.initial_status,
                cost: u.cost,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let chp_units = p
        .chp_units
        .iter()
        .map(|u| {
            Ok(ChpUnit {
                unit: ThermalUnit {
                    id: u.id.clone(),
                    bus: bus_ids.resolve("CHP unit", &u.id, &u.bus)?,
                    p_min: u.p_min,
                    p_max: u.p_max,
                    ramp_up: u.ramp_up,
                    ramp_down: u.ramp_down,
                    startup_ramp: u.startup_ramp,
                    shutdown_ramp: u.shutdown_ramp,
                    min_up: u.min_up,
                    min_down: u.min_down,
                    initial: u.initial_status,
                    cost: u.cost,
                },
                region: u.region.clone(),
                heat_station: hs_ids.resolve("CHP unit", &u.id, &u.heat_station)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let wind_farms = p
        .wind_farms
        .iter()
        .map(|w| {
            Ok(WindFarm {
                id: w.id.clone(),
                bus: bus_ids.resolve("wind farm", &w.id, &w.bus)?,
                available: series(format!("wind.{}", w.id), prof.wind.get(&w.id), horizon)?,
                curtailment_price: w.curtailment_price,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let nodes = h
        .nodes
        .iter()
        .map(|n| DhnNode {
            id: n.id.clone(),
            supply_temp_bounds: n.supply_temp_bounds,
            return_temp_bounds: n.return_temp_bounds,
        })
        .collect::<Vec<_>>();

    let pipes = h
        .pipes
        .iter()
        .map(|b| {
            Ok(Pipe {
                id: b.id.clone(),
                from_node: node_ids.resolve("pipe", &b.id, &b.from_node)?,
                to_node: node_ids.resolve("pipe", &b.id, &b.to_node)?,
                length: b.length,
                cross_area: b.cross_area,
                conductivity: b.conductivity,
                m_max_supply: b.m_max_supply,
                m_max_return: b.m_max_return,
                has_valve: b.has_valve,
                min_switch_interval: b.min_switch_interval,
                initial_status: b.initial_status,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let heat_stations = h
        .heat_stations
        .iter()
        .map(|s| {
            Ok(HeatStation {
                id: s.id.clone(),
                node: node_ids.resolve("heat station", &s.id, &s.node)?,
                chp_units: s
                    .chp_units
                    .iter()
                    .map(|c| chp_ids.resolve("heat station", &s.id, c))
                    .collect::<Result<_>>()?,
                boilers: s
                    .boilers
                    .iter()
                    .map(|b| boiler_ids.resolve("heat station", &s.id, b))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let boilers = h
        .boilers
        .iter()
        .map(|b| {
            Ok(HeatingBoiler {
                id: b.id.clone(),
                heat_station: hs_ids.resolve("boiler", &b.id, &b.heat_station)?,
                efficiency: b.efficiency,
                h_max: b.h_max,
                fuel_cost: b.fuel_cost,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let hes = h
        .hes
        .iter()
        .map(|s| {
            Ok(HeatExchangeStation {
                id: s.id.clone(),
                node: node_ids.resolve("heat exchange station", &s.id, &s.node)?,
                demand: series(
                    format!("heat_demand.{}", s.id),
                    prof.heat_demand.get(&s.id),
                    horizon,
                )?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Instance {
        name: raw.meta.name,
        horizon,
        period_hours: raw.meta.period_hours,
        constants: raw.constants,
        ambient: optional_series("ambient", &prof.ambient, horizon)?,
        buses,
        lines,
        thermal_units,
        chp_units,
        wind_farms,
        nodes,
        pipes,
        heat_stations,
        boilers,
        hes,
        sru: optional_series("sru", &prof.sru, horizon)?,
        srd: optional_series("srd", &prof.srd, horizon)?,
        load_shed_price: p.load_shed_price,
        options: raw.options,
    })
}

fn unlink(inst: &Instance) -> RawInstance {
    let bus = |i: usize| inst.buses[i].id.clone();
    let node = |i: usize| inst.nodes[i].id.clone();
    let station = |i: usize| inst.heat_stations[i].id.clone();

    let raw_unit = |u: &ThermalUnit| RawThermalUnit {
        id: u.id.clone(),
        bus: bus(u.bus),
        p_min: u.p_min,
        p_max: u.p_max,
        ramp_up: u.ramp_up,
        ramp_down: u.ramp_down,
        startup_ramp: u.startup_ramp,
        shutdown_ramp: u.shutdown_ramp,
        min_up: u.min_up,
        min_down: u.min_down,
        initial_status: u.initial,
        cost: u.cost,
    };

    RawInstance {
        meta: RawMeta {
            name: inst.name.clone(),
            horizon: inst.horizon,
            period_hours: inst.period_hours,
        },
        constants: inst.constants,
        power: RawPower {
            load_shed_price: inst.load_shed_price,
            buses: inst.buses.iter().map(|b| RawBus { id: b.id.clone() }).collect(),
            lines: inst
                .lines
                .iter()
                .map(|l| RawLine {
                    id: l.id.clone(),
                    capacity: l.capacity,
                    shift_factors: l
                        .shift_factors
                        .iter()
                        .enumerate()
                        .map(|(n, sf)| (bus(n), *sf))
                        .collect(),
                })
                .collect(),
            thermal_units: inst.thermal_units.iter().map(raw_unit).collect(),
            chp_units: inst
                .chp_units
                .iter()
                .map(|c| {
                    let u = raw_unit(&c.unit);
                    RawChpUnit {
                        id: u.id,
                        bus: u.bus,
                        heat_station: station(c.heat_station),
                        p_min: u.p_min,
                        p_max: u.p_max,
                        ramp_up: u.ramp_up,
                        ramp_down: u.ramp_down,
                        startup_ramp: u.startup_ramp,
                        shutdown_ramp: u.shutdown_ramp,
                        min_up: u.min_up,
                        min_down: u.min_down,
                        initial_status: u.initial_status,
                        cost: u.cost,
                        region: c.region.clone(),
                    }
                })
                .collect(),
            wind_farms: inst
                .wind_farms
                .iter()
                .map(|w| RawWindFarm {
                    id: w.id.clone(),
                    bus: bus(w.bus),
                    curtailment_price: w.curtailment_price,
                })
                .collect(),
        },
        heat: RawHeat {
            nodes: inst
                .nodes
                .iter()
                .map(|n| RawNode {
                    id: n.id.clone(),
                    supply_temp_bounds: n.supply_temp_bounds,
                    return_temp_bounds: n.return_temp_bounds,
                })
                .collect(),
            pipes: inst
                .pipes
                .iter()
                .map(|b| RawPipe {
                    id: b.id.clone(),
                    from_node: node(b.from_node),
                    to_node: node(b.to_node),
                    length: b.length,
                    cross_area: b.cross_area,
                    conductivity: b.conductivity,
                    m_max_supply: b.m_max_supply,
                    m_max_return: b.m_max_return,
                    has_valve: b.has_valve,
                    min_switch_interval: b.min_switch_interval,
                    initial_status: b.initial_status,
                })
                .collect(),
            heat_stations: inst
                .heat_stations
                .iter()
                .map(|s| RawHeatStation {
                    id: s.id.clone(),
                    node: node(s.node),
                    chp_units: s
                        .chp_units
                        .iter()
                        .map(|&c| inst.chp_units[c].unit.id.clone())
                        .collect(),
                    boilers: s.boilers.iter().map(|&b| inst.boilers[b].id.clone()).collect(),
                })
                .collect(),
            boilers: inst
                .boilers
                .iter()
                .map(|b| RawBoiler {
                    id: b.id.clone(),
                    heat_station: station(b.heat_station),
                    efficiency: b.efficiency,
                    h_max: b.h_max,
                    fuel_cost: b.fuel_cost,
                })
                .collect(),
            hes: inst
                .hes
                .iter()
                .map(|s| RawHes {
                    id: s.id.clone(),
                    node: node(s.node),
                })
                .collect(),
        },
        profiles: RawProfiles {
            demand: inst
                .buses
                .iter()
                .map(|b| (b.id.clone(), b.demand.clone()))
                .collect(),
            wind: inst
                .wind_farms
                .iter()
                .map(|w| (w.id.clone(), w.available.clone()))
                .collect(),
            heat_demand: inst
                .hes
                .iter()
                .map(|s| (s.id.clone(), s.demand.clone()))
                .collect(),
            ambient: inst.ambient.clone(),
            sru: inst.sru.clone(),
            srd: inst.srd.clone(),
        },
        options: inst.options,
    }
}
