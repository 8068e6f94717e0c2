use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::*;
use crate::heat_sources::check_polygon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Element the diagnostic is about, e.g. `pipe P3`.
    pub element: String,
    /// The violated invariant.
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.element, self.message)
    }
}

struct Report(Vec<Diagnostic>);

impl Report {
    fn error(&mut self, element: impl Into<String>, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Error,
            element: element.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, element: impl Into<String>, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Warning,
            element: element.into(),
            message: message.into(),
        });
    }

    fn check(&mut self, ok: bool, element: impl Into<String>, message: impl Into<String>) {
        if !ok {
            self.error(element, message);
        }
    }

    fn non_negative_series(&mut self, element: String, name: &str, values: &[f64]) {
        if let Some((t, v)) = values.iter().enumerate().find(|(_, v)| v.is_nan() || **v < 0.0) {
            self.error(element, format!("{name} must be ≥ 0 (period {} has {v})", t + 1));
        }
    }

    fn unique_ids<'a>(&mut self, kind: &str, ids: impl Iterator<Item = &'a str>) {
        let mut seen = HashSet::new();
        for id in ids {
            if !seen.insert(id) {
                self.error(format!("{kind} {id}"), "duplicate id");
            }
            if id.is_empty() || id.chars().any(char::is_whitespace) {
                self.error(format!("{kind} `{id}`"), "ids must be non-empty and contain no whitespace");
            }
        }
    }
}

/// Checks every structural invariant of the instance. The result is empty
/// iff the instance is valid; warnings do not make it invalid but are still
/// reported.
pub fn validate(inst: &Instance) -> Vec<Diagnostic> {
    let mut r = Report(Vec::new());

    r.check(inst.horizon >= 1, "meta", "horizon must be at least 1");
    r.check(inst.period_hours > 0.0, "meta", "period_hours must be > 0");
    r.check(inst.constants.c > 0.0, "constants", "c must be > 0");
    r.check(inst.constants.rho > 0.0, "constants", "rho must be > 0");
    r.check(inst.load_shed_price >= 0.0, "power", "load_shed_price must be ≥ 0");
    r.check(inst.options.segments >= 1, "options", "segments must be ≥ 1");
    r.non_negative_series("reserve".into(), "sru", &inst.sru);
    r.non_negative_series("reserve".into(), "srd", &inst.srd);

    r.unique_ids("bus", inst.buses.iter().map(|x| x.id.as_str()));
    r.unique_ids("line", inst.lines.iter().map(|x| x.id.as_str()));
    r.unique_ids(
        "generator",
        inst.generators().map(|(_, u)| u.id.as_str()),
    );
    r.unique_ids("wind farm", inst.wind_farms.iter().map(|x| x.id.as_str()));
    r.unique_ids("node", inst.nodes.iter().map(|x| x.id.as_str()));
    r.unique_ids("pipe", inst.pipes.iter().map(|x| x.id.as_str()));
    r.unique_ids("heat station", inst.heat_stations.iter().map(|x| x.id.as_str()));
    r.unique_ids("boiler", inst.boilers.iter().map(|x| x.id.as_str()));
    r.unique_ids("heat exchange station", inst.hes.iter().map(|x| x.id.as_str()));

    for b in &inst.buses {
        r.non_negative_series(format!("bus {}", b.id), "demand", &b.demand);
    }
    for l in &inst.lines {
        let el = format!("line {}", l.id);
        r.check(l.capacity > 0.0, &el, "capacity must be > 0");
        r.check(
            l.shift_factors.len() == inst.buses.len() && l.shift_factors.iter().all(|s| s.is_finite()),
            &el,
            "shift factors must be defined for every bus",
        );
    }
    for (g, u) in inst.generators() {
        validate_unit(&mut r, u);
        if let GenRef::Chp(i) = g {
            validate_chp(&mut r, inst, i);
        }
    }
    for w in &inst.wind_farms {
        let el = format!("wind farm {}", w.id);
        r.non_negative_series(el.clone(), "available", &w.available);
        r.check(w.curtailment_price >= 0.0, el, "curtailment_price must be ≥ 0");
    }

    for n in &inst.nodes {
        let el = format!("node {}", n.id);
        r.check(
            n.supply_temp_bounds.0 <= n.supply_temp_bounds.1,
            &el,
            "supply temperature lower bound exceeds upper bound",
        );
        r.check(
            n.return_temp_bounds.0 <= n.return_temp_bounds.1,
            &el,
            "return temperature lower bound exceeds upper bound",
        );
    }
    for p in &inst.pipes {
        let el = format!("pipe {}", p.id);
        r.check(p.length > 0.0, &el, "length must be > 0");
        r.check(p.cross_area > 0.0, &el, "cross_area must be > 0");
        r.check(p.conductivity >= 0.0, &el, "conductivity must be ≥ 0");
        r.check(
            p.m_max_supply > 0.0 && p.m_max_return > 0.0,
            &el,
            "maximum mass flow rates must be > 0",
        );
        r.check(p.from_node != p.to_node, &el, "pipe must connect two distinct nodes");
        r.check(p.min_switch_interval >= 1, &el, "min_switch_interval must be ≥ 1");
        if !p.has_valve && !p.initial_status {
            r.warn(&el, "pipe has no valve and is initially closed; it never carries flow");
        }
    }
    for (j, s) in inst.heat_stations.iter().enumerate() {
        let el = format!("heat station {}", s.id);
        r.check(
            !s.chp_units.is_empty() || !s.boilers.is_empty(),
            &el,
            "at least one heat source must be attached",
        );
        for &c in &s.chp_units {
            r.check(
                inst.chp_units[c].heat_station == j,
                &el,
                format!("lists CHP unit {} which names another station", inst.chp_units[c].unit.id),
            );
        }
        for &b in &s.boilers {
            r.check(
                inst.boilers[b].heat_station == j,
                &el,
                format!("lists boiler {} which names another station", inst.boilers[b].id),
            );
        }
    }
    for b in &inst.boilers {
        let el = format!("boiler {}", b.id);
        r.check(b.h_max >= 0.0, &el, "h_max must be ≥ 0");
        r.check(
            b.efficiency > 0.0 && b.efficiency <= 1.0,
            &el,
            "efficiency must lie in (0, 1]",
        );
        r.check(
            inst.heat_stations[b.heat_station].boilers.contains(&inst.boilers.iter().position(|x| x.id == b.id).unwrap_or(usize::MAX)),
            &el,
            "not listed by its heat station",
        );
    }
    for h in &inst.hes {
        r.non_negative_series(format!("heat exchange station {}", h.id), "demand", &h.demand);
    }
    if inst.has_heat_network() {
        r.check(
            inst.ambient.iter().all(|a| a.is_finite()),
            "profiles",
            "ambient temperatures must be finite",
        );
    }
    r.0
}

fn validate_unit(r: &mut Report, u: &ThermalUnit) {
    let el = format!("unit {}", u.id);
    r.check(
        0.0 <= u.p_min && u.p_min <= u.p_max,
        &el,
        "requires 0 ≤ p_min ≤ p_max",
    );
    r.check(
        u.ramp_up >= 0.0 && u.ramp_down >= 0.0 && u.startup_ramp >= 0.0 && u.shutdown_ramp >= 0.0,
        &el,
        "ramp rates must be ≥ 0",
    );
    r.check(u.min_up >= 1 && u.min_down >= 1, &el, "min_up and min_down must be ≥ 1");
    r.check(u.cost.a >= 0.0, &el, "quadratic cost coefficient must be ≥ 0 (convexity)");
    if let Some(p0) = u.initial.output {
        let ok = if u.initial.on {
            p0 >= u.p_min - 1e-9 && p0 <= u.p_max + 1e-9
        } else {
            p0 == 0.0
        };
        if !ok {
            r.warn(&el, format!("initial output {p0} is inconsistent with its initial status"));
        }
    }
}

fn validate_chp(r: &mut Report, inst: &Instance, i: usize) {
    let c = &inst.chp_units[i];
    let el = format!("CHP unit {}", c.unit.id);
    let pts = &c.region.extreme_points;
    if let Err(msg) = check_polygon(pts) {
        r.error(&el, msg);
    }
    r.check(
        pts.iter().all(|p| p.1 >= 0.0),
        &el,
        "extreme-point heat outputs must be ≥ 0",
    );
    if !pts.is_empty() {
        let (lo, hi) = c.region.p_range();
        r.check(
            (c.unit.p_min - lo).abs() <= 1e-6 && (c.unit.p_max - hi).abs() <= 1e-6,
            &el,
            format!(
                "p_min/p_max ({}, {}) must match the region's electrical range ({lo}, {hi})",
                c.unit.p_min, c.unit.p_max
            ),
        );
    }
    if inst.options.cost_mode == CostMode::Interpolated {
        r.check(
            c.region.cost_at_points.len() == pts.len(),
            &el,
            "cost_at_points must have one entry per extreme point",
        );
    }
    r.check(
        inst.heat_stations[c.heat_station].chp_units.contains(&i),
        &el,
        "not listed by its heat station",
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;

    fn small() -> Instance {
        parse_instance(
            r#"
[meta]
horizon = 1
[power]
load_shed_price = 100.0
[[power.buses]]
id = "B1"
[[power.chp_units]]
id = "C1"
bus = "B1"
heat_station = "S1"
p_min = 0.0
p_max = 100.0
ramp_up = 100.0
ramp_down = 100.0
startup_ramp = 100.0
shutdown_ramp = 100.0
min_up = 1
min_down = 1
initial_status = { on = true, periods = 1 }
cost = { a = 0.0, b = 10.0, c = 0.0 }
region = { extreme_points = [[0.0, 0.0], [100.0, 0.0], [80.0, 50.0]], cost_at_points = [0.0, 1000.0, 900.0] }
[heat]
[[heat.nodes]]
id = "N1"
supply_temp_bounds = [80.0, 100.0]
return_temp_bounds = [40.0, 60.0]
[[heat.nodes]]
id = "N2"
supply_temp_bounds = [80.0, 100.0]
return_temp_bounds = [40.0, 60.0]
[[heat.pipes]]
id = "P1"
from_node = "N1"
to_node = "N2"
length = 1000.0
cross_area = 0.2
conductivity = 1.0
m_max_supply = 100.0
m_max_return = 100.0
has_valve = false
initial_status = true
[[heat.heat_stations]]
id = "S1"
node = "N1"
chp_units = ["C1"]
[[heat.hes]]
id = "H1"
node = "N2"
[profiles]
demand = { B1 = [10.0] }
heat_demand = { H1 = [5.0] }
"#,
        )
        .unwrap()
    }

    #[test]
    fn valid_instance_has_no_diagnostics() {
        assert_eq!(validate(&small()), vec![]);
    }

    #[test]
    fn collinear_region_is_degenerate() {
        let mut inst = small();
        inst.chp_units[0].region.extreme_points = vec![(0.0, 0.0), (50.0, 25.0), (100.0, 50.0)];
        let d = validate(&inst);
        assert!(d.iter().any(|d| d.severity == Severity::Error
            && d.message == "degenerate operating region"), "{d:?}");
    }

    #[test]
    fn negative_conductivity_is_an_error() {
        let mut inst = small();
        inst.pipes[0].conductivity = -0.1;
        let d = validate(&inst);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].element, "pipe P1");
    }

    #[test]
    fn validate_is_pure() {
        let mut inst = small();
        inst.pipes[0].length = 0.0;
        inst.buses[0].demand[0] = -1.0;
        assert_eq!(validate(&inst), validate(&inst));
    }
}
