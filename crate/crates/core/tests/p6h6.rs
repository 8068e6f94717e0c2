//! The shipped six-bus, eight-node test system.

mod common;

use ucrhn_core::dhn_flow::{build_flow_constraints, station_supply_ledger, ValveSchedule};
use ucrhn_core::milp::{solve_assembled, Registry, VarKey};
use ucrhn_core::power_uc::line_flow;
use ucrhn_core::{assemble, validate, Instance, MilpModel};

use common::{external, nominal_schedule, p6h6};

#[test]
fn topology_matches_the_published_system() {
    let inst = p6h6();
    assert_eq!(inst.horizon, 24);
    assert_eq!(inst.buses.len(), 6);
    assert_eq!(inst.nodes.len(), 8);
    assert_eq!(inst.pipes.len(), 7);
    assert_eq!(inst.heat_stations.len(), 2);
    assert_eq!(inst.hes.len(), 3);
    assert_eq!(inst.thermal_units.len(), 2);
    assert_eq!(inst.chp_units.len(), 2);
    assert_eq!(inst.wind_farms.len(), 1);
    let ids: Vec<&str> = inst.pipes.iter().map(|p| p.id.as_str()).collect();
    assert_eq!(ids, ["v1", "v2", "v3", "v4", "v5", "v6", "v7"]);
    assert_eq!(inst.pipes.iter().filter(|p| p.initial_status).count(), 6);
    assert!(!inst.pipes[inst.pipe_index("v5").unwrap()].initial_status);
}

#[test]
fn instance_validates_cleanly() {
    assert_eq!(validate(&p6h6()), vec![]);
}

#[test]
fn congested_line_shift_factors() {
    let inst = p6h6();
    let l = inst.line_index("B2-B4").unwrap();
    let sf = &inst.lines[l].shift_factors;
    assert_eq!(sf[1], 0.1242);
    assert_eq!(sf[2], -0.3422);
    assert_eq!(inst.lines[l].capacity, 100.0);
}

#[test]
fn moving_output_from_chp1_to_chp2_loads_b2_b4() {
    let inst = p6h6();
    let l = inst.line_index("B2-B4").unwrap();
    let (_, mut s) = nominal_schedule(&inst);
    let first_chp = inst.thermal_units.len();
    s.output[first_chp][5] = 30.0;
    s.output[first_chp + 1][5] = 20.0;
    let before = line_flow(&inst, &s, l, 5);
    s.output[first_chp][5] -= 1.0;
    s.output[first_chp + 1][5] += 1.0;
    let after = line_flow(&inst, &s, l, 5);
    assert!((after - before - 0.4664).abs() < 1e-12);
}

#[test]
fn reserve_requirements_are_forty_mw() {
    let inst = p6h6();
    assert!(inst.sru.iter().all(|&r| r == 40.0));
    assert!(inst.srd.iter().all(|&r| r == 40.0));
}

#[test]
fn binary_count() {
    let inst = p6h6();
    let a = assemble(&inst).unwrap();
    assert_eq!(a.model.binary_count(), 24 * (4 * 3 + 7 * 3));
}

#[test]
fn flow_constraint_count_per_period() {
    let inst = p6h6();
    let a = assemble(&inst).unwrap();
    let rows = build_flow_constraints(&inst, &a.registry);
    // 8 nodal balances, 7 loss couplings, 14 bound pairs, 2 station sums.
    assert_eq!(rows.len(), 24 * (8 + 7 + 28 + 2));
    for t in 1..=24 {
        let suffix = format!("_{t}");
        assert_eq!(rows.iter().filter(|c| c.name.ends_with(&suffix)).count(), 45);
    }
}

/// Sets binaries of `values` to match the given valve statuses.
fn set_valves(inst: &Instance, reg: &Registry, values: &mut [f64], status: &[Vec<bool>]) {
    for (b, p) in inst.pipes.iter().enumerate() {
        let mut prev = p.initial_status;
        for t in 0..inst.horizon {
            let s = status[b][t];
            values[reg.get(VarKey::PipeStatus { pipe: b, t }).0] = f64::from(u8::from(s));
            if let Some(v) = reg.try_get(VarKey::ValveOpen { pipe: b, t }) {
                values[v.0] = f64::from(u8::from(s && !prev));
            }
            if let Some(v) = reg.try_get(VarKey::ValveClose { pipe: b, t }) {
                values[v.0] = f64::from(u8::from(!s && prev));
            }
            prev = s;
        }
    }
}

fn valve_rows_violated(model: &MilpModel, values: &[f64]) -> Vec<String> {
    model
        .constraints
        .iter()
        .filter(|c| c.name.starts_with('v') && c.violation(values) > 1e-9)
        .map(|c| c.name.clone())
        .collect()
}

#[test]
fn opening_v5_and_closing_v6_keeps_the_open_count() {
    let inst = p6h6();
    let a = assemble(&inst).unwrap();
    let (v5, v6) = (inst.pipe_index("v5").unwrap(), inst.pipe_index("v6").unwrap());
    let mut status: Vec<Vec<bool>> = inst.pipes.iter().map(|p| vec![p.initial_status; 24]).collect();
    status[v5] = vec![true; 24];
    status[v6] = vec![false; 24];
    let mut values = vec![0.0; a.model.variables.len()];
    set_valves(&inst, &a.registry, &mut values, &status);
    assert_eq!(valve_rows_violated(&a.model, &values), Vec::<String>::new());

    let s = ucrhn_core::Schedule::from_values(&inst, &a.registry, &values);
    let valves = ValveSchedule::from_schedule(&s);
    assert!(valves.violations(&inst).is_empty());
    assert!((0..24).all(|t| valves.open_count(t) == 6));
    assert!(valves.opened[v5][0] && valves.closed[v6][0]);

    // Opening v5 alone breaks the count.
    status[v6] = vec![true; 24];
    set_valves(&inst, &a.registry, &mut values, &status);
    assert!(valve_rows_violated(&a.model, &values).iter().any(|n| n.starts_with("vcount_")));
}

#[test]
fn station_service_areas() {
    let inst = p6h6();
    let (_, mut s) = nominal_schedule(&inst);
    let ledger = station_supply_ledger(&inst, &s);
    assert!(ledger.violations.is_empty());
    for t in 0..24 {
        assert_eq!(ledger.served_by(0, t), Some(&[0, 1][..]));
        assert_eq!(ledger.served_by(1, t), Some(&[2][..]));
    }

    let (v5, v6) = (inst.pipe_index("v5").unwrap(), inst.pipe_index("v6").unwrap());
    s.pipe_status[v5] = vec![true; 24];
    s.pipe_status[v6] = vec![false; 24];
    let ledger = station_supply_ledger(&inst, &s);
    assert!(ledger.violations.is_empty());
    assert_eq!(ledger.served_by(0, 0), Some(&[0, 1, 2][..]));
    assert_eq!(ledger.served_by(1, 0), Some(&[][..]));
}

#[test]
fn published_case_one_commitment_is_feasible() {
    let Some(backend) = external() else { return };
    let mut inst = p6h6();
    inst.options.fixed_topology = true;
    let mut a = assemble(&inst).unwrap();
    let g2 = 1;
    for gen in 0..4 {
        for t in 0..24 {
            let on = gen != g2 || (12..16).contains(&t);
            let v = a.registry.get(VarKey::Status { gen, t }).0;
            a.model.variables[v].lower = f64::from(u8::from(on));
            a.model.variables[v].upper = f64::from(u8::from(on));
        }
    }
    let sol = solve_assembled(&a, &backend).unwrap();
    assert!(sol.status.has_solution(), "status {:?}", sol.status);
    let s = ucrhn_core::Schedule::from_values(&inst, &a.registry, &sol.values);
    let l = inst.line_index("B2-B4").unwrap();
    for t in 0..24 {
        assert!(line_flow(&inst, &s, l, t).abs() <= 100.0 + 1e-6);
        assert!((12..16).contains(&t) == s.status[g2][t]);
    }
}
