//! Small hand-checked commitment cases.

mod common;

use std::fmt::Write as _;

use ucrhn_core::milp::VarKey;
use ucrhn_core::{assemble, solve, Backend, Instance, Schedule};

struct Unit {
    p_min: f64,
    p_max: f64,
    startup_ramp: f64,
    min_up: u32,
    on: bool,
    /// Periods in the initial state.
    periods: u32,
    no_load: f64,
}

fn system(unit: &Unit, demand: &[f64], wind: Option<&[f64]>) -> Instance {
    let h = demand.len();
    let mut s = format!("[meta]\nname = \"uc\"\nhorizon = {h}\n\n[power]\nload_shed_price = 1000.0\n\n[[power.buses]]\nid = \"B1\"\n");
    let _ = write!(
        s,
        "\n[[power.thermal_units]]\nid = \"G1\"\nbus = \"B1\"\np_min = {:?}\np_max = {:?}\nramp_up = {:?}\nramp_down = {:?}\n\
         startup_ramp = {:?}\nshutdown_ramp = {:?}\nmin_up = {}\nmin_down = 1\n\
         initial_status = {{ on = {}, periods = {}, output = {:?} }}\ncost = {{ a = 0.0, b = 10.0, c = {:?}, startup = 5.0 }}\n",
        unit.p_min,
        unit.p_max,
        unit.p_max,
        unit.p_max,
        unit.startup_ramp,
        unit.p_max,
        unit.min_up,
        unit.on,
        unit.periods,
        if unit.on { unit.p_min } else { 0.0 },
        unit.no_load,
    );
    if wind.is_some() {
        s.push_str("\n[[power.wind_farms]]\nid = \"W1\"\nbus = \"B1\"\ncurtailment_price = 20.0\n");
    }
    let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
    let _ = write!(s, "\n[profiles]\ndemand = {{ B1 = [{}] }}\n", list(demand));
    if let Some(w) = wind {
        let _ = writeln!(s, "wind = {{ W1 = [{}] }}", list(w));
    }
    common::parse(&s)
}

fn run(inst: &Instance) -> (Schedule, f64) {
    let (a, sol) = solve(inst, &Backend::Enumerate).unwrap();
    assert!(sol.status.has_solution());
    (Schedule::from_values(inst, &a.registry, &sol.values), sol.objective)
}

const BASE: Unit = Unit {
    p_min: 10.0,
    p_max: 200.0,
    startup_ramp: 200.0,
    min_up: 1,
    on: true,
    periods: 5,
    no_load: 0.0,
};

#[test]
fn single_bus_demand_is_met_by_the_unit() {
    let (s, _) = run(&system(&BASE, &[50.0], None));
    assert!((s.output[0][0] - 50.0).abs() < 1e-9);
    assert!(s.shed[0][0].abs() < 1e-9);
}

#[test]
fn startup_ramp_caps_the_first_period() {
    let unit = Unit {
        startup_ramp: 60.0,
        on: false,
        ..BASE
    };
    let (s, _) = run(&system(&unit, &[0.0, 100.0], None));
    assert!(!s.status[0][0] && s.status[0][1]);
    assert!(s.output[0][1] <= 60.0 + 1e-9);
    assert!((s.shed[0][1] - 40.0).abs() < 1e-6);
}

#[test]
fn minimum_up_time_holds_the_unit_on() {
    let unit = Unit {
        p_min: 0.0,
        min_up: 4,
        on: false,
        no_load: 30.0,
        ..BASE
    };
    let (s, _) = run(&system(&unit, &[0.0, 0.0, 80.0, 0.0, 0.0, 0.0], None));
    assert_eq!(s.status[0], vec![false, false, true, true, true, true]);
}

#[test]
fn idle_system_costs_nothing() {
    let unit = Unit { on: false, ..BASE };
    let (_, objective) = run(&system(&unit, &[0.0, 0.0], None));
    assert_eq!(objective, 0.0);
}

#[test]
fn curtailment_is_priced_on_the_undispatched_wind() {
    let inst = system(&Unit { on: false, ..BASE }, &[80.0], Some(&[100.0]));
    let a = assemble(&inst).unwrap();
    let mut values = vec![0.0; a.model.variables.len()];
    values[a.registry.get(VarKey::Wind { farm: 0, t: 0 }).0] = 80.0;
    assert!((a.costs.wind.eval(&values) - 400.0).abs() < 1e-9);
    let (s, objective) = run(&inst);
    assert!((s.wind[0][0] - 80.0).abs() < 1e-9);
    assert!((objective - 400.0).abs() < 1e-6);
}
