//! Cross-backend agreement and solution invariants on the tiny fixtures.

mod common;

use ucrhn_core::dhn_flow::{global_heat_residuals, station_supply_ledger, ValveSchedule};
use ucrhn_core::milp::backend::ENUMERATION_CAP;
use ucrhn_core::milp::mps::{emit_mps, parse_mps};
use ucrhn_core::power_uc::power_balance_residuals;
use ucrhn_core::{assemble, solve, Backend, Instance, Schedule, SolveStatus};

use common::{external, fixture, FIXTURES};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn fixtures_fit_the_enumeration_cap() {
    for name in FIXTURES {
        let a = assemble(&fixture(name)).unwrap();
        let free = a.model.free_binaries().len();
        assert!(free <= ENUMERATION_CAP, "{name}: {free} free binaries");
    }
}

#[test]
fn enumeration_and_external_agree() {
    let Some(ext) = external() else { return };
    for name in FIXTURES {
        let inst = fixture(name);
        let (_, e) = solve(&inst, &Backend::Enumerate).unwrap();
        let (_, x) = solve(&inst, &ext).unwrap();
        assert_eq!(e.status, SolveStatus::Optimal, "{name}");
        assert!(x.status.has_solution(), "{name}: {:?}", x.status);
        assert!(rel(e.objective, x.objective) <= 1e-6, "{name}: {} vs {}", e.objective, x.objective);
    }
}

fn heat_starved() -> Instance {
    let mut inst = fixture("tiny-single-chp");
    inst.hes[0].demand = vec![100.0, 100.0];
    inst
}

#[test]
fn infeasible_toy_is_reported_by_enumeration() {
    let (_, sol) = solve(&heat_starved(), &Backend::Enumerate).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
    assert!(sol.objective.is_nan());
}

#[test]
fn infeasible_toy_is_reported_by_external_solver() {
    let Some(ext) = external() else { return };
    let (_, sol) = solve(&heat_starved(), &ext).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
}

fn check_conservation(inst: &Instance, s: &Schedule, name: &str) {
    for (t, r) in power_balance_residuals(inst, s).iter().enumerate() {
        assert!(r.abs() <= 1e-6, "{name} period {t}: power residual {r}");
    }
    for (t, r) in global_heat_residuals(inst, s).iter().enumerate() {
        assert!(r.abs() <= 1e-6, "{name} period {t}: heat residual {r}");
    }
    let ledger = station_supply_ledger(inst, s);
    assert!(ledger.violations.is_empty(), "{name}: isolation violated");
    assert!(ledger.max_residual() <= 1e-6, "{name}: station residual {}", ledger.max_residual());
    let valves = ValveSchedule::from_schedule(s);
    assert!(valves.violations(inst).is_empty(), "{name}: {:?}", valves.violations(inst));
}

#[test]
fn enumerated_solutions_conserve_power_and_heat() {
    for name in FIXTURES {
        let inst = fixture(name);
        let (a, sol) = solve(&inst, &Backend::Enumerate).unwrap();
        assert!(a.model.max_violation(&sol.values) <= 1e-6, "{name}");
        let s = Schedule::from_values(&inst, &a.registry, &sol.values);
        check_conservation(&inst, &s, name);
        assert!(rel(sol.ledger.total(), sol.objective) <= 1e-9);
    }
}

#[test]
fn assembly_and_mps_are_deterministic() {
    let mut names: Vec<Instance> = FIXTURES.iter().map(|n| fixture(n)).collect();
    names.push(common::p6h6());
    for inst in names {
        let a = emit_mps(&assemble(&inst).unwrap().model).unwrap();
        let b = emit_mps(&assemble(&inst).unwrap().model).unwrap();
        assert_eq!(a, b, "{}", inst.name);
        let again = emit_mps(&parse_mps(&a).unwrap()).unwrap();
        assert_eq!(a, again, "{}", inst.name);
    }
}

#[test]
fn p6h6_model_survives_a_round_trip() {
    let model = assemble(&common::p6h6()).unwrap().model;
    let back = parse_mps(&emit_mps(&model).unwrap()).unwrap();
    assert_eq!(back.variables, model.variables);
    assert_eq!(back.constraints.len(), model.constraints.len());
    for (a, b) in back.constraints.iter().zip(&model.constraints) {
        assert_eq!((&a.name, &a.terms, a.lower, a.upper), (&b.name, &b.terms, b.lower, b.upper));
    }
    assert_eq!(back.objective.terms, model.objective.terms);
}

#[test]
fn fixing_the_topology_never_helps() {
    let mut inst = fixture("tiny-reconfig");
    let (_, free) = solve(&inst, &Backend::Enumerate).unwrap();
    inst.options.fixed_topology = true;
    let (_, fixed) = solve(&inst, &Backend::Enumerate).unwrap();
    assert!(fixed.objective >= free.objective - 1e-9);
    // Here the tie is worth using: P23 opens and P43 closes.
    assert!(fixed.objective > free.objective + 1.0);
}

#[test]
fn reconfiguration_switches_the_tie() {
    let inst = fixture("tiny-reconfig");
    let (a, sol) = solve(&inst, &Backend::Enumerate).unwrap();
    let s = Schedule::from_values(&inst, &a.registry, &sol.values);
    let p23 = inst.pipe_index("P23").unwrap();
    let p43 = inst.pipe_index("P43").unwrap();
    assert!(s.pipe_status[p23][0] && !s.pipe_status[p43][0]);
    assert_eq!(station_supply_ledger(&inst, &s).served_by(0, 0), Some(&[0, 1][..]));
}

#[test]
fn more_segments_tighten_the_quadratic_cost() {
    let mut inst = fixture("tiny-quadratic");
    let mut last = f64::INFINITY;
    for k in [1, 2, 4, 8, 16] {
        inst.options.segments = k;
        let (a, sol) = solve(&inst, &Backend::Enumerate).unwrap();
        assert!(sol.objective <= last + 1e-9, "K = {k}: {} after {last}", sol.objective);
        assert!(a.linearization_error >= 0.0);
        last = sol.objective;
    }
}

#[test]
fn fixed_topology_p6h6_costs_more() {
    let Some(ext) = external() else { return };
    let mut inst = common::p6h6();
    let (_, free) = solve(&inst, &ext).unwrap();
    inst.options.fixed_topology = true;
    let (_, fixed) = solve(&inst, &ext).unwrap();
    assert!(free.status.has_solution() && fixed.status.has_solution());
    // Both within the 1e-4 gap of their optimum.
    assert!(fixed.objective >= free.objective * (1.0 - 2e-4));
}
