#![allow(dead_code)]

pub mod oracles;

use std::path::PathBuf;

use ucrhn_core::milp::{Backend, ExternalSolver, Registry, Schedule};
use ucrhn_core::{assemble, load_instance, parse_instance, Instance};

pub fn instances_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

pub fn p6h6() -> Instance {
    load_instance(instances_dir().join("p6h6.toml")).unwrap()
}

pub fn fixture(name: &str) -> Instance {
    load_instance(instances_dir().join("fixtures").join(format!("{name}.toml"))).unwrap()
}

pub const FIXTURES: [&str; 6] = [
    "tiny-dispatch",
    "tiny-network",
    "tiny-chp",
    "tiny-single-chp",
    "tiny-reconfig",
    "tiny-quadratic",
];

/// The external solver, if one is installed.
pub fn external() -> Option<Backend> {
    let s = ExternalSolver::discover();
    if s.is_none() {
        eprintln!("no external MILP solver found; skipping");
    }
    s.map(Backend::External)
}

pub fn parse(text: &str) -> Instance {
    parse_instance(text).unwrap()
}

/// A schedule with every pipe at its initial status and every HES at its
/// demand; all other quantities zero.
pub fn nominal_schedule(inst: &Instance) -> (Registry, Schedule) {
    let a = assemble(inst).unwrap();
    let values = vec![0.0; a.model.variables.len()];
    let mut s = Schedule::from_values(inst, &a.registry, &values);
    for (b, p) in inst.pipes.iter().enumerate() {
        s.pipe_status[b] = vec![p.initial_status; inst.horizon];
    }
    for (k, h) in inst.hes.iter().enumerate() {
        s.hes_heat[k] = h.demand.clone();
    }
    (a.registry, s)
}
