use std::path::PathBuf;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use ucrhn_core::dhn_exact::recover_state;
use ucrhn_core::milp::mps::{emit_mps, parse_mps};
use ucrhn_core::milp::simplex::solve_relaxation;
use ucrhn_core::{assemble, load_instance, Instance, Schedule, SetpointPolicy};

fn instance(rel: &str) -> Instance {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(rel);
    load_instance(path).unwrap()
}

fn model(c: &mut Criterion) {
    let inst = instance("p6h6.toml");
    c.bench_function("assemble p6h6", |b| b.iter(|| assemble(black_box(&inst)).unwrap()));

    let a = assemble(&inst).unwrap();
    c.bench_function("emit_mps p6h6", |b| b.iter(|| emit_mps(black_box(&a.model)).unwrap()));
    let text = emit_mps(&a.model).unwrap();
    c.bench_function("parse_mps p6h6", |b| b.iter(|| parse_mps(black_box(&text)).unwrap()));
}

fn recovery(c: &mut Criterion) {
    let inst = instance("p6h6.toml");
    let a = assemble(&inst).unwrap();
    let mut s = Schedule::from_values(&inst, &a.registry, &vec![0.0; a.model.variables.len()]);
    for (b, p) in inst.pipes.iter().enumerate() {
        s.pipe_status[b] = vec![p.initial_status; inst.horizon];
    }
    for (k, h) in inst.hes.iter().enumerate() {
        s.hes_heat[k] = h.demand.clone();
    }
    c.bench_function("recover_state p6h6 peak", |b| {
        b.iter(|| recover_state(&inst, black_box(&s), 23, SetpointPolicy::Upper).unwrap())
    });
}

fn simplex(c: &mut Criterion) {
    let inst = instance("fixtures/tiny-chp.toml");
    let a = assemble(&inst).unwrap();
    c.bench_function("lp relaxation tiny-chp", |b| b.iter(|| solve_relaxation(black_box(&a.model))));
}

criterion_group!(benches, model, recovery, simplex);
criterion_main!(benches);
