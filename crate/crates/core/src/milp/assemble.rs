//! Full model assembly.

use crate::dhn_flow::{build_flow_constraints, build_valve_constraints};
use crate::error::{Error, Result};
use crate::heat_sources::build_heat_source_constraints;
use crate::instance::{validate, Instance, Severity};
use crate::milp::model::{LinExpr, MilpModel, Objective};
use crate::milp::pwl::{epigraph_constraints, piecewise_linearize};
use crate::milp::registry::Registry;
use crate::power_uc::{
    build_balance_and_flow, build_objective, build_reserve_constraints, build_unit_constraints,
};

/// Linear cost expressions per ledger category, after linearization.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostTerms {
    pub thermal: LinExpr,
    pub chp: LinExpr,
    pub wind: LinExpr,
    pub boiler: LinExpr,
    pub load_shed: LinExpr,
}

#[derive(Debug, Clone)]
pub struct Assembled {
    pub model: MilpModel,
    pub registry: Registry,
    pub costs: CostTerms,
    /// Worst-case objective over-estimation from the cost linearization.
    pub linearization_error: f64,
}

fn model_name(inst: &Instance) -> String {
    let name: String = inst
        .name
        .chars()
        .map(|c| if c.is_ascii_graphic() { c } else { '_' })
        .collect();
    if name.is_empty() {
        "ucrhn".into()
    } else {
        name
    }
}

/// Builds the complete MILP for a valid instance. Blocks are appended in a
/// fixed order (heat sources, network flow, valves, power system, cost
/// linearization), so repeated assemblies are identical.
pub fn assemble(inst: &Instance) -> Result<Assembled> {
    let errors: Vec<String> = validate(inst)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| d.to_string())
        .collect();
    if !errors.is_empty() {
        return Err(Error::InvalidInstance(errors.join("; ")));
    }

    let mut model = MilpModel::new(model_name(inst));
    let registry = Registry::build(inst, &mut model);
    model.extend(build_heat_source_constraints(inst, &registry));
    model.extend(build_flow_constraints(inst, &registry));
    model.extend(build_valve_constraints(inst, &registry));
    model.extend(build_balance_and_flow(inst, &registry));
    model.extend(build_unit_constraints(inst, &registry));
    model.extend(build_reserve_constraints(inst, &registry));

    let mut obj = build_objective(inst, &registry);
    let mut linearization_error = 0.0;
    for term in std::mem::take(&mut obj.quadratic) {
        let lin = piecewise_linearize(&term.cost, term.p_min, term.p_max, inst.options.segments)?;
        linearization_error += term.weight * lin.max_error;
        model.extend(epigraph_constraints(&term, &lin));
        obj.category_mut(term.category).add(term.z, term.weight);
    }
    let costs = CostTerms {
        thermal: obj.thermal,
        chp: obj.chp,
        wind: obj.wind,
        boiler: obj.boiler,
        load_shed: obj.load_shed,
    };
    let mut total = LinExpr::new();
    for e in [&costs.thermal, &costs.chp, &costs.wind, &costs.boiler, &costs.load_shed] {
        for &(v, c) in e.terms() {
            total.add(v, c);
        }
        total.add_constant(e.constant());
    }
    model.objective = Objective::from_expr(total);
    model.check()?;
    Ok(Assembled {
        model,
        registry,
        costs,
        linearization_error,
    })
}
