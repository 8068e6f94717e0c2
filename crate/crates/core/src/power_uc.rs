//! Power-system side of the model: balance, DC line flows, unit limits,
//! ramping, commitment logic, spinning reserve and the objective terms.

use crate::instance::{CostMode, GenRef, Instance, QuadraticCost};
use crate::milp::model::{Constraint, LinExpr, VarId};
use crate::milp::registry::{in_reserve_scope, Registry, VarKey};

/// Cost category, one per column of the cost ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostCategory {
    Thermal,
    Chp,
    Wind,
    Boiler,
    LoadShed,
}

/// A quadratic cost `weight · (a·p² + b·p + c·u)` to be linearized through
/// the epigraph variable `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadTerm {
    pub category: CostCategory,
    pub name: String,
    pub cost: QuadraticCost,
    pub p_min: f64,
    pub p_max: f64,
    pub weight: f64,
    pub p: VarId,
    pub u: VarId,
    pub z: VarId,
}

/// Objective before linearization, split by ledger category.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObjectiveExpr {
    pub thermal: LinExpr,
    pub chp: LinExpr,
    pub wind: LinExpr,
    pub boiler: LinExpr,
    pub load_shed: LinExpr,
    pub quadratic: Vec<QuadTerm>,
}

impl ObjectiveExpr {
    pub fn category_mut(&mut self, c: CostCategory) -> &mut LinExpr {
        match c {
            CostCategory::Thermal => &mut self.thermal,
            CostCategory::Chp => &mut self.chp,
            CostCategory::Wind => &mut self.wind,
            CostCategory::Boiler => &mut self.boiler,
            CostCategory::LoadShed => &mut self.load_shed,
        }
    }

    pub fn categories(&self) -> [(CostCategory, &LinExpr); 5] {
        [
            (CostCategory::Thermal, &self.thermal),
            (CostCategory::Chp, &self.chp),
            (CostCategory::Wind, &self.wind),
            (CostCategory::Boiler, &self.boiler),
            (CostCategory::LoadShed, &self.load_shed),
        ]
    }
}

/// Net injection of every bus in period `t` as an expression, demand included.
fn injections(inst: &Instance, reg: &Registry, t: usize) -> Vec<LinExpr> {
    let mut inj: Vec<LinExpr> = inst
        .buses
        .iter()
        .map(|b| {
            let mut e = LinExpr::new();
            e.add_constant(-b.demand[t]);
            e
        })
        .collect();
    for (gen, (_, u)) in inst.generators().enumerate() {
        inj[u.bus].add(reg.get(VarKey::Output { gen, t }), 1.0);
    }
    for (farm, w) in inst.wind_farms.iter().enumerate() {
        inj[w.bus].add(reg.get(VarKey::Wind { farm, t }), 1.0);
    }
    for (bus, e) in inj.iter_mut().enumerate() {
        e.add(reg.get(VarKey::Shed { bus, t }), 1.0);
    }
    inj
}

/// System balance per period and two flow limits per line and period.
pub fn build_balance_and_flow(inst: &Instance, reg: &Registry) -> Vec<Constraint> {
    let mut out = Vec::new();
    for t in 0..inst.horizon {
        let tt = t + 1;
        let inj = injections(inst, reg, t);
        let mut balance = LinExpr::new();
        for e in &inj {
            for &(v, c) in e.terms() {
                balance.add(v, c);
            }
            balance.add_constant(e.constant());
        }
        out.push(Constraint::eq(format!("bal_{tt}"), balance, 0.0));

        for line in &inst.lines {
            let mut flow = LinExpr::new();
            for (n, e) in inj.iter().enumerate() {
                let sf = line.shift_factors[n];
                if sf == 0.0 {
                    continue;
                }
                for &(v, c) in e.terms() {
                    flow.add(v, sf * c);
                }
                flow.add_constant(sf * e.constant());
            }
            out.push(Constraint::le(format!("flow_hi_{}_{tt}", line.id), flow.clone(), line.capacity));
            out.push(Constraint::ge(format!("flow_lo_{}_{tt}", line.id), flow, -line.capacity));
        }
    }
    out
}

/// Output limits, ramps, status logic and minimum up/down times, including
/// the carry-in from the initial state.
pub fn build_unit_constraints(inst: &Instance, reg: &Registry) -> Vec<Constraint> {
    let mut out = Vec::new();
    for (gen, (_, unit)) in inst.generators().enumerate() {
        let id = &unit.id;
        let u = |t| reg.get(VarKey::Status { gen, t });
        let x = |t| reg.get(VarKey::Startup { gen, t });
        let y = |t| reg.get(VarKey::Shutdown { gen, t });
        let p = |t| reg.get(VarKey::Output { gen, t });
        let init_on = f64::from(u8::from(unit.initial.on));

        for t in 0..inst.horizon {
            let tt = t + 1;
            out.push(Constraint::le(
                format!("pmax_{id}_{tt}"),
                LinExpr::new().with(p(t), 1.0).with(u(t), -unit.p_max),
                0.0,
            ));
            out.push(Constraint::ge(
                format!("pmin_{id}_{tt}"),
                LinExpr::new().with(p(t), 1.0).with(u(t), -unit.p_min),
                0.0,
            ));

            // p_t − p_{t−1} ≤ (1 − u_{t−1})·SU + RU·u_{t−1}
            // p_t − p_{t−1} ≥ −(1 − u_t)·SD − RD·u_t
            let prev = if t == 0 {
                unit.initial.output.map(|p0| (None, p0, init_on))
            } else {
                Some((Some((p(t - 1), u(t - 1))), 0.0, 0.0))
            };
            if let Some((vars, p0, u0)) = prev {
                let mut up = LinExpr::new().with(p(t), 1.0);
                let mut down = LinExpr::new().with(p(t), 1.0);
                match vars {
                    Some((pv, uv)) => {
                        up.add(pv, -1.0).add(uv, unit.startup_ramp - unit.ramp_up);
                        down.add(pv, -1.0);
                    }
                    None => {
                        up.add_constant(-p0 + u0 * (unit.startup_ramp - unit.ramp_up));
                        down.add_constant(-p0);
                    }
                }
                down.add(u(t), unit.ramp_down - unit.shutdown_ramp);
                out.push(Constraint::le(format!("rup_{id}_{tt}"), up, unit.startup_ramp));
                out.push(Constraint::ge(format!("rdn_{id}_{tt}"), down, -unit.shutdown_ramp));
            }

            let mut logic = LinExpr::new().with(u(t), 1.0).with(x(t), -1.0).with(y(t), 1.0);
            if t == 0 {
                logic.add_constant(-init_on);
            } else {
                logic.add(u(t - 1), -1.0);
            }
            out.push(Constraint::eq(format!("ulogic_{id}_{tt}"), logic, 0.0));

            let mut ups = LinExpr::new().with(u(t), -1.0);
            for k in t.saturating_sub(unit.min_up.max(1) as usize - 1)..=t {
                ups.add(x(k), 1.0);
            }
            out.push(Constraint::le(format!("minup_{id}_{tt}"), ups, 0.0));
            let mut downs = LinExpr::new().with(u(t), 1.0);
            for k in t.saturating_sub(unit.min_down.max(1) as usize - 1)..=t {
                downs.add(y(k), 1.0);
            }
            out.push(Constraint::le(format!("mindn_{id}_{tt}"), downs, 1.0));
        }

        // Periods still covered by the initial state's minimum time.
        let (need, forced) = if unit.initial.on {
            (unit.min_up, 1.0)
        } else {
            (unit.min_down, 0.0)
        };
        let carry = (need.saturating_sub(unit.initial.periods) as usize).min(inst.horizon);
        for t in 0..carry {
            out.push(Constraint::eq(
                format!("uinit_{id}_{}", t + 1),
                LinExpr::new().with(u(t), 1.0),
                forced,
            ));
        }
    }
    out
}

/// Spinning reserve: `r ≤ ramp`, `r ≤ headroom`, `Σ r ≥ requirement`.
pub fn build_reserve_constraints(inst: &Instance, reg: &Registry) -> Vec<Constraint> {
    let mut out = Vec::new();
    for t in 0..inst.horizon {
        let tt = t + 1;
        let mut sum_up = LinExpr::new();
        let mut sum_down = LinExpr::new();
        for (gen, (g, unit)) in inst.generators().enumerate() {
            if !in_reserve_scope(inst, g) {
                continue;
            }
            let id = &unit.id;
            let u = reg.get(VarKey::Status { gen, t });
            let p = reg.get(VarKey::Output { gen, t });
            let ru = reg.get(VarKey::ReserveUp { gen, t });
            let rd = reg.get(VarKey::ReserveDown { gen, t });
            out.push(Constraint::le(format!("ru_ramp_{id}_{tt}"), LinExpr::new().with(ru, 1.0), unit.ramp_up));
            out.push(Constraint::le(
                format!("ru_head_{id}_{tt}"),
                LinExpr::new().with(ru, 1.0).with(p, 1.0).with(u, -unit.p_max),
                0.0,
            ));
            out.push(Constraint::le(format!("rd_ramp_{id}_{tt}"), LinExpr::new().with(rd, 1.0), unit.ramp_down));
            out.push(Constraint::le(
                format!("rd_head_{id}_{tt}"),
                LinExpr::new().with(rd, 1.0).with(p, -1.0).with(u, unit.p_min),
                0.0,
            ));
            sum_up.add(ru, 1.0);
            sum_down.add(rd, 1.0);
        }
        out.push(Constraint::ge(format!("sru_{tt}"), sum_up, inst.sru[t]));
        out.push(Constraint::ge(format!("srd_{tt}"), sum_down, inst.srd[t]));
    }
    out
}

/// All cost terms. Hourly rates are multiplied by the period length;
/// start-up and shut-down costs are per event.
pub fn build_objective(inst: &Instance, reg: &Registry) -> ObjectiveExpr {
    let mut obj = ObjectiveExpr::default();
    let w = inst.period_weight();
    for (gen, (g, unit)) in inst.generators().enumerate() {
        let cat = match g {
            GenRef::Thermal(_) => CostCategory::Thermal,
            GenRef::Chp(_) => CostCategory::Chp,
        };
        for t in 0..inst.horizon {
            let e = obj.category_mut(cat);
            e.add(reg.get(VarKey::Startup { gen, t }), unit.cost.startup);
            e.add(reg.get(VarKey::Shutdown { gen, t }), unit.cost.shutdown);
            match g {
                GenRef::Chp(chp) if inst.options.cost_mode == CostMode::Interpolated => {
                    let region = &inst.chp_units[chp].region;
                    for (k, &cost) in region.cost_at_points.iter().enumerate() {
                        e.add(reg.get(VarKey::Alpha { chp, k, t }), w * cost);
                    }
                }
                _ => obj.quadratic.push(QuadTerm {
                    category: cat,
                    name: format!("{}_{}", unit.id, t + 1),
                    cost: unit.cost,
                    p_min: unit.p_min,
                    p_max: unit.p_max,
                    weight: w,
                    p: reg.get(VarKey::Output { gen, t }),
                    u: reg.get(VarKey::Status { gen, t }),
                    z: reg.get(VarKey::GenCost { gen, t }),
                }),
            }
        }
    }
    for (boiler, b) in inst.boilers.iter().enumerate() {
        for t in 0..inst.horizon {
            obj.boiler.add(reg.get(VarKey::BoilerFuel { boiler, t }), w * b.fuel_cost);
        }
    }
    for (farm, f) in inst.wind_farms.iter().enumerate() {
        for t in 0..inst.horizon {
            let price = w * f.curtailment_price;
            obj.wind.add_constant(price * f.available[t]);
            obj.wind.add(reg.get(VarKey::Wind { farm, t }), -price);
        }
    }
    for bus in 0..inst.buses.len() {
        for t in 0..inst.horizon {
            obj.load_shed.add(reg.get(VarKey::Shed { bus, t }), w * inst.load_shed_price);
        }
    }
    obj
}

/// `total generation + wind + shed − demand` per period.
pub fn power_balance_residuals(inst: &Instance, s: &crate::milp::solution::Schedule) -> Vec<f64> {
    (0..inst.horizon)
        .map(|t| {
            let gen: f64 = s.output.iter().map(|p| p[t]).sum();
            let wind: f64 = s.wind.iter().map(|p| p[t]).sum();
            let shed: f64 = s.shed.iter().map(|p| p[t]).sum();
            gen + wind + shed - inst.total_demand(t)
        })
        .collect()
}

/// MW flow on `line` in period `t` of a schedule.
pub fn line_flow(inst: &Instance, s: &crate::milp::solution::Schedule, line: usize, t: usize) -> f64 {
    let l = &inst.lines[line];
    let mut inj: Vec<f64> = inst.buses.iter().enumerate().map(|(n, b)| s.shed[n][t] - b.demand[t]).collect();
    for (gen, (_, u)) in inst.generators().enumerate() {
        inj[u.bus] += s.output[gen][t];
    }
    for (farm, w) in inst.wind_farms.iter().enumerate() {
        inj[w.bus] += s.wind[farm][t];
    }
    inj.iter().zip(&l.shift_factors).map(|(i, sf)| i * sf).sum()
}
