//! Independent reference solutions shared by the test suites.

use std::fmt::Write as _;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use ucrhn_core::milp::model::{LinExpr, Objective};
use ucrhn_core::milp::simplex::{solve_lp, LpStatus};
use ucrhn_core::milp::{Assembled, VarKey};
use ucrhn_core::power_uc::build_reserve_constraints;
use ucrhn_core::{assemble, Instance, MilpModel};

use super::{fixture, parse};

pub struct Net<'a> {
    pub nodes: usize,
    /// `(from, to, length, conductivity, open)`, nodes numbered from 1.
    pub pipes: &'a [(usize, usize, f64, f64, bool)],
    pub stations: &'a [usize],
    /// `(node, MWth)`.
    pub hes: &'a [(usize, f64)],
    pub ambient: f64,
}

pub fn network(net: &Net) -> Instance {
    let mut s = String::from("[meta]\nname = \"net\"\nhorizon = 1\n\n[power]\n\n[[power.buses]]\nid = \"B1\"\n");
    for j in 0..net.stations.len() {
        let _ = write!(
            s,
            "\n[[power.chp_units]]\nid = \"C{j}\"\nbus = \"B1\"\nheat_station = \"S{j}\"\np_min = 0.0\np_max = 100.0\n\
             ramp_up = 100.0\nramp_down = 100.0\nstartup_ramp = 100.0\nshutdown_ramp = 100.0\nmin_up = 1\nmin_down = 1\n\
             initial_status = {{ on = true, periods = 1 }}\ncost = {{ a = 0.0, b = 10.0, c = 0.0 }}\n\
             region = {{ extreme_points = [[0.0, 0.0], [100.0, 0.0], [100.0, 100.0], [0.0, 100.0]], cost_at_points = [0.0, 1000.0, 1500.0, 500.0] }}\n"
        );
    }
    s.push_str("\n[heat]\n");
    for i in 1..=net.nodes {
        let _ = write!(
            s,
            "\n[[heat.nodes]]\nid = \"N{i}\"\nsupply_temp_bounds = [80.0, 100.0]\nreturn_temp_bounds = [40.0, 60.0]\n"
        );
    }
    for (b, &(from, to, len, lambda, open)) in net.pipes.iter().enumerate() {
        let _ = write!(
            s,
            "\n[[heat.pipes]]\nid = \"P{b}\"\nfrom_node = \"N{from}\"\nto_node = \"N{to}\"\nlength = {len:?}\n\
             cross_area = 0.1\nconductivity = {lambda:?}\nm_max_supply = 1000.0\nm_max_return = 1000.0\n\
             has_valve = true\ninitial_status = {open}\n"
        );
    }
    for (j, n) in net.stations.iter().enumerate() {
        let _ = write!(s, "\n[[heat.heat_stations]]\nid = \"S{j}\"\nnode = \"N{n}\"\nchp_units = [\"C{j}\"]\n");
    }
    for (k, (n, _)) in net.hes.iter().enumerate() {
        let _ = write!(s, "\n[[heat.hes]]\nid = \"H{k}\"\nnode = \"N{n}\"\n");
    }
    s.push_str("\n[profiles]\ndemand = { B1 = [0.0] }\nheat_demand = { ");
    let demands: Vec<String> = net.hes.iter().enumerate().map(|(k, (_, h))| format!("H{k} = [{h:?}]")).collect();
    s.push_str(&demands.join(", "));
    let _ = writeln!(s, " }}\nambient = [{:?}]", net.ambient);
    parse(&s)
}

/// Solution of the full system: HES flows, station flows, signed pipe
/// flows, node supply and return temperatures, pipe supply and return
/// outlet temperatures.
pub struct Oracle {
    pub hes: Vec<f64>,
    pub station: Vec<f64>,
    pub pipe: Vec<f64>,
    pub node_supply: Vec<f64>,
    pub node_return: Vec<f64>,
    pub supply_out: Vec<f64>,
    pub return_out: Vec<f64>,
}

fn outlet(t_in: f64, m: f64, pipe: &ucrhn_core::Pipe, ambient: f64, c: f64, rho: f64) -> f64 {
    ambient + (t_in - ambient) * (-pipe.conductivity * pipe.length / (m.abs() * pipe.cross_area * rho * c)).exp()
}

/// Dense Newton iteration with a forward-difference Jacobian. Every node is
/// assumed to carry flow; closed pipes are dropped.
#[allow(clippy::needless_range_loop)]
pub fn newton_oracle(inst: &Instance) -> Oracle {
    let c = inst.constants.c;
    let rho = inst.constants.rho;
    let ambient = inst.ambient[0];
    let n = inst.nodes.len();
    let open: Vec<usize> = (0..inst.pipes.len()).filter(|&b| inst.pipes[b].initial_status).collect();
    let (nk, ns, np) = (inst.hes.len(), inst.heat_stations.len(), open.len());
    let hes_return: Vec<f64> = inst
        .hes
        .iter()
        .map(|h| {
            let (lo, hi) = inst.nodes[h.node].return_temp_bounds;
            0.5 * (lo + hi)
        })
        .collect();
    let setpoint: Vec<f64> = inst.heat_stations.iter().map(|s| inst.nodes[s.node].supply_temp_bounds.1).collect();
    let station_at: Vec<Option<usize>> = (0..n).map(|i| inst.heat_stations.iter().position(|s| s.node == i)).collect();

    // Unknown layout.
    let o_hes = 0;
    let o_st = o_hes + nk;
    let o_pipe = o_st + ns;
    let o_ts = o_pipe + np;
    let o_tr = o_ts + n;
    let o_so = o_tr + n;
    let o_ro = o_so + np;
    let dim = o_ro + np;

    let residual = |x: &DVector<f64>| -> DVector<f64> {
        let mut f = Vec::with_capacity(dim);
        // HES balance.
        for (k, h) in inst.hes.iter().enumerate() {
            f.push(c * x[o_hes + k] * (x[o_ts + h.node] - hes_return[k]) / 1e6 - h.demand[0]);
        }
        // Nodal mass balance.
        for i in 0..n {
            let mut r = 0.0;
            for (e, &b) in open.iter().enumerate() {
                let p = &inst.pipes[b];
                if p.to_node == i {
                    r += x[o_pipe + e];
                }
                if p.from_node == i {
                    r -= x[o_pipe + e];
                }
            }
            if let Some(j) = station_at[i] {
                r += x[o_st + j];
            }
            for (k, h) in inst.hes.iter().enumerate() {
                if h.node == i {
                    r -= x[o_hes + k];
                }
            }
            f.push(r);
        }
        // Pipe outlet temperatures, upstream end chosen by flow sign.
        for (e, &b) in open.iter().enumerate() {
            let p = &inst.pipes[b];
            let m = x[o_pipe + e];
            let (up, down) = if m >= 0.0 { (p.from_node, p.to_node) } else { (p.to_node, p.from_node) };
            f.push(x[o_so + e] - outlet(x[o_ts + up], m, p, ambient, c, rho));
            f.push(x[o_ro + e] - outlet(x[o_tr + down], m, p, ambient, c, rho));
        }
        // Supply and return mixing at every node.
        for i in 0..n {
            let (mut sm, mut se, mut rm, mut re) = (0.0, 0.0, 0.0, 0.0);
            for (e, &b) in open.iter().enumerate() {
                let p = &inst.pipes[b];
                let m = x[o_pipe + e];
                let (up, down) = if m >= 0.0 { (p.from_node, p.to_node) } else { (p.to_node, p.from_node) };
                if down == i {
                    sm += m.abs();
                    se += m.abs() * x[o_so + e];
                }
                if up == i {
                    rm += m.abs();
                    re += m.abs() * x[o_ro + e];
                }
            }
            for (k, h) in inst.hes.iter().enumerate() {
                if h.node == i {
                    rm += x[o_hes + k];
                    re += x[o_hes + k] * hes_return[k];
                }
            }
            match station_at[i] {
                Some(j) => f.push(x[o_ts + i] - setpoint[j]),
                None => f.push(se - sm * x[o_ts + i]),
            }
            f.push(re - rm * x[o_tr + i]);
        }
        DVector::from_vec(f)
    };

    // Start: midpoint temperatures and flows from the linear mass balance.
    let mut x = DVector::zeros(dim);
    for (k, h) in inst.hes.iter().enumerate() {
        x[o_hes + k] = h.demand[0] * 1e6 / (c * (90.0 - hes_return[k]));
    }
    let mut a = DMatrix::zeros(n, ns + np);
    let mut rhs = DVector::zeros(n);
    for (e, &b) in open.iter().enumerate() {
        a[(inst.pipes[b].to_node, ns + e)] += 1.0;
        a[(inst.pipes[b].from_node, ns + e)] -= 1.0;
    }
    for (j, s) in inst.heat_stations.iter().enumerate() {
        a[(s.node, j)] = 1.0;
    }
    for (k, h) in inst.hes.iter().enumerate() {
        rhs[h.node] += x[o_hes + k];
    }
    let m0 = a.lu().solve(&rhs).expect("forest incidence is nonsingular");
    for v in 0..ns + np {
        x[o_st + v] = m0[v];
    }
    for i in 0..n {
        x[o_ts + i] = 90.0;
        x[o_tr + i] = 50.0;
    }
    for e in 0..np {
        x[o_so + e] = 90.0;
        x[o_ro + e] = 50.0;
    }

    for _ in 0..50 {
        let f = residual(&x);
        if f.amax() < 1e-11 {
            break;
        }
        let mut jac = DMatrix::zeros(dim, dim);
        for v in 0..dim {
            let h = 1e-7 * x[v].abs().max(1.0);
            let mut xp = x.clone();
            xp[v] += h;
            jac.set_column(v, &((residual(&xp) - &f) / h));
        }
        let step = jac.lu().solve(&(-f)).expect("Jacobian is nonsingular");
        x += step;
    }
    assert!(residual(&x).amax() < 1e-9, "Newton oracle did not converge");

    let mut pipe = vec![0.0; inst.pipes.len()];
    let mut supply_out = vec![f64::NAN; inst.pipes.len()];
    let mut return_out = vec![f64::NAN; inst.pipes.len()];
    for (e, &b) in open.iter().enumerate() {
        pipe[b] = x[o_pipe + e];
        supply_out[b] = x[o_so + e];
        return_out[b] = x[o_ro + e];
    }
    Oracle {
        hes: (0..nk).map(|k| x[o_hes + k]).collect(),
        station: (0..ns).map(|j| x[o_st + j]).collect(),
        pipe,
        node_supply: (0..n).map(|i| x[o_ts + i]).collect(),
        node_return: (0..n).map(|i| x[o_tr + i]).collect(),
        supply_out,
        return_out,
    }
}

fn dispatch() -> &'static (Instance, Assembled) {
    static CELL: OnceLock<(Instance, Assembled)> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut inst = fixture("tiny-dispatch");
        inst.sru = vec![0.0; inst.horizon];
        inst.srd = vec![0.0; inst.horizon];
        let a = assemble(&inst).unwrap();
        (inst, a)
    })
}

/// Largest upward and downward reserve the reserve rows admit for fixed
/// `(u, p)`, found by maximizing each over an LP holding only those rows.
pub fn max_reserve(ramp: f64, p_min: f64, p_max: f64, u: bool, p: f64) -> (f64, f64) {
    let (base, a) = dispatch();
    let mut inst = base.clone();
    {
        let g = &mut inst.thermal_units[0];
        g.ramp_up = ramp;
        g.ramp_down = ramp;
        g.p_min = p_min;
        g.p_max = p_max;
    }
    let reg = &a.registry;
    let (uv, pv) = (reg.get(VarKey::Status { gen: 0, t: 0 }), reg.get(VarKey::Output { gen: 0, t: 0 }));
    let (ru, rd) = (reg.get(VarKey::ReserveUp { gen: 0, t: 0 }), reg.get(VarKey::ReserveDown { gen: 0, t: 0 }));

    let mut model = MilpModel::new("reserve");
    model.variables = a.model.variables.clone();
    model.constraints = build_reserve_constraints(&inst, reg)
        .into_iter()
        .filter(|c| c.name.ends_with("_1"))
        .collect();
    let mut lower = vec![0.0; model.variables.len()];
    let mut upper = vec![0.0; model.variables.len()];
    let on = f64::from(u8::from(u));
    (lower[uv.0], upper[uv.0]) = (on, on);
    (lower[pv.0], upper[pv.0]) = (p, p);
    (upper[ru.0], upper[rd.0]) = (f64::INFINITY, f64::INFINITY);

    let mut best = [0.0; 2];
    for (i, r) in [ru, rd].into_iter().enumerate() {
        model.objective = Objective::from_expr(LinExpr::new().with(r, -1.0));
        let res = solve_lp(&model, &lower, &upper);
        assert_eq!(res.status, LpStatus::Optimal);
        best[i] = res.values[r.0];
    }
    (best[0], best[1])
}

