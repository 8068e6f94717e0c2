//! CHP operating-region arithmetic and the boiler model.
//!
//! A CHP unit's feasible (power, heat) set is the convex hull of its extreme
//! points; a dispatch is a convex combination of them.

use crate::error::{Error, Result};
use crate::instance::{ChpOperatingRegion, HeatingBoiler, Instance};
use crate::milp::model::{Constraint, LinExpr};
use crate::milp::registry::{chp_gen, Registry, VarKey};

const WEIGHT_TOL: f64 = 1e-9;

/// A CHP set-point expressed through extreme-point weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ChpDispatch {
    pub alphas: Vec<f64>,
    pub p: f64,
    pub h: f64,
}

impl ChpDispatch {
    pub fn off(points: usize) -> Self {
        ChpDispatch {
            alphas: vec![0.0; points],
            p: 0.0,
            h: 0.0,
        }
    }

    pub fn on(region: &ChpOperatingRegion, alphas: Vec<f64>) -> Result<Self> {
        let (p, h) = chp_point_from_alphas(region, &alphas)?;
        Ok(ChpDispatch { alphas, p, h })
    }

    pub fn is_on(&self) -> bool {
        self.alphas.iter().any(|a| *a > 0.0)
    }
}

pub fn chp_point_from_alphas(region: &ChpOperatingRegion, alphas: &[f64]) -> Result<(f64, f64)> {
    if alphas.len() != region.extreme_points.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} extreme points",
            alphas.len(),
            region.extreme_points.len()
        )));
    }
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidWeights(format!("weight {a} outside [0, 1]")));
    }
    let sum: f64 = alphas.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::WeightSum { sum });
    }
    Ok(region
        .extreme_points
        .iter()
        .zip(alphas)
        .fold((0.0, 0.0), |(p, h), (&(pk, hk), &a)| (p + a * pk, h + a * hk)))
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Twice the signed polygon area (shoelace).
pub fn signed_area2(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum()
}

/// Checks that the points form a non-degenerate convex polygon in order.
pub fn check_polygon(points: &[(f64, f64)]) -> std::result::Result<(), String> {
    if points.len() < 3 {
        return Err(format!("{} extreme points, need at least 3", points.len()));
    }
    let area2 = signed_area2(points);
    let scale = points
        .iter()
        .map(|p| p.0.abs().max(p.1.abs()))
        .fold(1.0, f64::max);
    if area2.abs() <= 1e-9 * scale * scale {
        return Err("degenerate operating region".into());
    }
    let n = points.len();
    let orientation = area2.signum();
    for i in 0..n {
        let c = cross(points[i], points[(i + 1) % n], points[(i + 2) % n]);
        if c * orientation < -1e-9 * scale * scale {
            return Err("extreme points are not in convex position".into());
        }
    }
    Ok(())
}

/// Weights reproducing `(p, h)`, or `None` when the point is outside the
/// region.
///
/// The polygon is fan-triangulated from vertex 0; the first triangle whose
/// barycentric coordinates are all non-negative supplies the weights.
pub fn alphas_for_point(region: &ChpOperatingRegion, p: f64, h: f64) -> Option<Vec<f64>> {
    let pts = &region.extreme_points;
    let n = pts.len();
    if n == 0 {
        return None;
    }
    let scale = pts
        .iter()
        .map(|q| q.0.abs().max(q.1.abs()))
        .fold(1.0, f64::max);
    let tol = 1e-9;
    for i in 1..n.saturating_sub(1) {
        let (a, b, c) = (pts[0], pts[i], pts[i + 1]);
        let det = cross(a, b, c);
        if det.abs() <= 1e-12 * scale * scale {
            continue;
        }
        let wb = cross(a, (p, h), c) / det;
        let wc = cross(a, b, (p, h)) / det;
        let wa = 1.0 - wb - wc;
        if wa >= -tol && wb >= -tol && wc >= -tol {
            let mut alphas = vec![0.0; n];
            alphas[0] = wa.clamp(0.0, 1.0);
            alphas[i] = wb.clamp(0.0, 1.0);
            alphas[i + 1] = wc.clamp(0.0, 1.0);
            let sum: f64 = alphas.iter().sum();
            alphas.iter_mut().for_each(|x| *x /= sum);
            return Some(alphas);
        }
    }
    None
}

/// Heat output for a given fuel input.
pub fn boiler_heat(boiler: &HeatingBoiler, fuel: f64) -> Result<f64> {
    if fuel < 0.0 {
        return Err(Error::InvalidInstance(format!(
            "boiler `{}` fuel input {fuel} is negative",
            boiler.id
        )));
    }
    let heat = boiler.efficiency * fuel;
    if heat > boiler.h_max + 1e-9 {
        return Err(Error::OverCapacity {
            id: boiler.id.clone(),
            heat,
            h_max: boiler.h_max,
        });
    }
    Ok(heat)
}

/// Violation of `μ·h_min ≤ h ≤ μ·h_max`; zero when satisfied.
pub fn chp_commitment_link(h: f64, on: bool, region: &ChpOperatingRegion) -> f64 {
    let (lo, hi) = region.h_range();
    if on {
        (lo - h).max(h - hi).max(0.0)
    } else {
        h.abs()
    }
}

/// CHP convex-combination and commitment-link rows plus the boiler
/// fuel-to-heat rows.
pub fn build_heat_source_constraints(inst: &Instance, reg: &Registry) -> Vec<Constraint> {
    let mut out = Vec::new();
    for (chp, unit) in inst.chp_units.iter().enumerate() {
        let gen = chp_gen(inst, chp);
        let id = &unit.unit.id;
        let (h_lo, h_hi) = unit.region.h_range();
        for t in 0..inst.horizon {
            let u = reg.get(VarKey::Status { gen, t });
            let p = reg.get(VarKey::Output { gen, t });
            let h = reg.get(VarKey::ChpHeat { chp, t });
            let mut p_def = LinExpr::new().with(p, -1.0);
            let mut h_def = LinExpr::new().with(h, -1.0);
            let mut sum = LinExpr::new().with(u, -1.0);
            for (k, &(pk, hk)) in unit.region.extreme_points.iter().enumerate() {
                let a = reg.get(VarKey::Alpha { chp, k, t });
                p_def.add(a, pk);
                h_def.add(a, hk);
                sum.add(a, 1.0);
            }
            let tag = format!("{id}_{}", t + 1);
            out.push(Constraint::eq(format!("chp_p_{tag}"), p_def, 0.0));
            out.push(Constraint::eq(format!("chp_h_{tag}"), h_def, 0.0));
            out.push(Constraint::eq(format!("chp_alpha_{tag}"), sum, 0.0));
            out.push(Constraint::ge(
                format!("chp_hmin_{tag}"),
                LinExpr::new().with(h, 1.0).with(u, -h_lo),
                0.0,
            ));
            out.push(Constraint::le(
                format!("chp_hmax_{tag}"),
                LinExpr::new().with(h, 1.0).with(u, -h_hi),
                0.0,
            ));
        }
    }
    for (boiler, b) in inst.boilers.iter().enumerate() {
        for t in 0..inst.horizon {
            let f = reg.get(VarKey::BoilerFuel { boiler, t });
            let h = reg.get(VarKey::BoilerHeat { boiler, t });
            out.push(Constraint::eq(
                format!("hb_{}_{}", b.id, t + 1),
                LinExpr::new().with(h, 1.0).with(f, -b.efficiency),
                0.0,
            ));
        }
    }
    out
}
