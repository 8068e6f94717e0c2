//! Piecewise-linear outer approximation of convex quadratic cost curves.

use crate::error::{Error, Result};
use crate::instance::QuadraticCost;
use crate::milp::model::{Constraint, LinExpr};
use crate::power_uc::QuadTerm;

/// Chord `cost ≈ slope·p + intercept` of one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub breakpoints: Vec<f64>,
    pub segments: Vec<Segment>,
    /// Largest over-estimation of the quadratic on the domain.
    pub max_error: f64,
}

impl Linearization {
    /// Maximum over the chords, i.e. the epigraph value at `p`.
    pub fn eval(&self, p: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.slope * p + s.intercept)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Splits `[p_min, p_max]` into `segments` equal chords of `a·p² + b·p + c`.
/// A linear curve (`a = 0`) or a point domain yields a single exact segment.
pub fn piecewise_linearize(cost: &QuadraticCost, p_min: f64, p_max: f64, segments: usize) -> Result<Linearization> {
    if cost.a < 0.0 {
        return Err(Error::NonConvexCost(cost.a));
    }
    if segments == 0 {
        return Err(Error::Model("piecewise linearization needs at least one segment".into()));
    }
    if p_max < p_min {
        return Err(Error::Model(format!("empty domain [{p_min}, {p_max}]")));
    }
    let k = if cost.a == 0.0 || p_max == p_min { 1 } else { segments };
    let width = (p_max - p_min) / k as f64;
    let breakpoints: Vec<f64> = (0..=k)
        .map(|i| if i == k { p_max } else { p_min + width * i as f64 })
        .collect();
    let segments = breakpoints
        .windows(2)
        .map(|w| {
            let (x0, x1) = (w[0], w[1]);
            // chord slope of a·p² + b·p is a·(x0 + x1) + b
            let slope = cost.a * (x0 + x1) + cost.b;
            Segment {
                slope,
                intercept: cost.eval(x0) - slope * x0,
            }
        })
        .collect();
    Ok(Linearization {
        breakpoints,
        segments,
        max_error: cost.a * width * width / 4.0,
    })
}

/// Epigraph rows `z ≥ slope·p + intercept·u` for one quadratic term.
pub fn epigraph_constraints(term: &QuadTerm, lin: &Linearization) -> Vec<Constraint> {
    lin.segments
        .iter()
        .enumerate()
        .map(|(k, s)| {
            Constraint::ge(
                format!("pwl_{}_{}", term.name, k + 1),
                LinExpr::new().with(term.z, 1.0).with(term.p, -s.slope).with(term.u, -s.intercept),
                0.0,
            )
        })
        .collect()
}
