//! In-memory MILP representation shared by the builders, the MPS writer and
//! the solver backends.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

impl Variable {
    pub fn is_fixed(&self) -> bool {
        self.lower == self.upper
    }
}

/// A linear expression `Σ coef·var + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: Vec<(VarId, f64)>,
    constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style [`LinExpr::add`].
    pub fn with(mut self, var: VarId, coef: f64) -> Self {
        self.add(var, coef);
        self
    }

    pub fn add(&mut self, var: VarId, coef: f64) -> &mut Self {
        self.terms.push((var, coef));
        self
    }

    pub fn add_constant(&mut self, value: f64) -> &mut Self {
        self.constant += value;
        self
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[(VarId, f64)] {
        &self.terms
    }

    /// Terms sorted by variable with duplicates merged and zeros dropped.
    pub fn canonical_terms(&self) -> Vec<(VarId, f64)> {
        canonicalize(self.terms.clone())
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + dot(&self.terms, values)
    }
}

pub(crate) fn canonicalize(mut terms: Vec<(VarId, f64)>) -> Vec<(VarId, f64)> {
    terms.sort_by_key(|(v, _)| *v);
    let mut out: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    for (v, c) in terms {
        match out.last_mut() {
            Some((last, acc)) if *last == v => *acc += c,
            _ => out.push((v, c)),
        }
    }
    out.retain(|(_, c)| *c != 0.0);
    out
}

pub(crate) fn dot(terms: &[(VarId, f64)], values: &[f64]) -> f64 {
    terms.iter().map(|(v, c)| c * values[v.0]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
    /// Both sides finite and distinct.
    Range,
}

/// `lower ≤ Σ terms ≤ upper`, with infinite sides for one-sided rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub lower: f64,
    pub upper: f64,
}

impl Constraint {
    fn from_expr(name: impl Into<String>, expr: LinExpr, lower: f64, upper: f64) -> Self {
        let shift = expr.constant;
        Constraint {
            name: name.into(),
            terms: canonicalize(expr.terms),
            lower: lower - shift,
            upper: upper - shift,
        }
    }

    pub fn le(name: impl Into<String>, expr: LinExpr, rhs: f64) -> Self {
        Self::from_expr(name, expr, f64::NEG_INFINITY, rhs)
    }

    pub fn ge(name: impl Into<String>, expr: LinExpr, rhs: f64) -> Self {
        Self::from_expr(name, expr, rhs, f64::INFINITY)
    }

    pub fn eq(name: impl Into<String>, expr: LinExpr, rhs: f64) -> Self {
        Self::from_expr(name, expr, rhs, rhs)
    }

    pub fn range(name: impl Into<String>, expr: LinExpr, lower: f64, upper: f64) -> Self {
        Self::from_expr(name, expr, lower, upper)
    }

    pub fn sense(&self) -> Sense {
        match (self.lower.is_finite(), self.upper.is_finite()) {
            (false, _) => Sense::Le,
            (true, false) => Sense::Ge,
            (true, true) if self.lower == self.upper => Sense::Eq,
            (true, true) => Sense::Range,
        }
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        dot(&self.terms, values)
    }

    /// Distance of the row activity from its allowed interval.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let a = self.activity(values);
        (self.lower - a).max(a - self.upper).max(0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Objective {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl Objective {
    pub fn from_expr(expr: LinExpr) -> Self {
        Objective {
            constant: expr.constant,
            terms: canonicalize(expr.terms),
        }
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + dot(&self.terms, values)
    }
}

/// Minimization model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Objective,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        MilpModel {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            name: name.into(),
            kind,
            lower,
            upper,
        });
        id
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    pub fn add_constraint(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Constraint>) {
        self.constraints.extend(cs);
    }

    pub fn binary_count(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    /// Binaries whose bounds still leave a choice.
    pub fn free_binaries(&self) -> Vec<VarId> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary && !v.is_fixed())
            .map(|(i, _)| VarId(i))
            .collect()
    }

    pub fn var_index(&self) -> HashMap<&str, VarId> {
        self.variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), VarId(i)))
            .collect()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.eval(values)
    }

    /// Largest bound or row violation, and whether binaries are integral.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, &x)| {
                let mut viol = (v.lower - x).max(x - v.upper).max(0.0);
                if v.kind == VarKind::Binary {
                    viol = viol.max((x - x.round()).abs());
                }
                viol
            })
            .fold(0.0, f64::max);
        self.constraints
            .iter()
            .map(|c| c.violation(values))
            .fold(bounds, f64::max)
    }

    /// Checks that names are unique and every coefficient references an
    /// existing variable.
    pub fn check(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for v in &self.variables {
            if !seen.insert(v.name.as_str()) {
                return Err(Error::Model(format!("duplicate variable name `{}`", v.name)));
            }
            if v.lower > v.upper {
                return Err(Error::Model(format!(
                    "variable `{}` has lower bound {} above upper bound {}",
                    v.name, v.lower, v.upper
                )));
            }
        }
        let mut rows = HashSet::new();
        let n = self.variables.len();
        for c in &self.constraints {
            if !rows.insert(c.name.as_str()) {
                return Err(Error::Model(format!("duplicate constraint name `{}`", c.name)));
            }
            if let Some((v, _)) = c.terms.iter().find(|(v, _)| v.0 >= n) {
                return Err(Error::Model(format!(
                    "constraint `{}` references missing variable {}",
                    c.name, v.0
                )));
            }
        }
        if let Some((v, _)) = self.objective.terms.iter().find(|(v, _)| v.0 >= n) {
            return Err(Error::Model(format!(
                "objective references missing variable {}",
                v.0
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_folds_expression_constant() {
        let mut m = MilpModel::new("t");
        let x = m.add_continuous("x", 0.0, 10.0);
        let mut e = LinExpr::new().with(x, 2.0);
        e.add_constant(3.0);
        let c = Constraint::le("c", e, 7.0);
        assert_eq!(c.upper, 4.0);
        assert_eq!(c.sense(), Sense::Le);
        assert_eq!(c.violation(&[3.0]), 2.0);
    }

    #[test]
    fn canonical_terms_merge_and_drop_zeros() {
        let e = LinExpr::new()
            .with(VarId(2), 1.0)
            .with(VarId(0), 1.0)
            .with(VarId(2), -1.0)
            .with(VarId(0), 2.5);
        assert_eq!(e.canonical_terms(), vec![(VarId(0), 3.5)]);
    }

    #[test]
    fn check_rejects_duplicate_names() {
        let mut m = MilpModel::new("t");
        m.add_binary("b");
        m.add_binary("b");
        assert!(m.check().is_err());
    }
}
