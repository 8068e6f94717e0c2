//! MPS exchange files.
//!
//! The writer lays fields out in the fixed-format columns and falls back to
//! whitespace separation for names longer than eight characters, which every
//! mainstream reader accepts. Output depends only on the model, so identical
//! models produce identical bytes. The reader is token based.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::milp::model::{Constraint, MilpModel, Objective, Sense, VarId, VarKind, Variable};

/// Name of the objective row.
pub const OBJECTIVE_ROW: &str = "COST";
const MAX_NAME: usize = 255;

fn check_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name.len() <= MAX_NAME
        && !name.starts_with('*')
        && name.bytes().all(|b| b.is_ascii_graphic());
    if ok {
        Ok(())
    } else {
        Err(Error::UnencodableName(name.to_string()))
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn emit_mps(model: &MilpModel) -> Result<String> {
    check_name(&model.name)?;
    for v in &model.variables {
        check_name(&v.name)?;
    }
    for c in &model.constraints {
        check_name(&c.name)?;
        if c.name == OBJECTIVE_ROW {
            return Err(Error::UnencodableName(c.name.clone()));
        }
    }
    model.check()?;

    let mut s = String::new();
    let _ = writeln!(s, "NAME          {}", model.name);
    s.push_str("ROWS\n");
    let _ = writeln!(s, " N  {OBJECTIVE_ROW}");
    for c in &model.constraints {
        let kind = match c.sense() {
            Sense::Le => "L",
            Sense::Ge | Sense::Range => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(s, " {kind}  {}", c.name);
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.variables.len()];
    for (r, c) in model.constraints.iter().enumerate() {
        for &(v, a) in &c.terms {
            columns[v.0].push((r, a));
        }
    }
    let mut objective = vec![0.0; model.variables.len()];
    for &(v, a) in &model.objective.terms {
        objective[v.0] += a;
    }

    s.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut markers = 0;
    for (j, var) in model.variables.iter().enumerate() {
        let is_int = var.kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "INTORG" } else { "INTEND" };
            let _ = writeln!(s, "    MARKER{markers:04}  'MARKER'                 '{tag}'");
            if !is_int {
                markers += 1;
            }
            in_int = is_int;
        }
        let mut wrote = false;
        if objective[j] != 0.0 {
            entry(&mut s, &var.name, OBJECTIVE_ROW, objective[j]);
            wrote = true;
        }
        for &(r, a) in &columns[j] {
            entry(&mut s, &var.name, &model.constraints[r].name, a);
            wrote = true;
        }
        if !wrote {
            entry(&mut s, &var.name, OBJECTIVE_ROW, 0.0);
        }
    }
    if in_int {
        let _ = writeln!(s, "    MARKER{markers:04}  'MARKER'                 'INTEND'");
    }

    s.push_str("RHS\n");
    if model.objective.constant != 0.0 {
        entry(&mut s, "RHS", OBJECTIVE_ROW, -model.objective.constant);
    }
    for c in &model.constraints {
        let rhs = match c.sense() {
            Sense::Le => c.upper,
            Sense::Ge | Sense::Eq | Sense::Range => c.lower,
        };
        if rhs != 0.0 {
            entry(&mut s, "RHS", &c.name, rhs);
        }
    }

    let ranged: Vec<&Constraint> = model.constraints.iter().filter(|c| c.sense() == Sense::Range).collect();
    if !ranged.is_empty() {
        s.push_str("RANGES\n");
        for c in ranged {
            entry(&mut s, "RNG", &c.name, c.upper - c.lower);
        }
    }

    s.push_str("BOUNDS\n");
    for v in &model.variables {
        bounds(&mut s, v);
    }
    s.push_str("ENDATA\n");
    Ok(s)
}

fn entry(s: &mut String, first: &str, second: &str, value: f64) {
    let _ = writeln!(s, "    {first:<8}  {second:<8}  {}", format_number(value));
}

fn bound(s: &mut String, kind: &str, name: &str, value: Option<f64>) {
    match value {
        Some(v) => {
            let _ = writeln!(s, " {kind} BND       {name:<8}  {}", format_number(v));
        }
        None => {
            let _ = writeln!(s, " {kind} BND       {name}");
        }
    }
}

fn bounds(s: &mut String, v: &Variable) {
    let (lo, up) = (v.lower, v.upper);
    if lo == up {
        bound(s, "FX", &v.name, Some(lo));
        return;
    }
    match (lo == f64::NEG_INFINITY, up == f64::INFINITY) {
        (true, true) => bound(s, "FR", &v.name, None),
        (true, false) => {
            bound(s, "MI", &v.name, None);
            bound(s, "UP", &v.name, Some(up));
        }
        (false, inf_up) => {
            if lo != 0.0 {
                bound(s, "LO", &v.name, Some(lo));
            }
            if !inf_up {
                bound(s, "UP", &v.name, Some(up));
            } else if v.kind == VarKind::Binary {
                bound(s, "PL", &v.name, None);
            }
        }
    }
}

pub fn write_mps(model: &MilpModel, path: &Path) -> Result<()> {
    let text = emit_mps(model)?;
    std::fs::write(path, text).map_err(|e| crate::error::io(path, e))
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
}

#[derive(Clone, Copy)]
enum RowKind {
    N,
    E,
    L,
    G,
}

fn number(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::Mps {
        line,
        message: format!("invalid number `{tok}`"),
    })
}

pub fn parse_mps(text: &str) -> Result<MilpModel> {
    let mut model = MilpModel::new("");
    let mut section = Section::None;
    let mut rows: Vec<(String, RowKind)> = Vec::new();
    let mut row_index = std::collections::HashMap::new();
    let mut objective_row: Option<String> = None;
    let mut rhs: Vec<f64> = Vec::new();
    let mut range: Vec<Option<f64>> = Vec::new();
    let mut terms: Vec<Vec<(VarId, f64)>> = Vec::new();
    let mut objective = Objective::default();
    let mut col_index = std::collections::HashMap::new();
    let mut in_int = false;
    let mut lower_set: Vec<bool> = Vec::new();
    let mut ended = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| Error::Mps { line, message };
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(char::is_whitespace) {
            section = match toks[0] {
                "NAME" => {
                    model.name = toks.get(1).copied().unwrap_or("").to_string();
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => {
                    ended = true;
                    break;
                }
                other => return Err(err(format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(err("data outside of a section".into())),
            Section::Rows => {
                let [kind, name] = toks[..] else {
                    return Err(err("expected `type name`".into()));
                };
                let kind = match kind {
                    "N" => RowKind::N,
                    "E" => RowKind::E,
                    "L" => RowKind::L,
                    "G" => RowKind::G,
                    k => return Err(err(format!("unknown row type `{k}`"))),
                };
                if matches!(kind, RowKind::N) {
                    if objective_row.is_none() {
                        objective_row = Some(name.to_string());
                    }
                    continue;
                }
                if row_index.insert(name.to_string(), rows.len()).is_some() {
                    return Err(err(format!("duplicate row `{name}`")));
                }
                rows.push((name.to_string(), kind));
                rhs.push(0.0);
                range.push(None);
                terms.push(Vec::new());
            }
            Section::Columns => {
                if toks.len() == 3 && toks[1] == "'MARKER'" {
                    in_int = match toks[2] {
                        "'INTORG'" => true,
                        "'INTEND'" => false,
                        m => return Err(err(format!("unknown marker {m}"))),
                    };
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(err("expected `column row value [row value]`".into()));
                }
                let name = toks[0];
                let id = match col_index.get(name) {
                    Some(&id) => id,
                    None => {
                        let kind = if in_int { VarKind::Binary } else { VarKind::Continuous };
                        let id = model.add_var(name, kind, 0.0, f64::INFINITY);
                        col_index.insert(name.to_string(), id);
                        lower_set.push(false);
                        id
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let value = number(pair[1], line)?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        if value != 0.0 {
                            objective.terms.push((id, value));
                        }
                    } else if let Some(&r) = row_index.get(pair[0]) {
                        if value != 0.0 {
                            terms[r].push((id, value));
                        }
                    } else {
                        return Err(err(format!("unknown row `{}`", pair[0])));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let pairs = if toks.len() % 2 == 1 { &toks[1..] } else { &toks[..] };
                for pair in pairs.chunks(2) {
                    let [row, value] = pair else {
                        return Err(err("expected `row value` pairs".into()));
                    };
                    let value = number(value, line)?;
                    if Some(*row) == objective_row.as_deref() {
                        if section == Section::Rhs {
                            objective.constant = -value;
                        }
                        continue;
                    }
                    let r = *row_index.get(*row).ok_or_else(|| err(format!("unknown row `{row}`")))?;
                    if section == Section::Rhs {
                        rhs[r] = value;
                    } else {
                        range[r] = Some(value);
                    }
                }
            }
            Section::Bounds => {
                if toks.len() < 3 {
                    return Err(err("expected `type set column [value]`".into()));
                }
                let col = toks[2];
                let j = *col_index.get(col).ok_or_else(|| err(format!("unknown column `{col}`")))?;
                let value = match toks.get(3) {
                    Some(t) => Some(number(t, line)?),
                    None => None,
                };
                let need = |v: Option<f64>| v.ok_or_else(|| err(format!("bound `{}` needs a value", toks[0])));
                let var = &mut model.variables[j.0];
                match toks[0] {
                    "UP" => {
                        var.upper = need(value)?;
                        if var.upper < 0.0 && !lower_set[j.0] && var.lower == 0.0 {
                            var.lower = f64::NEG_INFINITY;
                        }
                    }
                    "LO" => {
                        var.lower = need(value)?;
                        lower_set[j.0] = true;
                    }
                    "FX" => {
                        let v = need(value)?;
                        var.lower = v;
                        var.upper = v;
                        lower_set[j.0] = true;
                    }
                    "FR" => {
                        var.lower = f64::NEG_INFINITY;
                        var.upper = f64::INFINITY;
                    }
                    "MI" => {
                        var.lower = f64::NEG_INFINITY;
                        lower_set[j.0] = true;
                    }
                    "PL" => var.upper = f64::INFINITY,
                    "BV" => {
                        var.kind = VarKind::Binary;
                        var.lower = 0.0;
                        var.upper = 1.0;
                    }
                    k => return Err(err(format!("unsupported bound type `{k}`"))),
                }
            }
        }
    }
    if !ended {
        return Err(Error::Mps {
            line: text.lines().count(),
            message: "missing ENDATA".into(),
        });
    }

    for (r, (name, kind)) in rows.into_iter().enumerate() {
        let b = rhs[r];
        let (lower, upper) = match (kind, range[r]) {
            (RowKind::E, None) => (b, b),
            (RowKind::E, Some(w)) if w >= 0.0 => (b, b + w),
            (RowKind::E, Some(w)) => (b + w, b),
            (RowKind::L, None) => (f64::NEG_INFINITY, b),
            (RowKind::L, Some(w)) => (b - w.abs(), b),
            (RowKind::G, None) => (b, f64::INFINITY),
            (RowKind::G, Some(w)) => (b, b + w.abs()),
            (RowKind::N, _) => unreachable!(),
        };
        let mut t = std::mem::take(&mut terms[r]);
        t.sort_by_key(|x| x.0);
        model.add_constraint(Constraint {
            name,
            terms: t,
            lower,
            upper,
        });
    }
    objective.terms.sort_by_key(|x| x.0);
    model.objective = objective;
    model.check()?;
    Ok(model)
}

pub fn read_mps(path: &Path) -> Result<MilpModel> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::error::io(path, e))?;
    parse_mps(&text)
}
