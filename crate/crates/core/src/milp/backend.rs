//! Solver backends: an external MILP solver driven through an MPS file and a
//! command template, or exhaustive enumeration of the binaries on top of the
//! built-in simplex.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::milp::model::MilpModel;
use crate::milp::mps::write_mps;
use crate::milp::simplex::{solve_lp, LpStatus};
use crate::milp::solution::{SolveStatus, SolverMetadata};

pub const DEFAULT_GAP: f64 = 1e-4;
/// Largest number of free binaries the enumeration backend accepts.
pub const ENUMERATION_CAP: usize = 20;
pub const SOLVER_CMD_ENV: &str = "UCRHN_SOLVER_CMD";
pub const SOLVER_DIALECT_ENV: &str = "UCRHN_SOLVER_DIALECT";

/// Layout of the solution file written by an external solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionDialect {
    /// `status <word>`, optional `objective <value>`, then `<name> <value>` lines.
    Pairs,
    /// CBC's `-solu` output: a status line, then `<index> <name> <value> <reduced cost>`.
    Cbc,
}

impl FromStr for SolutionDialect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pairs" => Ok(SolutionDialect::Pairs),
            "cbc" => Ok(SolutionDialect::Cbc),
            other => Err(Error::SolutionParse(format!("unknown solution dialect `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSolver {
    /// Shell command with `{mps}`, `{sol}` and `{gap}` placeholders.
    pub command: String,
    pub dialect: SolutionDialect,
    pub gap: f64,
}

fn bundled_highs_script() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/highs_backend.py")
}

fn succeeds(program: &str, args: &[&str]) -> Option<String> {
    let out = Command::new(program).args(args).output().ok()?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
}

fn quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

impl ExternalSolver {
    pub fn new(command: impl Into<String>, dialect: SolutionDialect) -> Self {
        ExternalSolver {
            command: command.into(),
            dialect,
            gap: DEFAULT_GAP,
        }
    }

    pub fn cbc(binary: &str) -> Self {
        Self::new(format!("{binary} {{mps}} -ratio {{gap}} -solve -solu {{sol}}"), SolutionDialect::Cbc)
    }

    pub fn highs_script(script: &Path) -> Self {
        Self::new(format!("python3 {} {{mps}} {{sol}} {{gap}}", quote(script)), SolutionDialect::Pairs)
    }

    /// Solver configured through the environment, if any.
    pub fn from_env() -> Result<Option<Self>> {
        let Ok(cmd) = std::env::var(SOLVER_CMD_ENV) else {
            return Ok(None);
        };
        let dialect = match std::env::var(SOLVER_DIALECT_ENV) {
            Ok(d) => d.parse()?,
            Err(_) => SolutionDialect::Pairs,
        };
        Ok(Some(Self::new(cmd, dialect)))
    }

    /// Environment override, then the bundled HiGHS script, then `cbc` on
    /// the path, then the CBC binary shipped with PuLP.
    pub fn discover() -> Option<Self> {
        if let Ok(Some(s)) = Self::from_env() {
            return Some(s);
        }
        let script = bundled_highs_script();
        if script.exists() && succeeds("python3", &["-c", "import highspy"]).is_some() {
            return Some(Self::highs_script(&script));
        }
        if succeeds("cbc", &["-quit"]).is_some() {
            return Some(Self::cbc("cbc"));
        }
        let path = succeeds("python3", &["-c", "import pulp; print(pulp.PULP_CBC_CMD().path)"])?;
        Path::new(&path).exists().then(|| Self::cbc(&path))
    }

    pub fn with_gap(mut self, gap: f64) -> Self {
        self.gap = gap;
        self
    }

    pub fn expand(&self, mps: &Path, sol: &Path) -> String {
        self.command
            .replace("{mps}", &quote(mps))
            .replace("{sol}", &quote(sol))
            .replace("{gap}", &self.gap.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    External(ExternalSolver),
    Enumerate,
}

impl Backend {
    pub fn describe(&self) -> String {
        match self {
            Backend::External(s) => s.command.clone(),
            Backend::Enumerate => "enumerate".into(),
        }
    }
}

/// What a backend returns before the objective is recomputed from the values.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSolution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub metadata: SolverMetadata,
}

pub fn run_backend(model: &MilpModel, backend: &Backend) -> Result<RawSolution> {
    let start = Instant::now();
    let (status, values, gap, message) = match backend {
        Backend::Enumerate => {
            let (status, values) = enumerate(model)?;
            (status, values, Some(0.0), None)
        }
        Backend::External(solver) => {
            let (status, values, message) = run_external(model, solver)?;
            (status, values, Some(solver.gap), message)
        }
    };
    Ok(RawSolution {
        status,
        values,
        metadata: SolverMetadata {
            backend: backend.describe(),
            wall_time_s: start.elapsed().as_secs_f64(),
            gap,
            message,
        },
    })
}

fn run_external(model: &MilpModel, solver: &ExternalSolver) -> Result<(SolveStatus, Vec<f64>, Option<String>)> {
    let dir = tempfile::tempdir().map_err(|e| crate::error::io(Path::new("<tempdir>"), e))?;
    let mps = dir.path().join("model.mps");
    let sol = dir.path().join("model.sol");
    write_mps(model, &mps)?;
    let command = solver.expand(&mps, &sol);
    log::debug!("running `{command}`");
    let out = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .current_dir(dir.path())
        .output()
        .map_err(|e| Error::Subprocess {
            command: command.clone(),
            status: None,
            output: e.to_string(),
        })?;
    let captured = format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    if !out.status.success() {
        return Err(Error::Subprocess {
            command,
            status: out.status.code(),
            output: captured,
        });
    }
    let text = std::fs::read_to_string(&sol)
        .map_err(|_| Error::SolutionParse(format!("solver wrote no solution file; output:\n{captured}")))?;
    let (status, values) = parse_solution(&text, solver.dialect, model)?;
    Ok((status, values, None))
}

/// Parses a solution file. Variables the file does not mention are zero.
pub fn parse_solution(text: &str, dialect: SolutionDialect, model: &MilpModel) -> Result<(SolveStatus, Vec<f64>)> {
    let index: HashMap<&str, usize> = model
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let mut values = vec![0.0; model.variables.len()];
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let bad = |msg: String| Error::SolutionParse(msg);

    let header = lines.next().ok_or_else(|| bad("empty solution file".into()))?;
    let status = match dialect {
        SolutionDialect::Pairs => {
            let mut toks = header.split_whitespace();
            if toks.next() != Some("status") {
                return Err(bad(format!("expected `status <word>`, found `{header}`")));
            }
            match toks.next() {
                Some("optimal") => SolveStatus::Optimal,
                Some("feasible") => SolveStatus::Feasible,
                Some("infeasible") => SolveStatus::Infeasible,
                Some(_) => SolveStatus::Error,
                None => return Err(bad("missing status word".into())),
            }
        }
        SolutionDialect::Cbc => {
            let h = header.trim_start();
            if h.starts_with("Optimal") {
                SolveStatus::Optimal
            } else if h.starts_with("Infeasible") || h.starts_with("Integer infeasible") {
                SolveStatus::Infeasible
            } else if h.starts_with("Stopped") {
                SolveStatus::Feasible
            } else {
                SolveStatus::Error
            }
        }
    };
    if !status.has_solution() {
        return Ok((status, values));
    }

    let mut stopped_without_solution = true;
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let (name, value) = match dialect {
            SolutionDialect::Pairs => match toks[..] {
                ["objective", _] => continue,
                [name, value] => (name, value),
                _ => return Err(bad(format!("expected `name value`, found `{line}`"))),
            },
            SolutionDialect::Cbc => {
                let toks = if toks.first() == Some(&"**") { &toks[1..] } else { &toks[..] };
                match toks {
                    [_, name, value, ..] => (*name, *value),
                    _ => return Err(bad(format!("expected `index name value reduced-cost`, found `{line}`"))),
                }
            }
        };
        let i = *index.get(name).ok_or_else(|| bad(format!("unknown variable `{name}`")))?;
        values[i] = value.parse().map_err(|_| bad(format!("invalid value `{value}` for `{name}`")))?;
        stopped_without_solution = false;
    }
    if status == SolveStatus::Feasible && stopped_without_solution && !model.variables.is_empty() {
        return Ok((SolveStatus::Error, values));
    }
    Ok((status, values))
}

/// Solves the continuous relaxation for every assignment of the free
/// binaries and keeps the best.
/// False when some row cannot be satisfied for any values within the bounds.
/// Cheaply discards binary assignments that break the status logic.
fn rows_can_hold(model: &MilpModel, lower: &[f64], upper: &[f64]) -> bool {
    const TOL: f64 = 1e-7;
    model.constraints.iter().all(|c| {
        let (mut lo, mut hi) = (0.0, 0.0);
        for &(v, a) in &c.terms {
            let (l, u) = (lower[v.0], upper[v.0]);
            if a > 0.0 {
                lo += a * l;
                hi += a * u;
            } else {
                lo += a * u;
                hi += a * l;
            }
        }
        // NaN from ∞ − ∞ compares false and keeps the row.
        !(lo > c.upper + TOL * c.upper.abs().max(1.0) || hi < c.lower - TOL * c.lower.abs().max(1.0))
    })
}

fn enumerate(model: &MilpModel) -> Result<(SolveStatus, Vec<f64>)> {
    let free = model.free_binaries();
    if free.len() > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            binaries: free.len(),
            cap: ENUMERATION_CAP,
        });
    }
    let mut lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let mut upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u64..(1u64 << free.len()) {
        for (k, v) in free.iter().enumerate() {
            let bit = ((mask >> k) & 1) as f64;
            lower[v.0] = bit;
            upper[v.0] = bit;
        }
        if !rows_can_hold(model, &lower, &upper) {
            continue;
        }
        let r = solve_lp(model, &lower, &upper);
        match r.status {
            LpStatus::Optimal => {
                let improves = best
                    .as_ref()
                    .is_none_or(|(obj, _)| r.objective < obj - 1e-9 * obj.abs().max(1.0));
                if improves {
                    best = Some((r.objective, r.values));
                }
            }
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => return Err(Error::Model("relaxation is unbounded".into())),
            LpStatus::IterationLimit => {
                return Err(Error::Model("simplex iteration limit reached".into()));
            }
        }
    }
    Ok(match best {
        Some((_, values)) => (SolveStatus::Optimal, values),
        None => (SolveStatus::Infeasible, vec![0.0; model.variables.len()]),
    })
}
