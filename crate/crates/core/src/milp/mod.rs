//! Model assembly, exchange files and solver backends.

pub mod assemble;
pub mod backend;
pub mod model;
pub mod mps;
pub mod pwl;
pub mod registry;
pub mod simplex;
pub mod solution;

use crate::error::Result;
use crate::instance::Instance;

pub use assemble::{assemble, Assembled, CostTerms};
pub use backend::{run_backend, Backend, ExternalSolver, SolutionDialect};
pub use model::{Constraint, LinExpr, MilpModel, Objective, Sense, VarId, VarKind, Variable};
pub use mps::{emit_mps, parse_mps, read_mps, write_mps};
pub use pwl::{piecewise_linearize, Linearization};
pub use registry::{Registry, VarKey};
pub use solution::{extract_ledger, CostLedger, Schedule, ScheduleSolution, SolveStatus, SolverMetadata};

/// Runs `backend` on an assembled model and prices the result.
pub fn solve_assembled(assembled: &Assembled, backend: &Backend) -> Result<ScheduleSolution> {
    let raw = run_backend(&assembled.model, backend)?;
    let (objective, ledger) = if raw.status.has_solution() {
        (assembled.model.objective_value(&raw.values), extract_ledger(assembled, &raw.values))
    } else {
        (f64::NAN, CostLedger::default())
    };
    Ok(ScheduleSolution {
        status: raw.status,
        objective,
        values: raw.values,
        ledger,
        metadata: raw.metadata,
    })
}

/// [`assemble`] followed by [`solve_assembled`].
pub fn solve(inst: &Instance, backend: &Backend) -> Result<(Assembled, ScheduleSolution)> {
    let assembled = assemble(inst)?;
    let solution = solve_assembled(&assembled, backend)?;
    Ok((assembled, solution))
}
