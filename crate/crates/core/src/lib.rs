//! Day-ahead unit commitment for a power system coupled to a reconfigurable
//! district heating network.
//!
//! The [`milp`] module assembles a mixed-integer linear model from an
//! [`Instance`] (power-side constraints from [`power_uc`], heat sources from
//! [`heat_sources`], the linearized network from [`dhn_flow`]), writes it as
//! MPS and solves it with an external solver or by enumeration. [`dhn_exact`]
//! recovers temperatures and mass flows from a solved schedule and measures
//! the error of the linearized heat-loss model.

pub mod dhn_exact;
pub mod dhn_flow;
pub mod error;
pub mod heat_sources;
pub mod instance;
pub mod milp;
pub mod power_uc;
pub mod report;
pub mod scenario;

pub use error::{Error, Result};
pub use instance::{
    load_instance, parse_instance, save_instance, validate, Bus, ChpOperatingRegion, ChpUnit, CostMode, Diagnostic,
    DhnNode, GenRef, HeatExchangeStation, HeatStation, HeatingBoiler, Instance, Options, PhysicalConstants, Pipe,
    QuadraticCost, ReserveScope, SetpointPolicy, Severity, ThermalUnit, TransmissionLine, WindFarm,
};
pub use milp::{assemble, solve, Backend, CostLedger, ExternalSolver, MilpModel, Schedule, ScheduleSolution, SolveStatus};
