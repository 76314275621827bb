//! Assignment of autonomous vehicles to parking facilities with
//! vehicle-to-grid duty.
//!
//! A fleet of vehicles, each idle between a drop-off and a pickup, must
//! each pick one parking facility and a set of time slots to occupy there,
//! within reach of its route and long enough to charge. Facilities have
//! per-slot capacity ceilings and grid-demand floors. The objective is the
//! total number of parked slots.
//!
//! The crate provides:
//! - instance modeling, a seeded random generator, and time rescaling
//!   ([`instance`]),
//! - the constraint model, feasibility checking, and LP export ([`model`]),
//! - an exact branch-and-bound reference solver ([`oracle`]),
//! - per-vehicle best response to prices ([`subproblem`]), the price
//!   coordination loop ([`coordinator`]), and repair of the resulting
//!   schedules ([`recovery`]),
//! - a deterministic lossy-channel simulation driving the loop
//!   ([`netsim`]),
//! - a greedy yardstick ([`baseline`]) and text formats ([`format`]).

pub mod baseline;
pub mod coordinator;
pub mod error;
pub mod format;
pub mod instance;
pub mod model;
pub mod netsim;
pub mod oracle;
pub mod recovery;
pub mod subproblem;

pub use error::Error;
pub use instance::{
    generate_instance, rescale_time, CapacityRule, GeneratorConfig, Instance, Slot, TimeHorizon,
};
pub use model::{check_feasibility, export_lp, objective, Assignment, AvChoice, Violation};
pub use oracle::{solve_exact, verify_optimal, OracleLimits, Verdict};
pub use coordinator::{run_distributed, CoordinatorParams, RunReport};
pub use recovery::{recover_primal, Repair, RepairMove};
pub use baseline::solve_greedy;
