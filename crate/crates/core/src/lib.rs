//! Seeded cellular handover simulator and target-cell selection library.
//!
//! The crate is organised bottom-up: [`topology`] places eNBs, [`mobility`]
//! produces UE trajectories, [`radio`] turns distance into received power and
//! zones, [`selection`] scores candidate targets, and [`engine`] ties them
//! into replications. [`config`], [`sweep`] and [`report`] drive experiments
//! from TOML files.

pub mod config;
pub mod engine;
pub mod mobility;
pub mod radio;
pub mod report;
pub mod selection;
pub mod sweep;
pub mod topology;

pub use engine::{HandoverRecord, Policy, RunSummary, SimulationConfig};
pub use selection::{select_target, Venbl, Weights};
pub use topology::{Deployment, EnbId, Point};
