//! Delay-robust execution of pre-planned multi-robot trajectories.
//!
//! Robots follow collision-free discrete-time plans but can be held in place
//! by exogenous disturbances. This crate simulates such executions under three
//! control laws ([`policies::Policy`]), audits the resulting traces for safety
//! and liveness, certifies small instances exhaustively ([`oracle`]), plans
//! fresh instances on grid maps ([`planner`]) and benchmarks the policies
//! against the closed-form travel-time expectations ([`bench`]).
//!
//! ```
//! use rmtrack::{bundled, disturbance::DisturbanceProcess, policies::Policy, simulator};
//!
//! let inst = bundled::cross2();
//! let noise = DisturbanceProcess::bernoulli(0.3, 7).unwrap();
//! let trace = simulator::run(&inst, Policy::Rmtrack, &noise, &Default::default()).unwrap();
//! let audit = simulator::audit_trace(&inst, &trace).unwrap();
//! assert!(audit.is_safe() && audit.completed);
//! ```

pub mod bench;
pub mod bundled;
pub mod cli;
pub mod coordspace;
pub mod disturbance;
pub mod error;
pub mod geometry;
pub mod model;
pub mod oracle;
pub mod planner;
pub mod policies;
pub mod simulator;
pub mod trace;

pub use error::{Error, Result};
