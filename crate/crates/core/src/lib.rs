//! Simulation and learning of cooperative balking policies for a team of
//! robots that share one human operator.
//!
//! Robots run through task lists autonomously and occasionally hit events
//! that call for the operator. At each event the robot either joins the
//! operator queue or balks and carries on, risking a failure that costs the
//! operator more time later. Policies are learned with tabular Q-learning
//! under three state models and compared against non-balking FIFO/SJF queues
//! and the Naor threshold rule.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod learning;
pub mod par;
pub mod policies;
pub mod queue;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
