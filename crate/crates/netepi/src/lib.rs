//! Stochastic SIR/SEIR epidemics on random graphs.
//!
//! The crate is organised in layers that cross-check each other:
//!
//! - [`measures`]: finite degree measures, PGFs and size-biasing.
//! - [`graphgen`]: seeded random-graph generators and edge-list I/O.
//! - [`episim`]: exact event-driven simulators, on frozen graphs and on a
//!   configuration model revealed online.
//! - [`branching`]: R0, growth rate, control effort and extinction
//!   probabilities from the approximating branching processes.
//! - [`odelim`]: deterministic large-graph limits (Kermack–McKendrick,
//!   moment closure, Miller, Volz, Ball–Neal).
//! - [`netstat`]: descriptive statistics and community structure of
//!   contact graphs.
//!
//! All randomness flows through [`rng::SimRng`], a ChaCha8 stream seeded from
//! a `u64`, so every stochastic operation is reproducible bit for bit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branching;
pub mod episim;
pub mod error;
pub mod graphgen;
pub mod measures;
pub mod netstat;
pub mod numeric;
pub mod ode;
pub mod odelim;
pub mod rng;

pub use error::{Error, Result};
