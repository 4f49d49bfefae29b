//! Relay-aware downlink scheduling laboratory.
//!
//! The crate studies proportional-fair scheduling when part of a cell's
//! population rides through half-duplex relays. It has four layers:
//!
//! - [`analytic`]: stationary-throughput fixed points with and without a
//!   relay phase, incentive asymptotics, phase-split rules and parameter
//!   sweeps;
//! - [`mc`]: a slot-level Monte-Carlo scheduler that cross-checks the
//!   analytic operating points from independent machinery;
//! - [`radio`]: pathloss, SINR, CQI quantization and SINR raster maps;
//! - [`sim`]: a TTI-level simulator of backhaul/direct/access subframe
//!   plans with relay buffers and per-link fading.
//!
//! The [`cli`] module wires these into a deterministic batch tool; each
//! capability also has a runnable example under `examples/`.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod flow;
pub mod mc;
pub mod radio;
pub mod sim;

pub use error::{Error, Result};
pub use flow::{
    FixedPointReport, FlowClass, FlowSpec, RelayPhaseConfig, ThroughputVector,
};
