//! System-level Monte-Carlo simulator for UAV-assisted LTE-Advanced
//! public-safety HetNets.
//!
//! The crate computes the 5th-percentile spectral efficiency (5pSE) of a
//! two-tier network of macro base stations (MBSs) and UAV base stations
//! (UABSs) under eICIC/FeICIC interference coordination with cell range
//! expansion, and optimizes UABS placement together with the ICIC
//! parameters either by a genetic algorithm ([`gaopt`]) or by an exhaustive
//! parameter grid over a hexagonal deployment ([`hexopt`]).
//!
//! Module map:
//! - [`scenario`]: PPP layouts, MBS destruction, hexagonal placement
//! - [`propagation`]: exponent-law and Okumura-Hata path loss, fading, RSRP
//! - [`radio`]: link budgets, SIRs, association/scheduling, SE and 5pSE
//! - [`hexopt`]: ICIC grid search
//! - [`gaopt`]: real-coded genetic algorithm
//! - [`harness`]: Monte-Carlo experiments, CRE sweeps, timing
//! - [`io`]: CSV/JSON import and export

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gaopt;
pub mod harness;
pub mod hexopt;
pub mod io;
pub mod propagation;
pub mod radio;
pub mod scenario;
pub mod seed;
pub(crate) mod serde_f64;

pub use error::{Result, SimError};
