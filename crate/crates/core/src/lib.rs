//! Minimum element counts for self-sustainable reconfigurable intelligent
//! surfaces (ssRIS) under element-splitting (ES) and time-splitting (TS)
//! harvest-and-reflect operation.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: system parameters, link geometry and the derived constants
//!   (path gains, normalised SNR `Γ0`, harvesting difficulty `α`).
//! * [`phys`]: explicit channel matrices, MRT precoding, optimal phase
//!   shifts, and analytic as well as matrix-level SNR / harvested power.
//! * [`outage`]: truncated-Gaussian approximation of the NLOS SNR and the
//!   outage functions root-found by the NLOS solvers.
//! * [`solver`]: the four element-minimisation problems, integer rounding
//!   and an exhaustive-search oracle.
//! * [`validate`]: seeded Monte Carlo and matrix-pipeline identity checks.
//! * [`cli`]: JSON configuration, sweeps, and CSV output.

pub mod cli;
pub mod error;
pub mod model;
pub mod outage;
pub mod phys;
pub mod solver;
pub mod validate;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Harvest-and-reflect scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Element splitting: disjoint harvesting and reflecting element pools.
    #[serde(alias = "es")]
    ES,
    /// Time splitting: all elements alternate between harvesting and reflecting.
    #[serde(alias = "ts")]
    TS,
}

/// Propagation condition of the surface-to-UE link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    #[serde(alias = "los")]
    LOS,
    #[serde(alias = "nlos")]
    NLOS,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::ES => "ES",
            Scheme::TS => "TS",
        })
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::LOS => "LOS",
            Condition::NLOS => "NLOS",
        })
    }
}
