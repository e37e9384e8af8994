//! Estimates shared by the simulator, the Markov model and the bounds.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    MonteCarlo,
    Markov,
    Bound,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::MonteCarlo => "monte-carlo",
            Provenance::Markov => "markov",
            Provenance::Bound => "bound",
        })
    }
}

/// Logical error rate and overheads of one implementation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub p_log: f64,
    /// Standard error of `p_log` (zero for non-statistical estimates).
    pub p_log_err: f64,
    /// Expected executed gates over the input circuit size.
    pub omega_time: f64,
    pub omega_time_err: f64,
    /// Physical qubits over logical qubits.
    pub omega_space: f64,
    pub shots: u64,
    pub circuits: u64,
    /// Shots stopped by the restart cap; excluded from `p_log`.
    pub aborted: u64,
    pub provenance: Provenance,
}

impl EstimateResult {
    pub fn exact(p_log: f64, omega_time: f64, omega_space: f64, provenance: Provenance) -> Self {
        Self {
            p_log,
            p_log_err: 0.0,
            omega_time,
            omega_time_err: 0.0,
            omega_space,
            shots: 0,
            circuits: 0,
            aborted: 0,
            provenance,
        }
    }
}
