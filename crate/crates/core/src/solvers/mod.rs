//! Iterative solvers: deterministic and stochastic WC-Penalty projected gradient
//! descent, and projected gradient descent on a linear scalarization.

mod ls;
mod wc;

pub use ls::{project_affine, solve_ls, AffineProjector};
pub use wc::{solve_wc_penalty, solve_wc_penalty_observed, solve_wc_penalty_stochastic, StepInfo};

use serde::{Deserialize, Serialize};

use crate::error::{EcmoError, Result};
use crate::kkt::KktResidual;
use crate::penalty::{PenaltyParams, PenaltyState};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub iterations: usize,
    pub params: PenaltyParams,
    pub record_every: usize,
    /// Stop once the squared KKT residual falls to this value. Off by default so
    /// the reported average covers all iterations.
    pub stop_tol: Option<f64>,
    pub z0: Vec<f64>,
    /// Gradient Lipschitz constant for the linear-scalarization step `1/L`;
    /// estimated for quadratic objectives when absent.
    pub lipschitz: Option<f64>,
}

impl SolverConfig {
    pub fn new(iterations: usize, params: PenaltyParams, z0: Vec<f64>) -> Self {
        SolverConfig {
            iterations,
            params,
            record_every: 1,
            stop_tol: None,
            z0,
            lipschitz: None,
        }
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(EcmoError::input("iteration count T must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(EcmoError::input("record_every must be at least 1"));
        }
        if let Some(tol) = self.stop_tol {
            if !(tol >= 0.0) {
                return Err(EcmoError::input("stop_tol must be non-negative"));
            }
        }
        if let Some(l) = self.lipschitz {
            if !(l > 0.0 && l.is_finite()) {
                return Err(EcmoError::input("lipschitz constant must be positive"));
            }
        }
        self.params.validate()
    }
}

/// One thinned trace row. `penalty` holds `P(theta)` for WC-Penalty runs and the
/// scalarized objective for linear-scalarization runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub penalty: f64,
    pub kkt_sq: f64,
    pub kkt_rho: f64,
    pub kkt_z_norm: f64,
    pub kkt_primal_norm: f64,
    pub kkt_slack_norm: f64,
    pub rho: f64,
    pub h_norm: f64,
    /// Largest negative slack entry before projection, as a positive number.
    pub delta_violation: f64,
}

impl TraceRecord {
    pub(crate) fn from_kkt(iter: usize, penalty: f64, rho: f64, kkt: &KktResidual) -> Self {
        TraceRecord {
            iter,
            penalty,
            kkt_sq: kkt.sq_norm,
            kkt_rho: kkt.block_rho,
            kkt_z_norm: kkt.z_norm(),
            kkt_primal_norm: kkt.primal_norm(),
            kkt_slack_norm: kkt.slack_norm(),
            rho,
            h_norm: kkt.primal_norm(),
            delta_violation: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub schema_version: u32,
    pub solver: String,
    pub lambda: Vec<f64>,
    pub final_state: PenaltyState,
    pub final_f: Vec<f64>,
    pub final_constraint_norm: f64,
    /// Mean squared KKT residual over the iterations run.
    pub avg_kkt_sq: f64,
    pub min_kkt_sq: f64,
    pub iterations_run: usize,
    /// Set when `stop_tol` ended the run early.
    pub truncated: bool,
    pub trace: Vec<TraceRecord>,
    pub config: SolverConfig,
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
}

/// Running mean/min of the squared residual.
#[derive(Debug, Default)]
pub(crate) struct KktStats {
    sum: f64,
    min: f64,
    count: usize,
}

impl KktStats {
    pub fn push(&mut self, v: f64) {
        if self.count == 0 || v < self.min {
            self.min = v;
        }
        self.sum += v;
        self.count += 1;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn count(&self) -> usize {
        self.count
    }
}
