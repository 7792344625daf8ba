//! The penalized weighted-Chebyshev objective
//!
//! ```text
//! P(rho, z, delta) = rho + u/2 sum_i h_i(z)^2 + v/2 sum_s (lambda_s f_s(z) + delta_s - rho)^2
//! ```
//!
//! minimized over `delta >= 0`, together with its gradient, the dual variables
//! implied by a state, and the step-size/penalty schedule.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{EcmoError, Result};
use crate::kkt::{check_lambda, Preference};
use crate::problem::{EcmoProblem, Evaluation};

/// The augmented iterate `(rho, z, delta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyState {
    pub rho: f64,
    pub z: Vec<f64>,
    pub delta: Vec<f64>,
}

impl PenaltyState {
    fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.z.iter().chain(&self.delta).all(|x| x.is_finite())
    }
}

/// Gradient of `P` split into its `rho`, `z` and `delta` blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyGradient {
    pub rho: f64,
    pub z: Vec<f64>,
    pub delta: Vec<f64>,
}

/// Multipliers implied by a state: `omega_s = v c_s`, `nu_i = u h_i(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualVariables {
    pub omega: Vec<f64>,
    pub nu: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyParams {
    pub u: f64,
    pub v: f64,
    pub eta: f64,
    /// Mini-batch size per objective (stochastic solver only).
    pub batch_objective: usize,
    /// Mini-batch size per constraint (stochastic solver only).
    pub batch_constraint: usize,
    pub seed: u64,
}

impl PenaltyParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !(pos(self.u) && pos(self.v) && pos(self.eta)) {
            return Err(EcmoError::input("u, v and eta must be positive and finite"));
        }
        if self.batch_objective == 0 || self.batch_constraint == 0 {
            return Err(EcmoError::input("batch sizes must be positive"));
        }
        Ok(())
    }
}

/// Constants of the iteration-count dependent schedule
/// `eta = c_eta T^{-1/4}`, `u = v = c_uv T^{1/4}`, `B = ceil(c_batch T^{5/4})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub c_eta: f64,
    pub c_uv: f64,
    pub c_batch: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            c_eta: DEFAULT_C_ETA,
            c_uv: DEFAULT_C_UV,
            c_batch: 1.0,
        }
    }
}

/// Step constant that keeps `eta * L_P` below 2 on the shipped fixtures.
pub const DEFAULT_C_ETA: f64 = 0.02;
pub const DEFAULT_C_UV: f64 = 0.5;

impl Schedule {
    pub fn new(c_eta: f64, c_uv: f64) -> Self {
        Schedule {
            c_eta,
            c_uv,
            ..Default::default()
        }
    }

    pub fn params(&self, iterations: usize, seed: u64) -> PenaltyParams {
        let t = iterations.max(1) as f64;
        let batch = (self.c_batch * t.powf(1.25)).ceil().max(1.0) as usize;
        let mut p = default_schedule(iterations, self.c_eta, self.c_uv);
        p.batch_objective = batch;
        p.batch_constraint = batch;
        p.seed = seed;
        p
    }
}

/// `eta = c_eta T^{-1/4}`, `u = v = c_uv T^{1/4}`; batch sizes follow
/// `ceil(T^{5/4})`.
pub fn default_schedule(iterations: usize, c_eta: f64, c_uv: f64) -> PenaltyParams {
    let t = iterations.max(1) as f64;
    let quarter = t.powf(0.25);
    let batch = t.powf(1.25).ceil() as usize;
    PenaltyParams {
        u: c_uv * quarter,
        v: c_uv * quarter,
        eta: c_eta / quarter,
        batch_objective: batch,
        batch_constraint: batch,
        seed: 0,
    }
}

/// Penalty value, gradient and duals at one state, sharing a single evaluation.
#[derive(Debug, Clone)]
pub(crate) struct PenaltyPoint {
    pub value: f64,
    pub gradient: PenaltyGradient,
    pub duals: DualVariables,
}

pub(crate) fn penalty_from_evaluation(
    eval: &Evaluation,
    lambda: &[f64],
    u: f64,
    v: f64,
    state: &PenaltyState,
) -> Result<PenaltyPoint> {
    let s_count = eval.f.len();
    EcmoError::check_dim("slack vector", s_count, state.delta.len())?;
    // c_s = lambda_s f_s + delta_s - rho
    let c: Vec<f64> = (0..s_count)
        .map(|s| lambda[s] * eval.f[s] + state.delta[s] - state.rho)
        .collect();
    let h_sq: f64 = eval.h.iter().map(|h| h * h).sum();
    let c_sq: f64 = c.iter().map(|x| x * x).sum();
    let value = state.rho + 0.5 * u * h_sq + 0.5 * v * c_sq;

    let omega: Vec<f64> = c.iter().map(|x| v * x).collect();
    let nu: Vec<f64> = eval.h.iter().map(|h| u * h).collect();

    let weights = DVector::from_iterator(s_count, omega.iter().zip(lambda).map(|(w, l)| w * l));
    let mut grad_z = eval.jf.tr_mul(&weights);
    if !nu.is_empty() {
        grad_z += eval.jh.tr_mul(&DVector::from_column_slice(&nu));
    }
    let gradient = PenaltyGradient {
        rho: 1.0 - omega.iter().sum::<f64>(),
        z: grad_z.iter().copied().collect(),
        delta: omega.clone(),
    };
    if !value.is_finite() {
        return Err(EcmoError::NonFinite {
            context: "penalty value",
            index: 0,
        });
    }
    if let Some(i) = gradient.z.iter().position(|g| !g.is_finite()) {
        return Err(EcmoError::NonFinite {
            context: "penalty gradient",
            index: i,
        });
    }
    Ok(PenaltyPoint {
        value,
        gradient,
        duals: DualVariables { omega, nu },
    })
}

fn evaluate_at(
    problem: &EcmoProblem,
    lambda: &Preference,
    u: f64,
    v: f64,
    state: &PenaltyState,
) -> Result<PenaltyPoint> {
    check_lambda(problem, lambda)?;
    let eval = problem.evaluate(&state.z)?;
    penalty_from_evaluation(&eval, lambda.as_slice(), u, v, state)
}

pub fn penalty_value(
    problem: &EcmoProblem,
    lambda: &Preference,
    u: f64,
    v: f64,
    state: &PenaltyState,
) -> Result<f64> {
    evaluate_at(problem, lambda, u, v, state).map(|p| p.value)
}

pub fn penalty_gradient(
    problem: &EcmoProblem,
    lambda: &Preference,
    u: f64,
    v: f64,
    state: &PenaltyState,
) -> Result<PenaltyGradient> {
    evaluate_at(problem, lambda, u, v, state).map(|p| p.gradient)
}

/// Duals satisfying `1 - sum omega = dP/drho` and
/// `sum omega_s lambda_s grad f_s + sum nu_i grad h_i = dP/dz`.
pub fn recover_duals(
    problem: &EcmoProblem,
    lambda: &Preference,
    u: f64,
    v: f64,
    state: &PenaltyState,
) -> Result<DualVariables> {
    evaluate_at(problem, lambda, u, v, state).map(|p| p.duals)
}

/// Projection onto `R x R^k x R_+^S`.
pub fn project_feasible(state: &PenaltyState) -> PenaltyState {
    PenaltyState {
        rho: state.rho,
        z: state.z.clone(),
        delta: state.delta.iter().map(|d| d.max(0.0)).collect(),
    }
}

/// `rho_0 = max_s lambda_s f_s(z_0)` and `delta_0 = rho_0 - lambda f(z_0)`, so every
/// slack residual starts at zero.
pub fn initial_state(
    problem: &EcmoProblem,
    lambda: &Preference,
    z0: &[f64],
) -> Result<PenaltyState> {
    check_lambda(problem, lambda)?;
    let f = problem.eval_objectives(z0)?;
    let weighted: Vec<f64> = f
        .iter()
        .zip(lambda.as_slice())
        .map(|(f, l)| l * f)
        .collect();
    let rho = weighted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let state = PenaltyState {
        rho,
        z: z0.to_vec(),
        delta: weighted.iter().map(|w| rho - w).collect(),
    };
    if !state.is_finite() {
        return Err(EcmoError::NonFinite {
            context: "initial state",
            index: 0,
        });
    }
    Ok(state)
}
