//! Solvers for equality-constrained multi-objective optimization.
//!
//! A preference vector `lambda` selects a point on the Pareto front through the
//! weighted-Chebyshev scalarization `min max_s lambda_s f_s(z)` subject to
//! `h(z) = 0`. The problem is relaxed into a smooth penalty over `(rho, z, delta)`
//! and minimized by projected gradient descent; sweeping `lambda` over the
//! simplex traces the front. Bilevel problems enter through the lower-level
//! stationarity condition `dg/dy = 0`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod explorer;
pub mod fixtures;
pub mod io;
pub mod kkt;
pub mod pareto;
pub mod penalty;
pub mod problem;
pub mod solvers;

pub use error::{EcmoError, Result};
pub use explorer::{simplex_grid, sweep_preferences, SolverKind, SweepResult, SweepSpec};
pub use fixtures::{fixture_names, get_fixture, reference_front, Fixture};
pub use kkt::{kkt_residual, naive_ps_residual, KktResidual, Preference};
pub use pareto::{
    dominates, epsilon_indicator, hypervolume, pareto_filter, FrontEntry, ParetoFront,
};
pub use penalty::{
    default_schedule, penalty_gradient, penalty_value, recover_duals, DualVariables,
    PenaltyGradient, PenaltyParams, PenaltyState, Schedule,
};
pub use problem::{
    box_probes, gradcheck, mtbl_to_ecmo, shift_positive, EcmoProblem, MonomialFunction,
    MtblProblem, ScalarFunction, StochasticProblem,
};
pub use solvers::{
    solve_ls, solve_wc_penalty, solve_wc_penalty_stochastic, SolveResult, SolverConfig, TraceRecord,
};
