use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{KktStats, SolveResult, SolverConfig, TraceRecord, SCHEMA_VERSION};
use crate::error::{EcmoError, Result};
use crate::kkt::{check_lambda, kkt_from_evaluation, Preference};
use crate::penalty::{initial_state, penalty_from_evaluation, project_feasible, PenaltyState};
use crate::problem::{EcmoProblem, StochasticProblem};

/// Per-iteration view handed to an observer.
#[derive(Debug)]
pub struct StepInfo<'a> {
    pub iteration: usize,
    pub before: &'a PenaltyState,
    pub after: &'a PenaltyState,
    pub eta: f64,
    pub v: f64,
}

/// Deterministic WC-Penalty: `T` projected gradient steps on `P` with fixed
/// `eta`, `u`, `v`.
pub fn solve_wc_penalty(
    problem: &EcmoProblem,
    lambda: &Preference,
    config: &SolverConfig,
) -> Result<SolveResult> {
    run(problem, None, lambda, config, &mut |_| {})
}

/// [`solve_wc_penalty`] with a callback after every step.
pub fn solve_wc_penalty_observed(
    problem: &EcmoProblem,
    lambda: &Preference,
    config: &SolverConfig,
    observer: &mut dyn FnMut(&StepInfo<'_>),
) -> Result<SolveResult> {
    run(problem, None, lambda, config, observer)
}

/// Stochastic WC-Penalty. Gradient steps use fresh mini-batch estimates; the
/// recorded KKT residual uses exact evaluations.
pub fn solve_wc_penalty_stochastic(
    problem: &StochasticProblem,
    lambda: &Preference,
    config: &SolverConfig,
) -> Result<SolveResult> {
    run(problem.base(), Some(problem), lambda, config, &mut |_| {})
}

fn diverged(iteration: usize, state: &PenaltyState) -> EcmoError {
    EcmoError::Diverged {
        iteration,
        last_state: Box::new(state.clone()),
    }
}

fn run(
    problem: &EcmoProblem,
    noisy: Option<&StochasticProblem>,
    lambda: &Preference,
    config: &SolverConfig,
    observer: &mut dyn FnMut(&StepInfo<'_>),
) -> Result<SolveResult> {
    config.validate()?;
    check_lambda(problem, lambda)?;
    if !lambda.is_strictly_positive() {
        return Err(EcmoError::input(
            "WC-Penalty needs a strictly positive lambda",
        ));
    }
    let params = config.params;
    let lam = lambda.as_slice();
    let mut state = initial_state(problem, lambda, &config.z0)?;
    if state.rho < 0.0 {
        return Err(EcmoError::input(format!(
            "initial rho = {} is negative; shift the objectives to be positive first",
            state.rho
        )));
    }
    let mut rng = noisy.map(|_| ChaCha8Rng::seed_from_u64(params.seed));

    let mut stats = KktStats::default();
    let mut trace = Vec::new();
    let mut truncated = false;
    let mut last_violation = 0.0;

    for t in 0..config.iterations {
        let exact = problem.evaluate(&state.z)?;
        let point = penalty_from_evaluation(&exact, lam, params.u, params.v, &state)
            .map_err(|_| diverged(t, &state))?;
        let kkt = kkt_from_evaluation(&exact, lam, state.rho, &point.duals.omega, &point.duals.nu)
            .map_err(|_| diverged(t, &state))?;
        stats.push(kkt.sq_norm);
        if t % config.record_every == 0 {
            let mut rec = TraceRecord::from_kkt(t, point.value, state.rho, &kkt);
            rec.delta_violation = last_violation;
            trace.push(rec);
        }
        if config.stop_tol.is_some_and(|tol| kkt.sq_norm <= tol) {
            truncated = true;
            break;
        }

        let gradient = match (noisy, rng.as_mut()) {
            (Some(sp), Some(rng)) => {
                let sampled = sp.sample(
                    &state.z,
                    params.batch_objective,
                    params.batch_constraint,
                    rng,
                )?;
                penalty_from_evaluation(&sampled, lam, params.u, params.v, &state)
                    .map_err(|_| diverged(t, &state))?
                    .gradient
            }
            _ => point.gradient,
        };

        let stepped = PenaltyState {
            rho: state.rho - params.eta * gradient.rho,
            z: state
                .z
                .iter()
                .zip(&gradient.z)
                .map(|(z, g)| z - params.eta * g)
                .collect(),
            delta: state
                .delta
                .iter()
                .zip(&gradient.delta)
                .map(|(d, g)| d - params.eta * g)
                .collect(),
        };
        last_violation = stepped.delta.iter().fold(0.0_f64, |m, d| m.max(-d));
        let next = project_feasible(&stepped);
        if !(next.rho.is_finite() && next.z.iter().chain(&next.delta).all(|x| x.is_finite())) {
            return Err(diverged(t + 1, &state));
        }
        observer(&StepInfo {
            iteration: t,
            before: &state,
            after: &next,
            eta: params.eta,
            v: params.v,
        });
        state = next;
    }

    let final_eval = problem.evaluate(&state.z)?;
    if final_eval
        .f
        .iter()
        .chain(&final_eval.h)
        .any(|x| !x.is_finite())
    {
        return Err(diverged(stats.count(), &state));
    }
    let iterations_run = if truncated {
        stats.count() - 1
    } else {
        config.iterations
    };
    if !truncated && iterations_run % config.record_every == 0 {
        let point = penalty_from_evaluation(&final_eval, lam, params.u, params.v, &state)
            .map_err(|_| diverged(iterations_run, &state))?;
        let kkt = kkt_from_evaluation(
            &final_eval,
            lam,
            state.rho,
            &point.duals.omega,
            &point.duals.nu,
        )?;
        let mut rec = TraceRecord::from_kkt(iterations_run, point.value, state.rho, &kkt);
        rec.delta_violation = last_violation;
        trace.push(rec);
    }
    let final_constraint_norm = final_eval.h.iter().map(|h| h * h).sum::<f64>().sqrt();

    Ok(SolveResult {
        schema_version: SCHEMA_VERSION,
        solver: if noisy.is_some() { "wc-stoc" } else { "wc" }.to_string(),
        lambda: lam.to_vec(),
        final_f: final_eval.f,
        final_state: state,
        final_constraint_norm,
        avg_kkt_sq: stats.mean(),
        min_kkt_sq: stats.min(),
        iterations_run,
        truncated,
        trace,
        config: config.clone(),
        seed: noisy.map(|_| params.seed),
        warnings: Vec::new(),
    })
}
