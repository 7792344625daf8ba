//! Preference grids over the positive simplex and parallel multi-preference sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EcmoError, Result};
use crate::kkt::Preference;
use crate::pareto::{pareto_filter, FrontEntry, ParetoFront};
use crate::problem::{EcmoProblem, StochasticProblem};
use crate::solvers::{
    solve_ls, solve_wc_penalty, solve_wc_penalty_stochastic, SolveResult, SolverConfig,
};

pub const DEFAULT_FLOOR: f64 = 0.01;
pub const DEFAULT_ADMISSION_TOL: f64 = 1e-2;

/// All `lambda_s = floor + m_s (1 - S floor) / resolution` with non-negative
/// integers `m` summing to `resolution`, in lexicographic order of `m`.
/// Resolution zero gives the centroid.
pub fn simplex_grid(s: usize, resolution: usize, floor: f64) -> Result<Vec<Preference>> {
    if s < 2 {
        return Err(EcmoError::input(
            "simplex grid needs at least two objectives",
        ));
    }
    if !(floor > 0.0) || floor * s as f64 >= 1.0 {
        return Err(EcmoError::input(format!(
            "floor must lie in (0, 1/S) = (0, {}); got {floor}",
            1.0 / s as f64
        )));
    }
    if resolution == 0 {
        return Ok(vec![Preference::uniform(s)]);
    }
    let free = 1.0 - s as f64 * floor;
    let mut out = Vec::new();
    let mut m = vec![0usize; s];
    compositions(&mut m, 0, resolution, &mut |m| {
        let w = m
            .iter()
            .map(|&k| floor + k as f64 * free / resolution as f64)
            .collect();
        out.push(w);
    });
    out.into_iter().map(Preference::new).collect()
}

fn compositions(m: &mut [usize], pos: usize, remaining: usize, emit: &mut dyn FnMut(&[usize])) {
    if pos + 1 == m.len() {
        m[pos] = remaining;
        emit(m);
        return;
    }
    for k in 0..=remaining {
        m[pos] = k;
        compositions(m, pos + 1, remaining - k, emit);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferenceSet {
    Explicit(Vec<Preference>),
    Grid { resolution: usize, floor: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub preferences: PreferenceSet,
    /// Template shared by every run; the seed is re-derived per preference.
    pub config: SolverConfig,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    /// Largest `|h(z_T)|` admitted to the front.
    pub admission_tol: f64,
}

impl SweepSpec {
    pub fn grid(resolution: usize, floor: f64, config: SolverConfig) -> Self {
        SweepSpec {
            preferences: PreferenceSet::Grid { resolution, floor },
            config,
            workers: 0,
            admission_tol: DEFAULT_ADMISSION_TOL,
        }
    }

    pub fn explicit(preferences: Vec<Preference>, config: SolverConfig) -> Self {
        SweepSpec {
            preferences: PreferenceSet::Explicit(preferences),
            config,
            workers: 0,
            admission_tol: DEFAULT_ADMISSION_TOL,
        }
    }

    pub fn expand(&self, s: usize) -> Result<Vec<Preference>> {
        match &self.preferences {
            PreferenceSet::Explicit(list) => {
                if list.is_empty() {
                    return Err(EcmoError::input("preference list is empty"));
                }
                Ok(list.clone())
            }
            PreferenceSet::Grid { resolution, floor } => simplex_grid(s, *resolution, *floor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SolverKind {
    WcPenalty,
    WcPenaltyStochastic { sigma_f: f64, sigma_h: f64 },
    Ls,
}

impl SolverKind {
    pub fn solve(
        &self,
        problem: &EcmoProblem,
        lambda: &Preference,
        config: &SolverConfig,
    ) -> Result<SolveResult> {
        match *self {
            SolverKind::WcPenalty => solve_wc_penalty(problem, lambda, config),
            SolverKind::WcPenaltyStochastic { sigma_f, sigma_h } => {
                let noisy = StochasticProblem::new(problem.clone(), sigma_f, sigma_h)?;
                solve_wc_penalty_stochastic(&noisy, lambda, config)
            }
            SolverKind::Ls => solve_ls(problem, lambda, config),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Infeasible,
    Diverged,
    Failed,
}

/// Outcome of one preference in a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaRun {
    pub run_id: String,
    pub lambda: Preference,
    pub seed: u64,
    pub status: RunStatus,
    pub error: Option<String>,
    /// Final objectives with any positivity shift removed.
    pub final_f: Option<Vec<f64>>,
    pub result: Option<SolveResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub per_lambda: Vec<LambdaRun>,
    pub front: ParetoFront,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.per_lambda
            .iter()
            .filter(|r| matches!(r.status, RunStatus::Diverged | RunStatus::Failed))
            .count()
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// RNG seed for one preference, a function of the base seed and the bits of
/// `lambda` only, so any entry can be re-solved on its own.
pub fn derive_seed(base: u64, lambda: &Preference) -> u64 {
    lambda
        .as_slice()
        .iter()
        .fold(splitmix(base), |acc, w| splitmix(acc ^ w.to_bits()))
}

/// The run id used for preference number `index` of a sweep.
pub fn run_id(index: usize) -> String {
    format!("lambda-{index:03}")
}

/// Solves once per preference on a bounded worker pool and assembles the
/// non-dominated set of feasible endpoints.
pub fn sweep_preferences(
    problem: &EcmoProblem,
    spec: &SweepSpec,
    solver: SolverKind,
) -> Result<SweepResult> {
    spec.config.validate()?;
    if !(spec.admission_tol >= 0.0) {
        return Err(EcmoError::input("admission tolerance must be non-negative"));
    }
    let prefs = spec.expand(problem.num_objectives())?;
    for p in &prefs {
        EcmoError::check_dim("preference vector", problem.num_objectives(), p.len())?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| EcmoError::input(format!("cannot start worker pool: {e}")))?;

    let outcomes: Vec<(LambdaRun, Option<EcmoError>)> = pool.install(|| {
        prefs
            .par_iter()
            .enumerate()
            .map(|(i, lambda)| run_one(problem, spec, solver, i, lambda))
            .collect()
    });

    let mut per_lambda = Vec::with_capacity(outcomes.len());
    let mut first_error = None;
    let mut first_divergence = None;
    for (run, err) in outcomes {
        match err {
            Some(e @ EcmoError::Diverged { .. }) => {
                first_divergence.get_or_insert(e);
            }
            Some(e) => {
                first_error.get_or_insert(e);
            }
            None => {}
        }
        per_lambda.push(run);
    }
    if per_lambda
        .iter()
        .all(|r| matches!(r.status, RunStatus::Diverged | RunStatus::Failed))
    {
        return Err(first_error
            .or(first_divergence)
            .expect("at least one preference"));
    }

    let admitted = per_lambda
        .iter()
        .filter(|r| r.status == RunStatus::Ok)
        .map(|r| FrontEntry {
            run_id: r.run_id.clone(),
            lambda: r.lambda.as_slice().to_vec(),
            z: r.result
                .as_ref()
                .map(|s| s.final_state.z.clone())
                .unwrap_or_default(),
            f: r.final_f.clone().unwrap_or_default(),
        })
        .collect();
    let front = pareto_filter(admitted)?;
    Ok(SweepResult { per_lambda, front })
}

fn run_one(
    problem: &EcmoProblem,
    spec: &SweepSpec,
    solver: SolverKind,
    index: usize,
    lambda: &Preference,
) -> (LambdaRun, Option<EcmoError>) {
    let mut config = spec.config.clone();
    config.params.seed = derive_seed(spec.config.params.seed, lambda);
    let mut run = LambdaRun {
        run_id: run_id(index),
        lambda: lambda.clone(),
        seed: config.params.seed,
        status: RunStatus::Ok,
        error: None,
        final_f: None,
        result: None,
    };
    match solver.solve(problem, lambda, &config) {
        Ok(res) => {
            run.final_f = Some(problem.unshift(&res.final_f));
            if !(res.final_constraint_norm <= spec.admission_tol) {
                run.status = RunStatus::Infeasible;
            }
            run.result = Some(res);
            (run, None)
        }
        Err(e) => {
            run.status = if matches!(e, EcmoError::Diverged { .. }) {
                RunStatus::Diverged
            } else {
                RunStatus::Failed
            };
            run.error = Some(e.to_string());
            (run, Some(e))
        }
    }
}
