//! Turning command-line flags into problems, preferences and solver settings.

use std::fs;

use ecmo_core::fixtures::{DEFAULT_PROBE_COUNT, DEFAULT_SHIFT_MARGIN, PROBE_SEED};
use ecmo_core::io::{parse_problem, ProblemRef};
use ecmo_core::{
    box_probes, get_fixture, shift_positive, EcmoProblem, Fixture, Preference, Schedule,
    SolverConfig, SolverKind,
};

use crate::{CliError, SolverArgs, SolverChoice};

pub struct Loaded {
    /// Objectives shifted to be positive on the probe set.
    pub problem: EcmoProblem,
    pub fixture: Option<Fixture>,
    pub z0: Vec<f64>,
    pub schedule: Schedule,
    pub source: ProblemRef,
}

pub fn load(args: &SolverArgs) -> Result<Loaded, CliError> {
    let (raw, fixture, default_z0, schedule, source) = match args.problem.strip_prefix("fixture:") {
        Some(name) => {
            let fx = get_fixture(name)?;
            let source = ProblemRef::from_fixture(&fx)?;
            (
                fx.ecmo()?,
                Some(fx.clone()),
                fx.z0.clone(),
                fx.schedule,
                source,
            )
        }
        None => {
            let bytes = fs::read(&args.problem).map_err(|e| {
                CliError::input(format!("problem: cannot read `{}`: {e}", args.problem))
            })?;
            let text = String::from_utf8(bytes.clone()).map_err(|_| {
                CliError::input(format!("problem: `{}` is not UTF-8", args.problem))
            })?;
            let problem = parse_problem(&text)?.to_problem()?;
            let z0 = vec![0.0; problem.dim()];
            (
                problem,
                None,
                z0,
                Schedule::default(),
                ProblemRef::from_bytes(args.problem.clone(), &bytes),
            )
        }
    };

    let z0 = match &args.z0 {
        Some(z) if z.len() != raw.dim() => {
            return Err(CliError::input(format!(
                "z0: expected {} values, got {}",
                raw.dim(),
                z.len()
            )));
        }
        Some(z) => z.clone(),
        None => default_z0,
    };
    let bbox: Vec<(f64, f64)> = match raw.bounding_box() {
        Some(bb) => bb.to_vec(),
        None => z0.iter().map(|z| (z - 1.0, z + 1.0)).collect(),
    };
    let probes = box_probes(&z0, &bbox, DEFAULT_PROBE_COUNT, PROBE_SEED);
    let problem = shift_positive(&raw, &probes, DEFAULT_SHIFT_MARGIN)?;

    let schedule = Schedule {
        c_eta: args.eta_c.unwrap_or(schedule.c_eta),
        c_uv: args.uv_c.unwrap_or(schedule.c_uv),
        ..schedule
    };
    Ok(Loaded {
        problem,
        fixture,
        z0,
        schedule,
        source,
    })
}

/// Parses a comma list; the linear-scalarization solver accepts zero weights.
pub fn parse_lambda(
    text: &str,
    allow_zero: bool,
    objectives: usize,
) -> Result<Preference, CliError> {
    let weights = text
        .split(',')
        .map(|w| {
            w.trim().parse::<f64>().map_err(|_| {
                CliError::input(format!("lambda: cannot parse `{}` as a number", w.trim()))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if weights.len() != objectives {
        return Err(CliError::input(format!(
            "lambda: expected {objectives} weights, got {}",
            weights.len()
        )));
    }
    let lambda = if allow_zero {
        Preference::new_nonnegative(weights)
    } else {
        Preference::new(weights)
    };
    Ok(lambda?)
}

pub fn solver_config(args: &SolverArgs, loaded: &Loaded) -> SolverConfig {
    let mut config = SolverConfig::new(
        args.iterations,
        loaded.schedule.params(args.iterations, args.seed),
        loaded.z0.clone(),
    );
    if let Some(every) = args.record_every {
        config.record_every = every;
    }
    config.stop_tol = args.stop_tol;
    config
}

pub fn solver_kind(args: &SolverArgs) -> SolverKind {
    match args.solver {
        SolverChoice::Wc => SolverKind::WcPenalty,
        SolverChoice::WcStoc => SolverKind::WcPenaltyStochastic {
            sigma_f: args.sigma_f,
            sigma_h: args.sigma_h,
        },
        SolverChoice::Ls => SolverKind::Ls,
    }
}
