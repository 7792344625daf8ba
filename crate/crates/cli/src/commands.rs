use std::fs;
use std::path::Path;

use ecmo_core::explorer::{PreferenceSet, RunStatus};
use ecmo_core::io::{
    environment_note, front_to_string, load_front_csv, save_json, trace_to_string, unix_timestamp,
    write_atomic, FrontMetrics, ManifestEntry, RunRecord, SweepManifest, EPSILON_DEFINITION,
};
use ecmo_core::pareto::default_reference_point;
use ecmo_core::solvers::SCHEMA_VERSION;
use ecmo_core::{
    epsilon_indicator, get_fixture, gradcheck as check_gradient, hypervolume, sweep_preferences,
};
use ecmo_core::{ParetoFront, SweepSpec};
use serde_json::json;

use crate::load::{load, parse_lambda, solver_config, solver_kind};
use crate::{BenchArgs, CliError, DisplayMode, GradcheckArgs, SolveArgs, SolverChoice, SweepArgs};

const GRAD_REL_TOL: f64 = 1e-6;
const GRAD_ABS_FLOOR: f64 = 1e-8;

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path)
        .map_err(|e| CliError::input(format!("out: cannot create `{}`: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(value).map_err(|e| CliError::input(format!("serializing output: {e}")))
}

fn inverse(f: &[f64]) -> Vec<f64> {
    f.iter().map(|x| 1.0 / x).collect()
}

pub fn solve(args: &SolveArgs, argv: &[String]) -> Result<(), CliError> {
    let common = &args.common;
    let loaded = load(common)?;
    let lambda = parse_lambda(
        &args.lambda,
        common.solver == SolverChoice::Ls,
        loaded.problem.num_objectives(),
    )?;
    let config = solver_config(common, &loaded);
    let result = solver_kind(common).solve(&loaded.problem, &lambda, &config)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }

    create_dir(&common.out)?;
    write_atomic(
        &common.out.join("trace.csv"),
        trace_to_string(&result.trace)?.as_bytes(),
    )?;
    let record = RunRecord::new(
        argv.to_vec(),
        json!({
            "args": args,
            "solver_config": config,
            "objective_shifts": loaded.problem.shifts(),
        }),
        loaded.source.clone(),
        to_json(&result)?,
    );
    save_json(&common.out.join("run.json"), &record)?;

    let f = loaded.problem.unshift(&result.final_f);
    println!("F = {f:?}");
    if common.display == DisplayMode::Inverse {
        println!("1/F = {:?}", inverse(&f));
    }
    println!("|h| = {:?}", result.final_constraint_norm);
    println!("avg_kkt_sq = {:?}", result.avg_kkt_sq);
    Ok(())
}

pub fn sweep(args: &SweepArgs, argv: &[String]) -> Result<(), CliError> {
    let common = &args.common;
    let loaded = load(common)?;
    let kind = solver_kind(common);
    let spec = SweepSpec {
        preferences: PreferenceSet::Grid {
            resolution: args.grid_resolution,
            floor: args.floor,
        },
        config: solver_config(common, &loaded),
        workers: args.workers,
        admission_tol: args.admission_tol,
    };
    let result = sweep_preferences(&loaded.problem, &spec, kind)?;

    let runs_dir = common.out.join("runs");
    create_dir(&runs_dir)?;
    let mut entries = Vec::with_capacity(result.per_lambda.len());
    for run in &result.per_lambda {
        let file = format!("runs/{}.json", run.run_id);
        let record = RunRecord::new(
            argv.to_vec(),
            json!({ "args": args, "lambda": run.lambda, "seed": run.seed }),
            loaded.source.clone(),
            to_json(run)?,
        );
        save_json(&common.out.join(&file), &record)?;
        entries.push(ManifestEntry {
            run_id: run.run_id.clone(),
            lambda: run.lambda.as_slice().to_vec(),
            seed: run.seed,
            status: run.status,
            error: run.error.clone(),
            record_file: Some(file),
        });
    }

    let front = &result.front;
    write_atomic(
        &common.out.join("front.csv"),
        front_to_string(front, common.display == DisplayMode::Inverse)?.as_bytes(),
    )?;
    let metrics = sweep_metrics(args, &loaded, front)?;
    save_json(&common.out.join("metrics.json"), &metrics)?;

    let manifest = SweepManifest {
        schema_version: SCHEMA_VERSION,
        timestamp: unix_timestamp(),
        command: argv.to_vec(),
        problem: loaded.source.clone(),
        spec,
        solver: kind,
        runs: entries,
        front_file: "front.csv".into(),
        metrics_file: "metrics.json".into(),
        environment: environment_note(),
    };
    save_json(&common.out.join("manifest.json"), &manifest)?;

    let count = |s: RunStatus| result.per_lambda.iter().filter(|r| r.status == s).count();
    println!(
        "{} preferences: {} admitted, {} infeasible, {} diverged, {} failed",
        result.per_lambda.len(),
        count(RunStatus::Ok),
        count(RunStatus::Infeasible),
        count(RunStatus::Diverged),
        count(RunStatus::Failed)
    );
    println!("front size = {}", front.len());
    if front.is_empty() {
        return Err(CliError::numerical(
            "no endpoint met the admission tolerance; the front is empty",
        ));
    }
    println!(
        "hv = {:?} at reference point {:?}",
        metrics.hv, metrics.ref_point
    );
    if let Some(eps) = metrics.epsilon {
        println!("epsilon = {eps:?}");
    }
    Ok(())
}

fn sweep_metrics(
    args: &SweepArgs,
    loaded: &crate::load::Loaded,
    front: &ParetoFront,
) -> Result<FrontMetrics, CliError> {
    let mut metrics = FrontMetrics {
        schema_version: SCHEMA_VERSION,
        front_size: front.len(),
        hv: 0.0,
        ref_point: Vec::new(),
        epsilon: None,
        reference_name: None,
        epsilon_definition: EPSILON_DEFINITION.into(),
    };
    if front.is_empty() {
        return Ok(metrics);
    }
    let ref_point = match &args.ref_point {
        Some(r) => r.clone(),
        None => default_reference_point(front).expect("front is non-empty"),
    };
    metrics.hv = hypervolume(front, &ref_point)?;
    metrics.ref_point = ref_point;
    if let Some(fx) = loaded
        .fixture
        .as_ref()
        .filter(|fx| fx.has_reference_front())
    {
        let density = args.grid_density.unwrap_or(fx.grid_density);
        let reference = fx.reference_front(density)?;
        metrics.epsilon = Some(epsilon_indicator(front, &reference)?);
        metrics.reference_name = Some(format!(
            "fixture:{} oracle, grid density {density}",
            fx.name
        ));
    }
    Ok(metrics)
}

pub fn bench(args: &BenchArgs) -> Result<(), CliError> {
    let fx = get_fixture(&args.fixture)?;
    let density = args.grid_density.unwrap_or(fx.grid_density);
    let reference = fx.reference_front(density)?;
    create_dir(&args.out)?;
    write_atomic(
        &args.out.join("reference_front.csv"),
        front_to_string(&reference, args.display == DisplayMode::Inverse)?.as_bytes(),
    )?;
    println!(
        "reference front: {} points at grid density {density}",
        reference.len()
    );

    let Some(path) = &args.front else {
        return Ok(());
    };
    let front = load_front_csv(path)?;
    if front.is_empty() {
        return Err(CliError::input(format!(
            "front: `{}` has no rows",
            path.display()
        )));
    }
    let both: Vec<Vec<f64>> = front
        .entries
        .iter()
        .chain(&reference.entries)
        .map(|e| e.f.clone())
        .collect();
    let ref_point =
        default_reference_point(&ParetoFront::from_objectives(both)).expect("non-empty");
    let epsilon = epsilon_indicator(&front, &reference)?;
    let hv_front = hypervolume(&front, &ref_point)?;
    let hv_reference = hypervolume(&reference, &ref_point)?;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "fixture": fx.name,
        "grid_density": density,
        "reference_size": reference.len(),
        "front_size": front.len(),
        "epsilon": epsilon,
        "epsilon_definition": EPSILON_DEFINITION,
        "ref_point": ref_point,
        "hv_front": hv_front,
        "hv_reference": hv_reference,
        "hv_ratio": hv_front / hv_reference,
    });
    save_json(&args.out.join("agreement.json"), &report)?;
    println!("epsilon = {epsilon:?}");
    println!("hv front / reference = {hv_front:?} / {hv_reference:?}");
    Ok(())
}

pub fn gradcheck(args: &GradcheckArgs) -> Result<(), CliError> {
    let fx = get_fixture(&args.fixture)?;
    let problem = fx.ecmo()?;
    let points = fx.probe_points(args.points, args.seed);
    let mut all_pass = true;
    for (label, functions) in [
        ("objective", problem.objectives()),
        ("constraint", problem.constraints()),
    ] {
        for (i, f) in functions.iter().enumerate() {
            if !f.is_smooth() {
                println!("{label} {}: skipped, not differentiable everywhere", i + 1);
                continue;
            }
            let (mut rel, mut abs, mut pass) = (0.0f64, 0.0f64, true);
            for z in &points {
                let report = check_gradient(f, z, args.step)?;
                rel = rel.max(report.max_rel_err);
                abs = abs.max(report.max_abs_err);
                pass &= report.passes(GRAD_REL_TOL, GRAD_ABS_FLOOR);
            }
            all_pass &= pass;
            let verdict = if pass { "ok" } else { "FAIL" };
            println!(
                "{label} {}: max_rel_err {rel:e} max_abs_err {abs:e} {verdict}",
                i + 1
            );
        }
    }
    if all_pass {
        Ok(())
    } else {
        Err(CliError::input(format!(
            "gradient check failed: tolerance {GRAD_REL_TOL:e} relative, {GRAD_ABS_FLOOR:e} absolute"
        )))
    }
}
