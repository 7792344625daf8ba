use ecmo_core::explorer::{derive_seed, RunStatus};
use ecmo_core::fixtures::FixtureProblem;
use ecmo_core::penalty::{initial_state, Schedule};
use ecmo_core::solvers::{project_affine, solve_wc_penalty_observed, StepInfo};
use ecmo_core::{
    dominates, get_fixture, simplex_grid, solve_ls, solve_wc_penalty, sweep_preferences, EcmoError,
    ParetoFront, Preference, SolverConfig, SolverKind, SweepSpec,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};

fn config(fixture: &ecmo_core::Fixture, t: usize) -> SolverConfig {
    SolverConfig::new(t, fixture.schedule.params(t, 0), fixture.z0.clone()).with_record_every(t)
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn cramer3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> [f64; 3] {
    let d = det3(m);
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for r in 0..3 {
            mk[r][k] = rhs[r];
        }
        *o = det3(mk) / d;
    }
    out
}

/// Exact nearest-neighbour Hausdorff distance; both fronts sorted by the first objective.
fn hausdorff(a: &ParetoFront, b: &ParetoFront) -> f64 {
    fn sorted(f: &ParetoFront) -> Vec<Vec<f64>> {
        let mut v: Vec<Vec<f64>> = f.entries.iter().map(|e| e.f.clone()).collect();
        v.sort_by(|x, y| x[0].total_cmp(&y[0]));
        v
    }
    fn one_way(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for p in a {
            let start = b.partition_point(|q| q[0] < p[0]);
            let mut best = f64::INFINITY;
            let dist = |q: &Vec<f64>| {
                q.iter()
                    .zip(p)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt()
            };
            for q in &b[start..] {
                if q[0] - p[0] > best {
                    break;
                }
                best = best.min(dist(q));
            }
            for q in b[..start].iter().rev() {
                if p[0] - q[0] > best {
                    break;
                }
                best = best.min(dist(q));
            }
            worst = worst.max(best);
        }
        worst
    }
    let (a, b) = (sorted(a), sorted(b));
    one_way(&a, &b).max(one_way(&b, &a))
}

#[test]
fn gebken_balanced_preference_reaches_the_circle() {
    let fx = get_fixture("gebken_circle").unwrap();
    let p = fx.prepared().unwrap();
    let lam = Preference::new(vec![0.5, 0.5]).unwrap();
    let res = solve_wc_penalty(&p, &lam, &config(&fx, 20_000)).unwrap();
    assert!(
        res.final_constraint_norm <= 1e-3,
        "{}",
        res.final_constraint_norm
    );
    let f = p.unshift(&res.final_f);
    assert!(
        (f[0] - 2.0).abs() <= 1e-2 && (f[1] - 2.0).abs() <= 1e-2,
        "{f:?}"
    );
}

#[test]
fn iterates_keep_slacks_inside_the_recurrence_bound() {
    for name in [
        "gebken_circle",
        "quad_affine",
        "forum_llgc",
        "toy_data_weighting",
    ] {
        let fx = get_fixture(name).unwrap();
        let p = fx.prepared().unwrap();
        for w in [0.1, 0.5, 0.9] {
            let lam = Preference::new(vec![w, 1.0 - w]).unwrap();
            let rho0 = initial_state(&p, &lam, &fx.z0).unwrap().rho;
            let mut checked = 0usize;
            solve_wc_penalty_observed(&p, &lam, &config(&fx, 3000), &mut |s: &StepInfo| {
                assert!(s.after.rho.is_finite() && s.after.z.iter().all(|z| z.is_finite()));
                for (before, after) in s.before.delta.iter().zip(&s.after.delta) {
                    assert!(
                        *after >= 0.0,
                        "{name} {w}: negative slack at {}",
                        s.iteration
                    );
                    assert!(
                        *after <= before + s.eta * s.v * rho0 + 1e-12,
                        "{name} {w}: slack jumped at {}",
                        s.iteration
                    );
                }
                checked += 1;
            })
            .unwrap();
            assert_eq!(checked, 3000);
        }
    }
}

#[test]
fn repeated_solves_serialize_identically() {
    let fx = get_fixture("forum_llgc").unwrap();
    let p = fx.prepared().unwrap();
    let lam = Preference::new(vec![0.3, 0.7]).unwrap();
    let cfg = config(&fx, 2000).with_record_every(50);
    let a = serde_json::to_string(&solve_wc_penalty(&p, &lam, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&solve_wc_penalty(&p, &lam, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn trace_records_are_ordered_and_consistent() {
    let fx = get_fixture("quad_affine").unwrap();
    let p = fx.prepared().unwrap();
    let lam = Preference::new(vec![0.4, 0.6]).unwrap();
    let res = solve_wc_penalty(&p, &lam, &config(&fx, 1000).with_record_every(100)).unwrap();
    assert!(res.trace.windows(2).all(|w| w[0].iter < w[1].iter));
    assert!(res.min_kkt_sq <= res.avg_kkt_sq && res.min_kkt_sq >= 0.0);
    for r in &res.trace {
        assert!(r.kkt_sq >= 0.0 && r.h_norm >= 0.0 && r.delta_violation >= 0.0);
    }
}

#[test]
fn ls_with_a_vertex_preference_finds_the_constrained_minimizer_of_one_objective() {
    // f1 on the line z2 = z1 / 2 - 0.1 is 2 z1^2 - 0.4 z1 + 0.04, minimized at z1 = 0.1
    let fx = get_fixture("quad_affine").unwrap();
    let p = fx.ecmo().unwrap();
    let lam = Preference::new_nonnegative(vec![1.0, 0.0]).unwrap();
    let res = solve_ls(&p, &lam, &config(&fx, 5000)).unwrap();
    let z = &res.final_state.z;
    assert!(
        (z[0] - 0.1).abs() <= 1e-8 && (z[1] + 0.05).abs() <= 1e-8,
        "{z:?}"
    );
}

#[test]
fn affine_projection_matches_the_normal_equations() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let a: Vec<f64> = (0..10).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
        let got = project_affine(&DMatrix::from_row_slice(2, 5, &a), &b, &w).unwrap();

        // w - A^T mu with (A A^T) mu = A w - b, solved by Cramer's rule
        let row = |i: usize| &a[5 * i..5 * i + 5];
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let g = [
            [dot(row(0), row(0)), dot(row(0), row(1))],
            [dot(row(1), row(0)), dot(row(1), row(1))],
        ];
        let r = [dot(row(0), &w) - b[0], dot(row(1), &w) - b[1]];
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let mu = [
            (r[0] * g[1][1] - g[0][1] * r[1]) / det,
            (g[0][0] * r[1] - g[1][0] * r[0]) / det,
        ];
        for j in 0..5 {
            let want = w[j] - mu[0] * row(0)[j] - mu[1] * row(1)[j];
            assert!(
                (got[j] - want).abs() <= 1e-10 * (1.0 + want.abs()),
                "{got:?}"
            );
        }
    }
}

#[test]
fn sweeps_do_not_depend_on_order_or_worker_count() {
    let fx = get_fixture("quad_affine").unwrap();
    let p = fx.prepared().unwrap();
    let prefs = simplex_grid(2, 6, 0.01).unwrap();
    let solver = SolverKind::WcPenaltyStochastic {
        sigma_f: 0.05,
        sigma_h: 0.05,
    };
    let mut cfg = config(&fx, 1500);
    cfg.params.seed = 99;

    let mut forward = SweepSpec::explicit(prefs.clone(), cfg.clone());
    forward.workers = 1;
    let mut backward = SweepSpec::explicit(prefs.iter().rev().cloned().collect(), cfg.clone());
    backward.workers = 4;
    let a = sweep_preferences(&p, &forward, solver).unwrap();
    let b = sweep_preferences(&p, &backward, solver).unwrap();

    let key = |r: &ecmo_core::SweepResult| {
        let mut v: Vec<(Vec<f64>, Vec<f64>)> = r
            .per_lambda
            .iter()
            .map(|x| (x.lambda.as_slice().to_vec(), x.final_f.clone().unwrap()))
            .collect();
        v.sort_by(|x, y| x.0[0].total_cmp(&y.0[0]));
        v
    };
    assert_eq!(key(&a), key(&b));
    let mut fa: Vec<Vec<f64>> = a.front.entries.iter().map(|e| e.f.clone()).collect();
    let mut fb: Vec<Vec<f64>> = b.front.entries.iter().map(|e| e.f.clone()).collect();
    fa.sort_by(|x, y| x[0].total_cmp(&y[0]));
    fb.sort_by(|x, y| x[0].total_cmp(&y[0]));
    assert_eq!(fa, fb);

    // any entry can be re-solved on its own
    let entry = &a.per_lambda[3];
    let mut single = cfg.clone();
    single.params.seed = derive_seed(99, &entry.lambda);
    assert_eq!(entry.seed, single.params.seed);
    let again = solver.solve(&p, &entry.lambda, &single).unwrap();
    assert_eq!(
        again.final_state.z,
        entry.result.as_ref().unwrap().final_state.z
    );
}

#[test]
fn single_preference_sweep_returns_that_endpoint() {
    let fx = get_fixture("quad_affine").unwrap();
    let p = fx.prepared().unwrap();
    let lam = Preference::new(vec![0.5, 0.5]).unwrap();
    let cfg = config(&fx, 3000);
    let mut spec = SweepSpec::explicit(vec![lam.clone()], cfg.clone());
    spec.admission_tol = 0.1;
    let sweep = sweep_preferences(&p, &spec, SolverKind::WcPenalty).unwrap();
    let direct = solve_wc_penalty(&p, &lam, &cfg).unwrap();
    assert_eq!(sweep.per_lambda.len(), 1);
    assert_eq!(sweep.front.len(), 1);
    assert_eq!(sweep.front.entries[0].f, p.unshift(&direct.final_f));
    assert_eq!(sweep.front.entries[0].z, direct.final_state.z);
}

#[test]
fn infeasible_endpoints_are_reported_but_not_admitted() {
    let fx = get_fixture("quad_affine").unwrap();
    let p = fx.prepared().unwrap();
    let mut spec = SweepSpec::grid(3, 0.01, config(&fx, 20));
    spec.admission_tol = 1e-12;
    let r = sweep_preferences(&p, &spec, SolverKind::WcPenalty).unwrap();
    assert_eq!(r.per_lambda.len(), 4);
    assert!(r
        .per_lambda
        .iter()
        .all(|x| x.status == RunStatus::Infeasible && x.final_f.is_some()));
    assert!(r.front.is_empty());
    assert_eq!(r.failures(), 0);
}

#[test]
fn a_sweep_where_every_run_diverges_is_an_error() {
    let fx = get_fixture("unbounded_guard").unwrap();
    let p = fx.ecmo().unwrap();
    let t = 500;
    let cfg = SolverConfig::new(t, Schedule::new(5.0, 5.0).params(t, 0), fx.z0.clone());
    let err =
        sweep_preferences(&p, &SweepSpec::grid(2, 0.01, cfg), SolverKind::WcPenalty).unwrap_err();
    assert!(matches!(err, EcmoError::Diverged { .. }), "{err}");
}

#[test]
fn simplex_grid_points_sum_to_one_and_respect_the_floor() {
    for (s, res) in [(2usize, 25usize), (3, 7), (4, 4)] {
        let grid = simplex_grid(s, res, 0.02).unwrap();
        // number of compositions of res into s parts
        let expected = (1..s).fold(1usize, |acc, k| acc * (res + k) / k);
        assert_eq!(grid.len(), expected);
        for p in &grid {
            assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(p.as_slice().iter().all(|&w| w >= 0.02 - 1e-15));
        }
    }
}

#[test]
fn oracle_fronts_are_nondominated_and_stable_under_refinement() {
    for name in [
        "gebken_circle",
        "quad_affine",
        "forum_llgc",
        "toy_data_weighting",
    ] {
        let fx = get_fixture(name).unwrap();
        let d = fx.grid_density;
        let coarse = fx.reference_front(d).unwrap();
        let fine = fx.reference_front(2 * d).unwrap();
        let mut sorted: Vec<&[f64]> = coarse.entries.iter().map(|e| e.f.as_slice()).collect();
        sorted.sort_by(|x, y| x[0].total_cmp(&y[0]));
        // for two objectives, non-dominance means f2 strictly decreases along f1
        assert!(
            sorted
                .windows(2)
                .all(|w| w[0][0] < w[1][0] && w[0][1] > w[1][1]),
            "{name}"
        );
        assert!(!coarse
            .entries
            .iter()
            .zip(coarse.entries.iter().skip(1))
            .any(|(a, b)| dominates(&a.f, &b.f)));
        let h = hausdorff(&coarse, &fine);
        assert!(h <= 1e-3, "{name}: hausdorff {h}");
    }
}

#[test]
fn gebken_front_ends_at_the_tangency_points() {
    let fx = get_fixture("gebken_circle").unwrap();
    let front = fx.reference_front(fx.grid_density).unwrap();
    let p = fx.ecmo().unwrap();
    let r5 = 5f64.sqrt();
    let mut by_f1: Vec<&[f64]> = front.entries.iter().map(|e| e.f.as_slice()).collect();
    by_f1.sort_by(|x, y| x[0].total_cmp(&y[0]));
    let upper = p.eval_objectives(&[2.0 / r5, 1.0 / r5]).unwrap();
    let lower = p.eval_objectives(&[2.0 / r5, -1.0 / r5]).unwrap();
    let (first, last) = (by_f1[0], by_f1[by_f1.len() - 1]);
    for (got, want) in [(first, &upper), (last, &lower)] {
        assert!(
            got.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-4),
            "{got:?} vs {want:?}"
        );
    }
}

#[test]
fn forum_front_spans_the_analytic_curve() {
    let fx = get_fixture("forum_llgc").unwrap();
    let front = fx.reference_front(fx.grid_density).unwrap();
    for e in &front.entries {
        let x = e.z[0];
        assert!((1.0 - 1e-12..=2.0 + 1e-12).contains(&x), "{x}");
        assert_eq!(&e.z[1..], &[x, x, 0.0]);
        assert!(
            (e.f[0] - (x - 1.0).powi(2)).abs() <= 1e-12
                && (e.f[1] - (x - 2.0).powi(2)).abs() <= 1e-12
        );
    }
    let lo = front
        .entries
        .iter()
        .map(|e| e.f[0])
        .fold(f64::INFINITY, f64::min);
    let hi = front
        .entries
        .iter()
        .map(|e| e.f[0])
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(lo <= 1e-6 && (hi - 1.0).abs() <= 1e-3, "{lo} {hi}");
}

#[test]
fn quad_affine_balanced_optimum_lies_on_the_oracle_front() {
    let fx = get_fixture("quad_affine").unwrap();
    let p = fx.prepared().unwrap();
    let lam = Preference::new(vec![0.5, 0.5]).unwrap();
    let t = 100_000;
    let cfg = SolverConfig::new(t, Schedule::new(0.005, 4.0).params(t, 0), fx.z0.clone())
        .with_record_every(t);
    let res = solve_wc_penalty(&p, &lam, &cfg).unwrap();
    assert!(
        res.final_constraint_norm <= 1e-2,
        "{}",
        res.final_constraint_norm
    );
    let f = p.unshift(&res.final_f);
    let front = fx.reference_front(fx.grid_density).unwrap();
    // not dominated by any oracle point beyond the solver tolerance
    let slack = 2e-2;
    assert!(
        !front
            .entries
            .iter()
            .any(|e| e.f.iter().zip(&f).all(|(a, b)| a + slack < *b)),
        "{f:?} is dominated"
    );
    let nearest = front
        .entries
        .iter()
        .map(|e| {
            e.f.iter()
                .zip(&f)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(nearest <= slack, "{nearest}");
}

#[test]
fn toy_constraints_vanish_at_the_weighted_normal_equation_solution() {
    let fx = get_fixture("toy_data_weighting").unwrap();
    let FixtureProblem::Mtbl(mtbl) = &fx.problem else {
        panic!("expected a bilevel fixture")
    };
    let g = &mtbl.lower_objective;
    let p = fx.ecmo().unwrap();
    for x in [[0.0, 0.0], [1.5, -0.5], [-3.0, 2.0], [8.0, -8.0]] {
        // recover the quadratic g(x, .) from evaluations and solve H y = -b
        let at = |y: [f64; 3]| g.value(&[x[0], x[1], y[0], y[1], y[2]]);
        let c = at([0.0; 3]);
        let e = |i: usize, s: f64| {
            let mut y = [0.0; 3];
            y[i] = s;
            y
        };
        let mut h = [[0.0; 3]; 3];
        let mut b = [0.0; 3];
        for i in 0..3 {
            b[i] = -(at(e(i, 1.0)) - at(e(i, -1.0))) / 2.0;
            h[i][i] = at(e(i, 1.0)) + at(e(i, -1.0)) - 2.0 * c;
            for j in 0..i {
                let mut y = e(i, 1.0);
                y[j] = 1.0;
                h[i][j] = at(y) - at(e(i, 1.0)) - at(e(j, 1.0)) + c;
                h[j][i] = h[i][j];
            }
        }
        let y = cramer3(h, b);
        let z = [x[0], x[1], y[0], y[1], y[2]];
        let hz = p.eval_constraints(&z).unwrap();
        assert!(hz.iter().all(|v| v.abs() <= 1e-8), "{x:?}: {hz:?}");
        let lib = fx.lower_level_solution(&x).unwrap();
        assert!(
            lib.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-8),
            "{lib:?} vs {y:?}"
        );
    }
}
