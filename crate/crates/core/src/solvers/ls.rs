use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{KktStats, SolveResult, SolverConfig, TraceRecord, SCHEMA_VERSION};
use crate::error::{EcmoError, Result};
use crate::kkt::{check_lambda, ls_kkt_sq, Preference};
use crate::penalty::PenaltyState;
use crate::problem::EcmoProblem;

const RANK_TOL: f64 = 1e-10;
const FEASIBILITY_TOL: f64 = 1e-10;

/// Euclidean projection onto `{z : Az = b}` for full-row-rank `A`.
#[derive(Debug, Clone)]
pub struct AffineProjector {
    a: DMatrix<f64>,
    b: DVector<f64>,
    /// `(A A^T)^{-1}`
    gram_inv: DMatrix<f64>,
}

impl AffineProjector {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let (q, k) = a.shape();
        EcmoError::check_dim("affine right-hand side", q, b.len())?;
        if q > k {
            return Err(EcmoError::input(format!(
                "constraint matrix is rank deficient: {q} rows exceed dimension {k}"
            )));
        }
        if q == 0 {
            return Ok(AffineProjector {
                a,
                b,
                gram_inv: DMatrix::zeros(0, 0),
            });
        }
        let sv = a.clone().singular_values();
        let max = sv.max();
        let min = sv.min();
        if !(max > 0.0) || min <= RANK_TOL * max {
            return Err(EcmoError::input(format!(
                "constraint matrix is rank deficient (singular values {min:e} .. {max:e})"
            )));
        }
        let gram = &a * a.transpose();
        let gram_inv = gram
            .cholesky()
            .ok_or_else(|| EcmoError::input("constraint matrix is rank deficient"))?
            .inverse();
        Ok(AffineProjector { a, b, gram_inv })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    pub(crate) fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    pub fn residual(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.a * z - &self.b
    }

    /// `w - A^T (A A^T)^{-1} (A w - b)`, with one refinement pass.
    pub fn project(&self, w: &DVector<f64>) -> DVector<f64> {
        if self.a.nrows() == 0 {
            return w.clone();
        }
        let mut z = w.clone();
        for _ in 0..2 {
            let r = self.residual(&z);
            z -= self.a.tr_mul(&(&self.gram_inv * r));
        }
        z
    }
}

/// `argmin_{Az = b} |z - w|`.
pub fn project_affine(a: &DMatrix<f64>, b: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    EcmoError::check_dim("projection point", a.ncols(), w.len())?;
    let proj = AffineProjector::new(a.clone(), DVector::from_column_slice(b))?;
    Ok(proj
        .project(&DVector::from_column_slice(w))
        .iter()
        .copied()
        .collect())
}

/// Reads `A z = b` off degree-one polynomial constraints.
fn affine_system(problem: &EcmoProblem) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if !problem.has_affine_constraints() {
        return Err(EcmoError::input(
            "constraints must be affine for the linear-scalarization solver",
        ));
    }
    let (q, k) = (problem.num_constraints(), problem.dim());
    let mut a = DMatrix::zeros(q, k);
    let mut b = DVector::zeros(q);
    for (i, h) in problem.constraints().iter().enumerate() {
        let m = h.as_monomial().expect("checked affine");
        for term in m.terms() {
            match term.exponents.iter().position(|&p| p == 1) {
                Some(j) => a[(i, j)] += term.coeff,
                None => b[i] -= term.coeff,
            }
        }
    }
    Ok((a, b))
}

fn weighted_gradient(problem: &EcmoProblem, lambda: &[f64], z: &[f64]) -> DVector<f64> {
    let mut g = DVector::zeros(z.len());
    for (f, &l) in problem.objectives().iter().zip(lambda) {
        if l != 0.0 {
            g += DVector::from_vec(f.gradient(z)) * l;
        }
    }
    g
}

fn weighted_value(problem: &EcmoProblem, lambda: &[f64], z: &[f64]) -> f64 {
    problem
        .objectives()
        .iter()
        .zip(lambda)
        .filter(|(_, &l)| l != 0.0)
        .map(|(f, l)| l * f.value(z))
        .sum()
}

/// Largest eigenvalue magnitude of the constant Hessian of `sum lambda_s f_s`
/// for objectives of degree at most two.
pub(crate) fn estimate_lipschitz(problem: &EcmoProblem, lambda: &[f64]) -> Result<f64> {
    let k = problem.dim();
    let mut hess = DMatrix::zeros(k, k);
    for (f, &l) in problem.objectives().iter().zip(lambda) {
        let m = f.as_monomial().filter(|m| m.degree() <= 2).ok_or_else(|| {
            EcmoError::input(
                "cannot estimate L for non-quadratic objectives; supply a Lipschitz constant",
            )
        })?;
        let h = m.hessian(&vec![0.0; k]);
        for i in 0..k {
            for j in 0..k {
                hess[(i, j)] += l * h[i][j];
            }
        }
    }
    Ok(power_iteration(&hess, 1e-8, 10_000))
}

fn power_iteration(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let n = m.nrows();
    let mut x = DVector::from_iterator(n, (0..n).map(|i| 1.0 + 0.1 * i as f64));
    x /= x.norm();
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let y = m * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        x = y / norm;
        if (norm - estimate).abs() <= tol * norm {
            return norm;
        }
        estimate = norm;
    }
    estimate
}

/// Sampled midpoint-convexity test over random segments in `bbox`.
fn midpoint_convexity_violations(
    problem: &EcmoProblem,
    bbox: &[(f64, f64)],
    seed: u64,
) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for (s, f) in problem.objectives().iter().enumerate() {
        for _ in 0..100 {
            let a: Vec<f64> = bbox
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..=hi))
                .collect();
            let b: Vec<f64> = bbox
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..=hi))
                .collect();
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let (fa, fb, fm) = (f.value(&a), f.value(&b), f.value(&mid));
            let slack = 1e-9 * (1.0 + fa.abs() + fb.abs());
            if fm > 0.5 * (fa + fb) + slack {
                bad.push(s);
                break;
            }
        }
    }
    bad
}

/// Projected gradient descent on `L(z) = sum lambda_s f_s(z)` over `Az = b` with
/// step `1/L`.
pub fn solve_ls(
    problem: &EcmoProblem,
    lambda: &Preference,
    config: &SolverConfig,
) -> Result<SolveResult> {
    config.validate()?;
    check_lambda(problem, lambda)?;
    EcmoError::check_dim("initial point", problem.dim(), config.z0.len())?;
    let lam = lambda.as_slice();
    let (a, b) = affine_system(problem)?;
    let projector = AffineProjector::new(a, b)?;
    let mut warnings = Vec::new();

    let lipschitz = match config.lipschitz {
        Some(l) => l,
        None => estimate_lipschitz(problem, lam)?,
    };
    if !(lipschitz > 0.0) {
        return Err(EcmoError::input(
            "estimated Lipschitz constant is zero; supply one explicitly",
        ));
    }

    let bbox: Vec<(f64, f64)> = match problem.bounding_box() {
        Some(bb) => bb.to_vec(),
        None => config.z0.iter().map(|z| (z - 1.0, z + 1.0)).collect(),
    };
    let nonconvex = midpoint_convexity_violations(problem, &bbox, config.params.seed);
    if !nonconvex.is_empty() {
        warnings.push(format!(
            "objectives {nonconvex:?} failed a sampled midpoint convexity test; the rate guarantee may not hold"
        ));
    }

    let mut z = DVector::from_column_slice(&config.z0);
    if projector.residual(&z).norm() > FEASIBILITY_TOL {
        z = projector.project(&z);
        warnings.push(
            "initial point was infeasible and has been projected onto the constraints".into(),
        );
    }

    let eta = 1.0 / lipschitz;
    let mut stats = KktStats::default();
    let mut trace = Vec::new();
    let mut truncated = false;
    let mut iterations_run = config.iterations;
    let record =
        |t: usize, z: &DVector<f64>, grad: &DVector<f64>, trace: &mut Vec<TraceRecord>| -> f64 {
            let zs = z.as_slice();
            let r = projector.residual(z);
            let kkt_sq = ls_kkt_sq(grad, projector.matrix(), r.as_slice(), projector.gram_inv());
            let value = weighted_value(problem, lam, zs);
            if t.is_multiple_of(config.record_every) {
                let primal = r.norm();
                trace.push(TraceRecord {
                    iter: t,
                    penalty: value,
                    kkt_sq,
                    kkt_rho: 0.0,
                    kkt_z_norm: (kkt_sq - primal * primal).max(0.0).sqrt(),
                    kkt_primal_norm: primal,
                    kkt_slack_norm: 0.0,
                    rho: value,
                    h_norm: primal,
                    delta_violation: 0.0,
                });
            }
            kkt_sq
        };

    for t in 0..config.iterations {
        let grad = weighted_gradient(problem, lam, z.as_slice());
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(EcmoError::Diverged {
                iteration: t,
                last_state: Box::new(ls_state(problem, lam, z.as_slice())?),
            });
        }
        let kkt_sq = record(t, &z, &grad, &mut trace);
        stats.push(kkt_sq);
        if config.stop_tol.is_some_and(|tol| kkt_sq <= tol) {
            truncated = true;
            iterations_run = t;
            break;
        }
        z = projector.project(&(&z - grad * eta));
    }
    if !truncated && config.iterations.is_multiple_of(config.record_every) {
        let grad = weighted_gradient(problem, lam, z.as_slice());
        record(config.iterations, &z, &grad, &mut trace);
    }

    let zs: Vec<f64> = z.iter().copied().collect();
    let final_f = problem.eval_objectives(&zs)?;
    let final_constraint_norm = problem.constraint_norm(&zs)?;
    let mut echo = config.clone();
    echo.lipschitz = Some(lipschitz);
    Ok(SolveResult {
        schema_version: SCHEMA_VERSION,
        solver: "ls".into(),
        lambda: lam.to_vec(),
        final_state: ls_state(problem, lam, &zs)?,
        final_f,
        final_constraint_norm,
        avg_kkt_sq: stats.mean(),
        min_kkt_sq: stats.min(),
        iterations_run,
        truncated,
        trace,
        config: echo,
        seed: None,
        warnings,
    })
}

/// Presents a decision point as a tight WC state for uniform reporting.
fn ls_state(problem: &EcmoProblem, lambda: &[f64], z: &[f64]) -> Result<PenaltyState> {
    let f = problem.eval_objectives(z)?;
    let weighted: Vec<f64> = f.iter().zip(lambda).map(|(f, l)| f * l).collect();
    let rho = weighted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PenaltyState {
        rho,
        z: z.to_vec(),
        delta: weighted.iter().map(|w| rho - w).collect(),
    })
}
