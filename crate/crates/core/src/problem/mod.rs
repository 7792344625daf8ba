//! Problem definitions: scalar functions with analytic gradients, equality-constrained
//! multi-objective problems, and the bilevel-to-constrained reduction.

mod function;
mod gradcheck;
mod stochastic;

pub use function::{MonomialFunction, NativeFunction, ScalarFunction, Term};
pub use gradcheck::{gradcheck, CoordinateError, GradCheckReport, DEFAULT_FD_STEP};
pub use stochastic::StochasticProblem;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{EcmoError, Result};

/// Minimize `F(z) = (f_1(z), ..., f_S(z))` subject to `h_i(z) = 0`.
#[derive(Debug, Clone)]
pub struct EcmoProblem {
    name: String,
    dim: usize,
    objectives: Vec<ScalarFunction>,
    constraints: Vec<ScalarFunction>,
    bounding_box: Option<Vec<(f64, f64)>>,
    shifts: Vec<f64>,
}

/// Objective and constraint values plus Jacobians at one point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub f: Vec<f64>,
    /// `S x k`, row `s` is the gradient of `f_s`.
    pub jf: DMatrix<f64>,
    pub h: Vec<f64>,
    /// `q x k`, row `i` is the gradient of `h_i`.
    pub jh: DMatrix<f64>,
}

fn jacobian(functions: &[ScalarFunction], z: &[f64]) -> DMatrix<f64> {
    let k = z.len();
    let mut jac = DMatrix::zeros(functions.len(), k);
    for (r, f) in functions.iter().enumerate() {
        for (c, g) in f.gradient(z).into_iter().enumerate() {
            jac[(r, c)] = g;
        }
    }
    jac
}

impl EcmoProblem {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        objectives: Vec<ScalarFunction>,
        constraints: Vec<ScalarFunction>,
    ) -> Result<Self> {
        if objectives.is_empty() {
            return Err(EcmoError::input("a problem needs at least one objective"));
        }
        for f in objectives.iter().chain(&constraints) {
            EcmoError::check_dim("problem member function", dim, f.dim())?;
        }
        let shifts = vec![0.0; objectives.len()];
        Ok(EcmoProblem {
            name: name.into(),
            dim,
            objectives,
            constraints,
            bounding_box: None,
            shifts,
        })
    }

    pub fn with_bounding_box(mut self, bbox: Vec<(f64, f64)>) -> Result<Self> {
        EcmoError::check_dim("bounding box", self.dim, bbox.len())?;
        if bbox.iter().any(|(lo, hi)| !(lo <= hi)) {
            return Err(EcmoError::input(
                "bounding box needs lo <= hi in every coordinate",
            ));
        }
        self.bounding_box = Some(bbox);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_objectives(&self) -> usize {
        self.objectives.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objectives(&self) -> &[ScalarFunction] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[ScalarFunction] {
        &self.constraints
    }

    pub fn bounding_box(&self) -> Option<&[(f64, f64)]> {
        self.bounding_box.as_deref()
    }

    /// Constants added to each objective by [`shift_positive`].
    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    /// Maps shifted objective values back to the original scale.
    pub fn unshift(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(&self.shifts).map(|(v, c)| v - c).collect()
    }

    fn check_point(&self, z: &[f64]) -> Result<()> {
        EcmoError::check_dim("decision vector", self.dim, z.len())
    }

    pub fn eval_objectives(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_point(z)?;
        Ok(self.objectives.iter().map(|f| f.value(z)).collect())
    }

    pub fn eval_objective_jacobian(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(z)?;
        Ok(jacobian(&self.objectives, z))
    }

    pub fn eval_constraints(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_point(z)?;
        Ok(self.constraints.iter().map(|h| h.value(z)).collect())
    }

    pub fn eval_constraint_jacobian(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(z)?;
        Ok(jacobian(&self.constraints, z))
    }

    /// All values and Jacobians in one pass.
    pub fn evaluate(&self, z: &[f64]) -> Result<Evaluation> {
        self.check_point(z)?;
        Ok(Evaluation {
            f: self.objectives.iter().map(|f| f.value(z)).collect(),
            jf: jacobian(&self.objectives, z),
            h: self.constraints.iter().map(|h| h.value(z)).collect(),
            jh: jacobian(&self.constraints, z),
        })
    }

    pub fn constraint_norm(&self, z: &[f64]) -> Result<f64> {
        Ok(self
            .eval_constraints(z)?
            .iter()
            .map(|h| h * h)
            .sum::<f64>()
            .sqrt())
    }

    /// True when every constraint is a polynomial of degree at most one.
    pub fn has_affine_constraints(&self) -> bool {
        self.constraints
            .iter()
            .all(|h| h.as_monomial().is_some_and(|m| m.degree() <= 1))
    }

    /// Polynomial objectives and constraints only; native fixtures have no file form.
    pub fn is_polynomial(&self) -> bool {
        self.objectives
            .iter()
            .chain(&self.constraints)
            .all(|f| f.as_monomial().is_some())
    }
}

/// Upper-level vector objective over `(x, y)` with `y` constrained to minimize `g(x, .)`.
#[derive(Debug, Clone)]
pub struct MtblProblem {
    pub name: String,
    pub upper_objectives: Vec<ScalarFunction>,
    pub lower_objective: ScalarFunction,
    /// Dimension of `x`.
    pub p: usize,
    /// Dimension of `y`.
    pub q: usize,
}

impl MtblProblem {
    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// Replaces the lower-level argmin by its stationarity condition
    /// `h_i(x, y) = dg/dy_i (x, y) = 0`.
    pub fn to_ecmo(&self) -> Result<EcmoProblem> {
        let k = self.dim();
        EcmoError::check_dim("lower-level objective", k, self.lower_objective.dim())?;
        let constraints = (0..self.q)
            .map(|i| self.lower_objective.partial(self.p + i))
            .collect::<Result<Vec<_>>>()?;
        EcmoProblem::new(
            self.name.clone(),
            k,
            self.upper_objectives.clone(),
            constraints,
        )
    }
}

/// Free-function form of [`MtblProblem::to_ecmo`].
pub fn mtbl_to_ecmo(mtbl: &MtblProblem) -> Result<EcmoProblem> {
    mtbl.to_ecmo()
}

/// `start` followed by `count` uniform samples from `bounding_box`.
pub fn box_probes(
    start: &[f64],
    bounding_box: &[(f64, f64)],
    count: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = vec![start.to_vec()];
    for _ in 0..count {
        probes.push(
            bounding_box
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..=hi))
                .collect(),
        );
    }
    probes
}

/// Adds `c_s = max(0, margin - min_probe f_s)` to each objective so that all
/// objectives are at least `margin` on the probe set. Applied shifts accumulate
/// in [`EcmoProblem::shifts`].
pub fn shift_positive(
    problem: &EcmoProblem,
    probes: &[Vec<f64>],
    margin: f64,
) -> Result<EcmoProblem> {
    if probes.is_empty() {
        return Err(EcmoError::input(
            "shift_positive needs at least one probe point",
        ));
    }
    if !(margin > 0.0) {
        return Err(EcmoError::input("shift margin must be positive"));
    }
    let s_count = problem.num_objectives();
    let mut mins = vec![f64::INFINITY; s_count];
    for z in probes {
        for (m, v) in mins.iter_mut().zip(problem.eval_objectives(z)?) {
            if !v.is_finite() {
                return Err(EcmoError::NonFinite {
                    context: "objective at probe point",
                    index: 0,
                });
            }
            *m = m.min(v);
        }
    }
    let mut out = problem.clone();
    for (s, m) in mins.iter().enumerate() {
        let c = (margin - m).max(0.0);
        out.objectives[s] = problem.objectives[s].add_constant(c);
        out.shifts[s] += c;
    }
    Ok(out)
}
