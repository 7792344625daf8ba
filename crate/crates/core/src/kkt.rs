//! The KKT-system residual of the weighted-Chebyshev scalarization, used as the
//! convergence metric, plus the naive stacked stationarity system it replaces.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{EcmoError, Result};
use crate::problem::{EcmoProblem, Evaluation};

const SIMPLEX_TOL: f64 = 1e-12;

/// A weight vector on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Preference(Vec<f64>);

impl Preference {
    /// Strictly positive weights summing to one.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::validate(&weights, true)?;
        Ok(Preference(weights))
    }

    /// Non-negative weights summing to one (zeros allowed).
    pub fn new_nonnegative(weights: Vec<f64>) -> Result<Self> {
        Self::validate(&weights, false)?;
        Ok(Preference(weights))
    }

    pub fn uniform(s: usize) -> Self {
        Preference(vec![1.0 / s as f64; s])
    }

    fn validate(w: &[f64], strict: bool) -> Result<()> {
        if w.is_empty() {
            return Err(EcmoError::input("lambda must be non-empty"));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(EcmoError::input("lambda must be finite"));
        }
        if strict && w.iter().any(|&x| x <= 0.0) {
            return Err(EcmoError::input("lambda must be strictly positive"));
        }
        if w.iter().any(|&x| x < 0.0) {
            return Err(EcmoError::input("lambda must be non-negative"));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(EcmoError::input(format!(
                "lambda must sum to 1 (got {sum})"
            )));
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }
}

/// The four residual blocks and their squared norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktResidual {
    /// `sum_s omega_s - 1`
    pub block_rho: f64,
    /// `sum_s omega_s lambda_s grad f_s + sum_i nu_i grad h_i`
    pub block_z: Vec<f64>,
    /// `h(z)`
    pub block_primal: Vec<f64>,
    /// `min(omega_s, rho - lambda_s f_s)`
    pub block_slack: Vec<f64>,
    pub sq_norm: f64,
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

impl KktResidual {
    pub fn z_norm(&self) -> f64 {
        sq(&self.block_z).sqrt()
    }

    pub fn primal_norm(&self) -> f64 {
        sq(&self.block_primal).sqrt()
    }

    pub fn slack_norm(&self) -> f64 {
        sq(&self.block_slack).sqrt()
    }

    /// Squared norm recomputed from the blocks.
    pub fn recompute_sq_norm(&self) -> f64 {
        self.block_rho * self.block_rho
            + sq(&self.block_z)
            + sq(&self.block_primal)
            + sq(&self.block_slack)
    }
}

pub(crate) fn check_lambda(problem: &EcmoProblem, lambda: &Preference) -> Result<()> {
    EcmoError::check_dim("preference vector", problem.num_objectives(), lambda.len())
}

/// Residual from precomputed values and Jacobians.
pub fn kkt_from_evaluation(
    eval: &Evaluation,
    lambda: &[f64],
    rho: f64,
    omega: &[f64],
    nu: &[f64],
) -> Result<KktResidual> {
    let s_count = eval.f.len();
    EcmoError::check_dim("omega", s_count, omega.len())?;
    EcmoError::check_dim("nu", eval.h.len(), nu.len())?;
    let block_rho = omega.iter().sum::<f64>() - 1.0;
    let weights = DVector::from_iterator(s_count, omega.iter().zip(lambda).map(|(w, l)| w * l));
    let mut block_z = eval.jf.tr_mul(&weights);
    if !nu.is_empty() {
        block_z += eval.jh.tr_mul(&DVector::from_column_slice(nu));
    }
    let block_slack: Vec<f64> = (0..s_count)
        .map(|s| omega[s].min(rho - lambda[s] * eval.f[s]))
        .collect();
    let mut out = KktResidual {
        block_rho,
        block_z: block_z.iter().copied().collect(),
        block_primal: eval.h.clone(),
        block_slack,
        sq_norm: 0.0,
    };
    out.sq_norm = out.recompute_sq_norm();
    if !out.sq_norm.is_finite() {
        return Err(EcmoError::NonFinite {
            context: "KKT residual",
            index: 0,
        });
    }
    Ok(out)
}

/// KKT-system residual `K(rho, z, omega, nu, lambda)`.
pub fn kkt_residual(
    problem: &EcmoProblem,
    lambda: &Preference,
    rho: f64,
    z: &[f64],
    omega: &[f64],
    nu: &[f64],
) -> Result<KktResidual> {
    check_lambda(problem, lambda)?;
    let eval = problem.evaluate(z)?;
    kkt_from_evaluation(&eval, lambda.as_slice(), rho, omega, nu)
}

/// The naive stacked system `(grad F(z) alpha + grad h(z) v, h(z))`, kept to
/// demonstrate points where it fails to vanish despite Pareto stationarity.
pub fn naive_ps_residual(
    problem: &EcmoProblem,
    z: &[f64],
    alpha: &[f64],
    v: &[f64],
) -> Result<Vec<f64>> {
    EcmoError::check_dim("alpha", problem.num_objectives(), alpha.len())?;
    EcmoError::check_dim("constraint multipliers", problem.num_constraints(), v.len())?;
    if alpha.iter().any(|&a| a < 0.0) || (alpha.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(EcmoError::input("alpha must lie on the simplex"));
    }
    let eval = problem.evaluate(z)?;
    let mut stationarity: DVector<f64> = eval.jf.tr_mul(&DVector::from_column_slice(alpha));
    if !v.is_empty() {
        stationarity += eval.jh.tr_mul(&DVector::from_column_slice(v));
    }
    let mut out: Vec<f64> = stationarity.iter().copied().collect();
    out.extend_from_slice(&eval.h);
    Ok(out)
}

/// Projected-gradient stationarity for linear scalarization with affine
/// constraints: `min_v |grad L + A^T v|^2 + |Az - b|^2`.
pub(crate) fn ls_kkt_sq(
    grad: &DVector<f64>,
    a: &DMatrix<f64>,
    residual: &[f64],
    gram_inv: &DMatrix<f64>,
) -> f64 {
    let tangential = if a.nrows() == 0 {
        grad.clone()
    } else {
        let coef = gram_inv * (a * grad);
        grad - a.tr_mul(&coef)
    };
    tangential.norm_squared() + sq(residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::MonomialFunction;

    #[test]
    fn preference_validation() {
        assert!(Preference::new(vec![0.5, 0.5]).is_ok());
        let err = Preference::new(vec![0.5, 0.6]).unwrap_err();
        assert!(err.to_string().contains("lambda must sum to 1"));
        assert!(Preference::new(vec![1.0, 0.0]).is_err());
        assert!(Preference::new_nonnegative(vec![1.0, 0.0]).is_ok());
        assert!(Preference::new_nonnegative(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn hand_built_kkt_point_is_exactly_zero() {
        // f(z) = z + 2, h(z) = z
        let f = MonomialFunction::from_terms(1, &[(1.0, &[1]), (2.0, &[0])]);
        let h = MonomialFunction::from_terms(1, &[(1.0, &[1])]);
        let p = EcmoProblem::new("kkt", 1, vec![f.into()], vec![h.into()]).unwrap();
        let lam = Preference::new(vec![1.0]).unwrap();
        let k = kkt_residual(&p, &lam, 2.0, &[0.0], &[1.0], &[-1.0]).unwrap();
        assert_eq!(k.block_rho, 0.0);
        assert_eq!(k.block_z, vec![0.0]);
        assert_eq!(k.block_primal, vec![0.0]);
        assert_eq!(k.block_slack, vec![0.0]);
        assert_eq!(k.sq_norm, 0.0);
    }

    #[test]
    fn wrong_sign_duals_leave_residual() {
        let f = MonomialFunction::from_terms(1, &[(1.0, &[1]), (2.0, &[0])]);
        let h = MonomialFunction::from_terms(1, &[(1.0, &[1])]);
        let p = EcmoProblem::new("kkt", 1, vec![f.into()], vec![h.into()]).unwrap();
        let lam = Preference::new(vec![1.0]).unwrap();
        let k = kkt_residual(&p, &lam, 2.0, &[0.0], &[1.0], &[1.0]).unwrap();
        assert!(k.sq_norm > 0.0);
        assert_eq!(k.sq_norm, k.recompute_sq_norm());
    }

    #[test]
    fn naive_residual_vanishes_on_constructed_point() {
        // f1 = z1, f2 = z2, h = z1 + z2 - 1; at any feasible z,
        // alpha = (0.5, 0.5), v = -0.5 cancels the gradients.
        let f1 = MonomialFunction::from_terms(2, &[(1.0, &[1, 0])]);
        let f2 = MonomialFunction::from_terms(2, &[(1.0, &[0, 1])]);
        let h = MonomialFunction::from_terms(2, &[(1.0, &[1, 0]), (1.0, &[0, 1]), (-1.0, &[0, 0])]);
        let p = EcmoProblem::new("lin", 2, vec![f1.into(), f2.into()], vec![h.into()]).unwrap();
        let r = naive_ps_residual(&p, &[0.25, 0.75], &[0.5, 0.5], &[-0.5]).unwrap();
        assert_eq!(r, vec![0.0, 0.0, 0.0]);
    }
}
