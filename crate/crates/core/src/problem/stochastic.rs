use rand::Rng;
use rand_distr::StandardNormal;

use super::{EcmoProblem, Evaluation};
use crate::error::{EcmoError, Result};

/// A deterministic problem observed through mini-batch averages of noisy samples.
///
/// Each sample adds independent zero-mean Gaussian noise with standard deviation
/// `sigma` to every value and every gradient coordinate, so a batch of size `B`
/// has noise standard deviation `sigma / sqrt(B)`. A batch shares one draw between
/// a value and its gradient, matching the same-batch estimator in the update.
#[derive(Debug, Clone)]
pub struct StochasticProblem {
    base: EcmoProblem,
    sigma_f: f64,
    sigma_h: f64,
}

impl StochasticProblem {
    pub fn new(base: EcmoProblem, sigma_f: f64, sigma_h: f64) -> Result<Self> {
        if !(sigma_f >= 0.0 && sigma_h >= 0.0) || !sigma_f.is_finite() || !sigma_h.is_finite() {
            return Err(EcmoError::input(
                "noise levels must be finite and non-negative",
            ));
        }
        Ok(StochasticProblem {
            base,
            sigma_f,
            sigma_h,
        })
    }

    pub fn base(&self) -> &EcmoProblem {
        &self.base
    }

    pub fn sigma_f(&self) -> f64 {
        self.sigma_f
    }

    pub fn sigma_h(&self) -> f64 {
        self.sigma_h
    }

    /// Mini-batch estimate of values and Jacobians at `z`. With zero noise the
    /// result is the exact evaluation and no randomness is consumed.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        z: &[f64],
        batch_objective: usize,
        batch_constraint: usize,
        rng: &mut R,
    ) -> Result<Evaluation> {
        if batch_objective == 0 || batch_constraint == 0 {
            return Err(EcmoError::input("batch sizes must be positive"));
        }
        let mut eval = self.base.evaluate(z)?;
        if self.sigma_f > 0.0 {
            let sd = self.sigma_f / (batch_objective as f64).sqrt();
            for s in 0..eval.f.len() {
                eval.f[s] += sd * rng.sample::<f64, _>(StandardNormal);
                for j in 0..eval.jf.ncols() {
                    eval.jf[(s, j)] += sd * rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
        if self.sigma_h > 0.0 {
            let sd = self.sigma_h / (batch_constraint as f64).sqrt();
            for i in 0..eval.h.len() {
                eval.h[i] += sd * rng.sample::<f64, _>(StandardNormal);
                for j in 0..eval.jh.ncols() {
                    eval.jh[(i, j)] += sd * rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
        Ok(eval)
    }
}
