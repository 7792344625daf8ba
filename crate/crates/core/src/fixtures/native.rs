use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};

use super::data::*;
use crate::problem::{MonomialFunction, NativeFunction, ScalarFunction, Term};

/// `0` on `[-1, 1]`, `(|z| - 1)^2` outside. Continuously differentiable but not C^2.
#[derive(Debug)]
pub(super) struct PiecewiseFlat;

impl NativeFunction for PiecewiseFlat {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, z: &[f64]) -> f64 {
        let a = z[0].abs();
        if a <= 1.0 {
            0.0
        } else {
            (a - 1.0).powi(2)
        }
    }
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let a = z[0].abs();
        if a <= 1.0 {
            vec![0.0]
        } else {
            vec![2.0 * (a - 1.0) * z[0].signum()]
        }
    }
    fn is_smooth(&self) -> bool {
        false
    }
}

/// Least-squares statistics `(A^T A / n, A^T b / n, b^T b / n)` of one data set.
#[derive(Debug, Clone)]
pub(super) struct LsqData {
    gram: Matrix3<f64>,
    moment: Vector3<f64>,
    energy: f64,
}

impl LsqData {
    fn new(design: &[[f64; 3]; 20], target: &[f64; 20]) -> Self {
        let n = design.len() as f64;
        let mut gram = Matrix3::zeros();
        let mut moment = Vector3::zeros();
        let mut energy = 0.0;
        for (row, &b) in design.iter().zip(target) {
            let a = Vector3::from_row_slice(row);
            gram += a * a.transpose();
            moment += a * b;
            energy += b * b;
        }
        LsqData {
            gram: gram / n,
            moment: moment / n,
            energy: energy / n,
        }
    }

    /// `|A y - b|^2 / (2n)`
    fn loss(&self, y: &Vector3<f64>) -> f64 {
        0.5 * (y.dot(&(self.gram * y)) - 2.0 * self.moment.dot(y) + self.energy)
    }

    /// `A^T (A y - b) / n`
    fn grad(&self, y: &Vector3<f64>) -> Vector3<f64> {
        self.gram * y - self.moment
    }

    /// The same loss as a polynomial over `(x_1, x_2, y_1, y_2, y_3)`.
    fn as_polynomial(&self, p: usize) -> MonomialFunction {
        let dim = p + 3;
        let mut terms = Vec::new();
        let unit = |idx: &[usize]| {
            let mut e = vec![0u32; dim];
            for &i in idx {
                e[p + i] += 1;
            }
            e
        };
        for i in 0..3 {
            terms.push(Term::new(0.5 * self.gram[(i, i)], unit(&[i, i])));
            for j in (i + 1)..3 {
                terms.push(Term::new(self.gram[(i, j)], unit(&[i, j])));
            }
            terms.push(Term::new(-self.moment[i], unit(&[i])));
        }
        terms.push(Term::new(0.5 * self.energy, vec![0; dim]));
        MonomialFunction::new(dim, terms).expect("well-formed polynomial")
    }
}

/// Lower level of the data-weighting fixture over `(x, y)` with `x in R^2`:
/// `g = softmax(x)_1 L_a(y) + softmax(x)_2 L_b(y)`.
#[derive(Debug, Clone)]
pub(super) struct WeightedTraining {
    sets: [LsqData; 2],
}

pub(super) const WEIGHT_DIM: usize = 2;

fn softmax(x: &[f64]) -> [f64; 2] {
    let m = x[0].max(x[1]);
    let (a, b) = ((x[0] - m).exp(), (x[1] - m).exp());
    [a / (a + b), b / (a + b)]
}

/// `d w_j / d x_m = w_j (delta_jm - w_m)`
fn softmax_jacobian(w: &[f64; 2]) -> [[f64; 2]; 2] {
    let mut j = [[0.0; 2]; 2];
    for (a, row) in j.iter_mut().enumerate() {
        for (m, cell) in row.iter_mut().enumerate() {
            *cell = w[a] * (if a == m { 1.0 } else { 0.0 } - w[m]);
        }
    }
    j
}

fn split(z: &[f64]) -> ([f64; 2], Vector3<f64>) {
    ([z[0], z[1]], Vector3::new(z[2], z[3], z[4]))
}

impl WeightedTraining {
    pub(super) fn new() -> Self {
        WeightedTraining {
            sets: [
                LsqData::new(&TRAIN_A_DESIGN, &TRAIN_A_TARGET),
                LsqData::new(&TRAIN_B_DESIGN, &TRAIN_B_TARGET),
            ],
        }
    }

    /// Minimizer of `g(x, .)`: the weighted normal-equations solution.
    pub(super) fn lower_solution(&self, x: &[f64]) -> Vector3<f64> {
        let w = softmax(x);
        let gram = self.sets[0].gram * w[0] + self.sets[1].gram * w[1];
        let rhs = self.sets[0].moment * w[0] + self.sets[1].moment * w[1];
        gram.lu()
            .solve(&rhs)
            .expect("positive-definite weighted Gram matrix")
    }
}

impl NativeFunction for WeightedTraining {
    fn dim(&self) -> usize {
        WEIGHT_DIM + 3
    }
    fn value(&self, z: &[f64]) -> f64 {
        let (x, y) = split(z);
        let w = softmax(&x);
        w[0] * self.sets[0].loss(&y) + w[1] * self.sets[1].loss(&y)
    }
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let (x, y) = split(z);
        let w = softmax(&x);
        let dw = softmax_jacobian(&w);
        let losses = [self.sets[0].loss(&y), self.sets[1].loss(&y)];
        let gy = self.sets[0].grad(&y) * w[0] + self.sets[1].grad(&y) * w[1];
        let mut g = vec![0.0; 5];
        for m in 0..2 {
            g[m] = dw[0][m] * losses[0] + dw[1][m] * losses[1];
        }
        g[2..].copy_from_slice(gy.as_slice());
        g
    }
    fn partial(&self, coord: usize) -> Option<ScalarFunction> {
        (WEIGHT_DIM..WEIGHT_DIM + 3).contains(&coord).then(|| {
            ScalarFunction::Native(Arc::new(WeightedStationarity {
                base: self.clone(),
                index: coord - WEIGHT_DIM,
            }))
        })
    }
}

/// `dg/dy_i` of [`WeightedTraining`].
#[derive(Debug)]
struct WeightedStationarity {
    base: WeightedTraining,
    index: usize,
}

impl NativeFunction for WeightedStationarity {
    fn dim(&self) -> usize {
        WEIGHT_DIM + 3
    }
    fn value(&self, z: &[f64]) -> f64 {
        let (x, y) = split(z);
        let w = softmax(&x);
        let sets = &self.base.sets;
        w[0] * sets[0].grad(&y)[self.index] + w[1] * sets[1].grad(&y)[self.index]
    }
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let (x, y) = split(z);
        let w = softmax(&x);
        let dw = softmax_jacobian(&w);
        let sets = &self.base.sets;
        let r = [sets[0].grad(&y)[self.index], sets[1].grad(&y)[self.index]];
        let mut g = vec![0.0; 5];
        for m in 0..2 {
            g[m] = dw[0][m] * r[0] + dw[1][m] * r[1];
        }
        for j in 0..3 {
            g[WEIGHT_DIM + j] =
                w[0] * sets[0].gram[(self.index, j)] + w[1] * sets[1].gram[(self.index, j)];
        }
        g
    }
}

pub(super) fn validation_losses() -> [MonomialFunction; 2] {
    [
        LsqData::new(&VALID_A_DESIGN, &VALID_A_TARGET).as_polynomial(WEIGHT_DIM),
        LsqData::new(&VALID_B_DESIGN, &VALID_B_TARGET).as_polynomial(WEIGHT_DIM),
    ]
}
