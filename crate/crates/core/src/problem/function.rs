use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{EcmoError, Result};

/// One term `coeff * prod_i z_i^{exponents[i]}` of a polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

impl Term {
    pub fn new(coeff: f64, exponents: Vec<u32>) -> Self {
        Term { coeff, exponents }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    fn value(&self, z: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(z)
            .fold(self.coeff, |acc, (&p, &zi)| acc * pow(zi, p))
    }

    /// Partial derivative w.r.t. `coord`, or `None` when it vanishes identically.
    fn derivative(&self, coord: usize) -> Option<Term> {
        let p = self.exponents[coord];
        if p == 0 || self.coeff == 0.0 {
            return None;
        }
        let mut exponents = self.exponents.clone();
        exponents[coord] = p - 1;
        Some(Term {
            coeff: self.coeff * p as f64,
            exponents,
        })
    }
}

#[inline]
fn pow(x: f64, p: u32) -> f64 {
    match p {
        0 => 1.0,
        1 => x,
        2 => x * x,
        _ => x.powi(p as i32),
    }
}

/// A polynomial given as a sum of monomial terms over `R^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialFunction {
    dim: usize,
    terms: Vec<Term>,
}

impl MonomialFunction {
    pub fn new(dim: usize, terms: Vec<Term>) -> Result<Self> {
        if dim == 0 {
            return Err(EcmoError::input("monomial dimension must be positive"));
        }
        for (t, term) in terms.iter().enumerate() {
            if term.exponents.len() != dim {
                return Err(EcmoError::input(format!(
                    "term {t} has {} exponents, expected {dim}",
                    term.exponents.len()
                )));
            }
            if !term.coeff.is_finite() {
                return Err(EcmoError::input(format!(
                    "term {t} has a non-finite coefficient"
                )));
            }
        }
        Ok(MonomialFunction { dim, terms })
    }

    /// Builds from `(coeff, exponents)` pairs. Panics on malformed input; meant for
    /// literal fixture definitions.
    pub fn from_terms(dim: usize, terms: &[(f64, &[u32])]) -> Self {
        let terms = terms
            .iter()
            .map(|(c, e)| Term::new(*c, e.to_vec()))
            .collect();
        Self::new(dim, terms).expect("malformed literal polynomial")
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        MonomialFunction {
            dim,
            terms: vec![Term::new(c, vec![0; dim])],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|t| t.coeff != 0.0)
            .map(Term::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.value(z)).sum()
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.dim];
        for term in &self.terms {
            for (j, g) in grad.iter_mut().enumerate() {
                if let Some(d) = term.derivative(j) {
                    *g += d.value(z);
                }
            }
        }
        grad
    }

    /// Exact partial derivative as another polynomial.
    pub fn partial(&self, coord: usize) -> MonomialFunction {
        let terms = self
            .terms
            .iter()
            .filter_map(|t| t.derivative(coord))
            .collect();
        MonomialFunction {
            dim: self.dim,
            terms,
        }
    }

    /// Hessian at `z` from exact second partials.
    pub fn hessian(&self, z: &[f64]) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| {
                let di = self.partial(i);
                (0..self.dim).map(|j| di.partial(j).value(z)).collect()
            })
            .collect()
    }

    pub fn add_constant(&self, c: f64) -> MonomialFunction {
        let mut out = self.clone();
        if c != 0.0 {
            out.terms.push(Term::new(c, vec![0; self.dim]));
        }
        out
    }
}

/// A scalar function implemented by hand-written code, for fixtures that are
/// not polynomial.
pub trait NativeFunction: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, z: &[f64]) -> f64;
    fn gradient(&self, z: &[f64]) -> Vec<f64>;

    /// The partial derivative in `coord` as a function with its own gradient.
    /// Needed when the function is used as a lower-level objective.
    fn partial(&self, _coord: usize) -> Option<ScalarFunction> {
        None
    }

    /// False for functions that are not twice continuously differentiable.
    fn is_smooth(&self) -> bool {
        true
    }
}

#[derive(Debug)]
struct Offset {
    inner: Arc<dyn NativeFunction>,
    offset: f64,
}

impl NativeFunction for Offset {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, z: &[f64]) -> f64 {
        self.inner.value(z) + self.offset
    }
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.inner.gradient(z)
    }
    fn partial(&self, coord: usize) -> Option<ScalarFunction> {
        self.inner.partial(coord)
    }
    fn is_smooth(&self) -> bool {
        self.inner.is_smooth()
    }
}

/// Either a serializable polynomial or a native closure-like implementation.
#[derive(Debug, Clone)]
pub enum ScalarFunction {
    Monomial(MonomialFunction),
    Native(Arc<dyn NativeFunction>),
}

impl From<MonomialFunction> for ScalarFunction {
    fn from(m: MonomialFunction) -> Self {
        ScalarFunction::Monomial(m)
    }
}

impl ScalarFunction {
    pub fn native(f: impl NativeFunction + 'static) -> Self {
        ScalarFunction::Native(Arc::new(f))
    }

    pub fn dim(&self) -> usize {
        match self {
            ScalarFunction::Monomial(m) => m.dim(),
            ScalarFunction::Native(n) => n.dim(),
        }
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        match self {
            ScalarFunction::Monomial(m) => m.value(z),
            ScalarFunction::Native(n) => n.value(z),
        }
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        match self {
            ScalarFunction::Monomial(m) => m.gradient(z),
            ScalarFunction::Native(n) => n.gradient(z),
        }
    }

    pub fn partial(&self, coord: usize) -> Result<ScalarFunction> {
        if coord >= self.dim() {
            return Err(EcmoError::input(format!(
                "partial derivative index {coord} out of range for dimension {}",
                self.dim()
            )));
        }
        match self {
            ScalarFunction::Monomial(m) => Ok(m.partial(coord).into()),
            ScalarFunction::Native(n) => n.partial(coord).ok_or_else(|| {
                EcmoError::Capability(format!(
                    "native function {n:?} does not expose its partial derivative in coordinate {coord}"
                ))
            }),
        }
    }

    pub fn add_constant(&self, c: f64) -> ScalarFunction {
        if c == 0.0 {
            return self.clone();
        }
        match self {
            ScalarFunction::Monomial(m) => m.add_constant(c).into(),
            ScalarFunction::Native(n) => ScalarFunction::Native(Arc::new(Offset {
                inner: Arc::clone(n),
                offset: c,
            })),
        }
    }

    pub fn as_monomial(&self) -> Option<&MonomialFunction> {
        match self {
            ScalarFunction::Monomial(m) => Some(m),
            ScalarFunction::Native(_) => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        match self {
            ScalarFunction::Monomial(_) => true,
            ScalarFunction::Native(n) => n.is_smooth(),
        }
    }
}
