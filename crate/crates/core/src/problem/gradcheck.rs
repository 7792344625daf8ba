use serde::Serialize;

use super::ScalarFunction;
use crate::error::{EcmoError, Result};

pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Serialize)]
pub struct CoordinateError {
    pub analytic: f64,
    pub numeric: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub per_coordinate: Vec<CoordinateError>,
}

impl GradCheckReport {
    /// Every coordinate within `rel_tol` relative error or `abs_floor` absolute error.
    pub fn passes(&self, rel_tol: f64, abs_floor: f64) -> bool {
        self.per_coordinate
            .iter()
            .all(|c| c.abs_err <= abs_floor || c.rel_err <= rel_tol)
    }
}

/// Relative error with the larger magnitude as scale; zero when both vanish.
pub(crate) fn relative_error(a: f64, b: f64) -> f64 {
    let abs = (a - b).abs();
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        abs / scale
    }
}

/// Central-difference check of the analytic gradient of `f` at `z`.
pub fn gradcheck(f: &ScalarFunction, z: &[f64], step: f64) -> Result<GradCheckReport> {
    if !(step > 0.0) {
        return Err(EcmoError::input("finite-difference step must be positive"));
    }
    EcmoError::check_dim("gradcheck point", f.dim(), z.len())?;
    let analytic = f.gradient(z);
    let mut probe = z.to_vec();
    let mut per_coordinate = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        probe[i] = z[i] + step;
        let plus = f.value(&probe);
        probe[i] = z[i] - step;
        let minus = f.value(&probe);
        probe[i] = z[i];
        let numeric = (plus - minus) / (2.0 * step);
        if !numeric.is_finite() || !analytic[i].is_finite() {
            return Err(EcmoError::NonFinite {
                context: "gradient check",
                index: i,
            });
        }
        per_coordinate.push(CoordinateError {
            analytic: analytic[i],
            numeric,
            abs_err: (analytic[i] - numeric).abs(),
            rel_err: relative_error(analytic[i], numeric),
        });
    }
    Ok(GradCheckReport {
        max_abs_err: per_coordinate.iter().map(|c| c.abs_err).fold(0.0, f64::max),
        max_rel_err: per_coordinate.iter().map(|c| c.rel_err).fold(0.0, f64::max),
        per_coordinate,
    })
}
