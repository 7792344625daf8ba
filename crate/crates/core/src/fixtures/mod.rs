//! Registry of test problems with default starting points, search boxes and
//! reference-front oracles built by dense parameter grids.

mod data;
mod native;

use rayon::prelude::*;

use crate::error::{EcmoError, Result};
use crate::pareto::{pareto_filter, FrontEntry, ParetoFront};
use crate::penalty::Schedule;
use crate::problem::{
    box_probes, shift_positive, EcmoProblem, MonomialFunction, MtblProblem, ScalarFunction,
};

use native::{validation_losses, PiecewiseFlat, WeightedTraining, WEIGHT_DIM};

/// Margin used by [`Fixture::prepared`] when shifting objectives positive.
pub const DEFAULT_SHIFT_MARGIN: f64 = 1e-3;
/// Number of random box samples added to the starting point for the shift probe.
pub const DEFAULT_PROBE_COUNT: usize = 1000;
pub const PROBE_SEED: u64 = 7;

pub const FIXTURE_NAMES: [&str; 8] = [
    "gebken_circle",
    "quad_affine",
    "forum_llgc",
    "llgc_cubic",
    "counterexample_1",
    "counterexample_2",
    "toy_data_weighting",
    "unbounded_guard",
];

#[derive(Debug, Clone)]
pub enum FixtureProblem {
    Ecmo(EcmoProblem),
    Mtbl(MtblProblem),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Reference {
    /// Unit circle, parameterized by angle.
    Circle,
    /// The line `z_2 = 0.5 z_1 - 0.1`, `z_1` in the interval.
    Line(f64, f64),
    /// Lower-level solution `y = (x, x, 0)` for `x` in the interval.
    ForumCurve(f64, f64),
    /// `x = (s/2, -s/2)` with `y` from the weighted normal equations.
    DataWeighting(f64, f64),
    Unavailable,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub problem: FixtureProblem,
    pub z0: Vec<f64>,
    pub bounding_box: Vec<(f64, f64)>,
    /// Schedule constants known to work well on this fixture.
    pub schedule: Schedule,
    /// Default number of grid points for the reference front.
    pub grid_density: usize,
    /// A point known to be Pareto stationary, where one is documented.
    pub stationary_point: Option<Vec<f64>>,
    pub notes: &'static str,
    reference: Reference,
}

fn poly(dim: usize, terms: &[(f64, &[u32])]) -> ScalarFunction {
    MonomialFunction::from_terms(dim, terms).into()
}

fn ecmo(
    name: &str,
    dim: usize,
    objectives: Vec<ScalarFunction>,
    constraints: Vec<ScalarFunction>,
) -> FixtureProblem {
    FixtureProblem::Ecmo(
        EcmoProblem::new(name, dim, objectives, constraints).expect("fixture definition"),
    )
}

fn cube(dim: usize, half_width: f64) -> Vec<(f64, f64)> {
    vec![(-half_width, half_width); dim]
}

pub fn fixture_names() -> &'static [&'static str] {
    &FIXTURE_NAMES
}

pub fn get_fixture(name: &str) -> Result<Fixture> {
    let base = |name, problem, z0: Vec<f64>, bounding_box, reference, notes| Fixture {
        name,
        problem,
        z0,
        bounding_box,
        schedule: Schedule::default(),
        grid_density: 10_000,
        stationary_point: None,
        notes,
        reference,
    };
    let fixture = match name {
        "gebken_circle" => Fixture {
            schedule: Schedule::new(0.003, 50.0),
            grid_density: 100_000,
            ..base(
                "gebken_circle",
                ecmo(
                    name,
                    2,
                    vec![
                        // (z1 - 2)^2 + (z2 - 1)^2
                        poly(2, &[(1.0, &[2, 0]), (-4.0, &[1, 0]), (1.0, &[0, 2]), (-2.0, &[0, 1]), (5.0, &[0, 0])]),
                        // (z1 - 2)^2 + (z2 + 1)^2
                        poly(2, &[(1.0, &[2, 0]), (-4.0, &[1, 0]), (1.0, &[0, 2]), (2.0, &[0, 1]), (5.0, &[0, 0])]),
                    ],
                    vec![poly(2, &[(-1.0, &[2, 0]), (-1.0, &[0, 2]), (1.0, &[0, 0])])],
                ),
                vec![0.5, 0.5],
                cube(2, 2.0),
                Reference::Circle,
                "Two distance objectives on the unit circle. The front is the arc between the \
                 tangency points (2, 1)/sqrt(5) and (2, -1)/sqrt(5).",
            )
        },
        "quad_affine" => Fixture {
            grid_density: 200_000,
            ..base(
            "quad_affine",
            ecmo(
                name,
                2,
                vec![
                    poly(2, &[(1.0, &[2, 0]), (4.0, &[0, 2])]),
                    // 4 (z1 - 2)^2 + (z2 - 2)^2
                    poly(
                        2,
                        &[(4.0, &[2, 0]), (-16.0, &[1, 0]), (1.0, &[0, 2]), (-4.0, &[0, 1]), (20.0, &[0, 0])],
                    ),
                ],
                vec![poly(2, &[(0.5, &[1, 0]), (-1.0, &[0, 1]), (-0.1, &[0, 0])])],
            ),
            vec![0.0, -0.1],
            cube(2, 5.0),
            Reference::Line(-5.0, 5.0),
            "Convex quadratics under one affine constraint; usable with the linear-scalarization solver.",
        )
        },
        "forum_llgc" => base(
            "forum_llgc",
            FixtureProblem::Mtbl(MtblProblem {
                name: name.to_string(),
                upper_objectives: vec![
                    // (y1 - 1)^2 + (y2 - x)^2 + y3^2
                    poly(
                        4,
                        &[
                            (1.0, &[0, 2, 0, 0]),
                            (-2.0, &[0, 1, 0, 0]),
                            (1.0, &[0, 0, 0, 0]),
                            (1.0, &[0, 0, 2, 0]),
                            (-2.0, &[1, 0, 1, 0]),
                            (1.0, &[2, 0, 0, 0]),
                            (1.0, &[0, 0, 0, 2]),
                        ],
                    ),
                    // (y1 - 2)^2 + (y2 - x)^2 + y3^2
                    poly(
                        4,
                        &[
                            (1.0, &[0, 2, 0, 0]),
                            (-4.0, &[0, 1, 0, 0]),
                            (4.0, &[0, 0, 0, 0]),
                            (1.0, &[0, 0, 2, 0]),
                            (-2.0, &[1, 0, 1, 0]),
                            (1.0, &[2, 0, 0, 0]),
                            (1.0, &[0, 0, 0, 2]),
                        ],
                    ),
                ],
                // (y1 - x)^2 / 2 + (y2 - x)^2 / 2 + y3^4 / 4
                lower_objective: poly(
                    4,
                    &[
                        (0.5, &[0, 2, 0, 0]),
                        (-1.0, &[1, 1, 0, 0]),
                        (1.0, &[2, 0, 0, 0]),
                        (0.5, &[0, 0, 2, 0]),
                        (-1.0, &[1, 0, 1, 0]),
                        (0.25, &[0, 0, 0, 4]),
                    ],
                ),
                p: 1,
                q: 3,
            }),
            vec![0.5; 4],
            cube(4, 3.0),
            Reference::ForumCurve(0.0, 3.0),
            "Bilevel problem with a merely convex lower level in y3. Lower-level solution y = (x, x, 0); \
             front {((x - 1)^2, (x - 2)^2) : x in [1, 2]}.",
        ),
        "llgc_cubic" => base(
            "llgc_cubic",
            FixtureProblem::Mtbl(MtblProblem {
                name: name.to_string(),
                upper_objectives: vec![poly(2, &[(1.0, &[0, 1])]), poly(2, &[(1.0, &[0, 1]), (1.0, &[0, 0])])],
                // x y + y^4 / 4
                lower_objective: poly(2, &[(1.0, &[1, 1]), (0.25, &[0, 4])]),
                p: 1,
                q: 1,
            }),
            vec![-1.0, 1.0],
            cube(2, 3.0),
            Reference::Unavailable,
            "Objectives are unbounded below. Kept to show the constraint Jacobian (y^3 + x) has full rank.",
        ),
        "counterexample_1" => Fixture {
            stationary_point: Some(vec![1.0]),
            ..base(
                "counterexample_1",
                ecmo(
                    name,
                    1,
                    vec![poly(1, &[(-0.5, &[2])]), poly(1, &[(-1.0, &[1])])],
                    vec![ScalarFunction::native(PiecewiseFlat)],
                ),
                vec![1.0],
                cube(1, 2.0),
                Reference::Unavailable,
                "Piecewise constraint that is zero on [-1, 1]. At z = 1 every objective gradient \
                 combination equals -1 while the constraint gradient vanishes.",
            )
        },
        "counterexample_2" => Fixture {
            stationary_point: Some(vec![0.0, 0.0, 1.0]),
            ..base(
                "counterexample_2",
                ecmo(
                    name,
                    3,
                    vec![poly(3, &[(1.0, &[1, 0, 0]), (1.0, &[0, 1, 0])]), poly(3, &[(1.0, &[1, 0, 0]), (-1.0, &[0, 1, 0])])],
                    vec![
                        poly(3, &[(1.0, &[2, 0, 0]), (1.0, &[0, 0, 2]), (-1.0, &[0, 0, 0])]),
                        poly(3, &[(1.0, &[0, 0, 1]), (-1.0, &[0, 0, 0])]),
                    ],
                ),
                vec![0.0, 0.0, 1.0],
                cube(3, 2.0),
                Reference::Unavailable,
                "Feasible set is the line z1 = 0, z3 = 1. Every point on it is Pareto stationary, \
                 yet the first objective-gradient coordinate is 1 for every weighting.",
            )
        },
        "toy_data_weighting" => {
            let lower = WeightedTraining::new();
            let [va, vb] = validation_losses();
            Fixture {
                schedule: Schedule::new(0.01, 2.0),
                ..base(
                "toy_data_weighting",
                FixtureProblem::Mtbl(MtblProblem {
                    name: name.to_string(),
                    upper_objectives: vec![va.into(), vb.into()],
                    lower_objective: ScalarFunction::native(lower),
                    p: WEIGHT_DIM,
                    q: 3,
                }),
                vec![0.0; WEIGHT_DIM + 3],
                cube(WEIGHT_DIM + 3, 10.0),
                Reference::DataWeighting(-10.0, 10.0),
                "Softmax-weighted training on two synthetic 20x3 regression sets; the upper level \
                 is the pair of validation losses. Only x1 - x2 affects the weights.",
            )
            }
        }
        "unbounded_guard" => base(
            "unbounded_guard",
            ecmo(name, 1, vec![poly(1, &[(-1.0, &[4])]), poly(1, &[(1.0, &[2])])], vec![]),
            vec![2.0],
            cube(1, 3.0),
            Reference::Unavailable,
            "First objective is unbounded below; no finite shift makes it positive. Used to \
             exercise divergence handling.",
        ),
        _ => {
            return Err(EcmoError::UnknownFixture {
                name: name.to_string(),
                available: FIXTURE_NAMES.join(", "),
            })
        }
    };
    Ok(fixture)
}

impl Fixture {
    /// The constrained problem, with bilevel fixtures reduced through the
    /// lower-level stationarity condition.
    pub fn ecmo(&self) -> Result<EcmoProblem> {
        let p = match &self.problem {
            FixtureProblem::Ecmo(p) => p.clone(),
            FixtureProblem::Mtbl(m) => m.to_ecmo()?,
        };
        p.with_bounding_box(self.bounding_box.clone())
    }

    /// The starting point plus `count` uniform samples from the bounding box.
    pub fn probe_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        box_probes(&self.z0, &self.bounding_box, count, seed)
    }

    /// [`Fixture::ecmo`] with objectives shifted to be at least `margin` on the
    /// default probe set.
    pub fn prepared_with_margin(&self, margin: f64) -> Result<EcmoProblem> {
        shift_positive(
            &self.ecmo()?,
            &self.probe_points(DEFAULT_PROBE_COUNT, PROBE_SEED),
            margin,
        )
    }

    pub fn prepared(&self) -> Result<EcmoProblem> {
        self.prepared_with_margin(DEFAULT_SHIFT_MARGIN)
    }

    pub fn is_polynomial(&self) -> bool {
        match &self.problem {
            FixtureProblem::Ecmo(p) => p.is_polynomial(),
            FixtureProblem::Mtbl(m) => {
                m.lower_objective.as_monomial().is_some()
                    && m.upper_objectives.iter().all(|f| f.as_monomial().is_some())
            }
        }
    }

    pub fn has_reference_front(&self) -> bool {
        self.reference != Reference::Unavailable
    }

    /// Decision points on the feasible set sampled at `density` parameter values.
    fn feasible_grid(&self, density: usize) -> Result<Vec<Vec<f64>>> {
        let param = |lo: f64, hi: f64, i: usize| {
            if density == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (density - 1) as f64
            }
        };
        let points = match self.reference {
            Reference::Circle => (0..density)
                .into_par_iter()
                .map(|i| {
                    let theta = std::f64::consts::TAU * i as f64 / density as f64;
                    vec![theta.cos(), theta.sin()]
                })
                .collect(),
            Reference::Line(lo, hi) => (0..density)
                .into_par_iter()
                .map(|i| {
                    let t = param(lo, hi, i);
                    vec![t, 0.5 * t - 0.1]
                })
                .collect(),
            Reference::ForumCurve(lo, hi) => (0..density)
                .into_par_iter()
                .map(|i| {
                    let x = param(lo, hi, i);
                    vec![x, x, x, 0.0]
                })
                .collect(),
            Reference::DataWeighting(lo, hi) => {
                let lower = WeightedTraining::new();
                (0..density)
                    .into_par_iter()
                    .map(|i| {
                        let s = param(lo, hi, i);
                        let x = [0.5 * s, -0.5 * s];
                        let y = lower.lower_solution(&x);
                        vec![x[0], x[1], y[0], y[1], y[2]]
                    })
                    .collect()
            }
            Reference::Unavailable => {
                return Err(EcmoError::Capability(format!(
                    "reference front unavailable for fixture `{}`",
                    self.name
                )))
            }
        };
        Ok(points)
    }

    /// Dense feasible grid, evaluated and filtered to its non-dominated subset.
    /// Objective values are unshifted.
    pub fn reference_front(&self, density: usize) -> Result<ParetoFront> {
        if density == 0 {
            return Err(EcmoError::input("grid density must be at least 1"));
        }
        let problem = self.ecmo()?;
        let grid = self.feasible_grid(density)?;
        let entries = grid
            .into_par_iter()
            .enumerate()
            .map(|(i, z)| {
                let f = problem.eval_objectives(&z)?;
                Ok(FrontEntry {
                    run_id: format!("grid-{i}"),
                    lambda: Vec::new(),
                    z,
                    f,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        pareto_filter(entries)
    }

    /// Weighted normal-equations solution of the data-weighting lower level.
    pub fn lower_level_solution(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self.name {
            "toy_data_weighting" => Ok(WeightedTraining::new()
                .lower_solution(x)
                .as_slice()
                .to_vec()),
            "forum_llgc" => Ok(vec![x[0], x[0], 0.0]),
            _ => Err(EcmoError::Capability(format!(
                "no closed-form lower-level solution for fixture `{}`",
                self.name
            ))),
        }
    }
}

/// Free-function form of [`Fixture::reference_front`].
pub fn reference_front(fixture: &Fixture, density: usize) -> Result<ParetoFront> {
    fixture.reference_front(density)
}
