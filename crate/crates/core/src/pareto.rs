//! Pareto dominance, non-dominated filtering and front-quality indicators.
//! Minimization convention throughout.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EcmoError, Result};

/// One solved point with the preference that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontEntry {
    pub run_id: String,
    pub lambda: Vec<f64>,
    pub z: Vec<f64>,
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub entries: Vec<FrontEntry>,
}

impl ParetoFront {
    /// A front of bare objective vectors (no decision points or preferences).
    pub fn from_objectives(points: Vec<Vec<f64>>) -> Self {
        ParetoFront {
            entries: points
                .into_iter()
                .enumerate()
                .map(|(i, f)| FrontEntry {
                    run_id: i.to_string(),
                    lambda: Vec::new(),
                    z: Vec::new(),
                    f,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn objectives(&self) -> Vec<&[f64]> {
        self.entries.iter().map(|e| e.f.as_slice()).collect()
    }
}

/// `a <= b` componentwise with `a != b`.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

fn common_dim(points: &[&[f64]]) -> Result<usize> {
    let s = points.first().map_or(0, |p| p.len());
    if let Some(bad) = points.iter().position(|p| p.len() != s) {
        return Err(EcmoError::Dimension {
            context: "objective vector",
            expected: s,
            got: points[bad].len(),
        });
    }
    Ok(s)
}

/// Indices (ascending) of the points not dominated by any other point. Of exact
/// duplicates only the first occurrence is kept.
pub fn nondominated_indices(points: &[&[f64]]) -> Result<Vec<usize>> {
    let s = common_dim(points)?;
    if s == 2 {
        return Ok(nondominated_2d(points));
    }
    let keep: Vec<bool> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            !points
                .iter()
                .enumerate()
                .any(|(j, q)| dominates(q, points[i]) || (j < i && q == &points[i]))
        })
        .collect();
    Ok((0..points.len()).filter(|&i| keep[i]).collect())
}

// Sort by (f1, f2, index) and keep points that strictly improve the running f2 minimum.
fn nondominated_2d(points: &[&[f64]]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
            .then(a.cmp(&b))
    });
    let mut best = f64::INFINITY;
    let mut keep = Vec::new();
    for i in order {
        if points[i][1] < best {
            best = points[i][1];
            keep.push(i);
        }
    }
    keep.sort_unstable();
    keep
}

/// Keeps exactly the non-dominated entries, in their original order.
pub fn pareto_filter(entries: Vec<FrontEntry>) -> Result<ParetoFront> {
    let points: Vec<&[f64]> = entries.iter().map(|e| e.f.as_slice()).collect();
    let keep = nondominated_indices(&points)?;
    let mut flags = vec![false; entries.len()];
    for i in keep {
        flags[i] = true;
    }
    Ok(ParetoFront {
        entries: entries
            .into_iter()
            .zip(flags)
            .filter_map(|(e, k)| k.then_some(e))
            .collect(),
    })
}

pub const MAX_EXACT_HV_DIM: usize = 5;

/// Lebesgue measure of the union of boxes `[p, ref_point]` over the front.
pub fn hypervolume(front: &ParetoFront, ref_point: &[f64]) -> Result<f64> {
    hypervolume_points(&front.objectives(), ref_point)
}

pub fn hypervolume_points(points: &[&[f64]], ref_point: &[f64]) -> Result<f64> {
    let s = ref_point.len();
    if s == 0 || s > MAX_EXACT_HV_DIM {
        return Err(EcmoError::input(format!(
            "exact hypervolume supports 1..={MAX_EXACT_HV_DIM} objectives, got {s}"
        )));
    }
    for p in points {
        EcmoError::check_dim("front point", s, p.len())?;
    }
    let offenders: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.iter().zip(ref_point).any(|(x, r)| !(x <= r)))
        .map(|(i, _)| i)
        .collect();
    if !offenders.is_empty() {
        return Err(EcmoError::input(format!(
            "front points exceed the reference point: {offenders:?}"
        )));
    }
    let keep = nondominated_indices(points)?;
    let mut pts: Vec<Vec<f64>> = keep.into_iter().map(|i| points[i].to_vec()).collect();
    Ok(hv_recursive(&mut pts, ref_point, s))
}

fn hv_recursive(points: &mut [Vec<f64>], ref_point: &[f64], d: usize) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    match d {
        1 => ref_point[0] - points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
        2 => {
            points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            let mut bound = ref_point[1];
            let mut area = 0.0;
            for p in points.iter() {
                if p[1] < bound {
                    area += (ref_point[0] - p[0]) * (bound - p[1]);
                    bound = p[1];
                }
            }
            area
        }
        _ => {
            // Slice along the last coordinate.
            let last = d - 1;
            points.sort_by(|a, b| a[last].total_cmp(&b[last]));
            let mut volume = 0.0;
            for i in 0..points.len() {
                let top = if i + 1 < points.len() {
                    points[i + 1][last]
                } else {
                    ref_point[last]
                };
                let thickness = top - points[i][last];
                if thickness <= 0.0 {
                    continue;
                }
                let mut slab: Vec<Vec<f64>> =
                    points[..=i].iter().map(|p| p[..last].to_vec()).collect();
                volume += thickness * hv_recursive(&mut slab, ref_point, last);
            }
            volume
        }
    }
}

/// Additive epsilon indicator: the smallest `eps >= 0` such that every reference
/// point `r` has a front point `p` with `p_s <= r_s + eps` for all `s`.
pub fn epsilon_indicator(front: &ParetoFront, reference: &ParetoFront) -> Result<f64> {
    epsilon_indicator_points(&front.objectives(), &reference.objectives())
}

pub fn epsilon_indicator_points(front: &[&[f64]], reference: &[&[f64]]) -> Result<f64> {
    if front.is_empty() || reference.is_empty() {
        return Err(EcmoError::input("epsilon indicator needs non-empty fronts"));
    }
    let s = front[0].len();
    for p in front.iter().chain(reference) {
        EcmoError::check_dim("front point", s, p.len())?;
    }
    let eps = reference
        .par_iter()
        .map(|r| {
            front
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(r.iter())
                        .map(|(a, b)| a - b)
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(eps.max(0.0))
}

/// Default reference point: componentwise max of the front, times 1.1, plus 0.1.
pub fn default_reference_point(front: &ParetoFront) -> Option<Vec<f64>> {
    let first = front.entries.first()?;
    let mut r = first.f.clone();
    for e in &front.entries {
        for (ri, x) in r.iter_mut().zip(&e.f) {
            *ri = ri.max(*x);
        }
    }
    Some(r.into_iter().map(|x| x * 1.1 + 0.1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_cases() {
        assert!(dominates(&[1.0, 2.0], &[1.0, 3.0]));
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0]));
        assert!(!dominates(&[1.0, 3.0], &[2.0, 2.0]));
        assert!(!dominates(&[2.0, 2.0], &[1.0, 3.0]));
    }

    #[test]
    fn filter_small_set() {
        let f = ParetoFront::from_objectives(vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![2.0, 2.0]]);
        let out = pareto_filter(f.entries).unwrap();
        let objs: Vec<Vec<f64>> = out.entries.iter().map(|e| e.f.clone()).collect();
        assert_eq!(objs, vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
    }

    #[test]
    fn filter_singleton_and_duplicates() {
        let single = ParetoFront::from_objectives(vec![vec![3.0, 1.0, 2.0]]);
        assert_eq!(pareto_filter(single.entries.clone()).unwrap(), single);
        for pts in [
            vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![0.5, 2.0]],
            vec![
                vec![1.0, 1.0, 1.0],
                vec![1.0, 1.0, 1.0],
                vec![0.5, 2.0, 1.0],
            ],
        ] {
            let out = pareto_filter(ParetoFront::from_objectives(pts).entries).unwrap();
            let ids: Vec<&str> = out.entries.iter().map(|e| e.run_id.as_str()).collect();
            assert_eq!(ids, vec!["0", "2"]);
        }
    }

    #[test]
    fn filter_rejects_ragged_input() {
        let f = ParetoFront::from_objectives(vec![vec![1.0, 2.0], vec![1.0]]);
        assert!(pareto_filter(f.entries).is_err());
    }

    #[test]
    fn hypervolume_exact_cases() {
        let f = ParetoFront::from_objectives(vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert_eq!(hypervolume(&f, &[3.0, 3.0]).unwrap(), 3.0);
        let one = ParetoFront::from_objectives(vec![vec![1.0, 1.0]]);
        assert_eq!(hypervolume(&one, &[2.0, 2.0]).unwrap(), 1.0);
        let cube = ParetoFront::from_objectives(vec![vec![0.0, 0.0, 0.0]]);
        assert_eq!(hypervolume(&cube, &[1.0, 2.0, 3.0]).unwrap(), 6.0);
        // two unit-offset boxes in 3-D: 8 + 8 - 1
        let two = ParetoFront::from_objectives(vec![vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
        assert_eq!(
            hypervolume(&two, &[2.0, 2.0, 2.0]).unwrap(),
            4.0 + 2.0 - 1.0 + 0.0
        );
    }

    #[test]
    fn hypervolume_rejects_points_beyond_reference() {
        let f = ParetoFront::from_objectives(vec![vec![1.0, 4.0], vec![0.0, 0.0]]);
        let err = hypervolume(&f, &[3.0, 3.0]).unwrap_err();
        assert!(err.to_string().contains("[0]"));
        let six = ParetoFront::from_objectives(vec![vec![0.0; 6]]);
        assert!(hypervolume(&six, &[1.0; 6]).is_err());
    }

    #[test]
    fn epsilon_cases() {
        let r = ParetoFront::from_objectives(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(epsilon_indicator(&r, &r).unwrap(), 0.0);
        let shifted = ParetoFront::from_objectives(vec![vec![0.5, 1.5], vec![1.5, 0.5]]);
        assert_eq!(epsilon_indicator(&shifted, &r).unwrap(), 0.5);
        assert!(epsilon_indicator(&ParetoFront::default(), &r).is_err());
    }

    #[test]
    fn reference_point_default() {
        let f = ParetoFront::from_objectives(vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        let r = default_reference_point(&f).unwrap();
        assert!((r[0] - 2.3).abs() < 1e-15 && (r[1] - 2.3).abs() < 1e-15);
    }
}
