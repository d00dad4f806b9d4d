//! Distances between points and half-space polytopes in L1, L∞ (by LP) and
//! L2 (by Dykstra's alternating projections).

use serde::Serialize;

use super::{solve_with, LpBuilder, LpStatus, Relation, Sense, SolverOptions};
use crate::error::Result;
use crate::polytope::Halfspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Norm {
    L1,
    LInf,
}

/// `min ‖x − point‖` over `x` satisfying every half-space, with `exact` tight
/// as an equality; `None` if that set is empty.
fn constrained_distance(
    point: &[f64],
    facets: &[Halfspace],
    exact: Option<usize>,
    norm: Norm,
    options: &SolverOptions,
) -> Result<Option<f64>> {
    // x = point + u − v, u, v >= 0
    let n = point.len();
    let cost = if norm == Norm::L1 { 1.0 } else { 0.0 };
    let mut lp = LpBuilder::new(Sense::Minimize);
    let u = lp.add_vars(n, cost);
    let v = lp.add_vars(n, cost);
    if norm == Norm::LInf {
        let t = lp.add_var(1.0);
        for i in 0..n {
            lp.add_row(vec![(u.start + i, 1.0), (v.start + i, 1.0), (t, -1.0)], Relation::Le, 0.0);
        }
    }
    for (k, h) in facets.iter().enumerate() {
        let coeffs = (0..n)
            .filter(|&i| h.normal[i] != 0.0)
            .flat_map(|i| [(u.start + i, h.normal[i]), (v.start + i, -h.normal[i])])
            .collect();
        let relation = if exact == Some(k) { Relation::Eq } else { Relation::Le };
        lp.add_row(coeffs, relation, h.slack(point));
    }
    let sol = solve_with(&lp.build(), options)?;
    Ok((sol.status == LpStatus::Optimal).then_some(sol.objective.max(0.0)))
}

/// Distance from `point` to the polytope; `None` if the polytope is empty.
pub fn distance_to_polytope(
    point: &[f64],
    facets: &[Halfspace],
    norm: Norm,
    options: &SolverOptions,
) -> Result<Option<f64>> {
    constrained_distance(point, facets, None, norm, options)
}

/// Distance from an interior `point` to the polytope's surface: the minimum
/// over facets of the distance to that facet's face. Facets whose face is
/// empty are skipped; if all are, the result is infinite.
pub fn distance_to_surface(point: &[f64], facets: &[Halfspace], norm: Norm, options: &SolverOptions) -> Result<f64> {
    let mut best = f64::INFINITY;
    for k in 0..facets.len() {
        if let Some(d) = constrained_distance(point, facets, Some(k), norm, options)? {
            best = best.min(d);
        }
    }
    Ok(best)
}

/// Euclidean projection of `point` onto the polytope by Dykstra's algorithm.
pub fn euclidean_projection(point: &[f64], facets: &[Halfspace], max_sweeps: usize, tol: f64) -> Vec<f64> {
    let n = point.len();
    let mut x = point.to_vec();
    let mut corrections = vec![vec![0.0; n]; facets.len()];
    for _ in 0..max_sweeps {
        let mut change = 0.0f64;
        for (h, p) in facets.iter().zip(corrections.iter_mut()) {
            let y: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a + b).collect();
            let norm2: f64 = h.normal.iter().map(|a| a * a).sum();
            let excess = (h.value(&y) - h.bound).max(0.0) / norm2;
            let next: Vec<f64> = y.iter().zip(&h.normal).map(|(a, b)| a - excess * b).collect();
            for i in 0..n {
                p[i] = y[i] - next[i];
                change = change.max((next[i] - x[i]).abs());
            }
            x = next;
        }
        if change < tol {
            break;
        }
    }
    x
}

/// Euclidean distance from an interior `point` to the polytope's surface:
/// the minimum over facets of the distance to that facet's face. Faces are
/// projected onto by Dykstra's algorithm; empty ones, detected by LP, are
/// skipped.
pub fn euclidean_distance_to_surface(
    point: &[f64],
    facets: &[Halfspace],
    max_sweeps: usize,
    tol: f64,
    options: &SolverOptions,
) -> Result<f64> {
    let mut best = f64::INFINITY;
    for k in 0..facets.len() {
        if constrained_distance(point, facets, Some(k), Norm::L1, options)?.is_none() {
            continue;
        }
        let mut face = facets.to_vec();
        face.push(Halfspace {
            normal: facets[k].normal.iter().map(|a| -a).collect(),
            bound: -facets[k].bound,
            kind: facets[k].kind.clone(),
        });
        let x = euclidean_projection(point, &face, max_sweeps, tol);
        best = best.min(euclidean_distance(point, &x));
    }
    Ok(best)
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::FacetKind;

    fn square() -> Vec<Halfspace> {
        let mut out = Vec::new();
        for i in 0..2 {
            for s in [1.0, -1.0] {
                let mut normal = vec![0.0; 2];
                normal[i] = s;
                out.push(Halfspace {
                    normal,
                    bound: 1.0,
                    kind: FacetKind::Box { coordinate: i, upper: s > 0.0 },
                });
            }
        }
        out
    }

    #[test]
    fn square_distances() {
        let opt = SolverOptions::default();
        let f = square();
        let p = [3.0, 2.0];
        assert!((distance_to_polytope(&p, &f, Norm::L1, &opt).unwrap().unwrap() - 3.0).abs() < 1e-12);
        assert!((distance_to_polytope(&p, &f, Norm::LInf, &opt).unwrap().unwrap() - 2.0).abs() < 1e-12);
        let proj = euclidean_projection(&p, &f, 1000, 1e-14);
        assert!((proj[0] - 1.0).abs() < 1e-12 && (proj[1] - 1.0).abs() < 1e-12);

        let q = [0.5, -0.2];
        assert!((distance_to_surface(&q, &f, Norm::L1, &opt).unwrap() - 0.5).abs() < 1e-12);
        assert!(distance_to_polytope(&q, &f, Norm::L1, &opt).unwrap().unwrap().abs() < 1e-12);
    }
}
