//! Geometry of the noncontextuality polytope `E_b = R_b ∩ N_b(Δ)` inside the
//! ambient cube `[-1, 1]^n`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{solve, LpBuilder, LpStatus, Relation, Sense};
use crate::measures::{box_interval, criterion_bound, s1};
use crate::sign::{odd_sign_vectors, SignVector};
use crate::system::{ExpectationVectors, DEFAULT_TOL};

/// An axis-aligned box `Π [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Box {
    pub intervals: Vec<(f64, f64)>,
}

impl Box {
    /// The ambient cube `[-1, 1]^n`.
    pub fn cube(n: usize) -> Self {
        Self {
            intervals: vec![(-1.0, 1.0); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    /// Some interval has (numerically) zero width.
    pub fn is_degenerate(&self) -> bool {
        self.intervals.iter().any(|(lo, hi)| hi - lo <= 1e-12)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.intervals
            .iter()
            .zip(x)
            .all(|(&(lo, hi), &v)| v >= lo - tol && v <= hi + tol)
    }

    pub fn center(&self) -> Vec<f64> {
        self.intervals.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    /// Vertex taking `lo_i` where bit `i` of `lo_mask` is set, `hi_i` elsewhere.
    pub fn vertex(&self, lo_mask: u64) -> VertexLabel {
        let coords = self
            .intervals
            .iter()
            .enumerate()
            .map(|(i, &(lo, hi))| if lo_mask >> i & 1 == 1 { lo } else { hi })
            .collect();
        VertexLabel { coords, lo_mask }
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexLabel> + '_ {
        (0..1u64 << self.dim()).map(move |m| self.vertex(m))
    }

    /// Distance (any L_p) from an interior point to the box surface.
    pub fn surface_distance(&self, x: &[f64]) -> f64 {
        self.intervals
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (v - lo).min(hi - v))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A box vertex together with which coordinates sit at their minimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexLabel {
    pub coords: Vec<f64>,
    pub lo_mask: u64,
}

impl VertexLabel {
    /// Odd when an odd number of coordinates are at their minimum.
    pub fn is_odd(&self) -> bool {
        self.lo_mask.count_ones() % 2 == 1
    }

    /// `−1` on minimum coordinates, `+1` on maximum ones.
    pub fn sign_vector(&self) -> SignVector {
        SignVector::from_mask(self.coords.len(), self.lo_mask)
    }
}

/// The circumscribing box `R_b` of a system's noncontextuality polytope.
pub fn box_rb(e: &ExpectationVectors) -> Box {
    Box {
        intervals: (0..e.rank()).map(|i| box_interval(e, i)).collect(),
    }
}

/// `N_b(Δ)`: the `2^(n-1)` half-spaces `λ·x <= Δ` over odd sign vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfspaceSet {
    pub dim: usize,
    pub bound: f64,
}

impl HalfspaceSet {
    pub fn new(dim: usize, bound: f64) -> Self {
        Self { dim, bound }
    }

    pub fn normals(&self) -> impl Iterator<Item = SignVector> {
        odd_sign_vectors(self.dim)
    }

    /// `max_λ λ·x` by enumerating every odd sign vector.
    pub fn max_value(&self, x: &[f64]) -> f64 {
        self.normals().map(|l| l.dot(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The maximizing odd sign vector (first in mask order on ties).
    pub fn argmax(&self, x: &[f64]) -> SignVector {
        let mut best: Option<(SignVector, f64)> = None;
        for l in self.normals() {
            let v = l.dot(x);
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((l, v));
            }
        }
        best.expect("dim >= 1").0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.normals().all(|l| l.dot(x) <= self.bound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub in_box: bool,
    pub in_nb: bool,
    pub in_eb: bool,
}

/// Membership of `e.e_b` in `R_b`, `N_b(Δ)` and `E_b`.
pub fn membership(e: &ExpectationVectors) -> Membership {
    membership_of(&e.e_b, e)
}

/// Membership of an arbitrary point in the polytopes defined by `e.e_l`.
pub fn membership_of(x: &[f64], e: &ExpectationVectors) -> Membership {
    let in_box = box_rb(e).contains(x, DEFAULT_TOL);
    let in_nb = s1(x).expect("rank >= 2") <= criterion_bound(e);
    Membership {
        in_box,
        in_nb,
        in_eb: in_box && in_nb,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FacetKind {
    /// `x_i <= hi_i` (`upper`) or `-x_i <= -lo_i`.
    Box { coordinate: usize, upper: bool },
    /// `λ·x <= Δ`.
    Bell { lambda: SignVector },
}

/// `normal · x <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub bound: f64,
    pub kind: FacetKind,
}

impl Halfspace {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `bound − normal·x`; nonnegative inside.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.bound - self.value(x)
    }
}

/// The `2n` box half-spaces followed by the `2^(n-1)` Bell half-spaces.
pub fn facets_eb(e: &ExpectationVectors) -> Result<Vec<Halfspace>> {
    let b = box_rb(e);
    if b.is_degenerate() {
        return Err(Error::DegenerateBox);
    }
    let n = e.rank();
    let mut out = Vec::with_capacity(2 * n + (1 << (n - 1)));
    for (i, &(lo, hi)) in b.intervals.iter().enumerate() {
        let mut up = vec![0.0; n];
        up[i] = 1.0;
        out.push(Halfspace {
            normal: up,
            bound: hi,
            kind: FacetKind::Box {
                coordinate: i,
                upper: true,
            },
        });
        let mut down = vec![0.0; n];
        down[i] = -1.0;
        out.push(Halfspace {
            normal: down,
            bound: -lo,
            kind: FacetKind::Box {
                coordinate: i,
                upper: false,
            },
        });
    }
    let delta = criterion_bound(e);
    for lambda in odd_sign_vectors(n) {
        out.push(Halfspace {
            normal: lambda.as_f64(),
            bound: delta,
            kind: FacetKind::Bell { lambda },
        });
    }
    Ok(out)
}

pub fn contains_all(facets: &[Halfspace], x: &[f64], tol: f64) -> bool {
    facets.iter().all(|h| h.slack(x) >= -tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PocketCut {
    /// `x_k`: the vertex with coordinate `k` scaled by `1 − n + Δ`.
    pub points: Vec<Vec<f64>>,
    pub cut_distance: f64,
}

/// Where the hyperplane `λ·x = Δ` cuts the cube edges leaving the odd vertex
/// `λ`.
pub fn pocket_cut_points(vertex: &SignVector, delta: f64) -> Result<PocketCut> {
    let n = vertex.len();
    let (lo, hi) = (n as f64 - 2.0, n as f64);
    if !(lo..=hi).contains(&delta) {
        return Err(Error::BadDelta { delta, lo, hi });
    }
    if !vertex.is_odd() {
        return Err(Error::EvenVertex);
    }
    let base = vertex.as_f64();
    let points = (0..n)
        .map(|k| {
            let mut x = base.clone();
            x[k] *= 1.0 - n as f64 + delta;
            x
        })
        .collect();
    Ok(PocketCut {
        points,
        cut_distance: n as f64 - delta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisjointnessReport {
    pub dim: usize,
    pub delta: f64,
    pub points_checked: usize,
    /// Points lying strictly inside two or more pockets.
    pub pocket_overlaps: usize,
    /// Pairs of pocket hyperplanes with a common point inside the cube.
    pub touching_pairs: Vec<TouchingPair>,
}

impl DisjointnessReport {
    pub fn pockets_disjoint(&self) -> bool {
        self.pocket_overlaps == 0
    }

    pub fn hyperplanes_disjoint(&self) -> bool {
        self.touching_pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TouchingPair {
    pub first: SignVector,
    pub second: SignVector,
    /// A common point of both hyperplanes inside the cube.
    pub witness: Vec<f64>,
}

/// Grid step for `n <= 3`, and the random sample size for larger ranks.
pub const DISJOINTNESS_GRID_STEP: f64 = 0.05;
pub const DISJOINTNESS_SAMPLES: usize = 100_000;

/// Checks that no point of the cube is in two pockets, and finds every pair of
/// pocket hyperplanes that meet inside the cube.
pub fn pocket_disjointness_check<R: Rng>(delta: f64, n: usize, rng: &mut R) -> Result<DisjointnessReport> {
    let (lo, hi) = (n as f64 - 2.0, n as f64);
    if !(lo..=hi).contains(&delta) {
        return Err(Error::BadDelta { delta, lo, hi });
    }
    let normals: Vec<SignVector> = odd_sign_vectors(n).collect();
    let in_two = |x: &[f64]| normals.iter().filter(|l| l.dot(x) > delta).take(2).count() == 2;

    let mut points_checked = 0;
    let mut pocket_overlaps = 0;
    if n <= 3 {
        let steps = (2.0 / DISJOINTNESS_GRID_STEP).round() as usize;
        let total = (steps + 1).pow(n as u32);
        let mut x = vec![0.0; n];
        for idx in 0..total {
            let mut rest = idx;
            for v in x.iter_mut() {
                *v = -1.0 + (rest % (steps + 1)) as f64 * DISJOINTNESS_GRID_STEP;
                rest /= steps + 1;
            }
            points_checked += 1;
            pocket_overlaps += usize::from(in_two(&x));
        }
    } else {
        // half uniform over the cube, half concentrated near odd vertices
        let depth = (n as f64 - delta + 0.5).min(2.0);
        for k in 0..DISJOINTNESS_SAMPLES {
            let x: Vec<f64> = if k % 2 == 0 {
                (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
            } else {
                let l = &normals[rng.random_range(0..normals.len())];
                l.entries()
                    .iter()
                    .map(|&s| f64::from(s) * (1.0 - rng.random_range(0.0..=depth)))
                    .collect()
            };
            points_checked += 1;
            pocket_overlaps += usize::from(in_two(&x));
        }
    }

    let mut touching_pairs = Vec::new();
    for (a, first) in normals.iter().enumerate() {
        for second in &normals[a + 1..] {
            if let Some(witness) = hyperplanes_meet_in_cube(first, second, delta)? {
                touching_pairs.push(TouchingPair {
                    first: first.clone(),
                    second: second.clone(),
                    witness,
                });
            }
        }
    }
    Ok(DisjointnessReport {
        dim: n,
        delta,
        points_checked,
        pocket_overlaps,
        touching_pairs,
    })
}

/// A point `x ∈ [-1, 1]^n` with `a·x = b·x = Δ`, if any.
fn hyperplanes_meet_in_cube(a: &SignVector, b: &SignVector, delta: f64) -> Result<Option<Vec<f64>>> {
    // x = y − 1 with 0 <= y <= 2
    let n = a.len();
    let mut lp = LpBuilder::new(Sense::Minimize);
    let y = lp.add_vars(n, 0.0);
    for l in [a, b] {
        let shift: f64 = l.entries().iter().map(|&s| f64::from(s)).sum();
        lp.add_row(
            y.clone().zip(l.as_f64()).collect(),
            Relation::Eq,
            delta + shift,
        );
    }
    for j in y.clone() {
        lp.add_row(vec![(j, 1.0)], Relation::Le, 2.0);
    }
    let sol = solve(&lp.build())?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(y.map(|j| sol.x[j] - 1.0).collect()),
        _ => None,
    })
}

/// Number of pockets the Bell hyperplanes cut out of `R_b`: odd sign vectors
/// `λ` whose matching box vertex (max where `λ = +1`, min where `λ = −1`)
/// has `λ·V > Δ`.
pub fn pocket_count(e: &ExpectationVectors) -> Result<usize> {
    let b = box_rb(e);
    if b.is_degenerate() {
        return Err(Error::DegenerateBox);
    }
    let delta = criterion_bound(e);
    Ok(b.vertices()
        .filter(VertexLabel::is_odd)
        .filter(|v| v.sign_vector().dot(&v.coords) > delta)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn consistent(e_b: Vec<f64>) -> ExpectationVectors {
        ExpectationVectors {
            e_l: vec![[0.0, 0.0]; e_b.len()],
            e_b,
            e_c: None,
        }
    }

    #[test]
    fn box_examples() {
        let b = box_rb(&consistent(vec![0.0; 3]));
        assert_eq!(b, Box::cube(3));
        let e = ExpectationVectors {
            e_l: vec![[-0.2, 0.1]; 4],
            e_b: vec![0.0; 4],
            e_c: None,
        };
        let (lo, hi) = box_rb(&e).intervals[0];
        assert!((lo + 0.9).abs() < 1e-15 && (hi - 0.7).abs() < 1e-15);
        let det = ExpectationVectors {
            e_l: vec![[1.0, 0.3], [0.3, 1.0]],
            e_b: vec![0.3, 0.3],
            e_c: None,
        };
        let b = box_rb(&det);
        assert!(b.is_degenerate());
        assert!((b.intervals[0].0 - 0.3).abs() < 1e-15 && (b.intervals[0].1 - 0.3).abs() < 1e-15);
    }

    #[test]
    fn membership_examples() {
        for n in 3..=6 {
            assert!(membership(&consistent(vec![0.0; n])).in_eb);
        }
        let m = membership(&consistent(vec![1.0, 1.0, 1.0, -1.0]));
        assert!(m.in_box && !m.in_nb && !m.in_eb);
    }

    #[test]
    fn facet_counts() {
        assert_eq!(facets_eb(&consistent(vec![0.0; 2])).unwrap().len(), 6);
        assert_eq!(facets_eb(&consistent(vec![0.0; 3])).unwrap().len(), 10);
        let det = ExpectationVectors {
            e_l: vec![[1.0, 0.3], [0.3, 1.0]],
            e_b: vec![0.3, 0.3],
            e_c: None,
        };
        assert_eq!(facets_eb(&det), Err(Error::DegenerateBox));
    }

    #[test]
    fn demicube_facets() {
        // Δ = n − 2: every even cube vertex satisfies all facets, with at
        // least one Bell facet tight
        for n in 2..=6 {
            let e = consistent(vec![0.0; n]);
            let facets = facets_eb(&e).unwrap();
            for v in crate::sign::even_sign_vectors(n) {
                let x = v.as_f64();
                assert!(contains_all(&facets, &x, 1e-12));
                let tight = facets
                    .iter()
                    .filter(|h| matches!(h.kind, FacetKind::Bell { .. }))
                    .any(|h| h.slack(&x).abs() < 1e-12);
                assert!(tight);
            }
        }
    }

    #[test]
    fn pocket_cut_examples() {
        let v = SignVector::new(vec![1, 1, -1]);
        let cut = pocket_cut_points(&v, 3.0).unwrap();
        assert_eq!(cut.cut_distance, 0.0);
        assert!(cut.points.iter().all(|p| p == &v.as_f64()));

        let cut = pocket_cut_points(&v, 2.5).unwrap();
        assert_eq!(cut.cut_distance, 0.5);
        assert_eq!(cut.points[0], vec![0.5, 1.0, -1.0]);
        for p in &cut.points {
            assert_eq!(v.dot(p), 2.5);
        }

        let cut = pocket_cut_points(&v, 1.0).unwrap();
        assert_eq!(cut.cut_distance, 2.0);
        assert_eq!(cut.points[0], vec![-1.0, 1.0, -1.0]);

        assert_eq!(
            pocket_cut_points(&SignVector::new(vec![1, 1, 1]), 2.0),
            Err(Error::EvenVertex)
        );
        assert!(matches!(pocket_cut_points(&v, 0.5), Err(Error::BadDelta { .. })));
    }

    #[test]
    fn disjointness_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = pocket_disjointness_check(1.0, 2, &mut rng).unwrap();
        assert!(r.pockets_disjoint() && r.hyperplanes_disjoint());
        assert_eq!(r.points_checked, 41 * 41);

        let r = pocket_disjointness_check(1.0, 3, &mut rng).unwrap();
        assert!(r.pockets_disjoint());
        assert!(!r.hyperplanes_disjoint());
        for pair in &r.touching_pairs {
            // the two hyperplanes share a segment whose ends are even vertices
            let (a, b) = (pair.first.entries(), pair.second.entries());
            let same: Vec<usize> = (0..3).filter(|&i| a[i] == b[i]).collect();
            for &i in &same {
                assert!((pair.witness[i] - f64::from(a[i])).abs() < 1e-9);
            }
        }

        let r = pocket_disjointness_check(4.0, 4, &mut rng).unwrap();
        assert!(r.pockets_disjoint() && r.hyperplanes_disjoint());
    }

    #[test]
    fn pocket_count_examples() {
        assert_eq!(pocket_count(&consistent(vec![0.0; 4])).unwrap(), 8);
        // Δ = n when δ >= 2
        let wide = ExpectationVectors {
            e_l: vec![[0.5, 0.5], [-0.5, -0.5]],
            e_b: vec![0.0, 0.0],
            e_c: None,
        };
        assert_eq!(pocket_count(&wide).unwrap(), 0);
        let one = ExpectationVectors {
            e_l: vec![[0.5, 0.5], [0.0, 0.0]],
            e_b: vec![0.5, 0.0],
            e_c: None,
        };
        assert_eq!(pocket_count(&one).unwrap(), 1);
        let two = ExpectationVectors {
            e_l: vec![[0.2, 0.2], [0.0, 0.0]],
            e_b: vec![0.0, 0.0],
            e_c: None,
        };
        assert_eq!(pocket_count(&two).unwrap(), 2);
    }
}
