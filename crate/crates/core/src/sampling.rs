//! Seeded random cyclic systems for batch checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measures::{bell_criterion, m_distance};
use crate::system::{next, CyclicSystem, ValidatedCyclicSystem};

/// Independent RNG stream `stream` derived from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marginals {
    /// Same-content variables share one marginal in `[0.3, 0.7]`.
    Consistent,
    /// Consistent marginals perturbed per context by up to ±0.1.
    Perturbed,
    /// Every marginal drawn independently from `[0.03, 0.97]`.
    Arbitrary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Uniform over the Fréchet interval of each bunch.
    Uniform,
    /// Near the ends of the Fréchet intervals (close to box vertices).
    Extreme,
    /// Near the middle of each Fréchet interval.
    Central,
    /// Near a random odd box vertex, moving each coordinate inwards by up
    /// to `2/n` of its interval.
    NearOddVertex,
    /// On the segment from the box centre towards a random odd vertex, at a
    /// fraction `t ∈ [(n−3)/(n−1) − 0.15, 1]` of the way, with small jitter.
    Diagonal,
    /// A point of that segment where the system is noncontextual and a Bell
    /// facet is at least as close as the box surface; falls back to
    /// `Diagonal` when the segment has no such point.
    HyperplaneRegime,
}

fn marginal<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(0.03..0.97)
}

fn central_marginal<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(0.3..0.7)
}

pub fn random_marginals<R: Rng>(n: usize, mode: Marginals, rng: &mut R) -> Vec<[f64; 2]> {
    match mode {
        Marginals::Arbitrary => (0..n).map(|_| [marginal(rng), marginal(rng)]).collect(),
        Marginals::Consistent | Marginals::Perturbed => {
            let q: Vec<f64> = (0..n).map(|_| central_marginal(rng)).collect();
            let mut jitter = |p: f64| {
                if mode == Marginals::Perturbed {
                    (p + rng.random_range(-0.1..0.1)).clamp(0.01, 0.99)
                } else {
                    p
                }
            };
            (0..n).map(|i| [jitter(q[i]), jitter(q[next(i, n)])]).collect()
        }
    }
}

/// Product probability at relative position `u ∈ [0, 1]` of the Fréchet
/// interval of marginals `a`, `b`.
pub fn frechet_point(a: f64, b: f64, u: f64) -> f64 {
    let lo = (a + b - 1.0).max(0.0);
    let hi = a.min(b);
    lo + u * (hi - lo)
}

fn position<R: Rng>(placement: Placement, rng: &mut R) -> f64 {
    match placement {
        Placement::Uniform => rng.random(),
        Placement::Extreme => {
            let d = rng.random_range(0.0..0.15);
            if rng.random_bool(0.5) {
                d
            } else {
                1.0 - d
            }
        }
        Placement::Central => rng.random_range(0.3..0.7),
        _ => unreachable!("placed per vertex"),
    }
}

/// Which coordinates sit at their minimum, for a uniformly random odd vertex.
fn odd_vertex<R: Rng>(n: usize, rng: &mut R) -> Vec<bool> {
    let mut lo: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    if lo.iter().filter(|&&b| b).count() % 2 == 0 {
        let k = rng.random_range(0..n);
        lo[k] = !lo[k];
    }
    lo
}

/// Relative positions at fraction `t` from the centre to the vertex `lo`.
fn segment_point(lo: &[bool], t: f64) -> Vec<f64> {
    lo.iter().map(|&l| if l { 0.5 - 0.5 * t } else { 0.5 + 0.5 * t }).collect()
}

fn diagonal<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let start = ((n as f64 - 3.0) / (n as f64 - 1.0) - 0.15).max(0.0);
    let t = rng.random_range(start..=1.0);
    segment_point(&odd_vertex(n, rng), t)
        .into_iter()
        .map(|u| (u + rng.random_range(-0.02..0.02)).clamp(0.0, 1.0))
        .collect()
}

fn with_positions(m: &[[f64; 2]], u: &[f64]) -> CyclicSystem {
    let products = m.iter().zip(u).map(|(&[a, b], &u)| frechet_point(a, b, u)).collect();
    CyclicSystem::new(m.to_vec(), products)
}

fn in_hyperplane_regime(m: &[[f64; 2]], u: &[f64]) -> bool {
    let e = with_positions(m, u).to_expectations();
    let c = bell_criterion(&e);
    !c.contextual
        && !e.has_deterministic_variable()
        && m_distance(&e).is_ok_and(|d| -c.margin <= d)
}

pub fn random_system<R: Rng>(n: usize, marginals: Marginals, placement: Placement, rng: &mut R) -> ValidatedCyclicSystem {
    let m = random_marginals(n, marginals, rng);
    let positions: Vec<f64> = match placement {
        Placement::NearOddVertex => odd_vertex(n, rng)
            .into_iter()
            .map(|l| {
                let d = rng.random_range(0.0..(2.0 / n as f64).min(0.5));
                if l {
                    d
                } else {
                    1.0 - d
                }
            })
            .collect(),
        Placement::Diagonal => diagonal(n, rng),
        Placement::HyperplaneRegime => {
            let lo = odd_vertex(n, rng);
            let hits: Vec<Vec<f64>> = (0..=200)
                .map(|k| segment_point(&lo, k as f64 / 200.0))
                .filter(|u| in_hyperplane_regime(&m, u))
                .collect();
            if hits.is_empty() {
                diagonal(n, rng)
            } else {
                hits[rng.random_range(0..hits.len())].clone()
            }
        }
        _ => (0..n).map(|_| position(placement, rng)).collect(),
    };
    with_positions(&m, &positions)
        .validate()
        .expect("products inside Fréchet bounds are valid")
}

/// The mixed batch used by the oracle checks: draw `k` cycles through every
/// combination of marginal mode and placement, weighted towards consistent
/// and mildly inconsistent marginals.
pub fn mixed_system<R: Rng>(n: usize, k: usize, rng: &mut R) -> ValidatedCyclicSystem {
    const MODES: [Marginals; 4] = [
        Marginals::Consistent,
        Marginals::Perturbed,
        Marginals::Consistent,
        Marginals::Arbitrary,
    ];
    const PLACEMENTS: [Placement; 6] = [
        Placement::Uniform,
        Placement::NearOddVertex,
        Placement::HyperplaneRegime,
        Placement::Extreme,
        Placement::HyperplaneRegime,
        Placement::Diagonal,
    ];
    random_system(n, MODES[k % 4], PLACEMENTS[(k / 4) % 6], rng)
}

/// `count` mixed draws of rank `n` from stream `n` of `seed`.
pub fn mixed_batch(n: usize, count: usize, seed: u64) -> Vec<ValidatedCyclicSystem> {
    let mut rng = stream_rng(seed, n as u64);
    (0..count).map(|k| mixed_system(n, k, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(7, 1).random();
        let b: u64 = stream_rng(7, 1).random();
        let c: u64 = stream_rng(7, 2).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn batch_mixes_consistency() {
        let batch = mixed_batch(4, 40, 3);
        let consistent = batch
            .iter()
            .filter(|s| s.system().is_consistently_connected(1e-12))
            .count();
        assert!(consistent > 0 && consistent < 40);
    }
}
