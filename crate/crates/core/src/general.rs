//! Systems of dichotomous variables with arbitrary context structure.
//!
//! Every variable takes values in `{0, 1}` (1 standing for `+1`). A context's
//! pmf is indexed by assignments to its contents in listed order: bit `j` of
//! the index is the value of the `j`-th content.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::oracle::{solve_coupling, RowRole, ZERO_MEASURE_TOL};
use crate::lp::{solve_with, IncidenceMatrix, LpBuilder, LpStatus, Relation, RowBlock, RowLabel, Sense, SolverOptions};
use crate::measures::bell_criterion;
use crate::system::{next, prev, CyclicSystem, DEFAULT_TOL};

/// Largest number of variables whose joint events are materialized.
pub const MAX_GENERAL_VARIABLES: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Context {
    /// Indices into [`GeneralSystem::contents`].
    pub contents: Vec<usize>,
    pub pmf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralSystem {
    pub contents: Vec<String>,
    pub contexts: Vec<Context>,
}

/// Same-content variables in two contexts, with their maximal-coupling
/// product probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionPairConstraint {
    pub content: usize,
    pub contexts: (usize, usize),
    pub target: f64,
}

impl GeneralSystem {
    pub fn new(contents: Vec<String>, contexts: Vec<Context>) -> Result<Self> {
        let s = Self { contents, contexts };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.contexts.is_empty() {
            return Err(Error::Malformed("no contexts".into()));
        }
        for (c, ctx) in self.contexts.iter().enumerate() {
            if ctx.contents.is_empty() {
                return Err(Error::EmptyContext(c));
            }
            for (j, &q) in ctx.contents.iter().enumerate() {
                if q >= self.contents.len() {
                    return Err(Error::Malformed(format!("context {c} names unknown content {q}")));
                }
                if ctx.contents[..j].contains(&q) {
                    return Err(Error::Malformed(format!("context {c} lists content {q} twice")));
                }
            }
            if ctx.pmf.len() != 1 << ctx.contents.len() {
                return Err(Error::Malformed(format!(
                    "context {c}: pmf has {} entries, expected {}",
                    ctx.pmf.len(),
                    1 << ctx.contents.len()
                )));
            }
            if let Some(&v) = ctx.pmf.iter().find(|v| !(**v >= -DEFAULT_TOL && **v <= 1.0 + DEFAULT_TOL)) {
                return Err(Error::OutOfRange { field: format!("context {c} pmf"), value: v });
            }
            let total: f64 = ctx.pmf.iter().sum();
            if (total - 1.0).abs() > DEFAULT_TOL {
                return Err(Error::Malformed(format!("context {c}: pmf sums to {total}")));
            }
        }
        for q in 0..self.contents.len() {
            if self.connection(q).is_empty() {
                return Err(Error::Malformed(format!("content {} is in no context", self.contents[q])));
            }
        }
        Ok(())
    }

    pub fn num_variables(&self) -> usize {
        self.contexts.iter().map(|c| c.contents.len()).sum()
    }

    /// Index of the first variable of each context.
    pub fn variable_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.contexts.len());
        let mut next = 0;
        for c in &self.contexts {
            offsets.push(next);
            next += c.contents.len();
        }
        offsets
    }

    /// `(context, slot)` for every context measuring content `q`.
    pub fn connection(&self, q: usize) -> Vec<(usize, usize)> {
        self.contexts
            .iter()
            .enumerate()
            .filter_map(|(c, ctx)| ctx.contents.iter().position(|&x| x == q).map(|s| (c, s)))
            .collect()
    }

    /// Probability that every slot in `slots` (a bitmask) equals 1.
    pub fn subset_probability(&self, context: usize, slots: usize) -> f64 {
        self.contexts[context]
            .pmf
            .iter()
            .enumerate()
            .filter(|(a, _)| a & slots == slots)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn marginal(&self, context: usize, slot: usize) -> f64 {
        self.subset_probability(context, 1 << slot)
    }

    /// Every same-content pair of variables, with the maximal product
    /// probability `min(p, p')`.
    pub fn connection_pairs(&self) -> Vec<ConnectionPairConstraint> {
        let mut out = Vec::new();
        for q in 0..self.contents.len() {
            let members = self.connection(q);
            for (a, &(c1, s1)) in members.iter().enumerate() {
                for &(c2, s2) in &members[a + 1..] {
                    out.push(ConnectionPairConstraint {
                        content: q,
                        contexts: (c1, c2),
                        target: self.marginal(c1, s1).min(self.marginal(c2, s2)),
                    });
                }
            }
        }
        out
    }

    /// Rank-`n` cyclic system with contents `q_1 … q_n` and context `i`
    /// measuring `(q_i, q_{i⊕1})`.
    pub fn from_cyclic(system: &CyclicSystem) -> Result<Self> {
        let n = system.rank();
        let contexts = (0..n)
            .map(|i| {
                let [p, p2] = system.marginals[i];
                let p12 = system.bunch_products[i];
                Context {
                    contents: vec![i, next(i, n)],
                    pmf: vec![1.0 - p - p2 + p12, p - p12, p2 - p12, p12],
                }
            })
            .collect();
        Self::new((1..=n).map(|j| format!("q{j}")).collect(), contexts)
    }
}

/// Incidence matrix with, in order: the constant row; for each context, one
/// row per nonempty subset of its variables (single variables in the low
/// block, larger subsets in the bunch block), by increasing subset mask; one
/// connection row per entry of [`GeneralSystem::connection_pairs`].
pub fn build_incidence_general(system: &GeneralSystem) -> Result<IncidenceMatrix> {
    let count = system.num_variables();
    if count > MAX_GENERAL_VARIABLES {
        return Err(Error::TooManyVariables { count, max: MAX_GENERAL_VARIABLES });
    }
    let offsets = system.variable_offsets();
    let mut variable_names = Vec::with_capacity(count);
    for (c, ctx) in system.contexts.iter().enumerate() {
        for &q in &ctx.contents {
            variable_names.push(format!("S{}^{}", system.contents[q], c + 1));
        }
    }
    let label = |block, mask: u64| {
        let names: Vec<&str> = (0..count)
            .filter(|v| mask >> v & 1 == 1)
            .map(|v| variable_names[v].as_str())
            .collect();
        RowLabel { block, mask, name: format!("<{}>", names.join(" ")) }
    };
    let mut rows = vec![RowLabel { block: RowBlock::Normalization, mask: 0, name: "1".into() }];
    for (c, ctx) in system.contexts.iter().enumerate() {
        for slots in 1u64..1 << ctx.contents.len() {
            let block = if slots.count_ones() == 1 { RowBlock::Low } else { RowBlock::Bunch };
            rows.push(label(block, slots << offsets[c]));
        }
    }
    for pair in system.connection_pairs() {
        let (c1, c2) = pair.contexts;
        let v1 = offsets[c1] + slot_of(system, c1, pair.content);
        let v2 = offsets[c2] + slot_of(system, c2, pair.content);
        rows.push(label(RowBlock::Connection, 1 << v1 | 1 << v2));
    }
    Ok(IncidenceMatrix { num_vars: count, variable_names, rows })
}

fn slot_of(system: &GeneralSystem, context: usize, content: usize) -> usize {
    system.contexts[context]
        .contents
        .iter()
        .position(|&q| q == content)
        .expect("content is in context")
}

/// Targets for the rows of [`build_incidence_general`].
pub fn general_targets(system: &GeneralSystem) -> Vec<f64> {
    let mut t = vec![1.0];
    for (c, ctx) in system.contexts.iter().enumerate() {
        for slots in 1usize..1 << ctx.contents.len() {
            t.push(system.subset_probability(c, slots));
        }
    }
    t.extend(system.connection_pairs().iter().map(|p| p.target));
    t
}

fn coupling(system: &GeneralSystem, role: impl Fn(RowBlock) -> RowRole, options: &SolverOptions) -> Result<(crate::lp::oracle::CouplingOutcome, Vec<f64>)> {
    let m = build_incidence_general(system)?;
    let roles: Vec<RowRole> = m.rows.iter().map(|r| role(r.block)).collect();
    let targets = general_targets(system);
    Ok((solve_coupling(&m, &targets, &roles, options)?, targets))
}

/// Whether no coupling matches every bunch and every pairwise maximal
/// connection coupling.
pub fn is_contextual_general(system: &GeneralSystem) -> Result<bool> {
    is_contextual_general_with(system, &SolverOptions::default())
}

pub fn is_contextual_general_with(system: &GeneralSystem, options: &SolverOptions) -> Result<bool> {
    let (out, _) = coupling(system, |_| RowRole::Fixed, options)?;
    Ok(!out.is_feasible())
}

fn positive_optimum(out: crate::lp::oracle::CouplingOutcome, offset: f64, sign: f64) -> Result<f64> {
    if out.status != LpStatus::Optimal {
        return Err(crate::lp::LpError::NumericalFailure(format!("coupling program is {:?}", out.status)).into());
    }
    let v = offset + sign * out.objective;
    if v > ZERO_MEASURE_TOL {
        Ok(v)
    } else {
        Err(Error::NotContextual)
    }
}

/// `Σ targets − max Σ(connection rows)` with every bunch row fixed
/// (probability units).
pub fn cnt1_general(system: &GeneralSystem) -> Result<f64> {
    cnt1_general_with(system, &SolverOptions::default())
}

pub fn cnt1_general_with(system: &GeneralSystem, options: &SolverOptions) -> Result<f64> {
    let (out, _) = coupling(
        system,
        |b| if b == RowBlock::Connection { RowRole::Maximize } else { RowRole::Fixed },
        options,
    )?;
    let total: f64 = system.connection_pairs().iter().map(|p| p.target).sum();
    positive_optimum(out, total, -1.0)
}

/// L1 distance, over the product moments of two or more variables within
/// each context, to the moments compatible with the maximal connection
/// couplings; single-variable marginals stay fixed (probability units).
pub fn cnt2_general(system: &GeneralSystem) -> Result<f64> {
    cnt2_general_with(system, &SolverOptions::default())
}

pub fn cnt2_general_with(system: &GeneralSystem, options: &SolverOptions) -> Result<f64> {
    let (out, _) = coupling(
        system,
        |b| if b == RowBlock::Bunch { RowRole::Deviation } else { RowRole::Fixed },
        options,
    )?;
    positive_optimum(out, 0.0, 1.0)
}

/// A cycle of contexts `c_1 … c_k` in which consecutive contexts (and `c_k`,
/// `c_1`) share the link content, with distinct link contents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CyclicSubsystem {
    pub contexts: Vec<usize>,
    /// `links[j]` is measured in `contexts[j]` and `contexts[j ⊕ 1]`.
    pub links: Vec<usize>,
    pub system: CyclicSystem,
}

/// Every cyclic subsystem, once per cycle up to rotation and reflection.
///
/// Context `j` of the resulting cyclic system measures
/// `(links[j ⊖ 1], links[j])`, marginalized from the original pmf.
pub fn cyclic_subsystems(system: &GeneralSystem) -> Vec<CyclicSubsystem> {
    let mut out = Vec::new();
    for start in 0..system.contexts.len() {
        let mut path = vec![start];
        let mut links = Vec::new();
        extend_cycles(system, &mut path, &mut links, &mut out);
    }
    out
}

fn extend_cycles(system: &GeneralSystem, path: &mut Vec<usize>, links: &mut Vec<usize>, out: &mut Vec<CyclicSubsystem>) {
    let start = path[0];
    let here = *path.last().expect("nonempty path");
    let incoming = links.last().copied();
    for &q in &system.contexts[here].contents {
        if Some(q) == incoming || links.contains(&q) {
            continue;
        }
        for (c, _) in system.connection(q) {
            if c == start && path.len() >= 2 && q != links[0] {
                let mut cycle_links = links.clone();
                cycle_links.push(q);
                if is_canonical(path, &cycle_links) {
                    out.push(build_subsystem(system, path.clone(), cycle_links));
                }
            } else if c > start && !path.contains(&c) {
                path.push(c);
                links.push(q);
                extend_cycles(system, path, links, out);
                path.pop();
                links.pop();
            }
        }
    }
}

/// Keeps one traversal direction: for `k >= 3` the second context is below
/// the last, for `k = 2` the outgoing link is below the returning one.
fn is_canonical(path: &[usize], links: &[usize]) -> bool {
    if path.len() == 2 {
        links[0] < links[1]
    } else {
        path[1] < path[path.len() - 1]
    }
}

fn build_subsystem(system: &GeneralSystem, contexts: Vec<usize>, links: Vec<usize>) -> CyclicSubsystem {
    let k = contexts.len();
    let mut marginals = Vec::with_capacity(k);
    let mut products = Vec::with_capacity(k);
    for (j, &c) in contexts.iter().enumerate() {
        let a = slot_of(system, c, links[prev(j, k)]);
        let b = slot_of(system, c, links[j]);
        marginals.push([system.marginal(c, a), system.marginal(c, b)]);
        products.push(system.subset_probability(c, 1 << a | 1 << b));
    }
    CyclicSubsystem {
        contexts,
        links,
        system: CyclicSystem::new(marginals, products),
    }
}

/// Whether a cyclic subsystem violates the Bell-type criterion.
pub fn subsystem_is_contextual(sub: &CyclicSubsystem) -> bool {
    bell_criterion(&sub.system.to_expectations()).contextual
}

/// pmf over `{0,1}^k` putting `1/len` on each listed ±1 tuple.
pub fn pmf_from_signs(tuples: &[&[i8]]) -> Vec<f64> {
    let k = tuples[0].len();
    let mut pmf = vec![0.0; 1 << k];
    for t in tuples {
        let idx: usize = t.iter().enumerate().filter(|(_, &s)| s > 0).map(|(j, _)| 1 << j).sum();
        pmf[idx] += 1.0 / tuples.len() as f64;
    }
    pmf
}

const PATTERN: [&[i8]; 4] = [&[-1, -1, 1], &[-1, 1, -1], &[1, -1, -1], &[1, 1, 1]];
const PATTERN_C3: [&[i8]; 4] = [&[1, 1, -1], &[1, -1, 1], &[-1, 1, 1], &[-1, -1, -1]];

fn contents(n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("q{j}")).collect()
}

/// Three contexts over four contents, pairwise independent uniform bunches,
/// contextual as a whole.
pub fn tripartite_system() -> GeneralSystem {
    tripartite_with(pmf_from_signs(&PATTERN_C3))
}

/// The tripartite system with the third context's pmf replaced.
pub fn tripartite_with(c3: Vec<f64>) -> GeneralSystem {
    GeneralSystem::new(
        contents(4),
        vec![
            Context { contents: vec![0, 1, 2], pmf: pmf_from_signs(&PATTERN) },
            Context { contents: vec![1, 2, 3], pmf: pmf_from_signs(&PATTERN) },
            Context { contents: vec![0, 2, 3], pmf: c3 },
        ],
    )
    .expect("valid construction")
}

/// The tripartite system with `R_4^3 = R_1^3` and `R_3^3` independent of
/// them: the one third context compatible with a noncontextual coupling of
/// the first two.
pub fn tripartite_noncontextual_variant() -> GeneralSystem {
    tripartite_with(pmf_from_signs(&[&[1, 1, 1], &[1, -1, 1], &[-1, 1, -1], &[-1, -1, -1]]))
}

/// Four always-equal uniform pairs `(q1,q2), (q2,q3), (q3,q4), (q4,q1)` and
/// a fifth context over all four contents with pmf `c5`.
pub fn star_system(c5: Vec<f64>) -> Result<GeneralSystem> {
    let equal = vec![0.5, 0.0, 0.0, 0.5];
    let mut contexts: Vec<Context> = (0..4)
        .map(|i| Context { contents: vec![i, (i + 1) % 4], pmf: equal.clone() })
        .collect();
    contexts.push(Context { contents: vec![0, 1, 2, 3], pmf: c5 });
    GeneralSystem::new(contents(4), contexts)
}

/// Star system with four independent fair coins in the fifth context.
pub fn star_template() -> GeneralSystem {
    star_system(vec![1.0 / 16.0; 16]).expect("valid construction")
}

pub fn build_counterexamples() -> (GeneralSystem, GeneralSystem) {
    (star_template(), tripartite_system())
}

/// Mixture of the eight distributions `½δ_x + ½δ_x̄` on `{0,1}^4` (`x̄` the
/// complement of `x`, `x` with first bit 0) with the given weights. Every
/// such mixture has uniform single-variable marginals.
pub fn complement_mixture(weights: &[f64; 8]) -> Vec<f64> {
    let mut pmf = vec![0.0; 16];
    for (x, w) in weights.iter().enumerate() {
        let x = x << 1;
        pmf[x] += 0.5 * w;
        pmf[!x & 15] += 0.5 * w;
    }
    pmf
}

/// How the star-scan mixture weights are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StarSampling {
    /// Flat Dirichlet over the 8 weights.
    Dirichlet,
    /// Flat Dirichlet rounded to the lattice of multiples of `1/resolution`.
    Lattice { resolution: u32 },
}

pub fn sample_star_c5<R: Rng>(sampling: StarSampling, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(1.0, 1.0).expect("valid shape");
    let raw: Vec<f64> = (0..8).map(|_| gamma.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    let mut w = [0.0; 8];
    match sampling {
        StarSampling::Dirichlet => {
            for (wi, r) in w.iter_mut().zip(&raw) {
                *wi = r / total;
            }
        }
        StarSampling::Lattice { resolution } => {
            // largest-remainder rounding to an exact composition
            let r = resolution as f64;
            let scaled: Vec<f64> = raw.iter().map(|v| v / total * r).collect();
            let mut units: Vec<u32> = scaled.iter().map(|v| v.floor() as u32).collect();
            let mut order: Vec<usize> = (0..8).collect();
            order.sort_by(|&a, &b| (scaled[b] - scaled[b].floor()).total_cmp(&(scaled[a] - scaled[a].floor())));
            let missing = resolution - units.iter().sum::<u32>();
            for &i in order.iter().take(missing as usize) {
                units[i] += 1;
            }
            for (wi, u) in w.iter_mut().zip(units) {
                *wi = u as f64 / r;
            }
        }
    }
    complement_mixture(&w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarPoint {
    pub index: usize,
    pub contextual: bool,
    /// Zero for noncontextual samples.
    pub cnt1: f64,
    pub cnt2: f64,
}

/// CNT1 and CNT2 of star systems with sampled fifth contexts.
pub fn star_scan<R: Rng>(samples: usize, sampling: StarSampling, rng: &mut R) -> Result<Vec<StarPoint>> {
    let options = SolverOptions::default();
    (0..samples)
        .map(|index| {
            let system = star_system(sample_star_c5(sampling, rng))?;
            let contextual = is_contextual_general_with(&system, &options)?;
            let (cnt1, cnt2) = if contextual {
                (
                    cnt1_general_with(&system, &options).or_else(zero_if_not_contextual)?,
                    cnt2_general_with(&system, &options).or_else(zero_if_not_contextual)?,
                )
            } else {
                (0.0, 0.0)
            };
            Ok(StarPoint { index, contextual, cnt1, cnt2 })
        })
        .collect()
}

fn zero_if_not_contextual(e: Error) -> Result<f64> {
    match e {
        Error::NotContextual => Ok(0.0),
        other => Err(other),
    }
}

/// Two samples equal in one measure (within `tol`) and differing in the
/// other by more than `gap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlignedPair {
    pub first: usize,
    pub second: usize,
    pub shared: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    /// Equal CNT1, different CNT2.
    Cnt1,
    /// Equal CNT2, different CNT1.
    Cnt2,
}

/// The aligned pair (among contextual samples) with the largest difference.
pub fn find_aligned_pair(points: &[StarPoint], axis: Axis, tol: f64, gap: f64) -> Option<AlignedPair> {
    let key = |p: &StarPoint| match axis {
        Axis::Cnt1 => (p.cnt1, p.cnt2),
        Axis::Cnt2 => (p.cnt2, p.cnt1),
    };
    let ctx: Vec<&StarPoint> = points.iter().filter(|p| p.contextual).collect();
    let mut best: Option<AlignedPair> = None;
    for (a, p) in ctx.iter().enumerate() {
        for q in &ctx[a + 1..] {
            let ((s1, o1), (s2, o2)) = (key(p), key(q));
            let diff = (o1 - o2).abs();
            if (s1 - s2).abs() <= tol && diff > gap && best.is_none_or(|b| diff > b.difference) {
                best = Some(AlignedPair { first: p.index, second: q.index, shared: s1, difference: diff });
            }
        }
    }
    best
}

/// A connection-equality row `S_q^{c1} = S_q^{c2}` in the blocking analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualityRow {
    pub content: usize,
    pub contexts: (usize, usize),
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockingAnalysis {
    /// ±1 values forced on the variables of the first context.
    pub forced: Vec<i8>,
    /// Feasible with only the equality rows touching the first context.
    pub feasible_with_first_context_rows: bool,
    /// ±1 values the propagation forces in every other context, if unique.
    pub propagated: Vec<Option<Vec<i8>>>,
    pub feasible_with_all_rows: bool,
    /// Remaining equality rows that the propagated values violate.
    pub conflicts: Vec<EqualityRow>,
}

/// Forces the first context of a system with equality-coupled connections
/// to `forced` and follows the support of every bunch through the equality
/// rows, as in a hypothetical noncontextual coupling.
pub fn blocking_analysis(system: &GeneralSystem, forced: &[i8]) -> Result<BlockingAnalysis> {
    let count = system.num_variables();
    if count > MAX_GENERAL_VARIABLES {
        return Err(Error::TooManyVariables { count, max: MAX_GENERAL_VARIABLES });
    }
    let offsets = system.variable_offsets();
    let rows: Vec<EqualityRow> = system
        .connection_pairs()
        .into_iter()
        .map(|p| EqualityRow {
            content: p.content,
            contexts: p.contexts,
            name: format!(
                "S{}^{} = S{}^{}",
                system.contents[p.content],
                p.contexts.0 + 1,
                system.contents[p.content],
                p.contexts.1 + 1
            ),
        })
        .collect();
    let var = |c: usize, q: usize| offsets[c] + slot_of(system, c, q);
    let assignment = |event: usize, c: usize| -> usize {
        (event >> offsets[c]) & ((1 << system.contexts[c].contents.len()) - 1)
    };
    let forced_idx: usize = forced.iter().enumerate().filter(|(_, &s)| s > 0).map(|(j, _)| 1 << j).sum();
    let allowed = |event: usize, active: &[&EqualityRow]| -> bool {
        (0..system.contexts.len()).all(|c| system.contexts[c].pmf[assignment(event, c)] > 0.0)
            && assignment(event, 0) == forced_idx
            && active
                .iter()
                .all(|r| (event >> var(r.contexts.0, r.content) & 1) == (event >> var(r.contexts.1, r.content) & 1))
    };
    let solve_support = |active: &[&EqualityRow]| -> Result<Option<Vec<f64>>> {
        // h over all events; events outside the support are excluded by
        // a zero-sum row
        let cols = 1usize << count;
        let mut lp = LpBuilder::new(Sense::Minimize);
        let h = lp.add_vars(cols, 0.0);
        lp.add_row(h.clone().map(|c| (c, 1.0)).collect(), Relation::Eq, 1.0);
        let excluded: Vec<(usize, f64)> = h.clone().filter(|&c| !allowed(c, active)).map(|c| (c, 1.0)).collect();
        lp.add_row(excluded, Relation::Eq, 0.0);
        let sol = solve_with(&lp.build(), &SolverOptions::default())?;
        Ok(sol.is_optimal().then(|| sol.x[..cols].to_vec()))
    };

    let first: Vec<&EqualityRow> = rows.iter().filter(|r| r.contexts.0 == 0 || r.contexts.1 == 0).collect();
    let partial = solve_support(&first)?;
    let support: Vec<usize> = (0..1usize << count).filter(|&e| allowed(e, &first)).collect();
    let propagated = (0..system.contexts.len())
        .map(|c| {
            let a = assignment(*support.first()?, c);
            let k = system.contexts[c].contents.len();
            support
                .iter()
                .all(|&e| assignment(e, c) == a)
                .then(|| (0..k).map(|j| if a >> j & 1 == 1 { 1 } else { -1 }).collect())
        })
        .collect::<Vec<Option<Vec<i8>>>>();
    let all: Vec<&EqualityRow> = rows.iter().collect();
    let feasible_with_all_rows = solve_support(&all)?.is_some();
    let value = |c: usize, q: usize| -> Option<i8> {
        let vals = propagated[c].as_ref()?;
        Some(vals[slot_of(system, c, q)])
    };
    let conflicts = rows
        .iter()
        .filter(|r| r.contexts.0 != 0 && r.contexts.1 != 0)
        .filter(|r| matches!((value(r.contexts.0, r.content), value(r.contexts.1, r.content)), (Some(a), Some(b)) if a != b))
        .cloned()
        .collect();
    Ok(BlockingAnalysis {
        forced: forced.to_vec(),
        feasible_with_first_context_rows: partial.is_some(),
        propagated,
        feasible_with_all_rows,
        conflicts,
    })
}
