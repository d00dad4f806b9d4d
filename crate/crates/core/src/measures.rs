//! Closed-form contextuality and noncontextuality measures.
//!
//! Everything here works in expectation (±1) units. Distances in probability
//! units are the expectation-space values divided by 4.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::{ExpectationVectors, ValidatedCyclicSystem, DEFAULT_TOL};

/// Maximum of `Σ λ_i e_i` over sign vectors with `Π λ_i = −1`.
///
/// With an odd number of negative entries (or any zero entry, which lets the
/// parity be fixed for free) the maximum is `Σ|e_i|`; otherwise one sign has
/// to be spent on the smallest magnitude.
pub fn s1(e: &[f64]) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::EmptyVector);
    }
    let total: f64 = e.iter().map(|x| x.abs()).sum();
    let negatives = e.iter().filter(|&&x| x < 0.0).count();
    if negatives % 2 == 1 || e.iter().any(|&x| x == 0.0) {
        Ok(total)
    } else {
        let min = e.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        Ok(total - 2.0 * min)
    }
}

/// Total inconsistency `δ = Σ_i |e_i^i − e_i^{i⊖1}|`.
pub fn inconsistency(e: &ExpectationVectors) -> f64 {
    (0..e.rank())
        .map(|i| {
            let (a, b) = e.connection(i);
            (a - b).abs()
        })
        .sum()
}

/// Right-hand side of the Bell-type criterion, `Δ = min(n − 2 + δ, n)`.
pub fn criterion_bound(e: &ExpectationVectors) -> f64 {
    let n = e.rank() as f64;
    (n - 2.0 + inconsistency(e)).min(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Criterion {
    pub contextual: bool,
    /// `s1(e_b) − Δ`; positive exactly when the system is contextual.
    pub margin: f64,
}

pub fn bell_criterion(e: &ExpectationVectors) -> Criterion {
    let margin = s1(&e.e_b).expect("rank >= 2") - criterion_bound(e);
    Criterion {
        contextual: margin > 0.0,
        margin,
    }
}

/// L1 distance from `e_b` to the noncontextuality polytope, expectation units.
pub fn cnt2(e: &ExpectationVectors) -> Result<f64> {
    let c = bell_criterion(e);
    if !c.contextual {
        return Err(Error::NotContextual);
    }
    Ok(c.margin)
}

/// Per-coordinate interval of the box circumscribing the noncontextuality
/// polytope.
pub fn box_interval(e: &ExpectationVectors, i: usize) -> (f64, f64) {
    let [a, b] = e.e_l[i];
    ((a + b).abs() - 1.0, 1.0 - (a - b).abs())
}

/// Distance from `e_b` to the surface of the circumscribing box.
pub fn m_distance(e: &ExpectationVectors) -> Result<f64> {
    let mut m = f64::INFINITY;
    for (i, &x) in e.e_b.iter().enumerate() {
        let (lo, hi) = box_interval(e, i);
        let d = (x - lo).min(hi - x);
        if d < -DEFAULT_TOL {
            return Err(Error::OutsideBox(i));
        }
        m = m.min(d);
    }
    Ok(m.max(0.0))
}

/// L1 distance from a noncontextual `e_b` to the surface of the
/// noncontextuality polytope, expectation units.
pub fn ncnt2(e: &ExpectationVectors) -> Result<f64> {
    let c = bell_criterion(e);
    if c.contextual {
        return Err(Error::IsContextual);
    }
    if e.has_deterministic_variable() {
        return Err(Error::DegenerateBox);
    }
    // + 0.0 turns a zero margin's −0 into 0
    Ok((-c.margin).min(m_distance(e)?) + 0.0)
}

/// `n^((1−p)/p)`, continuous at `p = ∞` where it equals `1/n`.
fn lp_factor(p: f64, n: usize) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::BadExponent(p));
    }
    let exponent = if p.is_infinite() { -1.0 } else { (1.0 - p) / p };
    Ok((n as f64).powf(exponent))
}

/// CNT₂ measured with the L_p norm instead of L1.
pub fn lp_rescale_cnt(cnt2: f64, p: f64, n: usize) -> Result<f64> {
    Ok(lp_factor(p, n)? * cnt2)
}

/// NCNT₂ measured with the L_p norm; `compliance` is `Δ − s1(e_b)`.
pub fn lp_rescale_ncnt(compliance: f64, m: f64, p: f64, n: usize) -> Result<f64> {
    Ok((lp_factor(p, n)? * compliance).min(m))
}

/// `s1` of the concatenated `(e_b, e_c)` vector.
pub fn s1_with_couplings(e: &ExpectationVectors) -> f64 {
    let c = e
        .e_c
        .clone()
        .unwrap_or_else(|| e.maximal_coupling_expectations());
    let joined: Vec<f64> = e.e_b.iter().chain(&c).copied().collect();
    s1(&joined).expect("nonempty")
}

/// L1 distance from `(e_b, e_c*)` to the polytope of all couplings,
/// expectation units. Uses the maximal couplings when `e.e_c` is unset.
pub fn cnt0(e: &ExpectationVectors) -> Result<f64> {
    let n = e.rank() as f64;
    let value = s1_with_couplings(e) - (2.0 * n - 2.0);
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NotContextual)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    ExpectationSpace,
    ProbabilitySpace,
}

impl Units {
    pub fn scale(self) -> f64 {
        match self {
            Units::ExpectationSpace => 1.0,
            Units::ProbabilitySpace => 0.25,
        }
    }
}

/// Closed-form summary of a cyclic system.
///
/// `s1_b`, `delta`, `big_delta` and `margin` are criterion quantities and are
/// never rescaled; the distances (`cnt`, `ncnt`, `cnt0`, `m_value`) are given
/// in `units`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub rank: usize,
    pub contextual: bool,
    pub has_deterministic_variable: bool,
    pub s1_b: f64,
    pub delta: f64,
    #[serde(rename = "Delta")]
    pub big_delta: f64,
    pub margin: f64,
    pub cnt: Option<f64>,
    pub ncnt: Option<f64>,
    pub m_value: f64,
    pub cnt0: Option<f64>,
    pub units: Units,
}

impl MeasureReport {
    pub fn in_units(&self, units: Units) -> Self {
        let k = units.scale() / self.units.scale();
        Self {
            cnt: self.cnt.map(|v| v * k),
            ncnt: self.ncnt.map(|v| v * k),
            cnt0: self.cnt0.map(|v| v * k),
            m_value: self.m_value * k,
            units,
            ..self.clone()
        }
    }

    /// `cnt2` if contextual, `−ncnt2` if noncontextual, `None` when degenerate.
    pub fn signed_measure(&self) -> Option<f64> {
        self.cnt.or(self.ncnt.map(|v| -v))
    }
}

/// All closed-form measures of a validated system, in expectation units.
///
/// Systems with a deterministic variable are noncontextual with NCNT₂ not
/// applicable.
pub fn analyze(system: &ValidatedCyclicSystem) -> MeasureReport {
    let e = system.expectations_with_couplings();
    let degenerate = system.has_deterministic_variable();
    let s1_b = s1(&e.e_b).expect("rank >= 2");
    let big_delta = criterion_bound(&e);
    let margin = s1_b - big_delta;
    let contextual = !degenerate && margin > 0.0;
    MeasureReport {
        rank: e.rank(),
        contextual,
        has_deterministic_variable: degenerate,
        s1_b,
        delta: inconsistency(&e),
        big_delta,
        margin,
        cnt: contextual.then_some(margin),
        ncnt: if contextual || degenerate {
            None
        } else {
            Some((-margin).min(m_distance(&e).unwrap_or(0.0)) + 0.0)
        },
        m_value: m_distance(&e).unwrap_or(0.0),
        cnt0: if contextual { cnt0(&e).ok() } else { None },
        units: Units::ExpectationSpace,
    }
}
