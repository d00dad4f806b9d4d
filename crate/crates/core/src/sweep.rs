//! Measures along a diagonal of the circumscribing box.
//!
//! For even ranks the diagonal joins the vertex whose last coordinate is its
//! only minimum to the vertex whose last coordinate is its only maximum; both
//! ends are odd vertices. For odd ranks it joins the all-minimum vertex to the
//! all-maximum one.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{criterion_bound, m_distance, s1};
use crate::polytope::box_rb;
use crate::system::ExpectationVectors;

pub const DEFAULT_STEPS: usize = 101;
pub const MIN_SWEEP_RANK: usize = 2;
pub const MAX_SWEEP_RANK: usize = 7;

/// Marginals used along the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginalMode {
    /// Every expectation zero.
    Consistent,
    /// `⟨A_i^i⟩ = −0.2` and `⟨A_{i⊕1}^i⟩ = 0.1` in every context.
    Inconsistent,
}

impl MarginalMode {
    pub fn e_l(self, n: usize) -> Vec<[f64; 2]> {
        match self {
            MarginalMode::Consistent => vec![[0.0, 0.0]; n],
            MarginalMode::Inconsistent => vec![[-0.2, 0.1]; n],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MarginalMode::Consistent => "consistent",
            MarginalMode::Inconsistent => "inconsistent",
        }
    }
}

impl std::str::FromStr for MarginalMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "consistent" => Ok(MarginalMode::Consistent),
            "inconsistent" => Ok(MarginalMode::Inconsistent),
            other => Err(format!("unknown marginal mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub s1: f64,
    #[serde(rename = "Delta")]
    pub big_delta: f64,
    pub m: f64,
    /// CNT₂ when contextual, −NCNT₂ otherwise (expectation units).
    pub signed_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub rank: usize,
    pub mode: MarginalMode,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    /// L1 length of one step along the diagonal.
    pub step_l1: f64,
    pub rows: Vec<SweepRow>,
}

/// Endpoints of the sweep diagonal of `e_l`'s box.
pub fn diagonal(e_l: &[[f64; 2]]) -> (Vec<f64>, Vec<f64>) {
    let n = e_l.len();
    let e = ExpectationVectors {
        e_l: e_l.to_vec(),
        e_b: vec![0.0; n],
        e_c: None,
    };
    let b = box_rb(&e);
    let lo: Vec<f64> = b.intervals.iter().map(|p| p.0).collect();
    let hi: Vec<f64> = b.intervals.iter().map(|p| p.1).collect();
    if n % 2 == 0 {
        let mut start = hi.clone();
        start[n - 1] = lo[n - 1];
        let mut end = lo;
        end[n - 1] = hi[n - 1];
        (start, end)
    } else {
        (lo, hi)
    }
}

/// `steps` evenly spaced points of the diagonal, endpoints included.
pub fn sweep_diagonal(rank: usize, mode: MarginalMode, steps: usize) -> Result<Sweep> {
    if !(MIN_SWEEP_RANK..=MAX_SWEEP_RANK).contains(&rank) {
        return Err(Error::BadRank(rank));
    }
    if steps < 2 {
        return Err(Error::SamplesTooFew { got: steps, min: 2 });
    }
    let e_l = mode.e_l(rank);
    let (start, end) = diagonal(&e_l);
    let rows = (0..steps)
        .map(|k| {
            let t = k as f64 / (steps - 1) as f64;
            let e_b = start.iter().zip(&end).map(|(a, b)| a + t * (b - a)).collect();
            row(t, ExpectationVectors { e_l: e_l.clone(), e_b, e_c: None })
        })
        .collect();
    let length: f64 = start.iter().zip(&end).map(|(a, b)| (b - a).abs()).sum();
    Ok(Sweep {
        rank,
        mode,
        start,
        end,
        step_l1: length / (steps - 1) as f64,
        rows,
    })
}

fn row(t: f64, e: ExpectationVectors) -> SweepRow {
    let s1 = s1(&e.e_b).expect("rank >= 2");
    let big_delta = criterion_bound(&e);
    // endpoints sit on the box surface; clamp round-off
    let m = m_distance(&e).unwrap_or(0.0);
    let margin = s1 - big_delta;
    let signed_measure = if margin > 0.0 { margin } else { -(-margin).min(m) };
    SweepRow {
        t,
        s1,
        big_delta,
        m,
        signed_measure,
    }
}

fn fixed(v: f64) -> String {
    let s = format!("{v:.12}");
    // no negative zero in the output
    if s.trim_start_matches('-').bytes().all(|c| c == b'0' || c == b'.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

impl Sweep {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Malformed(format!("csv output: {e}"));
        w.write_record(["t", "s1", "Delta", "m", "signed_measure"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([r.t, r.s1, r.big_delta, r.m, r.signed_measure].map(fixed))
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Malformed(format!("csv output: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.signed_measure)
    }

    /// The signed measure is positive somewhere and nonpositive somewhere.
    pub fn crosses_zero(&self) -> bool {
        let min = self.values().fold(f64::INFINITY, f64::min);
        let max = self.values().fold(f64::NEG_INFINITY, f64::max);
        min <= 0.0 && max > 0.0
    }

    pub fn max_jump(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| (w[1].signed_measure - w[0].signed_measure).abs())
            .fold(0.0, f64::max)
    }

    /// Interior grid points where the discrete second difference exceeds
    /// `tol`, i.e. where the curve bends.
    pub fn bends(&self, tol: f64) -> usize {
        self.rows
            .windows(3)
            .filter(|w| (w[2].signed_measure - 2.0 * w[1].signed_measure + w[0].signed_measure).abs() > tol)
            .count()
    }
}
