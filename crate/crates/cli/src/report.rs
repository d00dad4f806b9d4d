//! The analysis report: closed forms next to LP values, with provenance.

use serde::Serialize;
use sha2::{Digest, Sha256};

use contextuality::general::{
    cnt1_general_with, cnt2_general_with, cyclic_subsystems, is_contextual_general_with, subsystem_is_contextual,
    GeneralSystem,
};
use contextuality::lp::oracle::{cnt0_lp_with, cnt1_lp_with, cnt2_lp_with, is_noncontextual_lp_with, ncnt2_lp_with};
use contextuality::lp::{Arithmetic, SolverOptions};
use contextuality::system::DEFAULT_TOL;
use contextuality::{analyze, Error, MeasureReport, Units, ValidatedCyclicSystem};

use crate::error::CliResult;

/// LP and closed-form values agree when within this.
pub const ORACLE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub validation: f64,
    pub pivot: f64,
    pub feasibility: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub input_sha256: String,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub version: &'static str,
}

impl Provenance {
    pub fn new(input: &[u8], seed: Option<u64>, options: &SolverOptions) -> Self {
        Self {
            input_sha256: hex::encode(Sha256::digest(input)),
            seed,
            tolerances: Tolerances {
                validation: DEFAULT_TOL,
                pivot: options.pivot_tol,
                feasibility: options.feasibility_tol,
                oracle: ORACLE_TOL,
            },
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

pub fn units_note(units: Units) -> &'static str {
    match units {
        Units::ExpectationSpace => "distances in expectation (±1) units; divide by 4 for probability units",
        Units::ProbabilitySpace => "distances in probability units; multiply by 4 for expectation units",
    }
}

fn lp_mode(options: &SolverOptions) -> &'static str {
    match options.arithmetic {
        Arithmetic::Float => "float",
        Arithmetic::Exact => "exact",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LpValues {
    pub noncontextual: bool,
    pub cnt1: Option<f64>,
    pub cnt2: Option<f64>,
    pub cnt0: Option<f64>,
    pub ncnt2: Option<f64>,
}

/// Absolute differences between closed-form and LP values.
#[derive(Debug, Clone, Serialize)]
pub struct Agreement {
    pub verdicts_agree: bool,
    pub cnt1: Option<f64>,
    pub cnt2: Option<f64>,
    pub cnt0: Option<f64>,
    pub ncnt2: Option<f64>,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CyclicReport {
    pub kind: &'static str,
    pub label: Option<String>,
    pub provenance: Provenance,
    pub lp_mode: &'static str,
    pub units_note: &'static str,
    pub closed_form: MeasureReport,
    pub lp: LpValues,
    pub agreement: Agreement,
}

/// `NotContextual`/`IsContextual`/`DegenerateBox` mean "no value".
fn optional(r: contextuality::Result<f64>) -> CliResult<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NotContextual | Error::IsContextual | Error::DegenerateBox) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn delta(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some((a? - b?).abs())
}

pub fn cyclic_report(
    system: &ValidatedCyclicSystem,
    label: Option<String>,
    units: Units,
    options: &SolverOptions,
    provenance: Provenance,
) -> CliResult<CyclicReport> {
    let closed = analyze(system).in_units(units);
    // the coupling programs work in probability units, the surface program
    // in expectation units
    let from_p = 0.25 / units.scale();
    let from_e = 1.0 / units.scale();
    let scale = |v: Option<f64>, k: f64| v.map(|x| x * k);
    let lp = LpValues {
        noncontextual: is_noncontextual_lp_with(system, options)?,
        cnt1: scale(optional(cnt1_lp_with(system, options))?, 1.0 / from_p),
        cnt2: scale(optional(cnt2_lp_with(system, options))?, 1.0 / from_p),
        cnt0: scale(optional(cnt0_lp_with(system, options))?, 1.0 / from_p),
        ncnt2: scale(optional(ncnt2_lp_with(system, options))?, 1.0 / from_e),
    };
    let agreement = {
        let cnt1 = delta(closed.cnt, lp.cnt1);
        let cnt2 = delta(closed.cnt, lp.cnt2);
        let cnt0 = delta(closed.cnt0, lp.cnt0);
        let ncnt2 = delta(closed.ncnt, lp.ncnt2);
        let verdicts_agree = closed.contextual != lp.noncontextual;
        let presence_agrees = closed.cnt.is_some() == lp.cnt2.is_some() && closed.ncnt.is_some() == lp.ncnt2.is_some();
        let within_tolerance = verdicts_agree
            && presence_agrees
            && [cnt1, cnt2, cnt0, ncnt2].iter().flatten().all(|&d| d <= ORACLE_TOL);
        Agreement {
            verdicts_agree,
            cnt1,
            cnt2,
            cnt0,
            ncnt2,
            within_tolerance,
        }
    };
    Ok(CyclicReport {
        kind: "cyclic",
        label,
        provenance,
        lp_mode: lp_mode(options),
        units_note: units_note(units),
        closed_form: closed,
        lp,
        agreement,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralReport {
    pub kind: &'static str,
    pub label: Option<String>,
    pub provenance: Provenance,
    pub lp_mode: &'static str,
    pub units: Units,
    pub units_note: &'static str,
    pub contextual: bool,
    pub cnt1: Option<f64>,
    pub cnt2: Option<f64>,
    pub cyclic_subsystems: usize,
    pub contextual_cyclic_subsystems: usize,
}

pub fn general_report(
    system: &GeneralSystem,
    label: Option<String>,
    units: Units,
    options: &SolverOptions,
    provenance: Provenance,
) -> CliResult<GeneralReport> {
    let contextual = is_contextual_general_with(system, options)?;
    let to_units = |v: Option<f64>| v.map(|x| x * units.scale() / 0.25);
    let (cnt1, cnt2) = if contextual {
        (
            to_units(optional(cnt1_general_with(system, options))?),
            to_units(optional(cnt2_general_with(system, options))?),
        )
    } else {
        (None, None)
    };
    let subs = cyclic_subsystems(system);
    Ok(GeneralReport {
        kind: "general",
        label,
        provenance,
        lp_mode: lp_mode(options),
        units,
        units_note: units_note(units),
        contextual,
        cnt1,
        cnt2,
        cyclic_subsystems: subs.len(),
        contextual_cyclic_subsystems: subs.iter().filter(|s| subsystem_is_contextual(s)).count(),
    })
}
