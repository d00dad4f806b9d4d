//! LP routes to the (non)contextuality verdict and measures of cyclic systems.
//!
//! All coupling programs work with probability-unit targets; the returned
//! contextuality measures are therefore in probability units (multiply by 4
//! for expectation units). `ncnt2_lp` works directly in expectation space.

use serde::Serialize;

use super::distance::{distance_to_surface, Norm};
use super::{
    build_incidence_cyclic, solve_with, IncidenceMatrix, LpBuilder, LpError, LpStatus, Relation,
    RowBlock, Sense, SolverOptions,
};
use crate::error::{Error, Result};
use crate::polytope::{contains_all, facets_eb};
use crate::system::ValidatedCyclicSystem;

/// Values below this are treated as a zero measure.
pub const ZERO_MEASURE_TOL: f64 = 1e-9;

/// What a row of the incidence matrix does in a coupling program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowRole {
    /// `M_r h = target_r`.
    Fixed,
    /// Unconstrained.
    Free,
    /// Contributes `M_r h` to a maximized objective.
    Maximize,
    /// `M_r h + u_r − v_r = target_r`, contributing `u_r + v_r` to a minimized
    /// objective.
    Deviation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingOutcome {
    pub status: LpStatus,
    /// Probability of each joint event; empty unless optimal.
    pub h: Vec<f64>,
    pub objective: f64,
}

impl CouplingOutcome {
    pub fn is_feasible(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves the coupling program over `h >= 0` described by `roles`.
pub fn solve_coupling(
    matrix: &IncidenceMatrix,
    targets: &[f64],
    roles: &[RowRole],
    options: &SolverOptions,
) -> Result<CouplingOutcome> {
    if targets.len() != matrix.num_rows() || roles.len() != matrix.num_rows() {
        return Err(LpError::Dimension(format!(
            "{} rows, {} targets, {} roles",
            matrix.num_rows(),
            targets.len(),
            roles.len()
        ))
        .into());
    }
    let maximizing = roles.contains(&RowRole::Maximize);
    if maximizing && roles.contains(&RowRole::Deviation) {
        return Err(LpError::Dimension("cannot mix maximized and deviation rows".into()).into());
    }
    let cols = matrix.num_columns();
    let mut lp = LpBuilder::new(if maximizing { Sense::Maximize } else { Sense::Minimize });
    let h = lp.add_vars(cols, 0.0);
    let mut objective_rows = Vec::new();
    for (r, role) in roles.iter().enumerate() {
        let mask = matrix.rows[r].mask;
        let mut coeffs: Vec<(usize, f64)> = h
            .clone()
            .filter(|&c| c as u64 & mask == mask)
            .map(|c| (c, 1.0))
            .collect();
        match role {
            RowRole::Free => continue,
            RowRole::Maximize => {
                objective_rows.push(coeffs);
                continue;
            }
            RowRole::Fixed => {}
            RowRole::Deviation => {
                let u = lp.add_var(1.0);
                let v = lp.add_var(1.0);
                coeffs.push((u, 1.0));
                coeffs.push((v, -1.0));
            }
        }
        lp.add_row(coeffs, Relation::Eq, targets[r]);
    }
    let mut program = lp.build();
    for coeffs in objective_rows {
        for (c, v) in coeffs {
            program.objective[c] += v;
        }
    }
    let sol = solve_with(&program, options)?;
    Ok(CouplingOutcome {
        status: sol.status,
        h: if sol.is_optimal() { sol.x[..cols].to_vec() } else { Vec::new() },
        objective: sol.objective,
    })
}

/// `(1, p_l*, p_b*, p_c*)` in the row order of [`build_incidence_cyclic`].
pub fn cyclic_targets(system: &ValidatedCyclicSystem) -> Vec<f64> {
    let s = system.system();
    let mut t = vec![1.0];
    t.extend(s.marginals.iter().flatten());
    t.extend(&s.bunch_products);
    t.extend(system.maximal_connection_couplings().probabilities);
    t
}

fn roles_by_block(matrix: &IncidenceMatrix, role: impl Fn(RowBlock) -> RowRole) -> Vec<RowRole> {
    matrix.rows.iter().map(|r| role(r.block)).collect()
}

/// A coupling with maximal connections, if one exists.
pub fn noncontextual_coupling(system: &ValidatedCyclicSystem, options: &SolverOptions) -> Result<Option<Vec<f64>>> {
    let m = build_incidence_cyclic(system.rank())?;
    let roles = roles_by_block(&m, |_| RowRole::Fixed);
    let out = solve_coupling(&m, &cyclic_targets(system), &roles, options)?;
    Ok(out.is_feasible().then_some(out.h))
}

/// Whether `M h = (1, p_l*, p_b*, p_c*)` has a solution `h >= 0`.
pub fn is_noncontextual_lp(system: &ValidatedCyclicSystem) -> Result<bool> {
    is_noncontextual_lp_with(system, &SolverOptions::default())
}

pub fn is_noncontextual_lp_with(system: &ValidatedCyclicSystem, options: &SolverOptions) -> Result<bool> {
    Ok(noncontextual_coupling(system, options)?.is_some())
}

fn require_positive(value: f64) -> Result<f64> {
    if value > ZERO_MEASURE_TOL {
        Ok(value)
    } else {
        Err(Error::NotContextual)
    }
}

fn optimum(out: CouplingOutcome) -> Result<f64> {
    match out.status {
        LpStatus::Optimal => Ok(out.objective),
        LpStatus::Unbounded => Err(LpError::Unbounded.into()),
        LpStatus::Infeasible => Err(LpError::NumericalFailure(
            "coupling program without connection constraints is infeasible".into(),
        )
        .into()),
    }
}

/// `Σ p_c* − max Σ M_c h` with the low and bunch rows fixed.
pub fn cnt1_lp(system: &ValidatedCyclicSystem) -> Result<f64> {
    cnt1_lp_with(system, &SolverOptions::default())
}

pub fn cnt1_lp_with(system: &ValidatedCyclicSystem, options: &SolverOptions) -> Result<f64> {
    let m = build_incidence_cyclic(system.rank())?;
    let roles = roles_by_block(&m, |b| match b {
        RowBlock::Connection => RowRole::Maximize,
        _ => RowRole::Fixed,
    });
    let target: f64 = system.maximal_connection_couplings().probabilities.iter().sum();
    let best = optimum(solve_coupling(&m, &cyclic_targets(system), &roles, options)?)?;
    require_positive(target - best)
}

/// L1 distance from `p_b*` to the bunch vectors compatible with `p_c*`.
pub fn cnt2_lp(system: &ValidatedCyclicSystem) -> Result<f64> {
    cnt2_lp_with(system, &SolverOptions::default())
}

pub fn cnt2_lp_with(system: &ValidatedCyclicSystem, options: &SolverOptions) -> Result<f64> {
    let m = build_incidence_cyclic(system.rank())?;
    let roles = roles_by_block(&m, |b| match b {
        RowBlock::Bunch => RowRole::Deviation,
        _ => RowRole::Fixed,
    });
    require_positive(optimum(solve_coupling(&m, &cyclic_targets(system), &roles, options)?)?)
}

/// L1 distance from `(p_b*, p_c*)` to the set of all couplings with `p_l*`.
pub fn cnt0_lp(system: &ValidatedCyclicSystem) -> Result<f64> {
    cnt0_lp_with(system, &SolverOptions::default())
}

pub fn cnt0_lp_with(system: &ValidatedCyclicSystem, options: &SolverOptions) -> Result<f64> {
    let m = build_incidence_cyclic(system.rank())?;
    let roles = roles_by_block(&m, |b| match b {
        RowBlock::Bunch | RowBlock::Connection => RowRole::Deviation,
        _ => RowRole::Fixed,
    });
    require_positive(optimum(solve_coupling(&m, &cyclic_targets(system), &roles, options)?)?)
}

/// L1 distance (expectation units) from `e_b*` to the surface of `E_b`, as the
/// minimum over facets of the distance to that facet within `E_b`.
pub fn ncnt2_lp(system: &ValidatedCyclicSystem) -> Result<f64> {
    ncnt2_lp_with(system, &SolverOptions::default())
}

pub fn ncnt2_lp_with(system: &ValidatedCyclicSystem, options: &SolverOptions) -> Result<f64> {
    let e = system.to_expectations();
    let facets = facets_eb(&e)?;
    if !contains_all(&facets, &e.e_b, ZERO_MEASURE_TOL) {
        return Err(Error::IsContextual);
    }
    distance_to_surface(&e.e_b, &facets, Norm::L1, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::CyclicSystem;

    fn pr_box() -> ValidatedCyclicSystem {
        CyclicSystem::consistent(&[0.5; 4], vec![0.5, 0.5, 0.5, 0.0]).validate().unwrap()
    }

    fn tsirelson() -> ValidatedCyclicSystem {
        let c = (1.0 + std::f64::consts::FRAC_1_SQRT_2) / 4.0;
        let a = (1.0 - std::f64::consts::FRAC_1_SQRT_2) / 4.0;
        CyclicSystem::consistent(&[0.5; 4], vec![c, c, c, a])
            .validate()
            .unwrap()
    }

    #[test]
    fn pr_box_measures() {
        let s = pr_box();
        assert!(!is_noncontextual_lp(&s).unwrap());
        for v in [cnt1_lp(&s), cnt2_lp(&s), cnt0_lp(&s)] {
            assert!((v.unwrap() - 0.5).abs() < 1e-9);
        }
        let exact = SolverOptions::exact();
        assert!((cnt2_lp_with(&s, &exact).unwrap() - 0.5).abs() < 1e-12);
        assert!(!is_noncontextual_lp_with(&s, &exact).unwrap());
    }

    #[test]
    fn tsirelson_measures() {
        let s = tsirelson();
        let expected = (2.0 * std::f64::consts::SQRT_2 - 2.0) / 4.0;
        assert!((cnt1_lp(&s).unwrap() - expected).abs() < 1e-9);
        assert!((cnt2_lp(&s).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn noncontextual_inputs() {
        for n in 2..=5 {
            let s = CyclicSystem::independent_uniform(n).validate().unwrap();
            let h = noncontextual_coupling(&s, &SolverOptions::default()).unwrap().unwrap();
            assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(h.iter().all(|&v| v >= -1e-12));
            assert_eq!(cnt1_lp(&s), Err(Error::NotContextual));
            assert_eq!(cnt2_lp(&s), Err(Error::NotContextual));
            assert_eq!(cnt0_lp(&s), Err(Error::NotContextual));
        }
        let det = CyclicSystem::new(vec![[1.0, 0.3], [0.3, 0.6]], vec![0.3, 0.2]).validate().unwrap();
        assert!(is_noncontextual_lp(&det).unwrap());
    }

    #[test]
    fn ncnt2_examples() {
        // n = 4 consistent, e_b = 0.5 everywhere: box facet at distance 0.5
        let s = CyclicSystem::consistent(&[0.5; 4], vec![0.375; 4]).validate().unwrap();
        assert!((ncnt2_lp(&s).unwrap() - 0.5).abs() < 1e-9);
        // e_b = (0.6, 0.6, 0.6, 0): Δ − s1 = 0.2 < m = 0.4
        let s = CyclicSystem::consistent(&[0.5; 4], vec![0.4, 0.4, 0.4, 0.25]).validate().unwrap();
        let e = s.to_expectations();
        let closed = crate::measures::ncnt2(&e).unwrap();
        assert!((ncnt2_lp(&s).unwrap() - closed).abs() < 1e-9);
        assert!((closed - 0.2).abs() < 1e-9);
        // surface point
        let s = CyclicSystem::consistent(&[0.5; 3], vec![0.5, 0.5, 0.5]).validate().unwrap();
        assert!(ncnt2_lp(&s).unwrap().abs() < 1e-9);
        assert_eq!(ncnt2_lp(&pr_box()), Err(Error::IsContextual));
        let det = CyclicSystem::new(vec![[1.0, 0.3], [0.3, 0.6]], vec![0.3, 0.2]).validate().unwrap();
        assert_eq!(ncnt2_lp(&det), Err(Error::DegenerateBox));
    }
}
