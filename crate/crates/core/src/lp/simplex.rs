//! Dense two-phase tableau simplex.
//!
//! Problems are taken in standard form `min/max c·x  s.t.  A x = b, x >= 0`.
//! Phase 1 starts from an all-artificial basis (rows with negative right-hand
//! side are negated first) and minimizes the artificial sum; phase 2 optimizes
//! the real objective from the basis phase 1 leaves behind.

use num_rational::BigRational;
use serde::Serialize;

use super::scalar::Scalar;
use super::LpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `sense c·x  s.t.  A x = b, x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    fn check(&self) -> Result<(), LpError> {
        if self.a.len() != self.b.len() {
            return Err(LpError::Dimension(format!(
                "{} constraint rows but {} right-hand sides",
                self.a.len(),
                self.b.len()
            )));
        }
        if let Some((i, row)) = self
            .a
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != self.objective.len())
        {
            return Err(LpError::Dimension(format!(
                "row {i} has {} entries, expected {}",
                row.len(),
                self.objective.len()
            )));
        }
        let finite = self.objective.iter().chain(&self.b).chain(self.a.iter().flatten());
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(LpError::NumericalFailure("non-finite input".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values; empty unless optimal.
    pub x: Vec<f64>,
    /// Objective value in the problem's own sense; NaN unless optimal.
    pub objective: f64,
    /// Optimal phase-1 artificial sum (0 for feasible problems).
    pub infeasibility: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    #[default]
    Float,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PivotRule {
    /// Lowest-index entering and leaving variables.
    #[default]
    Bland,
    /// Most negative reduced cost; falls back to Bland after a run of
    /// degenerate pivots.
    Dantzig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub arithmetic: Arithmetic,
    pub rule: PivotRule,
    /// Smallest magnitude accepted as a pivot element.
    pub pivot_tol: f64,
    /// Phase-1 optimum above this means infeasible.
    pub feasibility_tol: f64,
    /// Reduced costs within this of zero count as nonnegative.
    pub optimality_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            arithmetic: Arithmetic::Float,
            rule: PivotRule::Bland,
            pivot_tol: 1e-10,
            feasibility_tol: 1e-9,
            optimality_tol: 1e-10,
            max_iterations: 1_000_000,
        }
    }
}

impl SolverOptions {
    pub fn exact() -> Self {
        Self {
            arithmetic: Arithmetic::Exact,
            ..Self::default()
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_with(lp, &SolverOptions::default())
}

pub fn solve_with(lp: &LinearProgram, options: &SolverOptions) -> Result<LpSolution, LpError> {
    lp.check()?;
    match options.arithmetic {
        Arithmetic::Float => Tableau::<f64>::run(lp, options),
        Arithmetic::Exact => Tableau::<BigRational>::run(lp, options),
    }
}

/// Floating-point tableau entries below this are round-off and become zero.
const SNAP_TOL: f64 = 1e-13;
/// Floating-point ratios this close are ties for the lowest-index rule.
const RATIO_TIE_TOL: f64 = 1e-12;

/// Row-major tableau with the objective row kept separately.
struct Tableau<F> {
    rows: usize,
    /// Structural plus artificial columns; the right-hand side is column `cols`.
    cols: usize,
    data: Vec<F>,
    /// Reduced costs followed by the negated objective value.
    cost: Vec<F>,
    basis: Vec<usize>,
    /// Number of structural columns; the next `rows` columns hold `B⁻¹`.
    structural: usize,
    /// Columns allowed to enter the basis.
    active: usize,
    iterations: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<F: Scalar> Tableau<F> {
    fn run(lp: &LinearProgram, opt: &SolverOptions) -> Result<LpSolution, LpError> {
        let n = lp.num_vars();
        let mut t = Self::phase_one_start(lp);

        if let Outcome::Unbounded = t.iterate(opt)? {
            return Err(LpError::NumericalFailure("phase 1 reported unbounded".into()));
        }
        let infeasibility = t.cost[t.cols].neg().to_f64();
        if t.cost[t.cols].neg().greater_than(opt.feasibility_tol) {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: f64::NAN,
                infeasibility,
                iterations: t.iterations,
            });
        }
        t.drive_out_artificials(n, opt);

        // phase 2 over structural columns only
        t.active = n;
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let c: Vec<F> = lp.objective.iter().map(|&v| F::from_f64(sign * v)).collect();
        t.set_cost(&c);
        if let Outcome::Unbounded = t.iterate(opt)? {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                objective: f64::NAN,
                infeasibility,
                iterations: t.iterations,
            });
        }
        let mut x = vec![0.0; n];
        for (r, &j) in t.basis.iter().enumerate() {
            if j < n {
                x[j] = t.data[r * (t.cols + 1) + t.cols].to_f64();
            }
        }
        let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        if !objective.is_finite() {
            return Err(LpError::NumericalFailure("non-finite objective".into()));
        }
        Ok(LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
            infeasibility,
            iterations: t.iterations,
        })
    }

    fn phase_one_start(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let cols = n + m;
        let width = cols + 1;
        let mut data = vec![F::zero(); m * width];
        for (r, (row, &rhs)) in lp.a.iter().zip(&lp.b).enumerate() {
            let flip = rhs < 0.0;
            let base = r * width;
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    data[base + j] = F::from_f64(if flip { -v } else { v });
                }
            }
            data[base + n + r] = F::one();
            data[base + cols] = F::from_f64(if flip { -rhs } else { rhs });
        }
        let mut t = Self {
            rows: m,
            cols,
            data,
            cost: vec![F::zero(); width],
            basis: (n..n + m).collect(),
            structural: n,
            active: cols,
            iterations: 0,
        };
        let mut c = vec![F::zero(); cols];
        for v in &mut c[n..] {
            *v = F::one();
        }
        t.set_cost(&c);
        t
    }

    /// Reduced costs `c_j − c_B B⁻¹ A_j` for the current basis.
    fn set_cost(&mut self, c: &[F]) {
        let width = self.cols + 1;
        let mut cost = vec![F::zero(); width];
        for (j, v) in c.iter().enumerate() {
            cost[j] = v.clone();
        }
        for r in 0..self.rows {
            let cb = match c.get(self.basis[r]) {
                Some(v) if !v.is_exact_zero() => v.clone(),
                _ => continue,
            };
            let row = &self.data[r * width..(r + 1) * width];
            for (k, v) in row.iter().enumerate() {
                cost[k].sub_mul_assign(&cb, v);
            }
        }
        self.cost = cost;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.cols + 1;
        let inv = F::one().div(&self.data[r * width + c]);
        for v in &mut self.data[r * width..(r + 1) * width] {
            *v = v.mul(&inv);
        }
        let (head, rest) = self.data.split_at_mut(r * width);
        let (pivot_row, tail) = rest.split_at_mut(width);
        for v in pivot_row.iter_mut() {
            v.snap(SNAP_TOL);
        }
        for other in head.chunks_mut(width).chain(tail.chunks_mut(width)) {
            let f = other[c].clone();
            if f.is_exact_zero() {
                continue;
            }
            for (v, p) in other.iter_mut().zip(pivot_row.iter()) {
                v.sub_mul_assign(&f, p);
                v.snap(SNAP_TOL);
            }
        }
        let f = self.cost[c].clone();
        if !f.is_exact_zero() {
            for (v, p) in self.cost.iter_mut().zip(pivot_row.iter()) {
                v.sub_mul_assign(&f, p);
                v.snap(SNAP_TOL);
            }
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    fn entering(&self, opt: &SolverOptions, bland: bool) -> Option<usize> {
        let candidates = (0..self.active).filter(|&j| self.cost[j].less_than_neg(opt.optimality_tol));
        if bland {
            return candidates.into_iter().next();
        }
        let mut best: Option<usize> = None;
        for j in candidates {
            match best {
                Some(b) if !self.cost[j].lt(&self.cost[b]) => {}
                _ => best = Some(j),
            }
        }
        best
    }

    /// Minimum-ratio row. Ties are broken lexicographically on the
    /// corresponding rows of `B⁻¹` scaled by the pivot element, which rules
    /// out cycling whatever the entering rule.
    fn leaving(&self, c: usize, opt: &SolverOptions) -> Option<usize> {
        let width = self.cols + 1;
        let mut tied: Vec<usize> = Vec::new();
        let mut best: Option<F> = None;
        for r in 0..self.rows {
            let a = &self.data[r * width + c];
            if !a.greater_than(opt.pivot_tol) {
                continue;
            }
            let ratio = self.data[r * width + self.cols].div(a);
            match &best {
                Some(b) if b.lt_tol(&ratio, RATIO_TIE_TOL) => {}
                Some(b) if !ratio.lt_tol(b, RATIO_TIE_TOL) => tied.push(r),
                _ => {
                    best = Some(ratio);
                    tied.clear();
                    tied.push(r);
                }
            }
        }
        let inverse = self.structural..self.structural + (self.cols - self.structural);
        for j in inverse {
            if tied.len() <= 1 {
                break;
            }
            let scaled = |r: usize| self.data[r * width + j].div(&self.data[r * width + c]);
            let mut min = scaled(tied[0]);
            for &r in &tied[1..] {
                let v = scaled(r);
                if v.lt(&min) {
                    min = v;
                }
            }
            tied.retain(|&r| !min.lt_tol(&scaled(r), RATIO_TIE_TOL));
        }
        tied.into_iter().min_by_key(|&r| self.basis[r])
    }

    fn iterate(&mut self, opt: &SolverOptions) -> Result<Outcome, LpError> {
        let mut degenerate_run = 0usize;
        let fallback_after = 50;
        loop {
            if self.iterations >= opt.max_iterations {
                return Err(LpError::NumericalFailure(format!(
                    "iteration limit {} reached",
                    opt.max_iterations
                )));
            }
            let bland = opt.rule == PivotRule::Bland || degenerate_run >= fallback_after;
            let Some(c) = self.entering(opt, bland) else {
                return Ok(Outcome::Optimal);
            };
            let Some(r) = self.leaving(c, opt) else {
                return Ok(Outcome::Unbounded);
            };
            let width = self.cols + 1;
            if self.data[r * width + self.cols].greater_than(opt.pivot_tol) {
                degenerate_run = 0;
            } else {
                degenerate_run += 1;
            }
            self.pivot(r, c);
            if self.cost[self.cols].to_f64().is_nan() {
                return Err(LpError::NumericalFailure("NaN in tableau".into()));
            }
        }
    }

    /// Pivot basic artificials out where possible and drop rows that are
    /// left redundant.
    fn drive_out_artificials(&mut self, n: usize, opt: &SolverOptions) {
        let width = self.cols + 1;
        let mut r = 0;
        while r < self.rows {
            if self.basis[r] < n {
                r += 1;
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                let v = self.data[r * width + j].to_f64().abs();
                let nonzero = match opt.arithmetic {
                    Arithmetic::Exact => !self.data[r * width + j].is_exact_zero(),
                    Arithmetic::Float => v > opt.pivot_tol,
                };
                if nonzero && best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((j, v));
                }
            }
            match best {
                Some((j, _)) => {
                    self.pivot(r, j);
                    self.iterations -= 1;
                    r += 1;
                }
                None => {
                    self.data.drain(r * width..(r + 1) * width);
                    self.basis.remove(r);
                    self.rows -= 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(objective: Vec<f64>, sense: Sense, a: Vec<Vec<f64>>, b: Vec<f64>) -> LinearProgram {
        LinearProgram { objective, sense, a, b }
    }

    #[test]
    fn single_equality() {
        let p = lp(vec![1.0], Sense::Maximize, vec![vec![1.0]], vec![0.5]);
        for opts in [SolverOptions::default(), SolverOptions::exact()] {
            let s = solve_with(&p, &opts).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            assert_eq!(s.objective, 0.5);
        }
    }

    #[test]
    fn inconsistent_rows_are_infeasible() {
        let p = lp(vec![0.0], Sense::Minimize, vec![vec![1.0], vec![1.0]], vec![1.0, 2.0]);
        assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);
        assert_eq!(
            solve_with(&p, &SolverOptions::exact()).unwrap().status,
            LpStatus::Infeasible
        );
    }

    #[test]
    fn unbounded() {
        // max x s.t. x - y = 1
        let p = lp(vec![1.0, 0.0], Sense::Maximize, vec![vec![1.0, -1.0]], vec![1.0]);
        assert_eq!(solve(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 → (2, 6), 36
        let p = lp(
            vec![3.0, 5.0, 0.0, 0.0, 0.0],
            Sense::Maximize,
            vec![
                vec![1.0, 0.0, 1.0, 0.0, 0.0],
                vec![0.0, 2.0, 0.0, 1.0, 0.0],
                vec![3.0, 2.0, 0.0, 0.0, 1.0],
            ],
            vec![4.0, 12.0, 18.0],
        );
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let s = solve_with(&p, &SolverOptions { rule, ..Default::default() }).unwrap();
            assert!((s.objective - 36.0).abs() < 1e-12);
            assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        }
        let s = solve_with(&p, &SolverOptions::exact()).unwrap();
        assert_eq!(s.objective, 36.0);
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // -x - y = -1 twice, min x → 0
        let p = lp(
            vec![1.0, 0.0],
            Sense::Minimize,
            vec![vec![-1.0, -1.0], vec![-1.0, -1.0]],
            vec![-1.0, -1.0],
        );
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.objective.abs() < 1e-12);
        assert!((s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Beale's classic cycling LP under the textbook largest-coefficient rule.
        let p = lp(
            vec![-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0],
            Sense::Minimize,
            vec![
                vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
                vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            ],
            vec![0.0, 0.0, 1.0],
        );
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let s = solve_with(&p, &SolverOptions { rule, ..Default::default() }).unwrap();
            assert!((s.objective + 0.05).abs() < 1e-12, "{rule:?}: {}", s.objective);
        }
    }

    #[test]
    fn dimension_errors() {
        let p = lp(vec![1.0, 2.0], Sense::Minimize, vec![vec![1.0]], vec![1.0]);
        assert!(matches!(solve(&p), Err(LpError::Dimension(_))));
        let p = lp(vec![1.0], Sense::Minimize, vec![vec![1.0]], vec![1.0, 2.0]);
        assert!(matches!(solve(&p), Err(LpError::Dimension(_))));
    }
}
