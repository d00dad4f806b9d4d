//! Cyclic systems of binary random variables.
//!
//! Context `i` (0-based) jointly records contents `i` and `i ⊕ 1`. Its bunch is
//! described by the two marginals `Pr[R_i^i = 1]`, `Pr[R_{i⊕1}^i = 1]` and the
//! product probability `Pr[R_i^i = R_{i⊕1}^i = 1]`. Connection `i` pairs the two
//! variables measuring content `i`: `R_i^i` (first slot of context `i`) and
//! `R_i^{i⊖1}` (second slot of context `i ⊖ 1`).

use serde::{Deserialize, Serialize};

use crate::error::{BoundSide, Error, Result};

/// Default tolerance for equality and bound checks on probabilities.
pub const DEFAULT_TOL: f64 = 1e-9;

#[inline]
pub fn next(i: usize, n: usize) -> usize {
    (i + 1) % n
}

#[inline]
pub fn prev(i: usize, n: usize) -> usize {
    (i + n - 1) % n
}

/// A rank-`n` cyclic system in probability (0/1) form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicSystem {
    /// `marginals[i] = [Pr[R_i^i = 1], Pr[R_{i⊕1}^i = 1]]`.
    pub marginals: Vec<[f64; 2]>,
    /// `bunch_products[i] = Pr[R_i^i = R_{i⊕1}^i = 1]`.
    pub bunch_products: Vec<f64>,
}

/// A system whose invariants have been checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedCyclicSystem {
    system: CyclicSystem,
    has_deterministic_variable: bool,
}

impl CyclicSystem {
    pub fn new(marginals: Vec<[f64; 2]>, bunch_products: Vec<f64>) -> Self {
        Self {
            marginals,
            bunch_products,
        }
    }

    /// Consistently connected system: content `j` has `Pr[=1] = content_marginals[j]`
    /// in both contexts that record it.
    pub fn consistent(content_marginals: &[f64], bunch_products: Vec<f64>) -> Self {
        let n = content_marginals.len();
        let marginals = (0..n)
            .map(|i| [content_marginals[i], content_marginals[next(i, n)]])
            .collect();
        Self::new(marginals, bunch_products)
    }

    /// Every variable a fair coin, every bunch independent.
    pub fn independent_uniform(n: usize) -> Self {
        Self::new(vec![[0.5, 0.5]; n], vec![0.25; n])
    }

    pub fn rank(&self) -> usize {
        self.marginals.len()
    }

    pub fn validate(&self) -> Result<ValidatedCyclicSystem> {
        self.validate_with_tol(DEFAULT_TOL)
    }

    pub fn validate_with_tol(&self, tol: f64) -> Result<ValidatedCyclicSystem> {
        let n = self.rank();
        if n < 2 {
            return Err(Error::RankTooSmall(n));
        }
        if self.bunch_products.len() != n {
            return Err(Error::Malformed(format!(
                "{} bunch products for rank {n}",
                self.bunch_products.len()
            )));
        }
        let check = |field: String, value: f64| -> Result<()> {
            if !value.is_finite() || value < 0.0 || value > 1.0 {
                Err(Error::OutOfRange { field, value })
            } else {
                Ok(())
            }
        };
        let mut deterministic = false;
        for (i, [a, b]) in self.marginals.iter().copied().enumerate() {
            check(format!("marginals[{i}][0]"), a)?;
            check(format!("marginals[{i}][1]"), b)?;
            deterministic |= a == 0.0 || a == 1.0 || b == 0.0 || b == 1.0;
        }
        for (i, &p) in self.bunch_products.iter().enumerate() {
            check(format!("bunch_products[{i}]"), p)?;
            let [a, b] = self.marginals[i];
            if p < (a + b - 1.0).max(0.0) - tol {
                return Err(Error::FrechetViolation {
                    context: i,
                    side: BoundSide::Lower,
                });
            }
            if p > a.min(b) + tol {
                return Err(Error::FrechetViolation {
                    context: i,
                    side: BoundSide::Upper,
                });
            }
        }
        Ok(ValidatedCyclicSystem {
            system: self.clone(),
            has_deterministic_variable: deterministic,
        })
    }

    /// Componentwise relabeling to ±1 expectations; `e_c` is left empty.
    pub fn to_expectations(&self) -> ExpectationVectors {
        let e_l = self
            .marginals
            .iter()
            .map(|&[a, b]| [2.0 * a - 1.0, 2.0 * b - 1.0])
            .collect();
        let e_b = self
            .bunch_products
            .iter()
            .zip(&self.marginals)
            .map(|(&p, &[a, b])| 4.0 * p - 2.0 * a - 2.0 * b + 1.0)
            .collect();
        ExpectationVectors {
            e_l,
            e_b,
            e_c: None,
        }
    }

    pub fn from_expectations(e: &ExpectationVectors) -> Self {
        let marginals: Vec<[f64; 2]> = e
            .e_l
            .iter()
            .map(|&[a, b]| [(a + 1.0) / 2.0, (b + 1.0) / 2.0])
            .collect();
        let bunch_products = e
            .e_b
            .iter()
            .zip(&e.e_l)
            .map(|(&eb, &[a, b])| (eb + a + b + 1.0) / 4.0)
            .collect();
        Self::new(marginals, bunch_products)
    }

    /// The two marginals of connection `i`: `(Pr[R_i^i = 1], Pr[R_i^{i⊖1} = 1])`.
    pub fn connection_marginals(&self, i: usize) -> (f64, f64) {
        let n = self.rank();
        (self.marginals[i][0], self.marginals[prev(i, n)][1])
    }

    pub fn is_consistently_connected(&self, tol: f64) -> bool {
        (0..self.rank()).all(|i| {
            let (a, b) = self.connection_marginals(i);
            (a - b).abs() <= tol
        })
    }
}

impl ValidatedCyclicSystem {
    pub fn system(&self) -> &CyclicSystem {
        &self.system
    }

    pub fn rank(&self) -> usize {
        self.system.rank()
    }

    pub fn has_deterministic_variable(&self) -> bool {
        self.has_deterministic_variable
    }

    pub fn to_expectations(&self) -> ExpectationVectors {
        self.system.to_expectations()
    }

    /// Expectation vectors with `e_c` set to the maximal connection couplings.
    pub fn expectations_with_couplings(&self) -> ExpectationVectors {
        let mut e = self.system.to_expectations();
        e.e_c = Some(self.maximal_connection_couplings().expectations);
        e
    }

    pub fn maximal_connection_couplings(&self) -> MaximalCouplings {
        let n = self.rank();
        let mut probabilities = Vec::with_capacity(n);
        let mut expectations = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = self.system.connection_marginals(i);
            let p = a.min(b);
            probabilities.push(p);
            expectations.push(4.0 * p - 2.0 * a - 2.0 * b + 1.0);
        }
        MaximalCouplings {
            probabilities,
            expectations,
        }
    }
}

/// Product probabilities `p_c*` and their ±1 images `e_c*`, in connection order
/// `(p^{1,n}, p^{2,1}, …, p^{n,n-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalCouplings {
    pub probabilities: Vec<f64>,
    pub expectations: Vec<f64>,
}

/// The system in ±1 form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationVectors {
    /// `e_l[i] = [⟨A_i^i⟩, ⟨A_{i⊕1}^i⟩]`.
    pub e_l: Vec<[f64; 2]>,
    /// `e_b[i] = ⟨A_i^i A_{i⊕1}^i⟩`.
    pub e_b: Vec<f64>,
    /// `e_c[i] = ⟨U_i^i U_i^{i⊖1}⟩`, when a connection coupling has been chosen.
    pub e_c: Option<Vec<f64>>,
}

impl ExpectationVectors {
    pub fn rank(&self) -> usize {
        self.e_b.len()
    }

    /// `e_i^i` and `e_i^{i⊖1}`, the two expectations of content `i`.
    pub fn connection(&self, i: usize) -> (f64, f64) {
        let n = self.rank();
        (self.e_l[i][0], self.e_l[prev(i, n)][1])
    }

    /// `1 - |e_i^i - e_i^{i⊖1}|` for every content.
    pub fn maximal_coupling_expectations(&self) -> Vec<f64> {
        (0..self.rank())
            .map(|i| {
                let (a, b) = self.connection(i);
                1.0 - (a - b).abs()
            })
            .collect()
    }

    pub fn with_maximal_couplings(mut self) -> Self {
        self.e_c = Some(self.maximal_coupling_expectations());
        self
    }

    pub fn has_deterministic_variable(&self) -> bool {
        self.e_l.iter().flatten().any(|e| e.abs() >= 1.0)
    }

    /// Flip the sign of every variable measuring each content `j` with
    /// `content_flips[j]` set.
    pub fn variant(&self, content_flips: &[bool]) -> Self {
        let n = self.rank();
        assert_eq!(content_flips.len(), n, "one flip flag per content");
        let mut out = self.clone();
        for (j, _) in content_flips.iter().enumerate().filter(|(_, &f)| f) {
            let pj = prev(j, n);
            out.e_l[j][0] = -out.e_l[j][0];
            out.e_l[pj][1] = -out.e_l[pj][1];
            out.e_b[pj] = -out.e_b[pj];
            out.e_b[j] = -out.e_b[j];
        }
        out
    }

    /// Relabel contexts so that old context `(i + shift) mod n` becomes context `i`.
    pub fn rotate(&self, shift: usize) -> Self {
        let n = self.rank();
        let at = |i: usize| (i + shift) % n;
        Self {
            e_l: (0..n).map(|i| self.e_l[at(i)]).collect(),
            e_b: (0..n).map(|i| self.e_b[at(i)]).collect(),
            e_c: self
                .e_c
                .as_ref()
                .map(|c| (0..n).map(|i| c[at(i)]).collect()),
        }
    }

    /// The canonical variant: after rotating by `rotation` and flipping
    /// `flips`, `|e_b[n-1]| <= e_b[i]` for every `i < n - 1`.
    ///
    /// Ties are resolved towards the smallest rotation index.
    pub fn canonicalize(&self) -> Canonical {
        let n = self.rank();
        let min_abs = self.e_b.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
        let rotation = (0..n)
            .filter(|&k| self.e_b[k].abs() == min_abs)
            .map(|k| (k + 1) % n)
            .min()
            .expect("nonempty bunch vector");
        let rotated = self.rotate(rotation);
        let mut signs: Vec<f64> = rotated.e_b.clone();
        let mut flips = vec![false; n];
        for i in 0..n - 1 {
            if signs[i] < 0.0 {
                // content i + 1 sits between bunches i and i + 1
                flips[i + 1] = true;
                signs[i] = -signs[i];
                signs[i + 1] = -signs[i + 1];
            }
        }
        Canonical {
            expectations: rotated.variant(&flips),
            flips,
            rotation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Canonical {
    pub expectations: ExpectationVectors,
    /// Content flips applied after the rotation, in rotated indexing.
    pub flips: Vec<bool>,
    pub rotation: usize,
}

/// Raw per-context outcome counts `(c00, c01, c10, c11)`, where `cab` counts
/// trials with the first variable equal to `a` and the second to `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialCounts {
    pub contexts: Vec<[u64; 4]>,
}

impl TrialCounts {
    /// Relative-frequency estimate of the system.
    pub fn estimate(&self) -> Result<CyclicSystem> {
        let mut marginals = Vec::with_capacity(self.contexts.len());
        let mut products = Vec::with_capacity(self.contexts.len());
        for (i, &[c00, c01, c10, c11]) in self.contexts.iter().enumerate() {
            let total = c00 + c01 + c10 + c11;
            if total == 0 {
                return Err(Error::EmptyContext(i));
            }
            let t = total as f64;
            marginals.push([(c10 + c11) as f64 / t, (c01 + c11) as f64 / t]);
            products.push(c11 as f64 / t);
        }
        Ok(CyclicSystem::new(marginals, products))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn validate_examples() {
        let v = CyclicSystem::independent_uniform(2).validate().unwrap();
        assert!(!v.has_deterministic_variable());

        let bad = CyclicSystem::new(vec![[0.5, 0.5], [0.5, 0.5]], vec![0.6, 0.25]);
        assert_eq!(
            bad.validate().unwrap_err(),
            Error::FrechetViolation {
                context: 0,
                side: BoundSide::Upper
            }
        );

        // p_1^1 = 1 forces p_12 = p_2^1 in context 1
        let det = CyclicSystem::new(vec![[1.0, 0.5], [0.5, 0.5], [0.5, 1.0]], vec![0.5, 0.25, 0.5]);
        assert!(det.validate().unwrap().has_deterministic_variable());
    }

    #[test]
    fn validate_errors() {
        assert_eq!(
            CyclicSystem::new(vec![[0.5, 0.5]], vec![0.25]).validate(),
            Err(Error::RankTooSmall(1))
        );
        let lower = CyclicSystem::new(vec![[0.8, 0.8], [0.5, 0.5]], vec![0.5, 0.25]);
        assert_eq!(
            lower.validate().unwrap_err(),
            Error::FrechetViolation {
                context: 0,
                side: BoundSide::Lower
            }
        );
        let range = CyclicSystem::new(vec![[1.2, 0.5], [0.5, 0.5]], vec![0.25, 0.25]);
        assert!(matches!(range.validate(), Err(Error::OutOfRange { .. })));
        let nan = CyclicSystem::new(vec![[0.5, 0.5], [0.5, 0.5]], vec![f64::NAN, 0.25]);
        assert!(matches!(nan.validate(), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn phi_examples() {
        let e = CyclicSystem::new(vec![[0.5, 0.5]; 2], vec![0.25, 0.5]).to_expectations();
        assert_eq!(e.e_l[0], [0.0, 0.0]);
        assert_eq!(e.e_b, vec![0.0, 1.0]);
        let e = CyclicSystem::new(vec![[0.4, 0.5]; 2], vec![0.2; 2]).to_expectations();
        assert_close(e.e_l[0][0], -0.2, 1e-15);
    }

    #[test]
    fn maximal_couplings_examples() {
        let s = CyclicSystem::consistent(&[0.3, 0.6, 0.5], vec![0.2, 0.3, 0.2]);
        let v = s.validate().unwrap();
        let c = v.maximal_connection_couplings();
        for e in &c.expectations {
            assert_close(*e, 1.0, 1e-12);
        }
        // e_i^i = -0.2, e_i^{i-1} = 0.1 everywhere
        let s = CyclicSystem::new(vec![[0.4, 0.55]; 4], vec![0.3; 4]);
        let c = s.validate().unwrap().maximal_connection_couplings();
        for (&p, &e) in c.probabilities.iter().zip(&c.expectations) {
            assert_close(p, 0.4, 1e-15);
            assert_close(e, 0.7, 1e-12);
        }
    }

    /// Largest `Pr[T = T' = 1]` over couplings of two Bernoulli marginals,
    /// found by scanning the one free cell of the 2x2 table.
    fn brute_force_max_product(a: f64, b: f64) -> f64 {
        let steps = 200_000;
        let mut best: f64 = 0.0;
        for k in 0..=steps {
            let p11 = k as f64 / steps as f64;
            let p10 = a - p11;
            let p01 = b - p11;
            let p00 = 1.0 - p11 - p10 - p01;
            if p10 >= -1e-12 && p01 >= -1e-12 && p00 >= -1e-12 {
                best = best.max(p11);
            }
        }
        best
    }

    #[test]
    fn maximal_coupling_matches_brute_force() {
        for &(a, b) in &[(0.4, 0.55), (0.1, 0.9), (0.73, 0.21), (0.5, 0.5)] {
            let p = brute_force_max_product(a, b);
            assert_close(p, a.min(b), 1e-5);
            let e = 4.0 * p - 2.0 * a - 2.0 * b + 1.0;
            assert_close(e, 1.0 - (2.0 * a - 2.0 * b).abs(), 2e-5);
        }
    }

    #[test]
    fn variant_example() {
        let e = ExpectationVectors {
            e_l: vec![[0.1, -0.2], [0.3, 0.0], [0.2, 0.4]],
            e_b: vec![-0.3, 0.5, 0.4],
            e_c: None,
        };
        let v = e.variant(&[true, false, false]);
        assert_eq!(v.e_b, vec![0.3, 0.5, -0.4]);
        assert_eq!(v.e_l, vec![[-0.1, -0.2], [0.3, 0.0], [0.2, -0.4]]);
        assert_eq!(e.variant(&[false; 3]), e);
        let all = e.variant(&[true; 3]);
        assert_eq!(all.e_b, e.e_b);
        for (a, b) in all.e_l.iter().zip(&e.e_l) {
            assert_eq!(a[0], -b[0]);
            assert_eq!(a[1], -b[1]);
        }
    }

    #[test]
    fn canonicalize_examples() {
        let mk = |e_b: Vec<f64>| ExpectationVectors {
            e_l: vec![[0.0, 0.0]; e_b.len()],
            e_b,
            e_c: None,
        };
        let c = mk(vec![0.5, 0.4, 0.3]).canonicalize();
        assert_eq!(c.rotation, 0);
        assert_eq!(c.expectations.e_b, vec![0.5, 0.4, 0.3]);

        let c = mk(vec![-0.3, 0.5, 0.4]).canonicalize();
        assert_eq!(c.rotation, 1);
        assert_eq!(c.expectations.e_b, vec![0.5, 0.4, -0.3]);

        let c = mk(vec![0.0; 3]).canonicalize();
        assert_eq!(c.expectations.e_b, vec![0.0; 3]);
        assert_eq!(c.rotation, 0);
    }

    #[test]
    fn ingest_examples() {
        let t = TrialCounts {
            contexts: vec![[25, 25, 25, 25], [0, 0, 0, 100], [10, 40, 20, 30]],
        };
        let s = t.estimate().unwrap();
        assert_eq!(s.marginals[0], [0.5, 0.5]);
        assert_eq!(s.bunch_products[0], 0.25);
        assert_eq!(s.marginals[1], [1.0, 1.0]);
        assert_eq!(s.bunch_products[1], 1.0);
        assert_close(s.marginals[2][0], 0.5, 1e-15);
        assert_close(s.marginals[2][1], 0.7, 1e-15);
        assert_close(s.bunch_products[2], 0.3, 1e-15);

        let empty = TrialCounts {
            contexts: vec![[1, 2, 3, 4], [0, 0, 0, 0]],
        };
        assert_eq!(empty.estimate(), Err(Error::EmptyContext(1)));
    }
}
