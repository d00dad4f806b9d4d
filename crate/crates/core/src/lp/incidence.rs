//! Boolean incidence matrices over the joint events of a coupling.
//!
//! Columns are indexed by 0/1 assignments to all coupling variables: bit `v`
//! of the column index is the value of variable `v`. Each row is the
//! expectation of a product of variables, so the cell is 1 exactly when all
//! of those variables are 1 in the column's event.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::prev;

/// Largest cyclic rank whose incidence matrix is materialized (2^16 columns).
pub const MAX_CYCLIC_RANK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowBlock {
    /// The all-ones row.
    Normalization,
    /// Single-variable expectations.
    Low,
    /// Products of variables within one context.
    Bunch,
    /// Products of same-content variables from different contexts.
    Connection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowLabel {
    pub block: RowBlock,
    /// Bitmask of the variables whose product the row measures.
    pub mask: u64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncidenceMatrix {
    pub num_vars: usize,
    pub variable_names: Vec<String>,
    pub rows: Vec<RowLabel>,
}

impl IncidenceMatrix {
    pub fn num_columns(&self) -> usize {
        1 << self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, row: usize, column: usize) -> u8 {
        let mask = self.rows[row].mask;
        u8::from(column as u64 & mask == mask)
    }

    pub fn dense_row(&self, row: usize) -> Vec<f64> {
        let mask = self.rows[row].mask;
        (0..self.num_columns() as u64)
            .map(|c| if c & mask == mask { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn row_indices(&self, block: RowBlock) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.block == block)
            .map(|(i, _)| i)
            .collect()
    }

    /// `M h` for a vector indexed by columns.
    pub fn apply(&self, h: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                h.iter()
                    .enumerate()
                    .filter(|(c, _)| *c as u64 & r.mask == r.mask)
                    .map(|(_, v)| v)
                    .sum()
            })
            .collect()
    }
}

/// Variable index of `S_i^i` (first slot of context `i`) in a cyclic coupling.
pub fn cyclic_first(i: usize) -> usize {
    2 * i
}

/// Variable index of `S_{i⊕1}^i` (second slot of context `i`).
pub fn cyclic_second(i: usize) -> usize {
    2 * i + 1
}

/// The matrix `M = (1; M_l; M_b; M_c)` for a rank-`n` cyclic system.
///
/// Variables are ordered context by context, `(S_1^1, S_2^1, S_2^2, S_3^2, …,
/// S_n^n, S_1^n)`; bunch rows follow the contexts; connection row `i` pairs
/// `S_i^i` with `S_i^{i⊖1}`, giving the order `(p^{1n}, p^{21}, …, p^{n,n-1})`.
pub fn build_incidence_cyclic(n: usize) -> Result<IncidenceMatrix> {
    if n < 2 {
        return Err(Error::RankTooSmall(n));
    }
    if n > MAX_CYCLIC_RANK {
        return Err(Error::RankTooLarge {
            rank: n,
            max: MAX_CYCLIC_RANK,
        });
    }
    let name = |v: usize| {
        let ctx = v / 2;
        let content = if v % 2 == 0 { ctx } else { (ctx + 1) % n };
        format!("S{}^{}", content + 1, ctx + 1)
    };
    let variable_names: Vec<String> = (0..2 * n).map(name).collect();
    let mut rows = vec![RowLabel {
        block: RowBlock::Normalization,
        mask: 0,
        name: "1".into(),
    }];
    for v in 0..2 * n {
        rows.push(RowLabel {
            block: RowBlock::Low,
            mask: 1 << v,
            name: format!("<{}>", variable_names[v]),
        });
    }
    for i in 0..n {
        let (a, b) = (cyclic_first(i), cyclic_second(i));
        rows.push(RowLabel {
            block: RowBlock::Bunch,
            mask: 1 << a | 1 << b,
            name: format!("<{} {}>", variable_names[a], variable_names[b]),
        });
    }
    for i in 0..n {
        let (a, b) = (cyclic_first(i), cyclic_second(prev(i, n)));
        rows.push(RowLabel {
            block: RowBlock::Connection,
            mask: 1 << a | 1 << b,
            name: format!("<{} {}>", variable_names[a], variable_names[b]),
        });
    }
    Ok(IncidenceMatrix {
        num_vars: 2 * n,
        variable_names,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let m = build_incidence_cyclic(2).unwrap();
        assert_eq!((m.num_rows(), m.num_columns()), (9, 16));
        assert!(m.dense_row(0).iter().all(|&v| v == 1.0));
        let m3 = build_incidence_cyclic(3).unwrap();
        assert_eq!((m3.num_rows(), m3.num_columns()), (13, 64));
        assert_eq!(build_incidence_cyclic(8).unwrap().num_columns(), 65536);
        assert!(matches!(build_incidence_cyclic(9), Err(Error::RankTooLarge { .. })));
    }

    #[test]
    fn all_ones_event_hits_every_row() {
        for n in 2..=5 {
            let m = build_incidence_cyclic(n).unwrap();
            let last = m.num_columns() - 1;
            assert!((0..m.num_rows()).all(|r| m.entry(r, last) == 1));
        }
    }

    #[test]
    fn connection_row_for_content_one() {
        // rank 2: <S_1^1 S_1^2> is the first connection row
        let m = build_incidence_cyclic(2).unwrap();
        let r = m.row_indices(RowBlock::Connection)[0];
        assert_eq!(m.rows[r].name, "<S1^1 S1^2>");
        let s11 = m.variable_names.iter().position(|v| v == "S1^1").unwrap();
        let s12 = m.variable_names.iter().position(|v| v == "S1^2").unwrap();
        for c in 0..16 {
            let expected = u8::from(c >> s11 & 1 == 1 && c >> s12 & 1 == 1);
            assert_eq!(m.entry(r, c), expected);
        }
    }
}
