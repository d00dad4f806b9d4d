use super::simplex::{LinearProgram, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// Collects rows with mixed relations over nonnegative variables and emits a
/// standard-form program, appending one slack column per inequality.
///
/// Variable indices handed out by [`LpBuilder::add_var`] are preserved, so
/// solution entries `0..num_vars` line up with them.
#[derive(Debug, Clone)]
pub struct LpBuilder {
    objective: Vec<f64>,
    sense: Sense,
    rows: Vec<(Vec<(usize, f64)>, Relation, f64)>,
}

impl LpBuilder {
    pub fn new(sense: Sense) -> Self {
        Self {
            objective: Vec::new(),
            sense,
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, cost: f64) -> usize {
        self.objective.push(cost);
        self.objective.len() - 1
    }

    pub fn add_vars(&mut self, count: usize, cost: f64) -> std::ops::Range<usize> {
        let start = self.objective.len();
        self.objective.extend(std::iter::repeat_n(cost, count));
        start..self.objective.len()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.rows.push((coeffs, relation, rhs));
    }

    pub fn build(&self) -> LinearProgram {
        let n = self.objective.len();
        let slacks = self.rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let width = n + slacks;
        let mut objective = self.objective.clone();
        objective.resize(width, 0.0);
        let mut a = Vec::with_capacity(self.rows.len());
        let mut b = Vec::with_capacity(self.rows.len());
        let mut slack = n;
        for (coeffs, relation, rhs) in &self.rows {
            let mut row = vec![0.0; width];
            for &(j, v) in coeffs {
                row[j] += v;
            }
            match relation {
                Relation::Eq => {}
                Relation::Le => {
                    row[slack] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                }
            }
            a.push(row);
            b.push(*rhs);
        }
        LinearProgram {
            objective,
            sense: self.sense,
            a,
            b,
        }
    }
}
