//! Row-sparse design matrices.
//!
//! Fixed-effect dummies make most entries zero, so rows are stored as
//! (column, value) lists and memory stays linear in the nonzeros.

use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;

use super::StatsError;

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    names: Vec<String>,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Design {
    pub fn from_dense(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Design, StatsError> {
        let mut b = DesignBuilder::new();
        for name in &names {
            b.add_column(name);
        }
        for row in rows {
            if row.len() != names.len() {
                return Err(StatsError::LengthMismatch { left: row.len(), right: names.len() });
            }
            b.push_row(row.iter().copied().enumerate());
        }
        Ok(b.build())
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[s..e], &self.values[s..e])
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_dot(&self, i: usize, beta: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&j, v)| beta[j] * v).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows(), self.n_cols());
        for i in 0..self.n_rows() {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Gram matrix of the design with a leading column of ones prepended.
    fn gram_with_ones(&self) -> DMatrix<f64> {
        let k = self.n_cols() + 1;
        let mut g = DMatrix::zeros(k, k);
        for i in 0..self.n_rows() {
            let (idx, val) = self.row(i);
            g[(0, 0)] += 1.0;
            for (a, (&ja, &va)) in idx.iter().zip(val).enumerate() {
                g[(0, ja + 1)] += va;
                g[(ja + 1, 0)] += va;
                for (&jb, &vb) in idx[a..].iter().zip(&val[a..]) {
                    g[(ja + 1, jb + 1)] += va * vb;
                    if ja != jb {
                        g[(jb + 1, ja + 1)] += va * vb;
                    }
                }
            }
        }
        g
    }

    /// Columns that are linear combinations of an implicit intercept and the
    /// columns before them. Empty when `[1, X]` has full column rank.
    pub fn dependent_columns_given_intercept(&self) -> Vec<String> {
        let g = self.gram_with_ones();
        dependent_by_cholesky(&g).into_iter().filter(|&j| j > 0).map(|j| self.names[j - 1].clone()).collect()
    }
}

// Cholesky that skips (and reports) pivots that vanish relative to the diagonal.
fn dependent_by_cholesky(g: &DMatrix<f64>) -> Vec<usize> {
    let k = g.nrows();
    let mut l = DMatrix::<f64>::zeros(k, k);
    let mut dependent = Vec::new();
    for j in 0..k {
        let diag = g[(j, j)];
        let mut d = diag;
        for p in 0..j {
            d -= l[(j, p)] * l[(j, p)];
        }
        if diag <= 0.0 || d <= 1e-9 * diag {
            dependent.push(j);
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..k {
            let mut s = g[(i, j)];
            for p in 0..j {
                s -= l[(i, p)] * l[(j, p)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    dependent
}

/// Incremental builder; rows may be pushed as soon as their entries are known.
#[derive(Debug, Default)]
pub struct DesignBuilder {
    names: Vec<String>,
    lookup: HashMap<String, usize>,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Dummy coding of a categorical variable; the lexicographically first level
/// is the reference and gets no column.
#[derive(Debug, Clone)]
pub struct Factor {
    columns: HashMap<String, usize>,
    reference: String,
}

impl Factor {
    pub fn column(&self, level: &str) -> Option<usize> {
        self.columns.get(level).copied()
    }

    pub fn reference(&self) -> &str {
        &self.reference
    }
}

impl DesignBuilder {
    pub fn new() -> DesignBuilder {
        DesignBuilder { indptr: vec![0], ..Default::default() }
    }

    pub fn add_column(&mut self, name: &str) -> usize {
        if let Some(&j) = self.lookup.get(name) {
            return j;
        }
        let j = self.names.len();
        self.names.push(name.to_string());
        self.lookup.insert(name.to_string(), j);
        j
    }

    /// Registers dummy columns `prefix[level]` for every non-reference level.
    /// Returns `None` when there are no levels.
    pub fn add_factor<'a, I>(&mut self, prefix: &str, levels: I) -> Option<Factor>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let levels: BTreeSet<&str> = levels.into_iter().collect();
        let mut iter = levels.into_iter();
        let reference = iter.next()?.to_string();
        let columns = iter.map(|lvl| (lvl.to_string(), self.add_column(&format!("{prefix}[{lvl}]")))).collect();
        Some(Factor { columns, reference })
    }

    /// Appends a row; zero values are dropped and duplicate columns summed.
    pub fn push_row<I>(&mut self, entries: I)
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let start = self.indices.len();
        for (j, v) in entries {
            debug_assert!(j < self.names.len(), "column {j} not registered");
            if v == 0.0 {
                continue;
            }
            if let Some(pos) = self.indices[start..].iter().position(|&c| c == j) {
                self.values[start + pos] += v;
            } else {
                self.indices.push(j);
                self.values.push(v);
            }
        }
        self.indptr.push(self.indices.len());
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn build(self) -> Design {
        Design { names: self.names, indptr: self.indptr, indices: self.indices, values: self.values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_uses_first_level_as_reference() {
        let mut b = DesignBuilder::new();
        let env = b.add_column("Env");
        let f = b.add_factor("author", ["zed", "amy", "bob", "amy"]).unwrap();
        assert_eq!(f.reference(), "amy");
        assert_eq!(f.column("amy"), None);
        let bob = f.column("bob").unwrap();
        b.push_row([(env, 1.0), (bob, 1.0)]);
        b.push_row([(env, 0.0)]);
        let d = b.build();
        assert_eq!(d.names(), &["Env", "author[bob]", "author[zed]"]);
        assert_eq!(d.nnz(), 2);
        assert_eq!(d.row(1).0.len(), 0);
    }

    #[test]
    fn detects_dependence_on_intercept() {
        // columns: a, b = 1 - a, c
        let rows = vec![vec![1.0, 0.0, 0.3], vec![0.0, 1.0, 0.1], vec![1.0, 0.0, 0.9], vec![0.0, 1.0, 0.4]];
        let d = Design::from_dense(vec!["a".into(), "b".into(), "c".into()], &rows).unwrap();
        assert_eq!(d.dependent_columns_given_intercept(), vec!["b".to_string()]);
    }

    #[test]
    fn dense_round_trip() {
        let rows = vec![vec![1.0, 0.0], vec![2.0, 3.0]];
        let d = Design::from_dense(vec!["x".into(), "y".into()], &rows).unwrap();
        let m = d.to_dense();
        assert_eq!(m[(1, 1)], 3.0);
        assert_eq!(d.row_dot(1, &[1.0, 1.0]), 5.0);
    }
}
