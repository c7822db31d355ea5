//! Clustering quality: accuracy under the best one-to-one label matching,
//! normalized mutual information, and clustering error.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix_io::canonicalize_labels;

/// Co-occurrence counts of predicted (rows) and true (columns) labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: DMatrix<usize>,
    pub n: usize,
}

impl ContingencyTable {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} predicted labels vs {} true labels",
                pred.len(),
                truth.len()
            )));
        }
        if pred.is_empty() {
            return Err(Error::Empty("no labels to compare".into()));
        }
        let p = canonicalize_labels(pred);
        let t = canonicalize_labels(truth);
        let rows = p.iter().max().map_or(0, |m| m + 1);
        let cols = t.iter().max().map_or(0, |m| m + 1);
        let mut counts = DMatrix::zeros(rows, cols);
        for (&a, &b) in p.iter().zip(&t) {
            counts[(a, b)] += 1;
        }
        Ok(Self {
            counts,
            n: pred.len(),
        })
    }

    fn row_sums(&self) -> Vec<usize> {
        self.counts.row_iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        self.counts.column_iter().map(|c| c.iter().sum()).collect()
    }
}

/// Minimum-cost one-to-one assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Column assigned to each row; `None` only when rows outnumber columns.
    pub row_to_col: Vec<Option<usize>>,
    pub cost: f64,
}

/// Hungarian method (shortest augmenting path with potentials) on a rectangular
/// cost matrix. Every row is matched when rows ≤ columns, every column otherwise.
pub fn optimal_assignment(cost: &DMatrix<f64>) -> Assignment {
    let (rows, cols) = cost.shape();
    if rows == 0 || cols == 0 {
        return Assignment {
            row_to_col: vec![None; rows],
            cost: 0.0,
        };
    }
    if rows > cols {
        let t = optimal_assignment(&cost.transpose());
        let mut row_to_col = vec![None; rows];
        for (c, r) in t.row_to_col.iter().enumerate() {
            if let Some(r) = r {
                row_to_col[*r] = Some(c);
            }
        }
        return Assignment {
            row_to_col,
            cost: t.cost,
        };
    }

    let (n, m) = (rows, cols);
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    // owner[j]: row (1-based) matched to column j; 0 = free
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![None; n];
    for j in 1..=m {
        if owner[j] != 0 {
            row_to_col[owner[j] - 1] = Some(j - 1);
        }
    }
    let total = row_to_col
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| cost[(r, c)]))
        .sum();
    Assignment {
        row_to_col,
        cost: total,
    }
}

/// Fraction of samples correctly labelled under the best one-to-one matching
/// of predicted to true labels.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let size = table.counts.nrows().max(table.counts.ncols());
    let mut cost = DMatrix::zeros(size, size);
    let (rows, cols) = table.counts.shape();
    for r in 0..rows {
        for c in 0..cols {
            cost[(r, c)] = -(table.counts[(r, c)] as f64);
        }
    }
    let matched = -optimal_assignment(&cost).cost;
    Ok(matched.round() / table.n as f64)
}

fn entropy(sums: &[usize], n: usize) -> f64 {
    let n = n as f64;
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information normalized by the geometric mean of the two entropies.
/// When either partition is a single cluster the score is 1 for identical
/// partitions and 0 otherwise.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let hp = entropy(&rows, table.n);
    let ht = entropy(&cols, table.n);
    if hp == 0.0 || ht == 0.0 {
        let identical = table.counts.nrows() == table.counts.ncols()
            && table.counts.row_iter().all(|r| r.iter().filter(|&&c| c > 0).count() == 1)
            && table.counts.column_iter().all(|c| c.iter().filter(|&&x| x > 0).count() == 1);
        return Ok(if identical { 1.0 } else { 0.0 });
    }
    let n = table.n as f64;
    let mut mi = 0.0;
    for (r, &rs) in rows.iter().enumerate() {
        for (c, &cs) in cols.iter().enumerate() {
            let count = table.counts[(r, c)];
            if count > 0 {
                let joint = count as f64 / n;
                mi += joint * (joint * n * n / (rs as f64 * cs as f64)).ln();
            }
        }
    }
    Ok((mi / (hp * ht).sqrt()).clamp(0.0, 1.0))
}

/// `1 − accuracy`.
pub fn clustering_error(pred: &[usize], truth: &[usize]) -> Result<f64> {
    Ok(1.0 - accuracy(pred, truth)?)
}
