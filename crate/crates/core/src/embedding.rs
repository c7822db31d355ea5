//! Graph-embedded linear subspace learning.
//!
//! Finds `Θ` minimizing `‖ΘᵀY − ΘᵀYW‖_F²` subject to `ΘᵀYYᵀΘ = I`, i.e. the
//! generalized eigenproblem `Y M Yᵀ θ = λ Y Yᵀ θ` with `M = (I − W)ᵀ(I − W)`.
//! `YYᵀ` is restricted to its numerical range before whitening, so
//! small-sample data with singular `YYᵀ` is handled.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Provenance, SimilarityGraph};
use crate::linalg::{fix_column_signs, sorted_symmetric_eigen, RANK_TOL};
use crate::matrix_io::DataMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    /// m×d projection.
    pub theta: DMatrix<f64>,
    /// Generalized eigenvalues of the returned directions, ascending.
    pub eigenvalues: DVector<f64>,
    pub graph: Provenance,
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        self.theta.ncols()
    }

    /// Keep only the first `d` directions.
    pub fn truncated(&self, d: usize) -> Result<Self> {
        if d == 0 || d > self.dim() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate a {}-dimensional embedding to {d}",
                self.dim()
            )));
        }
        Ok(Self {
            theta: self.theta.columns(0, d).into_owned(),
            eigenvalues: self.eigenvalues.rows(0, d).into_owned(),
            graph: self.graph,
        })
    }
}

/// Whether generalized eigenpairs with (numerically) zero eigenvalue may be returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NullDirections {
    /// Only eigenvalues above `1e-10` of the largest one are eligible.
    #[default]
    Skip,
    /// Take the smallest eigenvalues whatever their size.
    Keep,
}

/// The `d` smallest nonzero generalized eigenpairs.
pub fn npe_embed(data: &DataMatrix, graph: &SimilarityGraph, d: usize) -> Result<EmbeddingModel> {
    npe_embed_with(data, graph, d, NullDirections::Skip)
}

pub fn npe_embed_with(
    data: &DataMatrix,
    graph: &SimilarityGraph,
    d: usize,
    null: NullDirections,
) -> Result<EmbeddingModel> {
    let y = data.values();
    let n = y.ncols();
    if graph.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "graph has {} vertices but data has {n} samples",
            graph.len()
        )));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("embedding dimension must be >= 1".into()));
    }
    let residual_op = y * (DMatrix::<f64>::identity(n, n) - graph.weights()).transpose();
    let objective = symmetric_part(&residual_op * residual_op.transpose());
    let scatter = symmetric_part(y * y.transpose());

    let (svals, svecs) = sorted_symmetric_eigen(&scatter)?;
    let top = svals.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svals.len()).filter(|&i| svals[i] > RANK_TOL * top).collect();
    if keep.is_empty() {
        return Err(Error::Degenerate("YYᵀ has no nonzero eigenvalues".into()));
    }
    let mut whitening = DMatrix::zeros(y.nrows(), keep.len());
    for (col, &i) in keep.iter().enumerate() {
        whitening.set_column(col, &(svecs.column(i) / svals[i].sqrt()));
    }

    let reduced = symmetric_part(whitening.transpose() * &objective * &whitening);
    let (vals, vecs) = sorted_symmetric_eigen(&reduced)?;
    let largest = vals.iter().copied().fold(0.0, f64::max);
    let eligible: Vec<usize> = match null {
        NullDirections::Skip => (0..vals.len()).filter(|&i| vals[i] > RANK_TOL * largest).collect(),
        NullDirections::Keep => (0..vals.len()).collect(),
    };
    if eligible.len() < d {
        return Err(Error::InsufficientEigenpairs {
            requested: d,
            available: eligible.len(),
        });
    }
    let mut theta = DMatrix::zeros(y.nrows(), d);
    let mut eigenvalues = DVector::zeros(d);
    for (col, &i) in eligible.iter().take(d).enumerate() {
        theta.set_column(col, &(&whitening * vecs.column(i)));
        eigenvalues[col] = vals[i];
    }
    fix_column_signs(&mut theta);
    Ok(EmbeddingModel {
        theta,
        eigenvalues,
        graph: graph.provenance(),
    })
}

fn symmetric_part(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

/// `ΘᵀX`, labels carried through.
pub fn transform(model: &EmbeddingModel, data: &DataMatrix) -> Result<DataMatrix> {
    if data.dim() != model.theta.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "projection expects dimension {}, got {}",
            model.theta.nrows(),
            data.dim()
        )));
    }
    data.map_values(model.theta.transpose() * data.values())
}

/// Label of the Euclidean nearest training column for every test column
/// (ties: lower training index).
pub fn nearest_neighbor_labels(
    train: &DMatrix<f64>,
    train_labels: &[usize],
    test: &DMatrix<f64>,
) -> Result<Vec<usize>> {
    if train.ncols() == 0 {
        return Err(Error::Empty("training set has no samples".into()));
    }
    if train_labels.len() != train.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} training samples",
            train_labels.len(),
            train.ncols()
        )));
    }
    if train.nrows() != test.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "train dimension {} vs test dimension {}",
            train.nrows(),
            test.nrows()
        )));
    }
    Ok(test
        .column_iter()
        .map(|x| {
            let mut best = (f64::INFINITY, 0);
            for (j, t) in train.column_iter().enumerate() {
                let d = (t - x).norm_squared();
                if d < best.0 {
                    best = (d, j);
                }
            }
            train_labels[best.1]
        })
        .collect())
}

/// 1-NN classification of `test` against labelled `train`.
pub fn nn_classify(train: &DataMatrix, test: &DataMatrix) -> Result<Vec<usize>> {
    let labels = train
        .labels()
        .ok_or_else(|| Error::InvalidArgument("training data must be labelled".into()))?;
    nearest_neighbor_labels(train.values(), labels, test.values())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyRow {
    pub d: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyTable {
    pub rows: Vec<AccuracyRow>,
    /// Highest accuracy, smallest `d` on ties.
    pub best: AccuracyRow,
}

impl AccuracyTable {
    /// CSV with a `d,accuracy` header; the best row is marked by a trailing comment.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,accuracy\n");
        for row in &self.rows {
            let _ = writeln!(out, "{},{}", row.d, row.accuracy);
        }
        let _ = writeln!(out, "# best d={} accuracy={}", self.best.d, self.best.accuracy);
        out
    }
}

/// Build the graph on `train`, embed, project both sets and score 1-NN accuracy
/// for every dimension in `d_grid`.
pub fn evaluate_subspace_learning(
    train: &DataMatrix,
    test: &DataMatrix,
    graph_params: Provenance,
    d_grid: &[usize],
) -> Result<AccuracyTable> {
    let test_labels = test
        .labels()
        .ok_or_else(|| Error::InvalidArgument("test data must be labelled".into()))?;
    if train.labels().is_none() {
        return Err(Error::InvalidArgument("training data must be labelled".into()));
    }
    let max_d = *d_grid
        .iter()
        .max()
        .ok_or_else(|| Error::Empty("dimension grid is empty".into()))?;
    let graph = graph_params.build(train)?;
    let full = npe_embed(train, &graph, max_d)?;

    let mut rows = Vec::with_capacity(d_grid.len());
    for &d in d_grid {
        let model = full.truncated(d)?;
        let train_x = transform(&model, train)?;
        let test_x = transform(&model, test)?;
        let predicted = nn_classify(&train_x, &test_x)?;
        let correct = predicted.iter().zip(test_labels).filter(|(p, t)| p == t).count();
        rows.push(AccuracyRow {
            d,
            accuracy: correct as f64 / test_labels.len() as f64,
        });
    }
    let best = rows
        .iter()
        .copied()
        .reduce(|b, r| if r.accuracy > b.accuracy || (r.accuracy == b.accuracy && r.d < b.d) { r } else { b })
        .expect("non-empty grid");
    Ok(AccuracyTable { rows, best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labelled(rows: usize, cols: usize, vals: &[f64], labels: &[usize]) -> DataMatrix {
        DataMatrix::new(DMatrix::from_column_slice(rows, cols, vals), "t")
            .unwrap()
            .with_labels(labels)
            .unwrap()
    }

    #[test]
    fn identity_projection_leaves_data_unchanged() {
        let x = labelled(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[0, 1, 1]);
        let model = EmbeddingModel {
            theta: DMatrix::identity(2, 2),
            eigenvalues: DVector::from_vec(vec![1.0, 2.0]),
            graph: Provenance::External,
        };
        assert_eq!(transform(&model, &x).unwrap(), x);
    }

    #[test]
    fn transform_matches_hand_product() {
        let x = labelled(2, 2, &[1.0, 2.0, 3.0, 4.0], &[0, 1]);
        let model = EmbeddingModel {
            theta: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, -1.0]),
            eigenvalues: DVector::from_vec(vec![1.0, 2.0]),
            graph: Provenance::External,
        };
        // Θᵀ = [[1,0],[2,-1]]; columns (1,2) -> (1,0), (3,4) -> (3,2)
        let out = transform(&model, &x).unwrap();
        assert_eq!(out.values().as_slice(), &[1.0, 0.0, 3.0, 2.0]);
        assert_eq!(out.labels(), Some(&[0, 1][..]));
    }

    #[test]
    fn transform_rejects_wrong_dimension() {
        let x = labelled(3, 2, &[1.0; 6], &[0, 1]);
        let model = EmbeddingModel {
            theta: DMatrix::identity(2, 1),
            eigenvalues: DVector::from_vec(vec![1.0]),
            graph: Provenance::External,
        };
        assert!(matches!(transform(&model, &x), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn nearest_neighbor_basics() {
        let train = labelled(2, 2, &[0.0, 0.0, 10.0, 10.0], &[0, 1]);
        let test = DataMatrix::new(DMatrix::from_column_slice(2, 2, &[1.0, 1.0, 10.0, 10.0]), "q").unwrap();
        assert_eq!(nn_classify(&train, &test).unwrap(), vec![0, 1]);
        assert!(nearest_neighbor_labels(&DMatrix::zeros(2, 0), &[], test.values()).is_err());
    }

    #[test]
    fn unlabelled_training_set_is_rejected() {
        let train = DataMatrix::new(DMatrix::zeros(2, 2), "u").unwrap();
        assert!(nn_classify(&train, &train).is_err());
    }
}
