//! Similarity-graph construction.
//!
//! The L2-graph represents every sample as a ridge-regularized combination of
//! all other samples, keeps the `k` largest-magnitude coefficients per sample,
//! and links `i` and `j` with weight `|c_ij| + |c_ji|`. The ridge solutions for
//! all samples share one factorization of `YᵀY + λI`.
//!
//! Two baselines are provided for comparison: a heat-kernel k-NN graph and the
//! LLE reconstruction-weight graph.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{nearest_neighbors, pairwise_sq_distances};
use crate::matrix_io::DataMatrix;

/// Column-stacked representation coefficients: column `i` encodes sample `i`
/// over the other samples, so the diagonal is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub values: DMatrix<f64>,
    pub lambda: f64,
    pub normalized: bool,
}

impl CoefficientMatrix {
    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.ncols() == 0
    }

    /// Scale every nonzero column to unit ℓ2 norm; zero columns stay zero.
    pub fn normalize_columns(mut self) -> Self {
        for mut col in self.values.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col /= norm;
            }
        }
        self.normalized = true;
        self
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        self.values.diagonal().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|x| **x != 0.0).count()
    }
}

/// Which builder produced a graph, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    L2 { lambda: f64, k: usize },
    Gaussian { tau: f64, k: usize },
    Lle { k: usize },
    External,
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::L2 { .. } => "l2",
            Provenance::Gaussian { .. } => "gaussian",
            Provenance::Lle { .. } => "lle",
            Provenance::External => "external",
        }
    }

    /// Run the builder described by these parameters.
    pub fn build(&self, data: &DataMatrix) -> Result<SimilarityGraph> {
        match *self {
            Provenance::L2 { lambda, k } => build_l2_graph(data, lambda, k),
            Provenance::Gaussian { tau, k } => build_gaussian_graph(data, tau, k),
            Provenance::Lle { k } => build_lle_graph(data, k),
            Provenance::External => Err(Error::InvalidArgument(
                "an external graph has no builder to run".into(),
            )),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::L2 { lambda, k } => write!(f, "builder=l2 lambda={lambda} k={k}"),
            Provenance::Gaussian { tau, k } => write!(f, "builder=gaussian tau={tau} k={k}"),
            Provenance::Lle { k } => write!(f, "builder=lle k={k}"),
            Provenance::External => write!(f, "builder=external"),
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("not a provenance line: {s:?}"));
        let mut builder = None;
        let (mut lambda, mut tau, mut k) = (None, None, None);
        for field in s.split_whitespace() {
            let (key, value) = field.split_once('=').ok_or_else(bad)?;
            match key {
                "builder" => builder = Some(value),
                "lambda" => lambda = Some(value.parse::<f64>().map_err(|_| bad())?),
                "tau" => tau = Some(value.parse::<f64>().map_err(|_| bad())?),
                "k" => k = Some(value.parse::<usize>().map_err(|_| bad())?),
                _ => {}
            }
        }
        match builder.ok_or_else(bad)? {
            "l2" => Ok(Provenance::L2 {
                lambda: lambda.ok_or_else(bad)?,
                k: k.ok_or_else(bad)?,
            }),
            "gaussian" => Ok(Provenance::Gaussian {
                tau: tau.ok_or_else(bad)?,
                k: k.ok_or_else(bad)?,
            }),
            "lle" => Ok(Provenance::Lle { k: k.ok_or_else(bad)? }),
            "external" => Ok(Provenance::External),
            _ => Err(bad()),
        }
    }
}

/// Symmetric, non-negative weight matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    weights: DMatrix<f64>,
    provenance: Provenance,
}

impl SimilarityGraph {
    /// Validate and wrap a weight matrix. Symmetry is checked exactly.
    pub fn new(weights: DMatrix<f64>, provenance: Provenance) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::Validation(format!(
                "graph must be square, got {}x{}",
                n,
                weights.ncols()
            )));
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::Validation(format!(
                    "diagonal entry ({i}, {i}) is {}",
                    weights[(i, i)]
                )));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Validation(format!("entry ({i}, {j}) = {w} is not a finite non-negative weight")));
                }
                if j > i && w != weights[(j, i)] {
                    return Err(Error::Validation(format!(
                        "asymmetric weights: ({i}, {j}) = {w} but ({j}, {i}) = {}",
                        weights[(j, i)]
                    )));
                }
            }
        }
        Ok(Self { weights, provenance })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.nrows() == 0
    }

    /// Number of nonzero off-diagonal entries (each undirected edge counts twice).
    pub fn nonzero_count(&self) -> usize {
        self.weights.iter().filter(|x| **x != 0.0).count()
    }

    /// Uniformly rescale all weights.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(&self.weights * alpha, self.provenance)
    }
}

/// Ridge self-representation of every sample over the others, before normalization.
///
/// Column `i` is `P[Yᵀyᵢ − (eᵢᵀPYᵀyᵢ / eᵢᵀPeᵢ) eᵢ]` with `P = (YᵀY + λI)⁻¹`,
/// which equals the ridge solution over the dictionary with column `i` zeroed.
pub fn ridge_self_representation(data: &DataMatrix, lambda: f64) -> Result<CoefficientMatrix> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    let y = data.values();
    let n = y.ncols();
    let gram = y.transpose() * y;
    let mut system = gram.clone();
    for i in 0..n {
        system[(i, i)] += lambda;
    }
    let singular = || {
        Error::Singular(format!(
            "YᵀY + {lambda}·I is not positive definite; use lambda > 0"
        ))
    };
    let chol = Cholesky::new(system).ok_or_else(singular)?;
    let p = chol.inverse();
    if p.iter().any(|x| !x.is_finite()) {
        return Err(singular());
    }
    // column i of P·YᵀY is P·Yᵀyᵢ
    let projected = &p * &gram;

    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        let pii = p[(i, i)];
        if !(pii > 0.0) {
            return Err(singular());
        }
        let ratio = projected[(i, i)] / pii;
        let mut col = c.column_mut(i);
        col.copy_from(&projected.column(i));
        col.axpy(-ratio, &p.column(i), 1.0);
        col[i] = 0.0;
    }
    Ok(CoefficientMatrix {
        values: c,
        lambda,
        normalized: false,
    })
}

/// L2-graph coefficients: ridge self-representation with unit-norm columns.
pub fn l2_coefficients(data: &DataMatrix, lambda: f64) -> Result<CoefficientMatrix> {
    Ok(ridge_self_representation(data, lambda)?.normalize_columns())
}

/// Keep the `k` largest-magnitude entries of each column (ties: lower row), zero the rest.
pub fn threshold_topk(coef: &CoefficientMatrix, k: usize) -> Result<CoefficientMatrix> {
    let n = coef.values.nrows();
    if k + 1 > n.max(1) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds n - 1 = {}",
            n.saturating_sub(1)
        )));
    }
    let mut out = DMatrix::zeros(n, coef.values.ncols());
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for (j, col) in coef.values.column_iter().enumerate() {
        order.clear();
        order.extend(0..n);
        order.sort_by(|&a, &b| col[b].abs().total_cmp(&col[a].abs()).then(a.cmp(&b)));
        for &i in order.iter().take(k) {
            out[(i, j)] = col[i];
        }
    }
    Ok(CoefficientMatrix {
        values: out,
        lambda: coef.lambda,
        normalized: coef.normalized,
    })
}

/// `W[i,j] = |C[i,j]| + |C[j,i]|`.
pub fn symmetrize(coef: &CoefficientMatrix) -> Result<SimilarityGraph> {
    let c = &coef.values;
    let n = c.nrows();
    if c.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "coefficient matrix must be square, got {}x{}",
            n,
            c.ncols()
        )));
    }
    if coef.max_abs_diagonal() != 0.0 {
        return Err(Error::Validation("coefficient diagonal must be zero".into()));
    }
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = c[(i, j)].abs() + c[(j, i)].abs();
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    SimilarityGraph::new(w, Provenance::External)
}

/// Normalize, keep the top `k` per column, symmetrize.
pub fn build_l2_graph(data: &DataMatrix, lambda: f64, k: usize) -> Result<SimilarityGraph> {
    let coef = l2_coefficients(data, lambda)?;
    let sparse = threshold_topk(&coef, k)?;
    let g = symmetrize(&sparse)?;
    Ok(SimilarityGraph {
        provenance: Provenance::L2 { lambda, k },
        ..g
    })
}

fn check_neighbor_count(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "neighbor count must lie in 1..={}, got {k}",
            n - 1
        )));
    }
    Ok(())
}

/// Heat-kernel graph on the Euclidean k-NN relation (union of both directions).
pub fn build_gaussian_graph(data: &DataMatrix, tau: f64, k: usize) -> Result<SimilarityGraph> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be > 0, got {tau}")));
    }
    let n = data.len();
    check_neighbor_count(k, n)?;
    let dist = pairwise_sq_distances(data.values());
    let mut adjacent = vec![false; n * n];
    for i in 0..n {
        for j in nearest_neighbors(&dist, i, k) {
            adjacent[i * n + j] = true;
            adjacent[j * n + i] = true;
        }
    }
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if adjacent[i * n + j] {
                w[(i, j)] = (-dist[(i, j)] / tau).exp();
            }
        }
    }
    SimilarityGraph::new(w, Provenance::Gaussian { tau, k })
}

/// Affine-constrained reconstruction weights of each sample over its `k` nearest neighbors.
///
/// The local Gram system gets a ridge of `1e-9 × trace` so duplicated or
/// over-complete neighborhoods stay solvable.
pub fn lle_coefficients(data: &DataMatrix, k: usize) -> Result<CoefficientMatrix> {
    let y = data.values();
    let n = y.ncols();
    check_neighbor_count(k, n)?;
    let dist = pairwise_sq_distances(y);
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        let nbrs = nearest_neighbors(&dist, i, k);
        let mut z = DMatrix::zeros(y.nrows(), k);
        for (col, &j) in nbrs.iter().enumerate() {
            z.set_column(col, &(y.column(j) - y.column(i)));
        }
        let mut gram = z.transpose() * z;
        let trace = gram.trace();
        let eps = if trace > 0.0 { 1e-9 * trace } else { 1e-9 };
        for d in 0..k {
            gram[(d, d)] += eps;
        }
        let weights = Cholesky::new(gram)
            .map(|ch| ch.solve(&DVector::from_element(k, 1.0)))
            .ok_or_else(|| Error::Singular(format!("local Gram matrix of sample {i}")))?;
        let total: f64 = weights.sum();
        for (col, &j) in nbrs.iter().enumerate() {
            c[(j, i)] = weights[col] / total;
        }
    }
    Ok(CoefficientMatrix {
        values: c,
        lambda: 0.0,
        normalized: false,
    })
}

pub fn build_lle_graph(data: &DataMatrix, k: usize) -> Result<SimilarityGraph> {
    let coef = lle_coefficients(data, k)?;
    let g = symmetrize(&coef)?;
    Ok(SimilarityGraph {
        provenance: Provenance::Lle { k },
        ..g
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(rows: usize, cols: usize, vals: &[f64]) -> DataMatrix {
        DataMatrix::new(DMatrix::from_column_slice(rows, cols, vals), "t").unwrap()
    }

    #[test]
    fn topk_keeps_largest_magnitude() {
        let c = CoefficientMatrix {
            values: DMatrix::from_column_slice(3, 1, &[0.5, -0.9, 0.1]),
            lambda: 0.1,
            normalized: true,
        };
        // column vector with n = 3 rows: k up to 2 allowed
        let out = threshold_topk(&c, 1).unwrap();
        assert_eq!(out.values.as_slice(), &[0.0, -0.9, 0.0]);
    }

    #[test]
    fn topk_edge_values_of_k() {
        let values = DMatrix::from_row_slice(3, 3, &[0.0, 0.2, -0.3, 0.4, 0.0, 0.6, -0.7, 0.8, 0.0]);
        let c = CoefficientMatrix {
            values: values.clone(),
            lambda: 1.0,
            normalized: false,
        };
        assert_eq!(threshold_topk(&c, 2).unwrap().values, values);
        assert_eq!(threshold_topk(&c, 0).unwrap().values, DMatrix::zeros(3, 3));
        assert!(threshold_topk(&c, 3).is_err());
    }

    #[test]
    fn topk_ties_prefer_lower_row() {
        let c = CoefficientMatrix {
            values: DMatrix::from_column_slice(4, 1, &[0.0, 0.5, -0.5, 0.5]),
            lambda: 1.0,
            normalized: false,
        };
        let out = threshold_topk(&c, 2).unwrap();
        assert_eq!(out.values.as_slice(), &[0.0, 0.5, -0.5, 0.0]);
    }

    #[test]
    fn symmetrize_adds_magnitudes() {
        let c = CoefficientMatrix {
            values: DMatrix::from_row_slice(2, 2, &[0.0, 0.3, -0.2, 0.0]),
            lambda: 1.0,
            normalized: false,
        };
        let w = symmetrize(&c).unwrap();
        assert_eq!(w.weights()[(0, 1)], 0.5);
        assert_eq!(w.weights()[(1, 0)], 0.5);
        let zero = CoefficientMatrix {
            values: DMatrix::zeros(3, 3),
            lambda: 1.0,
            normalized: false,
        };
        assert_eq!(symmetrize(&zero).unwrap().weights(), &DMatrix::zeros(3, 3));
    }

    #[test]
    fn singular_gram_without_ridge_is_an_error() {
        // three collinear points: YᵀY has rank 1
        let d = data(2, 3, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        assert!(matches!(ridge_self_representation(&d, 0.0), Err(Error::Singular(_))));
        assert!(ridge_self_representation(&d, 0.01).is_ok());
    }

    #[test]
    fn duplicated_points_get_unit_heat_weight() {
        let d = data(2, 3, &[1.0, 1.0, 1.0, 1.0, 5.0, 5.0]);
        let g = build_gaussian_graph(&d, 1.0, 1).unwrap();
        assert_eq!(g.weights()[(0, 1)], 1.0);
    }

    #[test]
    fn gaussian_collinear_tie_goes_to_lower_index() {
        let d = data(1, 3, &[0.0, 1.0, 2.0]);
        let g = build_gaussian_graph(&d, 1.0, 1).unwrap();
        let w = g.weights();
        // 0 -> 1, 1 -> 0 (tie with 2), 2 -> 1
        let e = (-1.0f64).exp();
        assert_eq!(w[(0, 1)], e);
        assert_eq!(w[(1, 2)], e);
        assert_eq!(w[(0, 2)], 0.0);
    }

    #[test]
    fn huge_tau_sends_weights_to_one() {
        let d = data(2, 4, &[0.0, 0.0, 1.0, 0.0, 0.0, 2.0, 3.0, 3.0]);
        let g = build_gaussian_graph(&d, 1e15, 2).unwrap();
        for &w in g.weights().iter().filter(|w| **w != 0.0) {
            assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lle_single_neighbor_weight_is_one() {
        let d = data(2, 4, &[0.0, 0.0, 1.0, 0.0, 0.0, 3.0, 4.0, 4.0]);
        let c = lle_coefficients(&d, 1).unwrap();
        for col in c.values.column_iter() {
            let nz: Vec<f64> = col.iter().copied().filter(|x| *x != 0.0).collect();
            assert_eq!(nz, vec![1.0]);
        }
    }

    #[test]
    fn lle_midpoint_splits_evenly() {
        let d = data(2, 3, &[-1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let c = lle_coefficients(&d, 2).unwrap();
        assert!((c.values[(0, 1)] - 0.5).abs() < 1e-12);
        assert!((c.values[(2, 1)] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn neighbor_count_bounds() {
        let d = data(1, 3, &[0.0, 1.0, 2.0]);
        assert!(build_lle_graph(&d, 3).is_err());
        assert!(build_gaussian_graph(&d, 1.0, 0).is_err());
    }

    #[test]
    fn provenance_round_trips_through_text() {
        for p in [
            Provenance::L2 { lambda: 0.1, k: 5 },
            Provenance::Gaussian { tau: 2.5, k: 3 },
            Provenance::Lle { k: 4 },
            Provenance::External,
        ] {
            assert_eq!(p.to_string().parse::<Provenance>().unwrap(), p);
        }
    }
}
