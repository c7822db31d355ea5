//! Shared dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

/// Relative threshold below which singular values (or eigenvalues) count as zero.
pub const RANK_TOL: f64 = 1e-10;

const EIGEN_MAX_ITER: usize = 10_000;

/// Thin SVD with singular values sorted descending. `v` is n×k (not transposed).
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl SortedSvd {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let svd = SVD::try_new(a.clone(), true, true, f64::EPSILON, 0)
            .ok_or_else(|| Error::NotConverged("SVD".into()))?;
        let u = svd.u.expect("u requested");
        let v_t = svd.v_t.expect("v_t requested");
        let s = svd.singular_values;
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));
        let k = order.len();
        let mut out_u = DMatrix::zeros(a.nrows(), k);
        let mut out_v = DMatrix::zeros(a.ncols(), k);
        let mut sigma = DVector::zeros(k);
        for (dst, &src) in order.iter().enumerate() {
            out_u.set_column(dst, &u.column(src));
            out_v.set_column(dst, &v_t.row(src).transpose());
            sigma[dst] = s[src];
        }
        Ok(Self {
            u: out_u,
            sigma,
            v: out_v,
        })
    }

    /// Number of singular values above `RANK_TOL` times the largest one.
    pub fn rank(&self) -> usize {
        numerical_rank(self.sigma.as_slice())
    }
}

pub fn numerical_rank(sorted_desc: &[f64]) -> usize {
    match sorted_desc.first() {
        Some(&top) if top > 0.0 => sorted_desc.iter().take_while(|&&s| s > RANK_TOL * top).count(),
        _ => 0,
    }
}

/// Symmetric eigendecomposition with eigenvalues ascending and columns reordered to match.
pub fn sorted_symmetric_eigen(a: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::NotConverged(format!("{}x{} symmetric eigenproblem", a.nrows(), a.ncols())))?;
    let vals = eig.eigenvalues;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)));
    let mut sorted_vals = DVector::zeros(vals.len());
    let mut sorted_vecs = DMatrix::zeros(a.nrows(), vals.len());
    for (dst, &src) in order.iter().enumerate() {
        sorted_vals[dst] = vals[src];
        sorted_vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((sorted_vals, sorted_vecs))
}

/// Flip each column so that its largest-magnitude entry is positive (ties: lower row).
pub fn fix_column_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0.0_f64;
        let mut sign = 1.0;
        for &x in col.iter() {
            if x.abs() > best {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
    }
}

/// Orthonormal basis for the column range of `a`, at `RANK_TOL` relative tolerance.
pub fn range_basis(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = SortedSvd::new(a)?;
    let r = svd.rank();
    Ok(svd.u.columns(0, r).into_owned())
}

/// Minimum-norm solution of `a z = x` via the truncated pseudoinverse.
/// Returns the solution and the residual norm of the fit.
pub fn pinv_solve(a: &DMatrix<f64>, x: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let svd = SortedSvd::new(a)?;
    let r = svd.rank();
    let mut z = DVector::zeros(a.ncols());
    for i in 0..r {
        let coef = svd.u.column(i).dot(x) / svd.sigma[i];
        z.axpy(coef, &svd.v.column(i), 1.0);
    }
    let residual = (a * &z - x).norm();
    Ok((z, residual))
}

/// Squared Euclidean distances between all pairs of columns.
pub fn pairwise_sq_distances(y: &DMatrix<f64>) -> DMatrix<f64> {
    let n = y.ncols();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = (y.column(i) - y.column(j)).norm_squared();
            d[(i, j)] = dist;
            d[(j, i)] = dist;
        }
    }
    d
}

/// Indices of the `k` nearest columns to column `i` (excluding `i`), ties to lower index.
pub fn nearest_neighbors(sq_dist: &DMatrix<f64>, i: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..sq_dist.ncols()).filter(|&j| j != i).collect();
    idx.sort_by(|&a, &b| sq_dist[(i, a)].total_cmp(&sq_dist[(i, b)]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_svd_reconstructs() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 7.0]);
        let svd = SortedSvd::new(&a).unwrap();
        assert!(svd.sigma[0] >= svd.sigma[1]);
        let rec = &svd.u * DMatrix::from_diagonal(&svd.sigma) * svd.v.transpose();
        assert!((rec - a).norm() < 1e-12);
    }

    #[test]
    fn sign_fix_makes_largest_entry_positive() {
        let mut m = DMatrix::from_column_slice(3, 1, &[0.1, -0.9, 0.3]);
        fix_column_signs(&mut m);
        assert_eq!(m[(1, 0)], 0.9);
    }

    #[test]
    fn neighbor_ties_prefer_lower_index() {
        let y = DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 2.0]);
        let d = pairwise_sq_distances(&y);
        assert_eq!(nearest_neighbors(&d, 1, 1), vec![0]);
    }
}
