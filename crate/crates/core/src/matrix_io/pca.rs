use nalgebra::{DMatrix, DVector};

use super::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{fix_column_signs, SortedSvd};

/// Centered PCA projection keeping a fixed fraction of the variance.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    /// m×p, orthonormal columns, largest-magnitude entry of each column positive.
    pub basis: DMatrix<f64>,
    pub energy_kept: f64,
    /// Variance of each retained component, descending.
    pub variances: Vec<f64>,
}

impl PcaModel {
    pub fn components(&self) -> usize {
        self.basis.ncols()
    }

    /// Project data with the same ambient dimension onto the retained components.
    pub fn transform(&self, data: &DataMatrix) -> Result<DataMatrix> {
        if data.dim() != self.mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "PCA fitted on dimension {}, got {}",
                self.mean.len(),
                data.dim()
            )));
        }
        let mut centered = data.values().clone();
        for mut col in centered.column_iter_mut() {
            col -= &self.mean;
        }
        data.map_values(self.basis.transpose() * centered)
    }
}

/// Fit PCA on `data` and return the model with the projected data (p×n).
///
/// p is the smallest number of leading components whose variance reaches
/// `energy_kept` of the total.
pub fn pca_fit_transform(data: &DataMatrix, energy_kept: f64) -> Result<(PcaModel, DataMatrix)> {
    if !(energy_kept > 0.0 && energy_kept <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "energy_kept must lie in (0, 1], got {energy_kept}"
        )));
    }
    let y = data.values();
    let n = y.ncols();
    let mean = y.column_mean();
    let mut centered = y.clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    let scale = y.norm();
    let spread = centered.norm();
    if spread == 0.0 || spread <= 1e-12 * scale {
        return Err(Error::Degenerate("all samples are identical".into()));
    }

    let svd = SortedSvd::new(&centered)?;
    let rank = svd.rank();
    let energies: Vec<f64> = svd.sigma.iter().take(rank).map(|s| s * s).collect();
    let total: f64 = energies.iter().sum();
    let target = energy_kept * total * (1.0 - 1e-12);
    let mut acc = 0.0;
    let mut p = rank;
    for (i, e) in energies.iter().enumerate() {
        acc += e;
        if acc >= target {
            p = i + 1;
            break;
        }
    }

    let mut basis = svd.u.columns(0, p).into_owned();
    fix_column_signs(&mut basis);
    let variances = energies[..p].iter().map(|e| e / (n - 1) as f64).collect();
    let projected = data.map_values(basis.transpose() * &centered)?;
    Ok((
        PcaModel {
            mean,
            basis,
            energy_kept,
            variances,
        },
        projected,
    ))
}
