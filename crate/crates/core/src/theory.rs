//! Executable checks of the supporting results behind "encode, then denoise the
//! representation": first principal angles, the sufficient condition that keeps
//! error-dictionary coefficients trivial, minimum ℓ2-norm representations, and
//! the closed forms of nuclear-norm self-representation.
//!
//! All ranks are taken at `1e-10` relative tolerance on singular values.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{pinv_solve, range_basis, SortedSvd};

/// Clean dictionary `d0` and error dictionary `de` over the same ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspacePair {
    pub d0: DMatrix<f64>,
    pub de: DMatrix<f64>,
    pub r0: usize,
    pub re: usize,
}

impl SubspacePair {
    pub fn new(d0: DMatrix<f64>, de: DMatrix<f64>) -> Result<Self> {
        if d0.nrows() != de.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "dictionaries live in R^{} and R^{}",
                d0.nrows(),
                de.nrows()
            )));
        }
        let r0 = SortedSvd::new(&d0)?.rank();
        let re = SortedSvd::new(&de)?.rank();
        if r0 == 0 || re == 0 {
            return Err(Error::InvalidArgument("both dictionaries must be nonzero".into()));
        }
        Ok(Self { d0, de, r0, re })
    }

    /// `[d0 de]`.
    pub fn joint(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.d0.nrows(), self.d0.ncols() + self.de.ncols());
        d.columns_mut(0, self.d0.ncols()).copy_from(&self.d0);
        d.columns_mut(self.d0.ncols(), self.de.ncols()).copy_from(&self.de);
        d
    }
}

/// Smallest principal angle between the column ranges of `a` and `b`, in `[0, π/2]`.
///
/// The cosine is the largest singular value of `U_aᵀU_b`. Below π/4 the angle
/// is taken from the sine side instead (`σ_min((I − U_aU_aᵀ)U_b)` for the
/// lower-dimensional range), where `arccos` loses half the digits.
pub fn first_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "subspaces of R^{} and R^{}",
            a.nrows(),
            b.nrows()
        )));
    }
    let ua = range_basis(a)?;
    let ub = range_basis(b)?;
    if ua.ncols() == 0 || ub.ncols() == 0 {
        return Err(Error::InvalidArgument("principal angle of a zero matrix".into()));
    }
    let cross = ua.transpose() * &ub;
    let cos = cross.singular_values().max().clamp(0.0, 1.0);
    if cos * cos <= 0.5 {
        return Ok(cos.acos());
    }
    let (big, small) = if ua.ncols() >= ub.ncols() { (&ua, &ub) } else { (&ub, &ua) };
    let residual = small - big * (big.transpose() * small);
    let sin = residual.singular_values().min().clamp(0.0, 1.0);
    Ok(sin.asin())
}

/// Inputs and outcome of the sufficient condition `σ_min(D0) ≥ r_e cos θ_min ‖De‖_{1,2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Smallest nonzero singular value of `D0`.
    pub sigma_min: f64,
    pub theta_min: f64,
    /// Largest column ℓ2 norm of `De`.
    pub de_norm_12: f64,
    pub re: usize,
}

pub fn max_column_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn lemma3_condition(pair: &SubspacePair) -> Result<LemmaReport> {
    let svd = SortedSvd::new(&pair.d0)?;
    let sigma_min = svd.sigma[svd.rank() - 1];
    let theta_min = first_principal_angle(&pair.d0, &pair.de)?;
    let de_norm_12 = max_column_norm(&pair.de);
    let rhs = pair.re as f64 * theta_min.cos() * de_norm_12;
    Ok(LemmaReport {
        lhs: sigma_min,
        rhs,
        holds: sigma_min >= rhs,
        sigma_min,
        theta_min,
        de_norm_12,
        re: pair.re,
    })
}

/// Minimum ℓ2-norm `z` with `D z = x`; errors when `x` is not in the range of `D`.
pub fn min_l2_solution(d: &DMatrix<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
    if d.nrows() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "dictionary has {} rows, vector has {} entries",
            d.nrows(),
            x.len()
        )));
    }
    let (z, residual) = pinv_solve(d, x)?;
    if residual > 1e-8 * x.norm().max(1.0) {
        return Err(Error::OutsideRange { residual });
    }
    Ok(z)
}

/// Observed behaviour of minimum ℓ2-norm representations for a point in the
/// intersection of the two ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Verdict {
    pub z0_norm: f64,
    pub ze_norm: f64,
    /// `‖z0‖₂ < ‖ze‖₂`
    pub clean_is_cheaper: bool,
    /// Joint minimum-norm solution over `[D0 De]`.
    pub joint: DVector<f64>,
    pub clean_block_norm: f64,
    pub error_block_norm: f64,
    /// Error block below `1e-8` of the joint solution's norm.
    pub error_block_vanishes: bool,
    /// Whether the observation matches "error block vanishes iff clean is cheaper".
    pub agrees: bool,
}

pub fn lemma2_check(pair: &SubspacePair, x: &DVector<f64>) -> Result<Lemma2Verdict> {
    if x.norm() == 0.0 {
        return Err(Error::InvalidArgument("the point must be nonzero".into()));
    }
    let z0 = min_l2_solution(&pair.d0, x)?;
    let ze = min_l2_solution(&pair.de, x)?;
    let joint = min_l2_solution(&pair.joint(), x)?;
    let n0 = pair.d0.ncols();
    let clean_block_norm = joint.rows(0, n0).norm();
    let error_block_norm = joint.rows(n0, pair.de.ncols()).norm();
    let clean_is_cheaper = z0.norm() < ze.norm();
    let error_block_vanishes = error_block_norm <= 1e-8 * joint.norm();
    Ok(Lemma2Verdict {
        z0_norm: z0.norm(),
        ze_norm: ze.norm(),
        clean_is_cheaper,
        clean_block_norm,
        error_block_norm,
        error_block_vanishes,
        agrees: clean_is_cheaper == error_block_vanishes,
        joint,
    })
}

/// Minimizer of `‖C‖_*` subject to `D = DC`: `V_r V_rᵀ` from the skinny SVD.
pub fn nuclear_min_representation(d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = SortedSvd::new(d)?;
    let r = svd.rank();
    if r == 0 {
        return Err(Error::InvalidArgument("matrix is zero".into()));
    }
    let vr = svd.v.columns(0, r);
    Ok(vr * vr.transpose())
}

/// `argmin_k k + (α/2) Σ_{i>k} σᵢ²` over `k ∈ 0..=len`, ties to the smaller `k`.
pub fn optimal_k(sigmas: &[f64], alpha: f64) -> Result<usize> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
    }
    if sigmas.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidArgument("singular values must be non-negative".into()));
    }
    if sigmas.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument("singular values must be sorted descending".into()));
    }
    // tail[k] = Σ_{i>k} σᵢ² (1-based i), accumulated from the back
    let mut tail = vec![0.0; sigmas.len() + 1];
    for k in (0..sigmas.len()).rev() {
        tail[k] = tail[k + 1] + sigmas[k] * sigmas[k];
    }
    let mut best = (f64::INFINITY, 0);
    for (k, t) in tail.iter().enumerate() {
        let cost = k as f64 + 0.5 * alpha * t;
        if cost < best.0 {
            best = (cost, k);
        }
    }
    Ok(best.1)
}

/// Skinny SVD factors `U Σ Vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkinnySvd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl SkinnySvd {
    /// `U H_k(Σ) Vᵀ`: keep the first `k` singular values, zero the rest.
    pub fn truncated_product(&self, k: usize) -> DMatrix<f64> {
        let k = k.min(self.sigma.len());
        let mut out = DMatrix::zeros(self.u.nrows(), self.v.nrows());
        for i in 0..k {
            out += self.sigma[i] * self.u.column(i) * self.v.column(i).transpose();
        }
        out
    }
}

/// Denoised self-representation `U_C H_{k*}(Σ_C) V_Cᵀ` of the nuclear-norm
/// minimizer `C* = V_r V_rᵀ`.
///
/// `C*` has every nonzero singular value equal to one, so its SVD factors are
/// taken as `(V_r, I, V_r)`, ordered by the singular values of `D`; `k*` comes
/// from [`optimal_k`] on the singular values of `D`.
pub fn denoised_representation(d: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    let svd = SortedSvd::new(d)?;
    let r = svd.rank();
    if r == 0 {
        return Err(Error::InvalidArgument("matrix is zero".into()));
    }
    let k = optimal_k(svd.sigma.as_slice(), alpha)?;
    let vr = svd.v.columns(0, r).into_owned();
    let factors = SkinnySvd {
        u: vr.clone(),
        sigma: DVector::from_element(r, 1.0),
        v: vr,
    };
    Ok(factors.truncated_product(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn angle_special_cases() {
        let a = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 0.0, 0.0, 1.0, 1.0]);
        assert!(first_principal_angle(&a, &a).unwrap().abs() < 1e-10);
        let e1 = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let e23 = DMatrix::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((first_principal_angle(&e1, &e23).unwrap() - FRAC_PI_2).abs() < 1e-10);
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let diag = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        assert!((first_principal_angle(&x, &diag).unwrap() - FRAC_PI_4).abs() < 1e-10);
        assert!(first_principal_angle(&x, &DMatrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn orthogonal_error_dictionary_satisfies_condition() {
        let d0 = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let de = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 2.0]);
        let rep = lemma3_condition(&SubspacePair::new(d0, de).unwrap()).unwrap();
        assert!((rep.lhs - 1.0).abs() < 1e-12);
        assert!(rep.rhs.abs() < 1e-12);
        assert!(rep.holds);
    }

    #[test]
    fn small_clean_dictionary_fails_condition() {
        let d0 = DMatrix::identity(2, 2) * 0.1;
        let de = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let rep = lemma3_condition(&SubspacePair::new(d0, de).unwrap()).unwrap();
        assert!((rep.lhs - 0.1).abs() < 1e-12);
        assert!((rep.rhs - 1.0).abs() < 1e-12);
        assert!(!rep.holds);
    }

    #[test]
    fn min_norm_basic_cases() {
        let x = DVector::from_vec(vec![1.0, -2.0]);
        let z = min_l2_solution(&DMatrix::identity(2, 2), &x).unwrap();
        assert!((z - &x).norm() < 1e-12);
        let twin = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let z = min_l2_solution(&twin, &DVector::from_vec(vec![2.0])).unwrap();
        assert!((z - DVector::from_vec(vec![1.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn point_outside_range_is_rejected() {
        let d = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let err = min_l2_solution(&d, &DVector::from_vec(vec![0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::OutsideRange { residual } if (residual - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_point_is_rejected() {
        let pair = SubspacePair::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2)).unwrap();
        assert!(lemma2_check(&pair, &DVector::zeros(2)).is_err());
    }

    #[test]
    fn optimal_k_hand_case() {
        assert_eq!(optimal_k(&[3.0, 2.0, 0.1], 2.0).unwrap(), 2);
        assert_eq!(optimal_k(&[3.0, 2.0, 0.1], 0.0).unwrap(), 0);
        assert_eq!(optimal_k(&[3.0, 2.0, 0.1], 1e9).unwrap(), 3);
        assert!(optimal_k(&[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn full_column_rank_gives_identity() {
        let d = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let c = nuclear_min_representation(&d).unwrap();
        assert!((c - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn zero_alpha_denoises_to_zero() {
        let d = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 0.0, 1.0, 4.0]);
        assert_eq!(denoised_representation(&d, 0.0).unwrap(), DMatrix::zeros(3, 3));
        let big = denoised_representation(&d, 1e6).unwrap();
        assert!((big - nuclear_min_representation(&d).unwrap()).norm() < 1e-10);
    }
}
