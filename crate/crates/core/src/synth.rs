//! Synthetic data with known subspace structure and the two sample-specific
//! corruption models (additive Gaussian noise, random pixel replacement).
//!
//! Every random draw comes from a ChaCha substream keyed by `(seed, purpose,
//! index)`, where `index` identifies a sample. Generation and corruption are
//! therefore reproducible and independent of processing order.

use std::fmt;

use nalgebra::{DMatrix, DVector, Rotation3, Unit, Vector3};
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix_io::DataMatrix;

const BASIS_STREAM: u64 = 1;
const POINT_STREAM: u64 = 2;
const SELECT_STREAM: u64 = 3;
const NOISE_STREAM: u64 = 4;
const PIXEL_STREAM: u64 = 5;
const MOTION_STREAM: u64 = 6;

fn substream(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_iterator(len, (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// `⌈x⌉` that ignores floating-point dust just above an integer (0.3 × 100 → 30).
fn ceil_count(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dependence {
    /// Each subspace gets its own block of columns from one random basis.
    Independent,
    /// Every subspace shares `overlap` common basis directions.
    SharedBasis { overlap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSpec {
    pub ambient_dim: usize,
    pub subspace_dims: Vec<usize>,
    pub points_per_subspace: Vec<usize>,
    pub noise_sigma: f64,
    pub dependence: Dependence,
}

impl SubspaceSpec {
    /// `count` independent subspaces of equal dimension and size, noiseless.
    pub fn independent(ambient_dim: usize, count: usize, dim: usize, points: usize) -> Self {
        Self {
            ambient_dim,
            subspace_dims: vec![dim; count],
            points_per_subspace: vec![points; count],
            noise_sigma: 0.0,
            dependence: Dependence::Independent,
        }
    }

    fn basis_columns(&self) -> usize {
        match self.dependence {
            Dependence::Independent => self.subspace_dims.iter().sum(),
            Dependence::SharedBasis { overlap } => {
                overlap + self.subspace_dims.iter().map(|r| r - overlap).sum::<usize>()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.subspace_dims.is_empty() || self.subspace_dims.len() != self.points_per_subspace.len() {
            return Err(Error::InvalidArgument(
                "need one point count per subspace and at least one subspace".into(),
            ));
        }
        if self.subspace_dims.contains(&0) {
            return Err(Error::InvalidArgument("subspace dimensions must be >= 1".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidArgument("noise sigma must be >= 0".into()));
        }
        if let Dependence::SharedBasis { overlap } = self.dependence {
            if self.subspace_dims.iter().any(|&r| r <= overlap) {
                return Err(Error::InvalidArgument(format!(
                    "overlap {overlap} must be smaller than every subspace dimension"
                )));
            }
        }
        let needed = self.basis_columns();
        if needed > self.ambient_dim {
            return Err(Error::InvalidArgument(format!(
                "subspaces need {needed} basis directions but the ambient dimension is {}",
                self.ambient_dim
            )));
        }
        if self.points_per_subspace.iter().sum::<usize>() < 2 {
            return Err(Error::InvalidArgument("need at least 2 points in total".into()));
        }
        Ok(())
    }
}

impl fmt::Display for SubspaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let dep = match self.dependence {
            Dependence::Independent => "independent".to_string(),
            Dependence::SharedBasis { overlap } => format!("shared:{overlap}"),
        };
        write!(
            f,
            "subspaces m={} dims={} points={} noise={} dependence={}",
            self.ambient_dim,
            join(&self.subspace_dims),
            join(&self.points_per_subspace),
            self.noise_sigma,
            dep
        )
    }
}

/// Orthonormal bases for every subspace of `spec`.
pub fn subspace_bases(spec: &SubspaceSpec, seed: u64) -> Result<Vec<DMatrix<f64>>> {
    spec.validate()?;
    let m = spec.ambient_dim;
    let mut rng = substream(seed, BASIS_STREAM, 0);
    let pool = DMatrix::from_fn(m, spec.basis_columns(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let shared = match spec.dependence {
        Dependence::Independent => 0,
        Dependence::SharedBasis { overlap } => overlap,
    };
    let mut next = shared;
    let mut bases = Vec::with_capacity(spec.subspace_dims.len());
    for &r in &spec.subspace_dims {
        let own = r - shared;
        let mut block = DMatrix::zeros(m, r);
        for c in 0..shared {
            block.set_column(c, &pool.column(c));
        }
        for c in 0..own {
            block.set_column(shared + c, &pool.column(next + c));
        }
        next += own;
        bases.push(block.qr().q());
    }
    Ok(bases)
}

/// Points drawn from a union of linear subspaces, unit-normalized columns,
/// labelled by subspace.
pub fn sample_union_of_subspaces(spec: &SubspaceSpec, seed: u64) -> Result<DataMatrix> {
    let bases = subspace_bases(spec, seed)?;
    let m = spec.ambient_dim;
    let n: usize = spec.points_per_subspace.iter().sum();
    let mut y = DMatrix::zeros(m, n);
    let mut labels = Vec::with_capacity(n);
    let mut j = 0;
    for (s, (basis, &count)) in bases.iter().zip(&spec.points_per_subspace).enumerate() {
        for _ in 0..count {
            let mut rng = substream(seed, POINT_STREAM, j as u64);
            let coef = gaussian_vector(&mut rng, basis.ncols());
            let mut point = basis * coef;
            if spec.noise_sigma > 0.0 {
                point += gaussian_vector(&mut rng, m) * spec.noise_sigma;
            }
            let norm = point.norm();
            if norm > 0.0 {
                point /= norm;
            }
            y.set_column(j, &point);
            labels.push(s);
            j += 1;
        }
    }
    DataMatrix::new(y, "subspaces")?.with_labels(&labels)
}

/// Two elongated clusters in the plane, each along its own ray from the origin
/// (15° and 95°), radii in [4, 5] with ±0.02 perpendicular jitter.
pub fn two_ray_clusters(points_per_cluster: usize, seed: u64) -> Result<DataMatrix> {
    let angles = [15f64.to_radians(), 95f64.to_radians()];
    let n = 2 * points_per_cluster;
    let mut y = DMatrix::zeros(2, n);
    let mut labels = Vec::with_capacity(n);
    for (c, angle) in angles.iter().enumerate() {
        let (s, co) = angle.sin_cos();
        for p in 0..points_per_cluster {
            let j = c * points_per_cluster + p;
            let mut rng = substream(seed, POINT_STREAM, j as u64);
            let r: f64 = rng.random_range(4.0..=5.0);
            let jitter: f64 = rng.random_range(-0.02..=0.02);
            y[(0, j)] = r * co - jitter * s;
            y[(1, j)] = r * s + jitter * co;
            labels.push(c);
        }
    }
    DataMatrix::new(y, "two_rays")?.with_labels(&labels)
}

/// Feature-point trajectories of rigidly moving objects seen by an affine camera.
///
/// Each motion rotates about its own random axis at a constant rate and drifts
/// with a constant velocity. A point's trajectory stacks its projected (x, y)
/// over `frames` frames into a `2·frames` vector, so every motion spans at most
/// four dimensions. Labels are motion indices.
pub fn synth_trajectories(
    num_motions: usize,
    frames: usize,
    points_per_motion: usize,
    noise: f64,
    seed: u64,
) -> Result<DataMatrix> {
    if frames < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 frames, got {frames}")));
    }
    if num_motions == 0 || num_motions * points_per_motion < 2 {
        return Err(Error::InvalidArgument("need at least 2 trajectories".into()));
    }
    if !(noise >= 0.0) {
        return Err(Error::InvalidArgument("noise must be >= 0".into()));
    }
    let n = num_motions * points_per_motion;
    let mut y = DMatrix::zeros(2 * frames, n);
    let mut labels = Vec::with_capacity(n);
    for motion in 0..num_motions {
        let mut rng = substream(seed, MOTION_STREAM, motion as u64);
        let unit = |rng: &mut ChaCha8Rng| {
            let v = Vector3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            );
            Unit::new_normalize(v)
        };
        let start = Rotation3::from_axis_angle(&unit(&mut rng), rng.random_range(0.0..std::f64::consts::TAU));
        let axis = unit(&mut rng);
        let rate: f64 = rng.random_range(0.02..0.1);
        let offset = Vector3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), 0.0);
        let velocity = Vector3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), 0.0);
        let poses: Vec<(Rotation3<f64>, Vector3<f64>)> = (0..frames)
            .map(|f| {
                let rot = Rotation3::from_axis_angle(&axis, rate * f as f64) * start;
                (rot, offset + velocity * f as f64)
            })
            .collect();
        for p in 0..points_per_motion {
            let j = motion * points_per_motion + p;
            let mut prng = substream(seed, POINT_STREAM, j as u64);
            let point = Vector3::new(
                prng.random_range(-1.0..1.0),
                prng.random_range(-1.0..1.0),
                prng.random_range(-1.0..1.0),
            );
            for (f, (rot, shift)) in poses.iter().enumerate() {
                let moved = rot * point + shift;
                y[(2 * f, j)] = moved.x;
                y[(2 * f + 1, j)] = moved.y;
            }
            if noise > 0.0 {
                let e = gaussian_vector(&mut prng, 2 * frames) * noise;
                let mut col = y.column_mut(j);
                col += e;
            }
            labels.push(motion);
        }
    }
    DataMatrix::new(y, "trajectories")?.with_labels(&labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptionKind {
    Gaussian,
    RandomPixel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    /// Noise level α for Gaussian noise, fraction of replaced entries for pixel corruption.
    pub ratio: f64,
    pub fraction_of_samples: f64,
    /// Upper end of the valid value range (Gaussian corruption only).
    pub pixel_max: f64,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn apply(&self, data: &DataMatrix) -> Result<DataMatrix> {
        let ids: Vec<u64> = (0..data.len() as u64).collect();
        self.apply_with_ids(data, &ids)
    }

    /// Corrupt using `ids[j]` as the random-substream identity of column `j`.
    pub fn apply_with_ids(&self, data: &DataMatrix, ids: &[u64]) -> Result<DataMatrix> {
        if ids.len() != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} sample ids for {} samples",
                ids.len(),
                data.len()
            )));
        }
        check_unit("ratio", self.ratio)?;
        check_unit("fraction of samples", self.fraction_of_samples)?;
        let selected = select_samples(ids, self.fraction_of_samples, self.seed);
        let mut y = data.values().clone();
        match self.kind {
            CorruptionKind::Gaussian => {
                if !(self.pixel_max > 0.0) {
                    return Err(Error::InvalidArgument("pixel_max must be > 0".into()));
                }
                if y.iter().any(|&v| v < 0.0 || v > self.pixel_max) {
                    return Err(Error::InvalidArgument(format!(
                        "Gaussian corruption expects entries within [0, {}]",
                        self.pixel_max
                    )));
                }
                let scale = self.ratio * self.pixel_max;
                for (j, &sel) in selected.iter().enumerate() {
                    if !sel || scale == 0.0 {
                        continue;
                    }
                    let mut rng = substream(self.seed, NOISE_STREAM, ids[j]);
                    for v in y.column_mut(j).iter_mut() {
                        let noisy = *v + scale * rng.sample::<f64, _>(StandardNormal);
                        *v = noisy.clamp(0.0, self.pixel_max);
                    }
                }
            }
            CorruptionKind::RandomPixel => {
                let m = y.nrows();
                let count = ceil_count(self.ratio * m as f64).min(m);
                for (j, &sel) in selected.iter().enumerate() {
                    if !sel || count == 0 {
                        continue;
                    }
                    let mut rng = substream(self.seed, PIXEL_STREAM, ids[j]);
                    let mut col = y.column_mut(j);
                    let p_max = col.max();
                    for i in sample_indices(&mut rng, m, count) {
                        col[i] = if p_max > 0.0 { rng.random_range(0.0..=p_max) } else { 0.0 };
                    }
                }
            }
        }
        data.map_values(y)
    }
}

fn check_unit(what: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("{what} must lie in [0, 1], got {x}")));
    }
    Ok(())
}

/// Pick `⌈fraction·n⌉` samples: those with the smallest per-sample random keys.
fn select_samples(ids: &[u64], fraction: f64, seed: u64) -> Vec<bool> {
    let n = ids.len();
    let count = ceil_count(fraction * n as f64).min(n);
    let keys: Vec<f64> = ids
        .iter()
        .map(|&id| substream(seed, SELECT_STREAM, id).random::<f64>())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(ids[a].cmp(&ids[b])));
    let mut selected = vec![false; n];
    for &j in order.iter().take(count) {
        selected[j] = true;
    }
    selected
}

/// Additive noise `y + ratio·pixel_max·n`, `n ~ N(0, I)`, clamped to `[0, pixel_max]`,
/// on a random `fraction_of_samples` of the columns.
pub fn add_gaussian(
    data: &DataMatrix,
    ratio: f64,
    fraction_of_samples: f64,
    pixel_max: f64,
    seed: u64,
) -> Result<DataMatrix> {
    CorruptionSpec {
        kind: CorruptionKind::Gaussian,
        ratio,
        fraction_of_samples,
        pixel_max,
        seed,
    }
    .apply(data)
}

/// Replace `⌈ratio·m⌉` random entries of each selected column with uniform draws
/// over `[0, p_max]`, `p_max` being that column's largest entry.
pub fn random_pixel_corrupt(data: &DataMatrix, ratio: f64, fraction_of_samples: f64, seed: u64) -> Result<DataMatrix> {
    CorruptionSpec {
        kind: CorruptionKind::RandomPixel,
        ratio,
        fraction_of_samples,
        pixel_max: 0.0,
        seed,
    }
    .apply(data)
}
