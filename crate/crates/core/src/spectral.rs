//! Spectral clustering on a similarity graph: normalized Laplacian, embedding
//! by its bottom eigenvectors with row normalization, then k-means on the rows.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::linalg::{fix_column_signs, sorted_symmetric_eigen};

/// Hard cluster labels with the k-means objective that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub num_clusters: usize,
    pub inertia: f64,
    /// Set when fewer than `num_clusters` labels are actually used.
    pub degenerate: bool,
}

impl ClusterAssignment {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// One-line JSON metadata record for the label file.
    pub fn metadata_json(&self, seed: u64) -> String {
        serde_json::json!({
            "l": self.num_clusters,
            "inertia": self.inertia,
            "seed": seed,
        })
        .to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    /// n×l, one embedded point per row.
    pub coords: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: DVector<f64>,
}

/// `L = I − D^{-1/2} W D^{-1/2}`; isolated vertices get `(D^{-1/2})ᵢᵢ = 0`.
pub fn normalized_laplacian(graph: &SimilarityGraph) -> DMatrix<f64> {
    let w = graph.weights();
    let n = w.nrows();
    let inv_sqrt: Vec<f64> = w
        .row_iter()
        .map(|r| {
            let d = r.sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut l = DMatrix::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = -(inv_sqrt[i] * w[(i, j)] * inv_sqrt[j]);
            l[(i, j)] = v;
            l[(j, i)] = v;
        }
    }
    l
}

/// Eigenvectors of the `l` smallest eigenvalues of `laplacian`, sign-fixed, with
/// each row scaled to unit length (zero rows stay zero).
pub fn spectral_embed(laplacian: &DMatrix<f64>, l: usize) -> Result<SpectralEmbedding> {
    let n = laplacian.nrows();
    if l == 0 || l > n {
        return Err(Error::InvalidArgument(format!(
            "embedding dimension must lie in 1..={n}, got {l}"
        )));
    }
    let (vals, vecs) = sorted_symmetric_eigen(laplacian)?;
    let mut coords = vecs.columns(0, l).into_owned();
    fix_column_signs(&mut coords);
    for mut row in coords.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    Ok(SpectralEmbedding {
        coords,
        eigenvalues: vals.rows(0, l).into_owned(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iter: 300,
        }
    }
}

/// k-means on the rows of `points`, best of 20 seeded restarts.
pub fn kmeans(points: &DMatrix<f64>, l: usize, seed: u64) -> Result<ClusterAssignment> {
    kmeans_with(points, l, seed, KMeansConfig::default())
}

pub fn kmeans_with(points: &DMatrix<f64>, l: usize, seed: u64, config: KMeansConfig) -> Result<ClusterAssignment> {
    check_kmeans_args(points, l)?;
    let runs: Vec<ClusterAssignment> = (0..config.restarts.max(1))
        .into_par_iter()
        .map(|r| lloyd(points, l, restart_rng(seed, r), config.max_iter))
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.inertia < best.inertia { run } else { best })
        .expect("at least one restart");
    Ok(best)
}

/// A single restart of [`kmeans`], as used internally for restart `restart`.
pub fn kmeans_restart(points: &DMatrix<f64>, l: usize, seed: u64, restart: usize) -> Result<ClusterAssignment> {
    check_kmeans_args(points, l)?;
    Ok(lloyd(points, l, restart_rng(seed, restart), KMeansConfig::default().max_iter))
}

fn check_kmeans_args(points: &DMatrix<f64>, l: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::InvalidArgument("cluster count must be >= 1".into()));
    }
    if points.nrows() < l {
        return Err(Error::InvalidArgument(format!(
            "{} points cannot form {l} clusters",
            points.nrows()
        )));
    }
    Ok(())
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn sq_dist(points: &DMatrix<f64>, i: usize, center: &DVector<f64>) -> f64 {
    points
        .row(i)
        .iter()
        .zip(center.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// D²-weighted seeding: each new center is drawn with probability proportional
/// to its squared distance from the nearest chosen center.
fn seed_centers(points: &DMatrix<f64>, l: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let n = points.nrows();
    let mut centers = vec![points.row(rng.random_range(0..n)).transpose()];
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers[0])).collect();
    while centers.len() < l {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, d) in nearest.iter().enumerate() {
                acc += d;
                if acc > target && *d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points.row(pick).transpose();
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &c));
        }
        centers.push(c);
    }
    centers
}

fn assign(points: &DMatrix<f64>, centers: &[DVector<f64>], labels: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let mut best = (f64::INFINITY, 0);
        for (c, center) in centers.iter().enumerate() {
            let d = sq_dist(points, i, center);
            if d < best.0 {
                best = (d, c);
            }
        }
        *label = best.1;
        inertia += best.0;
    }
    inertia
}

fn lloyd(points: &DMatrix<f64>, l: usize, mut rng: ChaCha8Rng, max_iter: usize) -> ClusterAssignment {
    let n = points.nrows();
    let dim = points.ncols();
    let mut centers = seed_centers(points, l, &mut rng);
    let mut labels = vec![0; n];
    let mut inertia = assign(points, &centers, &mut labels);
    let mut next = labels.clone();
    for _ in 0..max_iter {
        let mut sums = vec![DVector::zeros(dim); l];
        let mut counts = vec![0usize; l];
        for (i, &c) in labels.iter().enumerate() {
            sums[c] += points.row(i).transpose();
            counts[c] += 1;
        }
        for c in 0..l {
            if counts[c] > 0 {
                centers[c] = &sums[c] / counts[c] as f64;
            }
        }
        inertia = assign(points, &centers, &mut next);
        if next == labels {
            break;
        }
        std::mem::swap(&mut labels, &mut next);
    }
    let mut used = vec![false; l];
    for &c in &labels {
        used[c] = true;
    }
    ClusterAssignment {
        degenerate: used.iter().any(|u| !u),
        labels,
        num_clusters: l,
        inertia,
    }
}

/// Laplacian, `l`-dimensional embedding, then k-means on the embedded rows.
pub fn spectral_cluster(graph: &SimilarityGraph, l: usize, seed: u64) -> Result<ClusterAssignment> {
    let laplacian = normalized_laplacian(graph);
    let embedding = spectral_embed(&laplacian, l)?;
    kmeans(&embedding.coords, l, seed)
}
