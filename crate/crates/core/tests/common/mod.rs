//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn random_rank(rng: &mut ChaCha8Rng, rows: usize, cols: usize, rank: usize) -> DMatrix<f64> {
    gaussian(rng, rows, rank) * gaussian(rng, rank, cols)
}

/// Ridge coefficients of each sample over all the others, one LU solve per sample.
pub fn direct_ridge(y: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let n = y.ncols();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut yi = y.clone();
        yi.column_mut(i).fill(0.0);
        let mut a = yi.transpose() * &yi;
        for d in 0..n {
            a[(d, d)] += lambda;
        }
        let c = a.lu().solve(&(yi.transpose() * y.column(i))).unwrap();
        out.set_column(i, &c);
    }
    out
}

/// Best agreement over every injective relabelling of the predicted clusters.
pub fn brute_force_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let kp = pred.iter().max().map_or(0, |m| m + 1);
    let kt = truth.iter().max().map_or(0, |m| m + 1);
    let slots = kp.max(kt);
    let mut best = 0;
    let mut perm: Vec<usize> = (0..slots).collect();
    permute(&mut perm, 0, &mut |p| {
        let hits = pred.iter().zip(truth).filter(|(a, b)| p[**a] == **b).count();
        best = best.max(hits);
    });
    best as f64 / pred.len() as f64
}

fn permute(v: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == v.len() {
        visit(v);
        return;
    }
    for i in at..v.len() {
        v.swap(at, i);
        permute(v, at + 1, visit);
        v.swap(at, i);
    }
}

/// Connected components of the support of a symmetric weight matrix.
pub fn component_count(w: &DMatrix<f64>) -> usize {
    let n = w.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let next = p[x];
            p[x] = r;
            x = next;
        }
        r
    }
    for i in 0..n {
        for j in 0..n {
            if w[(i, j)] != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

/// `argmin_k k + (α/2) Σ_{i>k} σᵢ²` by evaluating every `k` from scratch.
pub fn brute_force_k(sigmas: &[f64], alpha: f64) -> usize {
    let cost = |k: usize| k as f64 + alpha / 2.0 * sigmas[k..].iter().map(|s| s * s).sum::<f64>();
    let mut best = 0;
    for k in 1..=sigmas.len() {
        if cost(k) < cost(best) {
            best = k;
        }
    }
    best
}

/// Right singular vectors sorted by decreasing singular value.
pub fn sorted_right_singular(d: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let svd = d.clone().svd(false, true);
    let vt = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigmas = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = DMatrix::from_fn(vt.ncols(), order.len(), |r, c| vt[(order[c], r)]);
    (sigmas, v)
}

pub fn top_k_projector(d: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let (_, v) = sorted_right_singular(d);
    let top = v.columns(0, k);
    top * top.transpose()
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().sum()
}

pub fn unit(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    v / n
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}
