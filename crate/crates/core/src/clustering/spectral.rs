// SPDX-License-Identifier: MIT OR Apache-2.0

//! Normalized-Laplacian spectral clustering (Ng, Jordan & Weiss style).

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ClusterAssignment;
use crate::error::{Error, Result};
use crate::matrices::{LabeledSquareMatrix, MatrixKind};

pub const KMEANS_RESTARTS: usize = 10;
const KMEANS_MAX_ITER: usize = 300;

fn similarity(a: &LabeledSquareMatrix) -> Result<LabeledSquareMatrix> {
    match a.kind() {
        MatrixKind::Affinity | MatrixKind::Alignment => a.to_similarity(),
        other => {
            Err(Error::InvalidMatrix(format!("spectral clustering needs an affinity or alignment matrix, got {other}")))
        }
    }
}

/// Eigenpairs of `L_sym = I - D^{-1/2} A D^{-1/2}`, eigenvalues ascending.
fn laplacian_eigen(a: &LabeledSquareMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let sim = similarity(a)?;
    let n = sim.n();
    let degrees: Vec<f64> = (0..n).map(|i| sim.row(i).iter().sum()).collect();
    if let Some(i) = degrees.iter().position(|&d| d.is_nan() || d <= 0.0) {
        return Err(Error::DisconnectedDegenerate { label: sim.labels()[i].clone() });
    }
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let lap = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - inv_sqrt[i] * sim.get(i, j) * inv_sqrt[j]
    });
    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]).then(x.cmp(&y)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Ascending eigenvalues of the symmetric normalized Laplacian.
pub fn laplacian_spectrum(a: &LabeledSquareMatrix) -> Result<Vec<f64>> {
    Ok(laplacian_eigen(a)?.0)
}

/// `k` in `1..=k_max` maximizing `lambda_{k+1} - lambda_k`; ties go to the
/// smallest `k`. `k_max` is clamped to `n - 1`.
pub fn eigengap_k(a: &LabeledSquareMatrix, k_max: usize) -> Result<usize> {
    let spectrum = laplacian_spectrum(a)?;
    let k_max = k_max.min(spectrum.len().saturating_sub(1));
    let mut best = (1, f64::NEG_INFINITY);
    for k in 1..=k_max {
        let gap = spectrum[k] - spectrum[k - 1];
        if gap > best.1 {
            best = (k, gap);
        }
    }
    Ok(best.0)
}

/// Embeds the rows on the `k` smallest Laplacian eigenvectors (rows scaled
/// to unit length) and runs seeded k-means with farthest-point starts.
/// Alignment matrices are shifted to `[0, 1]` first.
pub fn spectral_cluster(a: &LabeledSquareMatrix, k: usize, seed: u64) -> Result<ClusterAssignment> {
    let n = a.n();
    if k == 0 || k > n {
        return Err(Error::BadK { k, n });
    }
    let (_, vectors) = laplacian_eigen(a)?;
    let points: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let row: Vec<f64> = (0..k).map(|c| vectors[(i, c)]).collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter().map(|v| v / norm).collect()
            } else {
                row
            }
        })
        .collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..KMEANS_RESTARTS {
        let (inertia, assign) = kmeans(&points, k, restart_seed(seed, restart));
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, assign));
        }
    }
    ClusterAssignment::from_raw(a.labels().to_vec(), &best.unwrap().1)
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(restart as u64)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the point farthest from its nearest center; smallest index wins
/// ties.
fn farthest(points: &[Vec<f64>], centers: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, p) in points.iter().enumerate() {
        let d = centers.iter().map(|c| sq_dist(p, c)).fold(f64::INFINITY, f64::min);
        if d > best.1 {
            best = (i, d);
        }
    }
    best.0
}

fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> (f64, Vec<usize>) {
    let n = points.len();
    let dim = points[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    while centers.len() < k {
        let i = farthest(points, &centers);
        centers.push(points[i].clone());
    }

    let nearest = |p: &[f64], centers: &[Vec<f64>]| -> usize {
        let mut best = (0, f64::INFINITY);
        for (c, center) in centers.iter().enumerate() {
            let d = sq_dist(p, center);
            if d < best.1 {
                best = (c, d);
            }
        }
        best.0
    };

    let mut assign: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    for _ in 0..KMEANS_MAX_ITER {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assign) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        // an emptied cluster takes over the worst-served point
        for c in 0..k {
            if counts[c] == 0 {
                let others: Vec<Vec<f64>> =
                    centers.iter().enumerate().filter(|&(o, _)| o != c).map(|(_, v)| v.clone()).collect();
                centers[c] = points[farthest(points, &others)].clone();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
        if next == assign {
            break;
        }
        assign = next;
    }
    let inertia = points.iter().zip(&assign).map(|(p, &c)| sq_dist(p, &centers[c])).sum();
    (inertia, assign)
}
