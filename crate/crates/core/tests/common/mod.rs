//! Helpers shared by the integration tests.

#![allow(dead_code)]

use lpoa_core::polytope::Halfspace;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Vertices of `{y : n_k^T y <= b_k}` by brute force: solve every square
/// subsystem of `dim` constraints and keep the feasible solutions.
pub fn brute_force_vertices(hs: &[Halfspace], dim: usize) -> Vec<Vec<f64>> {
    let m = hs.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..dim).collect();
    if m < dim {
        return out;
    }
    loop {
        let a = DMatrix::from_fn(dim, dim, |i, j| hs[idx[i]].normal[j]);
        let b = DVector::from_iterator(dim, idx.iter().map(|&k| hs[k].offset));
        if a.determinant().abs() > 1e-12 {
            if let Some(y) = a.lu().solve(&b) {
                let y: Vec<f64> = y.iter().cloned().collect();
                let feasible = hs.iter().all(|h| {
                    let lhs: f64 = h.normal.iter().zip(&y).map(|(s, t)| s * t).sum();
                    lhs <= h.offset + 1e-9 * (1.0 + h.offset.abs())
                });
                if feasible && !out.iter().any(|v| max_dist(v, &y) < 1e-7) {
                    out.push(y);
                }
            }
        }
        // Next combination in lexicographic order.
        let Some(i) = (0..dim).rev().find(|&i| idx[i] != i + m - dim) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..dim {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(s, t)| (s - t).abs()).fold(0.0, f64::max)
}

/// Set equality up to `tol` in the max norm.
pub fn same_point_sets(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|v| b.iter().any(|w| max_dist(v, w) < tol))
        && b.iter().all(|v| a.iter().any(|w| max_dist(v, w) < tol))
}

/// `m` halfspaces with random unit normals whose boundaries pass at random
/// distances in `[0.5, 2]` from the origin, so the origin is interior. The
/// system may be unbounded.
pub fn random_system(rng: &mut ChaCha8Rng, dim: usize, m: usize) -> Vec<Halfspace> {
    (0..m)
        .map(|_| {
            let n: Vec<f64> = loop {
                let n: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let len = n.iter().map(|v| v * v).sum::<f64>().sqrt();
                if len > 0.1 && len <= 1.0 {
                    break n.iter().map(|v| v / len).collect();
                }
            };
            Halfspace::new(n, rng.random_range(0.5..2.0)).unwrap()
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
