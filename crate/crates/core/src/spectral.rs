//! Dense spectral decomposition of `-L` in `l2(mu)`.
//!
//! Only the validation paths need the spectrum. The generator is made
//! symmetric through the similarity `S = D^{1/2} (-L) D^{-1/2}` with
//! `D = diag(mu)`, so the eigenvectors of `S` map to `mu`-orthonormal
//! eigenvectors of `-L`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Eigenvalues of `-L` in nondecreasing order.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector `e_i`, normalized in `l2(mu)`.
    pub eigenvectors: DMatrix<f64>,
}

pub fn spectral_decompose(g: &WeightedGraph) -> Result<SpectralDecomposition> {
    let n = g.n();
    let l = g.laplacian();
    let sq: Vec<f64> = g.mu().iter().map(|m| m.sqrt()).collect();
    let mut s = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            s[(x, y)] = -sq[x] * l[(x, y)] / sq[y];
        }
    }
    // Symmetrize away the roundoff left by the similarity transform.
    let s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(s, f64::EPSILON, 10_000).ok_or(Error::ConvergenceFailure)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        for x in 0..n {
            v[x] /= sq[x];
        }
        if v.sum() < 0.0 {
            v = -v;
        }
        eigenvectors.set_column(col, &v);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `e_i` as a slice-backed vector.
    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i).iter().cloned().collect()
    }

    /// Rebuilds `-L` from the decomposition: `sum_i lambda_i e_i e_i^T D`.
    pub fn reconstruct_negative_laplacian(&self, mu: &[f64]) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            let e = self.eigenvectors.column(i);
            for x in 0..n {
                for y in 0..n {
                    m[(x, y)] += lambda * e[x] * e[y] * mu[y];
                }
            }
        }
        m
    }

    /// Characteristic polynomial `det(q Id - L) = prod_i (q + lambda_i)`.
    pub fn characteristic(&self, q: f64) -> f64 {
        self.eigenvalues.iter().map(|l| q + l).product()
    }
}
