//! Weighted `l_p` norms and operator norms between weighted spaces.
//!
//! Norms over a subset `A` use the conditional measure `mu_A`, so a weight
//! vector passed here is always a probability vector on the index set.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Exponents used throughout the norm bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PNorm {
    One,
    Two,
    Inf,
}

impl PNorm {
    pub const ALL: [PNorm; 3] = [PNorm::One, PNorm::Two, PNorm::Inf];

    /// `1 / p`, zero for `p = infinity`.
    pub fn inv(self) -> f64 {
        match self {
            PNorm::One => 1.0,
            PNorm::Two => 0.5,
            PNorm::Inf => 0.0,
        }
    }

    /// `1 / p*` for the conjugate exponent.
    pub fn inv_conjugate(self) -> f64 {
        1.0 - self.inv()
    }

    /// `x^{1/p}`.
    pub fn root(self, x: f64) -> f64 {
        match self {
            PNorm::One => x,
            PNorm::Two => x.sqrt(),
            PNorm::Inf => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PNorm::One => "1",
            PNorm::Two => "2",
            PNorm::Inf => "inf",
        }
    }
}

/// Normalizes weights to a probability vector.
pub fn conditional(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// `||f||_{p, nu}` for a probability vector `nu`.
pub fn norm(f: &[f64], nu: &[f64], p: PNorm) -> f64 {
    debug_assert_eq!(f.len(), nu.len());
    match p {
        PNorm::One => f.iter().zip(nu).map(|(v, w)| w * v.abs()).sum(),
        PNorm::Two => f.iter().zip(nu).map(|(v, w)| w * v * v).sum::<f64>().sqrt(),
        PNorm::Inf => f.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// Norm of `a` as an operator from `l_p(nu_in)` to `l_p(nu_out)`.
///
/// Exact for `p` in {1, inf}. For `p = 2` this is the largest singular
/// value of `D_out^{1/2} A D_in^{-1/2}`, found by power iteration on the
/// smaller Gram matrix with a dense eigensolver as fallback.
pub fn operator_norm(a: &DMatrix<f64>, nu_in: &[f64], nu_out: &[f64], p: PNorm) -> f64 {
    assert_eq!(a.ncols(), nu_in.len());
    assert_eq!(a.nrows(), nu_out.len());
    if a.is_empty() {
        return 0.0;
    }
    match p {
        PNorm::Inf => a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max),
        PNorm::One => (0..a.ncols())
            .map(|j| (0..a.nrows()).map(|i| nu_out[i] * a[(i, j)].abs()).sum::<f64>() / nu_in[j])
            .fold(0.0, f64::max),
        PNorm::Two => {
            let mut b = a.clone();
            for i in 0..b.nrows() {
                let s = nu_out[i].sqrt();
                b.row_mut(i).scale_mut(s);
            }
            for j in 0..b.ncols() {
                let s = 1.0 / nu_in[j].sqrt();
                b.column_mut(j).scale_mut(s);
            }
            spectral_norm(&b)
        }
    }
}

/// Largest singular value of `b`.
pub fn spectral_norm(b: &DMatrix<f64>) -> f64 {
    let gram = if b.nrows() >= b.ncols() {
        b.tr_mul(b)
    } else {
        b * b.transpose()
    };
    let m = gram.nrows();
    let mut v = DVector::from_fn(m, |i, _| 1.0 + (i as f64 * 0.618_033_988_7).fract());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w = &gram * &v;
        let next = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        v = w / wn;
        if (next - lambda).abs() <= 1e-12 * next.abs() {
            return next.max(0.0).sqrt();
        }
        lambda = next;
    }
    let eig = SymmetricEigen::new(gram);
    eig.eigenvalues.iter().cloned().fold(0.0, f64::max).sqrt()
}
