//! One level of the filter bank: Green kernel, analysis, reconstruction,
//! scaling functions and wavelets, and the intertwining error.

use nalgebra::{DMatrix, DVector, LU};

use crate::coarsen::{submatrix, CoarseLevel};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Default Chebyshev degree.
pub const DEFAULT_CHEBYSHEV_DEGREE: usize = 30;
/// Largest accepted `max |row sum - 1|` of a Chebyshev kernel.
pub const CHEBYSHEV_MAX_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMethod {
    Exact,
    Chebyshev { degree: usize },
}

/// `K = q' (q' Id - L)^{-1}`.
pub fn green_kernel(g: &WeightedGraph, qprime: f64, method: KernelMethod) -> Result<DMatrix<f64>> {
    green_kernel_with_residual(g, qprime, method).map(|(k, _)| k)
}

/// Green kernel together with `max |row sum - 1|`.
pub fn green_kernel_with_residual(g: &WeightedGraph, qprime: f64, method: KernelMethod) -> Result<(DMatrix<f64>, f64)> {
    if !(qprime > 0.0 && qprime.is_finite()) {
        return Err(Error::NonPositiveParameter {
            name: "qprime",
            value: qprime,
        });
    }
    let k = match method {
        KernelMethod::Exact => exact_kernel(g, qprime)?,
        KernelMethod::Chebyshev { degree } => chebyshev_kernel(g, qprime, degree),
    };
    let residual = k.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
    if let KernelMethod::Chebyshev { degree } = method {
        if residual > CHEBYSHEV_MAX_RESIDUAL {
            return Err(Error::DegreeTooLow {
                degree,
                residual,
                threshold: CHEBYSHEV_MAX_RESIDUAL,
            });
        }
    }
    Ok((k, residual))
}

fn exact_kernel(g: &WeightedGraph, qprime: f64) -> Result<DMatrix<f64>> {
    let n = g.n();
    let m = DMatrix::<f64>::identity(n, n) * qprime - g.laplacian();
    let mut k = DMatrix::<f64>::identity(n, n) * qprime;
    if !m.lu().solve_mut(&mut k) {
        return Err(Error::SolverFailure);
    }
    Ok(k)
}

/// Chebyshev expansion of `x -> q' / (q' + x)` on `[0, 2 alpha]` applied to `-L`.
fn chebyshev_kernel(g: &WeightedGraph, qprime: f64, degree: usize) -> DMatrix<f64> {
    let n = g.n();
    let alpha = g.alpha();
    if alpha == 0.0 {
        return DMatrix::identity(n, n);
    }
    let nodes = degree + 1;
    let h = |lambda: f64| qprime / (qprime + lambda);
    let coeffs: Vec<f64> = (0..=degree)
        .map(|k| {
            let c: f64 = (0..nodes)
                .map(|j| {
                    let t = std::f64::consts::PI * (j as f64 + 0.5) / nodes as f64;
                    h(alpha * (t.cos() + 1.0)) * (k as f64 * t).cos()
                })
                .sum::<f64>()
                * 2.0
                / nodes as f64;
            if k == 0 {
                c / 2.0
            } else {
                c
            }
        })
        .collect();
    // M = (-L - alpha Id) / alpha, applied row-block by row-block.
    let apply_m = |t: &DMatrix<f64>| -> DMatrix<f64> {
        let mut out = DMatrix::zeros(n, n);
        for x in 0..n {
            let wx = g.exit_rate(x);
            for col in 0..n {
                let mut v = (wx - alpha) * t[(x, col)];
                for &(y, r) in g.neighbors(x) {
                    v -= r * t[(y, col)];
                }
                out[(x, col)] = v / alpha;
            }
        }
        out
    };
    let mut t_prev = DMatrix::<f64>::identity(n, n);
    let mut k = &t_prev * coeffs[0];
    if degree == 0 {
        return k;
    }
    let mut t_cur = apply_m(&t_prev);
    k += &t_cur * coeffs[1];
    for c in coeffs.iter().skip(2) {
        let t_next = apply_m(&t_cur) * 2.0 - &t_prev;
        k += &t_next * *c;
        t_prev = t_cur;
        t_cur = t_next;
    }
    k
}

/// Analysis and reconstruction operators of one level.
#[derive(Debug, Clone)]
pub struct FilterBank {
    pub qprime: f64,
    /// Full Green kernel `K_{q'}` on the fine graph.
    pub kernel: DMatrix<f64>,
    /// `n x |kept|`.
    pub rbar: DMatrix<f64>,
    /// `n x |dropped|`.
    pub rbreve: DMatrix<f64>,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
}

/// Approximation `fbar` on the kept set and detail `fbreve` on the dropped set.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResult {
    pub fbar: Vec<f64>,
    pub fbreve: Vec<f64>,
}

/// Builds `Rbar` and `Rbreve` with an exact Green kernel.
pub fn build_reconstructors(g: &WeightedGraph, level: &CoarseLevel, qprime: f64) -> Result<FilterBank> {
    build_reconstructors_with(g, level, qprime, KernelMethod::Exact)
}

pub fn build_reconstructors_with(
    g: &WeightedGraph,
    level: &CoarseLevel,
    qprime: f64,
    method: KernelMethod,
) -> Result<FilterBank> {
    let kernel = green_kernel(g, qprime, method)?;
    let n = g.n();
    let (kept, dropped) = (&level.kept, &level.dropped);
    let (m, d) = (kept.len(), dropped.len());
    if m + d != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m + d,
        });
    }
    let l = g.laplacian();
    let green = &level.green_dropped;
    let hit = green * submatrix(&l, dropped, kept);
    let exc = submatrix(&l, kept, dropped) * green;

    let mut rbar = DMatrix::zeros(n, m);
    let mut rbreve = DMatrix::zeros(n, d);
    for (i, &x) in kept.iter().enumerate() {
        for j in 0..m {
            rbar[(x, j)] = -level.lbar[(i, j)] / qprime;
        }
        rbar[(x, i)] += 1.0;
        for j in 0..d {
            rbreve[(x, j)] = exc[(i, j)];
        }
    }
    for (a, &x) in dropped.iter().enumerate() {
        for j in 0..m {
            rbar[(x, j)] = hit[(a, j)];
        }
        for j in 0..d {
            rbreve[(x, j)] = -qprime * green[(a, j)];
        }
        rbreve[(x, a)] -= 1.0;
    }
    Ok(FilterBank {
        qprime,
        kernel,
        rbar,
        rbreve,
        kept: kept.clone(),
        dropped: dropped.clone(),
    })
}

impl FilterBank {
    pub fn n(&self) -> usize {
        self.kernel.nrows()
    }

    /// `Lambda = K_{kept, .}`.
    pub fn lambda(&self) -> DMatrix<f64> {
        self.kernel.select_rows(&self.kept)
    }
}

/// `fbar = (K f)_{kept}`, `fbreve = ((K - Id) f)_{dropped}`.
pub fn analyze(bank: &FilterBank, f: &[f64]) -> Result<AnalysisResult> {
    let n = bank.n();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    let kf = &bank.kernel * DVector::from_column_slice(f);
    Ok(AnalysisResult {
        fbar: bank.kept.iter().map(|&x| kf[x]).collect(),
        fbreve: bank.dropped.iter().map(|&x| kf[x] - f[x]).collect(),
    })
}

/// `f = Rbar fbar + Rbreve fbreve`.
pub fn reconstruct(bank: &FilterBank, result: &AnalysisResult) -> Result<Vec<f64>> {
    if result.fbar.len() != bank.kept.len() {
        return Err(Error::DimensionMismatch {
            expected: bank.kept.len(),
            got: result.fbar.len(),
        });
    }
    if result.fbreve.len() != bank.dropped.len() {
        return Err(Error::DimensionMismatch {
            expected: bank.dropped.len(),
            got: result.fbreve.len(),
        });
    }
    let f = &bank.rbar * DVector::from_column_slice(&result.fbar)
        + &bank.rbreve * DVector::from_column_slice(&result.fbreve);
    Ok(f.iter().copied().collect())
}

/// Scaling functions (rows indexed by kept vertices) and wavelets (rows
/// indexed by dropped vertices), as densities with respect to `mu`.
#[derive(Debug, Clone)]
pub struct WaveletFamily {
    pub scaling: DMatrix<f64>,
    pub wavelets: DMatrix<f64>,
}

pub fn wavelet_functions(bank: &FilterBank, g: &WeightedGraph) -> WaveletFamily {
    let mu = g.mu();
    let n = bank.n();
    let scaling = DMatrix::from_fn(bank.kept.len(), n, |i, x| bank.kernel[(bank.kept[i], x)] / mu[x]);
    let wavelets = DMatrix::from_fn(bank.dropped.len(), n, |a, x| {
        let v = bank.dropped[a];
        let id = if v == x { 1.0 } else { 0.0 };
        (bank.kernel[(v, x)] - id) / mu[x]
    });
    WaveletFamily { scaling, wavelets }
}

/// `|det|` of the stacked analysis matrix, relative to the product of its
/// row norms. Positive iff the scaling functions and wavelets form a basis.
pub fn basis_conditioning(bank: &FilterBank) -> f64 {
    let n = bank.n();
    let mut m = DMatrix::zeros(n, n);
    for (r, &x) in bank.kept.iter().chain(&bank.dropped).enumerate() {
        m.set_row(r, &bank.kernel.row(x));
        if r >= bank.kept.len() {
            m[(r, x)] -= 1.0;
        }
    }
    let scale: f64 = m.row_iter().map(|r| r.norm()).product();
    LU::new(m).determinant().abs() / scale
}

pub fn is_basis(bank: &FilterBank) -> bool {
    basis_conditioning(bank) > 1e-300
}

/// Intertwining residual `E = Lbar Lambda - Lambda L`.
#[derive(Debug, Clone)]
pub struct IntertwiningError {
    pub matrix: DMatrix<f64>,
    pub norm_inf: f64,
    /// Largest entrywise gap to `L_KD (-L_DD)^{-1} (L K)_{D, .}`.
    pub cross_check_gap: f64,
    /// `2 q' alpha / beta`.
    pub bound: f64,
}

pub fn intertwining_error(bank: &FilterBank, g: &WeightedGraph, level: &CoarseLevel) -> IntertwiningError {
    let l = g.laplacian();
    let lambda = bank.lambda();
    let matrix = &level.lbar * &lambda - &lambda * &l;
    let lk = (&l * &bank.kernel).select_rows(&level.dropped);
    let other = submatrix(&l, &level.kept, &level.dropped) * &level.green_dropped * lk;
    let cross_check_gap = (&matrix - other).abs().max();
    let norm_inf = matrix.row_iter().map(|r| r.iter().map(|v| v.abs()).sum()).fold(0.0, f64::max);
    IntertwiningError {
        matrix,
        norm_inf,
        cross_check_gap,
        bound: 2.0 * bank.qprime * g.alpha() / level.beta,
    }
}
