//! Coarsening by Schur complement (Kron reduction).
//!
//! Given kept vertices `K` and dropped vertices `D`, the coarse generator
//! `Lbar = L_KK + L_KD (-L_DD)^{-1} L_DK` is the generator of the trace of
//! the walk on `K`. The Green matrix `(-L_DD)^{-1}` has row sums equal to
//! the mean hitting times of `K`, which give the constants `beta` and
//! `gamma` used by the norm bounds.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::filterbank::{green_kernel, KernelMethod};
use crate::graph::WeightedGraph;

/// How the Green matrix of the dropped block is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurConfig {
    /// Largest dropped block inverted by a dense factorization.
    pub dense_threshold: usize,
    /// Relative truncation tolerance of the Neumann series.
    pub neumann_tol: f64,
    pub neumann_max_terms: usize,
}

impl Default for SchurConfig {
    fn default() -> Self {
        SchurConfig {
            dense_threshold: 2048,
            neumann_tol: 1e-14,
            neumann_max_terms: 100_000,
        }
    }
}

/// Record of a sparsification pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyInfo {
    pub theta: f64,
    pub removed_pairs: usize,
    /// Maximal rate of the generator before sparsification.
    pub alpha_bar_before: f64,
    /// Per-row budget `eps * alpha_bar / (theta * alpha_fine)`.
    pub row_budget: Vec<f64>,
    /// Per-row `sum_y |Lbar - Lbar_s|(x, y)`.
    pub row_perturbation: Vec<f64>,
}

/// A downsampled vertex set with its coarse generator.
#[derive(Debug, Clone)]
pub struct CoarseLevel {
    /// Kept vertices (ids in the fine graph), ascending.
    pub kept: Vec<usize>,
    /// Dropped vertices, ascending.
    pub dropped: Vec<usize>,
    /// Coarse generator on `kept`.
    pub lbar: DMatrix<f64>,
    /// The coarse generator as a graph with measure `mu` conditioned on `kept`.
    pub graph: WeightedGraph,
    pub mu_bar: Vec<f64>,
    /// `mu(kept)` and `mu(dropped)` under the fine measure.
    pub mu_kept: f64,
    pub mu_dropped: f64,
    pub alpha_bar: f64,
    /// Maximal rate of the fine graph.
    pub alpha_fine: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `(-L_DD)^{-1}`.
    pub green_dropped: DMatrix<f64>,
    /// Mean hitting time of `kept` from each dropped vertex.
    pub hitting_times: Vec<f64>,
    pub sparsification: Option<SparsifyInfo>,
}

impl CoarseLevel {
    pub fn components(&self) -> usize {
        self.graph.components()
    }

    /// `1 / beta`: largest mean excursion length off the kept set.
    pub fn inv_beta(&self) -> f64 {
        1.0 / self.beta
    }

    /// `1 / gamma`: largest mean hitting time of the kept set.
    pub fn inv_gamma(&self) -> f64 {
        1.0 / self.gamma
    }
}

/// Splits `0..n` into the validated kept set and its complement.
pub(crate) fn split(n: usize, kept: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut mark = vec![false; n];
    for &k in kept {
        if k >= n || mark[k] {
            return Err(Error::InvalidSubset(k));
        }
        mark[k] = true;
    }
    let kept: Vec<usize> = (0..n).filter(|&x| mark[x]).collect();
    let dropped: Vec<usize> = (0..n).filter(|&x| !mark[x]).collect();
    Ok((kept, dropped))
}

pub(crate) fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Schur complement onto `kept` with the default configuration.
pub fn schur_complement(g: &WeightedGraph, kept: &[usize]) -> Result<CoarseLevel> {
    schur_complement_with(g, kept, &SchurConfig::default())
}

pub fn schur_complement_with(g: &WeightedGraph, kept: &[usize], config: &SchurConfig) -> Result<CoarseLevel> {
    let n = g.n();
    let (kept, dropped) = split(n, kept)?;
    if kept.is_empty() {
        return Err(Error::EmptyKeptSet);
    }
    if dropped.is_empty() {
        return Err(Error::FullKeptSet);
    }
    let green = if dropped.len() <= config.dense_threshold {
        dense_green(g, &dropped)?
    } else {
        neumann_inverse(g, &dropped, config.neumann_tol, config.neumann_max_terms)?
    };
    let l = g.laplacian();
    let l_kd = submatrix(&l, &kept, &dropped);
    let l_dk = submatrix(&l, &dropped, &kept);
    let lbar_raw = submatrix(&l, &kept, &kept) + &l_kd * (&green * &l_dk);
    build_level(g, kept, dropped, &lbar_raw, green)
}

fn build_level(
    g: &WeightedGraph,
    kept: Vec<usize>,
    dropped: Vec<usize>,
    lbar_raw: &DMatrix<f64>,
    green: DMatrix<f64>,
) -> Result<CoarseLevel> {
    let mu = g.mu();
    let mu_kept: f64 = kept.iter().map(|&x| mu[x]).sum();
    let mu_dropped: f64 = dropped.iter().map(|&x| mu[x]).sum();
    let mu_bar: Vec<f64> = kept.iter().map(|&x| mu[x] / mu_kept).collect();
    let graph = WeightedGraph::from_generator(lbar_raw, &mu_bar)?;
    let lbar = graph.laplacian();

    let hitting_times: Vec<f64> = green.row_iter().map(|r| r.sum()).collect();
    let inv_gamma = hitting_times.iter().cloned().fold(0.0, f64::max);
    let inv_beta = kept
        .iter()
        .map(|&x| {
            g.neighbors(x)
                .iter()
                .filter_map(|&(y, r)| dropped.binary_search(&y).ok().map(|i| r * hitting_times[i]))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
        / g.alpha();

    Ok(CoarseLevel {
        alpha_bar: graph.alpha(),
        alpha_fine: g.alpha(),
        beta: 1.0 / inv_beta,
        gamma: 1.0 / inv_gamma,
        kept,
        dropped,
        lbar,
        graph,
        mu_bar,
        mu_kept,
        mu_dropped,
        green_dropped: green,
        hitting_times,
        sparsification: None,
    })
}

/// `(-L_DD)^{-1}` by LU factorization.
fn dense_green(g: &WeightedGraph, dropped: &[usize]) -> Result<DMatrix<f64>> {
    let block = -submatrix(&g.laplacian(), dropped, dropped);
    block.lu().try_inverse().ok_or(Error::SingularBlock)
}

/// Truncated series `(1/alpha) sum_k (P_DD)^k` for `(-L_DD)^{-1}`, with
/// `P = Id + L / alpha`.
///
/// Terms are added until the newest term's largest row sum falls below
/// `tol` times the largest row sum of the partial sum. Every partial sum is
/// entrywise below the exact inverse.
pub fn neumann_inverse(g: &WeightedGraph, dropped: &[usize], tol: f64, max_terms: usize) -> Result<DMatrix<f64>> {
    let n = g.n();
    let (dropped, _) = split(n, dropped)?;
    let m = dropped.len();
    if m == 0 || m == n {
        return Err(Error::InvalidParameter {
            name: "dropped",
            reason: "must be a nonempty proper subset".into(),
        });
    }
    let alpha = g.alpha();
    let mut index = vec![usize::MAX; n];
    for (i, &x) in dropped.iter().enumerate() {
        index[x] = i;
    }
    // Sparse rows of P restricted to the dropped block.
    let p_rows: Vec<Vec<(usize, f64)>> = dropped
        .iter()
        .map(|&x| {
            let mut row: Vec<(usize, f64)> = g
                .neighbors(x)
                .iter()
                .filter(|&&(y, _)| index[y] != usize::MAX)
                .map(|&(y, r)| (index[y], r / alpha))
                .collect();
            let stay = 1.0 - g.exit_rate(x) / alpha;
            if stay > 0.0 {
                row.push((index[x], stay));
            }
            row
        })
        .collect();

    let mut term = DMatrix::<f64>::identity(m, m);
    let mut sum = term.clone();
    let max_row = |a: &DMatrix<f64>| a.row_iter().map(|r| r.sum()).fold(0.0, f64::max);
    for _ in 0..max_terms {
        let mut next = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for l in 0..m {
                let t = term[(i, l)];
                if t == 0.0 {
                    continue;
                }
                for &(j, p) in &p_rows[l] {
                    next[(i, j)] += t * p;
                }
            }
        }
        term = next;
        let added = max_row(&term);
        sum += &term;
        if added < tol * max_row(&sum) {
            return Ok(sum / alpha);
        }
    }
    Err(Error::NotConverged { terms: max_terms })
}

/// Local intertwining errors
/// `eps(x) = sum_y |(K L)(x, y) - (Lbar K_{kept, .})(x, y)|` for kept `x`.
pub fn local_errors(level: &CoarseLevel, g: &WeightedGraph, qprime: f64) -> Result<Vec<f64>> {
    if !(qprime > 0.0) {
        return Err(Error::NonPositiveParameter {
            name: "qprime",
            value: qprime,
        });
    }
    let k = green_kernel(g, qprime, KernelMethod::Exact)?;
    let lambda = k.select_rows(&level.kept);
    let e = &lambda * g.laplacian() - &level.lbar * &lambda;
    Ok(e.row_iter().map(|r| r.iter().map(|v| v.abs()).sum()).collect())
}

/// Zeroes small coarse rates symmetrically within per-row budgets.
///
/// Off-diagonal pairs are screened in ascending order of
/// `max(wbar(x, y), wbar(y, x))`, ties broken by vertex ids. A pair is
/// removed when both running row totals stay within
/// `eps(x) * alpha_bar / (2 theta alpha_fine)`; diagonals absorb the removed
/// weight so rows keep summing to zero. The result may be disconnected.
pub fn sparsify(level: &CoarseLevel, eps: &[f64], theta: f64, alpha_fine: f64) -> Result<CoarseLevel> {
    let m = level.kept.len();
    if eps.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: eps.len(),
        });
    }
    if !(theta >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: format!("must be at least 1, got {theta}"),
        });
    }
    if eps.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: "local errors must be nonnegative".into(),
        });
    }
    let lbar = &level.lbar;
    let budget: Vec<f64> = eps
        .iter()
        .map(|e| e * level.alpha_bar / (2.0 * theta * alpha_fine))
        .collect();

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let key = lbar[(i, j)].max(lbar[(j, i)]);
            if key > 0.0 {
                pairs.push((key, i, j));
            }
        }
    }
    // Kept ids are ascending, so (i, j) order matches (min id, max id) order.
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut removed = vec![0.0; m];
    let mut out = lbar.clone();
    let mut removed_pairs = 0;
    for (_, i, j) in pairs {
        let (wij, wji) = (lbar[(i, j)], lbar[(j, i)]);
        if removed[i] + wij <= budget[i] && removed[j] + wji <= budget[j] {
            removed[i] += wij;
            removed[j] += wji;
            out[(i, j)] = 0.0;
            out[(j, i)] = 0.0;
            removed_pairs += 1;
        }
    }
    for i in 0..m {
        out[(i, i)] += removed[i];
    }

    let graph = WeightedGraph::from_generator(&out, &level.mu_bar)?;
    let lbar_s = graph.laplacian();
    let row_perturbation = (0..m)
        .map(|i| (0..m).map(|j| (lbar[(i, j)] - lbar_s[(i, j)]).abs()).sum())
        .collect();
    Ok(CoarseLevel {
        alpha_bar: graph.alpha(),
        lbar: lbar_s,
        graph,
        sparsification: Some(SparsifyInfo {
            theta,
            removed_pairs,
            alpha_bar_before: level.alpha_bar,
            row_budget: budget.iter().map(|b| 2.0 * b).collect(),
            row_perturbation,
        }),
        ..level.clone()
    })
}

/// Coordinate dump of a generator: first line `n m`, then `u v w` for each
/// positive off-diagonal entry.
pub fn dump_generator(l: &DMatrix<f64>) -> String {
    let mut lines = Vec::new();
    for i in 0..l.nrows() {
        for j in 0..l.ncols() {
            if i != j && l[(i, j)] > 0.0 {
                lines.push(format!("{i} {j} {}", l[(i, j)]));
            }
        }
    }
    format!("{} {}\n{}\n", l.nrows(), lines.len(), lines.join("\n"))
}
