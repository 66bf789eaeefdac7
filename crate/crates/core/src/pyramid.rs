//! The multilevel scheme: parameter selection, decomposition, full
//! reconstruction, compression and the Jackson-type error bound.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coarsen::{local_errors, schur_complement, sparsify, CoarseLevel};
use crate::error::{Error, Result};
use crate::estimators::{mc_tilde_estimates, TildeEstimate};
use crate::filterbank::{analyze, build_reconstructors, intertwining_error, FilterBank, IntertwiningError};
use crate::forest::wilson_sample;
use crate::graph::WeightedGraph;
use crate::norms::{conditional, norm, operator_norm, PNorm};
use crate::rng::derive;

/// Number of redraws when a forest has every vertex as a root.
pub const MAX_RESAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PyramidConfig {
    pub max_levels: usize,
    /// Stop once the approximation has at most this many vertices.
    pub min_size: usize,
    pub theta1: f64,
    pub theta2: f64,
    pub theta_sparsify: f64,
    pub sparsify: bool,
    pub grid_size: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for PyramidConfig {
    fn default() -> Self {
        PyramidConfig {
            max_levels: 64,
            min_size: 16,
            theta1: 0.125,
            theta2: 1.0,
            theta_sparsify: 4.0,
            sparsify: false,
            grid_size: 16,
            samples: 1,
            seed: 0,
        }
    }
}

impl PyramidConfig {
    fn validate(&self) -> Result<()> {
        if self.min_size < 1 {
            return Err(Error::InvalidParameter {
                name: "min_size",
                reason: "must be at least 1".into(),
            });
        }
        check_theta(self.theta1, self.theta2)?;
        check_grid(self.grid_size, self.samples)?;
        if self.sparsify && !(self.theta_sparsify >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: format!("must be at least 1, got {}", self.theta_sparsify),
            });
        }
        Ok(())
    }
}

fn check_theta(theta1: f64, theta2: f64) -> Result<()> {
    if !(theta1 > 0.0 && theta1 < theta2 && theta2.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "theta1/theta2",
            reason: format!("need 0 < theta1 < theta2, got {theta1}, {theta2}"),
        });
    }
    Ok(())
}

fn check_grid(grid_size: usize, samples: usize) -> Result<()> {
    if grid_size < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_size",
            reason: "must be at least 2".into(),
        });
    }
    if samples < 1 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "must be at least 1".into(),
        });
    }
    Ok(())
}

/// Geometric grid of `size` points from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, size: usize) -> Vec<f64> {
    let ratio = hi / lo;
    (0..size)
        .map(|k| match k {
            0 => lo,
            k if k + 1 == size => hi,
            k => lo * ratio.powf(k as f64 / (size - 1) as f64),
        })
        .collect()
}

/// Outcome of the grid search for `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSelection {
    pub q: f64,
    pub grid: Vec<TildeEstimate>,
}

impl QSelection {
    pub fn objective(&self, q: f64) -> Option<f64> {
        self.grid.iter().find(|t| t.q == q).map(TildeEstimate::objective)
    }
}

/// Sampling parameter on a geometric grid in `[theta1 alpha, theta2 alpha]`
/// minimizing the estimated product `alpha_tilde / beta_tilde`.
pub fn select_q(g: &WeightedGraph, theta1: f64, theta2: f64, grid_size: usize, samples: usize, seed: u64) -> Result<f64> {
    select_q_detailed(g, theta1, theta2, grid_size, samples, seed).map(|s| s.q)
}

pub fn select_q_detailed(
    g: &WeightedGraph,
    theta1: f64,
    theta2: f64,
    grid_size: usize,
    samples: usize,
    seed: u64,
) -> Result<QSelection> {
    check_theta(theta1, theta2)?;
    check_grid(grid_size, samples)?;
    if g.n() < 2 || g.alpha() == 0.0 {
        return Err(Error::DegenerateGraph);
    }
    let alpha = g.alpha();
    let grid = geometric_grid(theta1 * alpha, theta2 * alpha, grid_size);
    let table = mc_tilde_estimates(g, &grid, samples, seed)?;
    let mut best = &table[0];
    for row in &table[1..] {
        // Ties go to the larger q.
        if row.objective() <= best.objective() {
            best = row;
        }
    }
    Ok(QSelection {
        q: best.q,
        grid: table.clone(),
    })
}

/// `q' = 2 alpha_bar |kept| / |dropped|`, which makes
/// `1 + 2 alpha_bar / q' = n / |kept|`.
pub fn select_qprime(coarse: &CoarseLevel) -> Result<f64> {
    if coarse.dropped.is_empty() {
        return Err(Error::EmptyComplement);
    }
    let qprime = 2.0 * coarse.alpha_bar * coarse.kept.len() as f64 / coarse.dropped.len() as f64;
    if qprime > 0.0 {
        Ok(qprime)
    } else {
        Err(Error::NonPositiveParameter { name: "qprime", value: qprime })
    }
}

/// One level of the pyramid.
#[derive(Debug, Clone)]
pub struct PyramidLevel {
    pub index: usize,
    /// The level graph `(X_i, L_i, mu_i)`, with `mu_i` conditioned on `X_i`.
    pub graph: WeightedGraph,
    /// Original vertex ids of `X_i`.
    pub ids: Vec<usize>,
    pub q: f64,
    pub qprime: f64,
    pub coarse: CoarseLevel,
    pub bank: FilterBank,
    pub intertwining: IntertwiningError,
    /// Local intertwining errors used to budget sparsification.
    pub local_errors: Option<Vec<f64>>,
    /// Redraws needed because a forest had only roots.
    pub resamples: usize,
}

impl PyramidLevel {
    pub fn params(&self) -> LevelParams {
        LevelParams {
            level: self.index,
            size: self.graph.n(),
            kept: self.coarse.kept.len(),
            q: self.q,
            qprime: self.qprime,
            alpha: self.graph.alpha(),
            alpha_bar: self.coarse.alpha_bar,
            alpha_bar_unsparsified: self
                .coarse
                .sparsification
                .as_ref()
                .map_or(self.coarse.alpha_bar, |s| s.alpha_bar_before),
            beta: self.coarse.beta,
            gamma: self.coarse.gamma,
            intertwining_inf: self.intertwining.norm_inf,
            components: self.coarse.components(),
            sparsify_theta: self.coarse.sparsification.as_ref().map(|s| s.theta),
            removed_pairs: self.coarse.sparsification.as_ref().map_or(0, |s| s.removed_pairs),
        }
    }
}

/// Per-level parameters, serialized with the coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelParams {
    pub level: usize,
    pub size: usize,
    pub kept: usize,
    pub q: f64,
    pub qprime: f64,
    pub alpha: f64,
    pub alpha_bar: f64,
    pub alpha_bar_unsparsified: f64,
    pub beta: f64,
    pub gamma: f64,
    pub intertwining_inf: f64,
    pub components: usize,
    pub sparsify_theta: Option<f64>,
    pub removed_pairs: usize,
}

impl std::fmt::Display for LevelParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "level={} size={} kept={} q={} qprime={} alpha={} alpha_bar={} beta={} gamma={} intertwining_inf={} components={}",
            self.level,
            self.size,
            self.kept,
            self.q,
            self.qprime,
            self.alpha,
            self.alpha_bar,
            self.beta,
            self.gamma,
            self.intertwining_inf,
            self.components
        )?;
        if let Some(theta) = self.sparsify_theta {
            write!(f, " theta={theta} removed_pairs={}", self.removed_pairs)?;
        }
        Ok(())
    }
}

/// Detail coefficients `fbreve_i` of one level, keyed by original ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailBlock {
    pub level: usize,
    pub q: f64,
    pub qprime: f64,
    pub kept_vertex_ids: Vec<usize>,
    pub dropped_vertex_ids: Vec<usize>,
    pub detail_values: Vec<f64>,
}

/// Approximation on the coarsest vertex set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxBlock {
    pub level: usize,
    pub vertex_ids: Vec<usize>,
    pub approx_values: Vec<f64>,
}

/// Coefficients `[f_K, g_K, ..., g_1]`. `details[i]` holds the detail of
/// level `i`, i.e. `g_{i+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PyramidCoefficients {
    pub n: usize,
    pub approx: ApproxBlock,
    pub details: Vec<DetailBlock>,
    pub params: Vec<LevelParams>,
}

impl PyramidCoefficients {
    pub fn depth(&self) -> usize {
        self.details.len()
    }

    pub fn coefficient_count(&self) -> usize {
        self.approx.approx_values.len() + self.details.iter().map(|d| d.detail_values.len()).sum::<usize>()
    }

    pub fn detail_count(&self) -> usize {
        self.details.iter().map(|d| d.detail_values.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coefficients serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: PyramidCoefficients = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if c.coefficient_count() != c.n {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for {} vertices",
                c.coefficient_count(),
                c.n
            )));
        }
        Ok(c)
    }
}

/// Decomposes `f` until the approximation has at most `min_size` vertices,
/// `max_levels` levels were built, or no coarser set can be drawn.
pub fn decompose(g: &WeightedGraph, f: &[f64], config: &PyramidConfig) -> Result<(PyramidCoefficients, Vec<PyramidLevel>)> {
    config.validate()?;
    if f.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: f.len(),
        });
    }
    let mut graph = g.clone();
    let mut ids: Vec<usize> = (0..g.n()).collect();
    let mut signal = f.to_vec();
    let mut levels = Vec::new();
    let mut details = Vec::new();

    for i in 0..config.max_levels {
        if graph.n() <= config.min_size || graph.n() < 2 || graph.alpha() == 0.0 {
            break;
        }
        let level_seed = derive(config.seed, i as u64);
        let q = select_q(
            &graph,
            config.theta1,
            config.theta2,
            config.grid_size,
            config.samples,
            derive(level_seed, 0),
        )?;
        let mut drawn = None;
        for attempt in 0..=MAX_RESAMPLES {
            let forest = wilson_sample(&graph, q, derive(level_seed, 1 + attempt as u64))?;
            if forest.root_count() < graph.n() {
                drawn = Some((forest, attempt));
                break;
            }
        }
        let Some((forest, resamples)) = drawn else {
            log::info!("level={i} stop=all_roots attempts={}", MAX_RESAMPLES + 1);
            break;
        };

        let mut coarse = schur_complement(&graph, forest.roots())?;
        // A coarse generator without edges gives no scale; fall back to q.
        let qprime = select_qprime(&coarse).unwrap_or(q);
        let mut eps = None;
        if config.sparsify {
            let e = local_errors(&coarse, &graph, qprime)?;
            coarse = sparsify(&coarse, &e, config.theta_sparsify, graph.alpha())?;
            eps = Some(e);
        }
        let bank = build_reconstructors(&graph, &coarse, qprime)?;
        let analysis = analyze(&bank, &signal)?;
        let intertwining = intertwining_error(&bank, &graph, &coarse);

        let level = PyramidLevel {
            index: i,
            graph: graph.clone(),
            ids: ids.clone(),
            q,
            qprime,
            intertwining,
            local_errors: eps,
            resamples,
            bank,
            coarse,
        };
        let params = level.params();
        log::info!("{params}");
        details.push(DetailBlock {
            level: i,
            q,
            qprime,
            kept_vertex_ids: level.coarse.kept.iter().map(|&x| ids[x]).collect(),
            dropped_vertex_ids: level.coarse.dropped.iter().map(|&x| ids[x]).collect(),
            detail_values: analysis.fbreve,
        });
        ids = level.coarse.kept.iter().map(|&x| ids[x]).collect();
        signal = analysis.fbar;
        graph = level.coarse.graph.clone();
        levels.push(level);
    }

    let coeffs = PyramidCoefficients {
        n: g.n(),
        approx: ApproxBlock {
            level: levels.len(),
            vertex_ids: ids,
            approx_values: signal,
        },
        details,
        params: levels.iter().map(PyramidLevel::params).collect(),
    };
    Ok((coeffs, levels))
}

fn check_shapes(coeffs: &PyramidCoefficients, levels: &[PyramidLevel]) -> Result<()> {
    if coeffs.details.len() != levels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} detail blocks for {} levels",
            coeffs.details.len(),
            levels.len()
        )));
    }
    let coarsest = levels.last().map_or(coeffs.n, |l| l.coarse.kept.len());
    if coeffs.approx.approx_values.len() != coarsest {
        return Err(Error::ShapeMismatch(format!(
            "approximation has {} values, coarsest level has {coarsest} vertices",
            coeffs.approx.approx_values.len()
        )));
    }
    for (d, l) in coeffs.details.iter().zip(levels) {
        if d.detail_values.len() != l.coarse.dropped.len() {
            return Err(Error::ShapeMismatch(format!(
                "level {} has {} details for {} dropped vertices",
                l.index,
                d.detail_values.len(),
                l.coarse.dropped.len()
            )));
        }
    }
    Ok(())
}

/// `f = Rbar_0 ... Rbar_{K-1} f_K + sum_j Rbar_0 ... Rbar_{j-1} Rbreve_j g_{j+1}`.
pub fn reconstruct_full(coeffs: &PyramidCoefficients, levels: &[PyramidLevel]) -> Result<Vec<f64>> {
    check_shapes(coeffs, levels)?;
    let mut f = DVector::from_column_slice(&coeffs.approx.approx_values);
    for (level, d) in levels.iter().zip(&coeffs.details).rev() {
        f = &level.bank.rbar * f + &level.bank.rbreve * DVector::from_column_slice(&d.detail_values);
    }
    Ok(f.iter().copied().collect())
}

/// Runs the analysis of `f` through an already built level stack.
pub fn analyze_levels(levels: &[PyramidLevel], f: &[f64]) -> Result<PyramidCoefficients> {
    let n = levels.first().map_or(f.len(), |l| l.graph.n());
    if f.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.len() });
    }
    let mut signal = f.to_vec();
    let mut ids: Vec<usize> = levels.first().map_or_else(|| (0..n).collect(), |l| l.ids.clone());
    let mut details = Vec::with_capacity(levels.len());
    for level in levels {
        let analysis = analyze(&level.bank, &signal)?;
        details.push(DetailBlock {
            level: level.index,
            q: level.q,
            qprime: level.qprime,
            kept_vertex_ids: level.coarse.kept.iter().map(|&x| ids[x]).collect(),
            dropped_vertex_ids: level.coarse.dropped.iter().map(|&x| ids[x]).collect(),
            detail_values: analysis.fbreve,
        });
        ids = level.coarse.kept.iter().map(|&x| ids[x]).collect();
        signal = analysis.fbar;
    }
    Ok(PyramidCoefficients {
        n,
        approx: ApproxBlock {
            level: levels.len(),
            vertex_ids: ids,
            approx_values: signal,
        },
        details,
        params: levels.iter().map(PyramidLevel::params).collect(),
    })
}

/// Result of truncating the detail coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub kept_fraction: f64,
    pub kept_count: usize,
    pub total_details: usize,
    /// `||f - f_c||_{2, mu} / ||f||_{2, mu}` against the full reconstruction.
    pub relative_l2_error: f64,
    pub per_level_kept: Vec<usize>,
}

/// A ranked detail coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedDetail {
    pub level: usize,
    /// Position in the level's detail block.
    pub index: usize,
    pub vertex: usize,
    pub value: f64,
    /// `l_2(X, mu)` norm of the matching dual vector.
    pub dual_norm: f64,
    pub score: f64,
}

/// `l_2(X, mu)` norms of the columns of `Rbar_0 ... Rbar_{j-1} Rbreve_j`, per level.
pub fn dual_norms(levels: &[PyramidLevel]) -> Vec<Vec<f64>> {
    let Some(first) = levels.first() else {
        return Vec::new();
    };
    let mu = first.graph.mu();
    let col_norms = |m: &DMatrix<f64>| -> Vec<f64> {
        m.column_iter()
            .map(|c| c.iter().zip(mu).map(|(v, w)| w * v * v).sum::<f64>().sqrt())
            .collect()
    };
    let mut out = Vec::with_capacity(levels.len());
    let mut prefix: Option<DMatrix<f64>> = None;
    for level in levels {
        let (duals, next) = match &prefix {
            None => (level.bank.rbreve.clone(), level.bank.rbar.clone()),
            Some(p) => (p * &level.bank.rbreve, p * &level.bank.rbar),
        };
        out.push(col_norms(&duals));
        prefix = Some(next);
    }
    out
}

/// Ranks detail coefficients and evaluates truncated reconstructions.
#[derive(Debug, Clone)]
pub struct Compressor<'a> {
    coeffs: &'a PyramidCoefficients,
    levels: &'a [PyramidLevel],
    ranking: Vec<RankedDetail>,
    reference: Vec<f64>,
    mu: Vec<f64>,
}

impl<'a> Compressor<'a> {
    pub fn new(coeffs: &'a PyramidCoefficients, levels: &'a [PyramidLevel]) -> Result<Self> {
        let reference = reconstruct_full(coeffs, levels)?;
        let norms = dual_norms(levels);
        let mut ranking = Vec::with_capacity(coeffs.detail_count());
        for (d, level_norms) in coeffs.details.iter().zip(&norms) {
            for (index, (&value, &dual_norm)) in d.detail_values.iter().zip(level_norms).enumerate() {
                ranking.push(RankedDetail {
                    level: d.level,
                    index,
                    vertex: d.dropped_vertex_ids[index],
                    value,
                    dual_norm,
                    score: value.abs() * dual_norm,
                });
            }
        }
        // Stable sort keeps (level, index) order among equal scores.
        ranking.sort_by(|a, b| b.score.total_cmp(&a.score));
        let mu = levels.first().map_or_else(|| vec![1.0 / coeffs.n as f64; coeffs.n], |l| l.graph.mu().to_vec());
        Ok(Compressor {
            coeffs,
            levels,
            ranking,
            reference,
            mu,
        })
    }

    /// Details sorted by decreasing normalized magnitude.
    pub fn ranking(&self) -> &[RankedDetail] {
        &self.ranking
    }

    pub fn keep_count(&self, keep_fraction: f64) -> usize {
        ((keep_fraction * self.ranking.len() as f64).round() as usize).min(self.ranking.len())
    }

    pub fn compress(&self, keep_fraction: f64) -> Result<(Vec<f64>, CompressionReport)> {
        if !(0.0..=1.0).contains(&keep_fraction) {
            return Err(Error::InvalidParameter {
                name: "keep_fraction",
                reason: format!("must lie in [0, 1], got {keep_fraction}"),
            });
        }
        let kept_count = self.keep_count(keep_fraction);
        let mut truncated = self.coeffs.clone();
        let mut keep: Vec<Vec<bool>> = truncated.details.iter().map(|d| vec![false; d.detail_values.len()]).collect();
        for r in &self.ranking[..kept_count] {
            keep[r.level][r.index] = true;
        }
        for (d, k) in truncated.details.iter_mut().zip(&keep) {
            for (v, &k) in d.detail_values.iter_mut().zip(k) {
                if !k {
                    *v = 0.0;
                }
            }
        }
        let fc = reconstruct_full(&truncated, self.levels)?;
        let diff: Vec<f64> = fc.iter().zip(&self.reference).map(|(a, b)| a - b).collect();
        let denom = norm(&self.reference, &self.mu, PNorm::Two);
        let err = norm(&diff, &self.mu, PNorm::Two);
        let report = CompressionReport {
            kept_fraction: keep_fraction,
            kept_count,
            total_details: self.ranking.len(),
            relative_l2_error: if denom > 0.0 { err / denom } else { err },
            per_level_kept: keep.iter().map(|k| k.iter().filter(|&&b| b).count()).collect(),
        };
        Ok((fc, report))
    }

    /// Reports for each fraction in `fractions`.
    pub fn curve(&self, fractions: &[f64]) -> Result<Vec<CompressionReport>> {
        fractions.iter().map(|&k| self.compress(k).map(|(_, r)| r)).collect()
    }
}

/// Keeps the largest `keep_fraction` of normalized details and reconstructs.
pub fn compress(
    coeffs: &PyramidCoefficients,
    levels: &[PyramidLevel],
    keep_fraction: f64,
) -> Result<(Vec<f64>, CompressionReport)> {
    Compressor::new(coeffs, levels)?.compress(keep_fraction)
}

/// Compression curve as `kept_fraction,relative_l2_error` lines.
pub fn curve_csv(reports: &[CompressionReport]) -> String {
    let mut s = String::from("kept_fraction,relative_l2_error\n");
    for r in reports {
        s.push_str(&format!("{},{}\n", r.kept_fraction, r.relative_l2_error));
    }
    s
}

pub fn parse_curve_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("kept_fraction")) {
            continue;
        }
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|s| s.trim().parse().ok()).ok_or(Error::Parse {
                line: i + 1,
                message: format!("expected `fraction,error`, got `{line}`"),
            })
        };
        let mut parts = line.split(',');
        out.push((parse(parts.next())?, parse(parts.next())?));
    }
    Ok(out)
}

/// `||U_k f||_p` of a coefficient set under the original measure.
pub fn analysis_norm(coeffs: &PyramidCoefficients, mu: &[f64], p: PNorm) -> f64 {
    let pairs = coeffs
        .approx
        .vertex_ids
        .iter()
        .zip(&coeffs.approx.approx_values)
        .chain(coeffs.details.iter().flat_map(|d| d.dropped_vertex_ids.iter().zip(&d.detail_values)));
    match p {
        PNorm::Inf => pairs.map(|(_, v)| v.abs()).fold(0.0, f64::max),
        PNorm::One => pairs.map(|(&x, v)| mu[x] * v.abs()).sum(),
        PNorm::Two => pairs.map(|(&x, v)| mu[x] * v * v).sum::<f64>().sqrt(),
    }
}

/// `2^{1/p*} (1 + k)^{1/p}`.
pub fn analysis_norm_bound(depth: usize, p: PNorm) -> f64 {
    2f64.powf(p.inv_conjugate()) * (1.0 + depth as f64).powf(p.inv())
}

/// Per-level constants of the Jackson-type inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacksonConstants {
    pub rbar: Vec<f64>,
    pub rbreve: Vec<f64>,
    pub intertwining: Vec<f64>,
    pub qprime: Vec<f64>,
}

impl JacksonConstants {
    /// Coefficients of `||L f||_p` and `||f||_p` on the right-hand side.
    pub fn coefficients(&self) -> (f64, f64) {
        let (mut smooth, mut err) = (0.0, 0.0);
        let mut prefix = 1.0;
        let mut e_sum = 0.0;
        for j in 0..self.rbar.len() {
            let t = prefix * self.rbreve[j] / self.qprime[j];
            smooth += t;
            err += t * e_sum;
            prefix *= self.rbar[j];
            e_sum += self.intertwining[j];
        }
        (smooth, err)
    }
}

/// `(a^p + b)^{1/p}`, with the `p = infinity` limit `max(a, 1)` for `b > 0`.
fn p_sum(a: f64, b: f64, p: PNorm) -> f64 {
    match p {
        PNorm::One => a + b,
        PNorm::Two => (a * a + b).sqrt(),
        PNorm::Inf => {
            if b > 0.0 {
                a.max(1.0)
            } else {
                a
            }
        }
    }
}

/// Constants from exact operator norms.
pub fn jackson_constants_exact(levels: &[PyramidLevel], p: PNorm) -> JacksonConstants {
    let mut c = JacksonConstants {
        rbar: Vec::new(),
        rbreve: Vec::new(),
        intertwining: Vec::new(),
        qprime: Vec::new(),
    };
    for level in levels {
        let mu = level.graph.mu();
        let cl = &level.coarse;
        let mu_dropped = conditional(&cl.dropped.iter().map(|&x| mu[x]).collect::<Vec<_>>());
        let rbar = operator_norm(&level.bank.rbar, &cl.mu_bar, mu, p);
        let rbreve = operator_norm(&level.bank.rbreve, &mu_dropped, mu, p);
        let e = operator_norm(&level.intertwining.matrix, mu, &cl.mu_bar, p);
        c.rbar.push(p.root(1.0 / cl.mu_kept) * rbar);
        c.rbreve.push(p.root(1.0 / cl.mu_dropped) * rbreve);
        c.intertwining.push(p.root(cl.mu_kept) * e);
        c.qprime.push(level.qprime);
    }
    c
}

/// Constants from the closed-form upper bounds in `alpha`, `beta`, `gamma`.
pub fn jackson_constants_bound(levels: &[PyramidLevel], p: PNorm) -> JacksonConstants {
    let mut c = JacksonConstants {
        rbar: Vec::new(),
        rbreve: Vec::new(),
        intertwining: Vec::new(),
        qprime: Vec::new(),
    };
    for level in levels {
        let cl = &level.coarse;
        let q = level.qprime;
        let ab = level.graph.alpha() / cl.beta;
        c.rbar.push(p_sum(1.0 + 2.0 * cl.alpha_bar / q, ab, p));
        let detail = 1.0 + q / cl.gamma;
        c.rbreve.push(match p {
            PNorm::One => 1.0 + detail,
            PNorm::Two => (ab + detail * detail).sqrt(),
            PNorm::Inf => ab.max(detail),
        });
        c.intertwining.push(2.0 * q * ab.powf(p.inv_conjugate()));
        c.qprime.push(q);
    }
    c
}

/// Both sides of the Jackson-type inequality for one signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacksonReport {
    pub p: PNorm,
    /// `||f - Rbar_0 ... Rbar_{k-1} f_k||_{p, mu}`.
    pub lhs: f64,
    /// Right-hand side with exact operator norms.
    pub rhs_exact: f64,
    /// Right-hand side with the closed-form constants.
    pub rhs_bound: f64,
    pub lf_norm: f64,
    pub f_norm: f64,
}

impl JacksonReport {
    pub fn holds(&self) -> bool {
        let slack = 1.0 + 1e-9;
        self.lhs <= self.rhs_exact * slack + 1e-12 && self.lhs <= self.rhs_bound * slack + 1e-12
    }
}

/// Evaluates the Jackson-type inequality for `f` on a fixed level stack.
pub fn jackson_bound(levels: &[PyramidLevel], f: &[f64], p: PNorm) -> Result<JacksonReport> {
    let exact = jackson_constants_exact(levels, p);
    let bound = jackson_constants_bound(levels, p);
    jackson_bound_with(levels, f, p, &exact, &bound)
}

/// As [`jackson_bound`], with precomputed constants for the same levels and `p`.
pub fn jackson_bound_with(
    levels: &[PyramidLevel],
    f: &[f64],
    p: PNorm,
    exact: &JacksonConstants,
    bound: &JacksonConstants,
) -> Result<JacksonReport> {
    let Some(first) = levels.first() else {
        return Err(Error::ShapeMismatch("no levels".into()));
    };
    let g = &first.graph;
    let mu = g.mu();
    let lf = g.laplacian_apply(f)?;
    let mut signal = f.to_vec();
    for level in levels {
        signal = analyze(&level.bank, &signal)?.fbar;
    }
    let mut approx = DVector::from_column_slice(&signal);
    for level in levels.iter().rev() {
        approx = &level.bank.rbar * approx;
    }
    let diff: Vec<f64> = f.iter().zip(approx.iter()).map(|(a, b)| a - b).collect();
    let lf_norm = norm(&lf, mu, p);
    let f_norm = norm(f, mu, p);
    let rhs = |c: &JacksonConstants| {
        let (s, e) = c.coefficients();
        s * lf_norm + e * f_norm
    };
    Ok(JacksonReport {
        p,
        lhs: norm(&diff, mu, p),
        rhs_exact: rhs(exact),
        rhs_bound: rhs(bound),
        lf_norm,
        f_norm,
    })
}
