//! Checks of the probabilistic identities behind the scheme, and the Monte
//! Carlo estimators used to tune `q`.
//!
//! Exact checks enumerate forests or use the Green kernel and carry no
//! randomness. Monte Carlo checks report their standard error and pass
//! within three of them.

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::coarsen::schur_complement;
use crate::error::{Error, Result};
use crate::filterbank::{green_kernel, KernelMethod};
use crate::forest::{enumerate_forests, sample_batch, ForestEnsemble};
use crate::graph::WeightedGraph;
use crate::rng::{derive, Rng};
use crate::spectral::spectral_decompose;

/// Largest graph accepted by the enumeration-backed identity checks.
pub const MAX_IDENTITY_SIZE: usize = 5;

/// How `lhs` and `rhs` are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// `|lhs - rhs| <= tolerance`.
    Equal,
    /// `lhs >= rhs - tolerance`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub quantity: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    /// `None` for exact evaluations.
    pub samples: Option<usize>,
    pub std_error: Option<f64>,
}

impl EstimateReport {
    pub fn equal(quantity: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::build(quantity.into(), lhs, rhs, tolerance, Relation::Equal)
    }

    pub fn at_least(quantity: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::build(quantity.into(), lhs, rhs, tolerance, Relation::AtLeast)
    }

    fn build(quantity: String, lhs: f64, rhs: f64, tolerance: f64, relation: Relation) -> Self {
        let pass = match relation {
            Relation::Equal => (lhs - rhs).abs() <= tolerance,
            Relation::AtLeast => lhs >= rhs - tolerance,
        };
        EstimateReport {
            quantity,
            lhs,
            rhs,
            tolerance,
            relation,
            pass,
            samples: None,
            std_error: None,
        }
    }

    /// Marks the report as a Monte Carlo estimate.
    pub fn sampled(mut self, samples: usize, std_error: f64) -> Self {
        self.samples = Some(samples);
        self.std_error = Some(std_error);
        self
    }
}

fn relative_tolerance(x: f64, tol: f64) -> f64 {
    tol * x.abs().max(1.0)
}

/// Compares the enumerated partition function with `det(q Id - L)`.
pub fn partition_function_check(g: &WeightedGraph, q: f64) -> Result<EstimateReport> {
    let ensemble = enumerate_forests(g, q)?;
    let n = g.n();
    let m = DMatrix::<f64>::identity(n, n) * q - g.laplacian();
    let det = m.lu().determinant();
    Ok(EstimateReport::equal(
        format!("partition_function(q={q})"),
        ensemble.partition_sum,
        det,
        1e-10 * det.abs(),
    ))
}

/// Law of the number of roots, `probabilities[k] = P(|roots| = k)` for `k = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCountLaw {
    pub probabilities: Vec<f64>,
}

impl RootCountLaw {
    /// Convolution of Bernoulli laws with parameters `q / (q + lambda_i)`.
    pub fn exact(g: &WeightedGraph, q: f64) -> Result<Self> {
        if !(q > 0.0) {
            return Err(Error::NonPositiveParameter { name: "q", value: q });
        }
        let spectrum = spectral_decompose(g)?;
        let mut p = vec![1.0];
        for &lambda in &spectrum.eigenvalues {
            let b = q / (q + lambda.max(0.0));
            let mut next = vec![0.0; p.len() + 1];
            for (k, &pk) in p.iter().enumerate() {
                next[k] += pk * (1.0 - b);
                next[k + 1] += pk * b;
            }
            p = next;
        }
        Ok(RootCountLaw { probabilities: p })
    }

    /// Histogram of root counts over `samples` Wilson draws.
    pub fn monte_carlo(g: &WeightedGraph, q: f64, samples: usize, seed: u64) -> Result<Self> {
        let counts = sample_batch(g, q, samples, seed, |f, _| f.root_count())?;
        let mut p = vec![0.0; g.n() + 1];
        for c in counts {
            p[c] += 1.0 / samples as f64;
        }
        Ok(RootCountLaw { probabilities: p })
    }

    pub fn from_ensemble(ensemble: &ForestEnsemble) -> Self {
        RootCountLaw {
            probabilities: ensemble.root_count_law(),
        }
    }

    pub fn total_variation(&self, other: &RootCountLaw) -> f64 {
        let len = self.probabilities.len().max(other.probabilities.len());
        let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        0.5 * (0..len)
            .map(|k| (get(&self.probabilities, k) - get(&other.probabilities, k)).abs())
            .sum::<f64>()
    }

    pub fn p(&self, k: usize) -> f64 {
        self.probabilities.get(k).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimationMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Root-count law in the requested mode with a consistency report.
///
/// Exact mode compares the spectral law with forest enumeration when the
/// graph is small enough, and otherwise checks normalization. Monte Carlo
/// mode compares the histogram with the spectral law in total variation.
pub fn root_count_law(g: &WeightedGraph, q: f64, mode: EstimationMode) -> Result<(RootCountLaw, EstimateReport)> {
    let exact = RootCountLaw::exact(g, q)?;
    match mode {
        EstimationMode::Exact => {
            let report = if g.n() <= crate::forest::MAX_ENUMERATION_SIZE {
                let enumerated = RootCountLaw::from_ensemble(&enumerate_forests(g, q)?);
                EstimateReport::equal(
                    format!("root_count_law_tv(q={q})"),
                    exact.total_variation(&enumerated),
                    0.0,
                    1e-10,
                )
            } else {
                EstimateReport::equal(
                    format!("root_count_law_mass(q={q})"),
                    exact.probabilities.iter().sum(),
                    1.0,
                    1e-12,
                )
            };
            Ok((exact, report))
        }
        EstimationMode::MonteCarlo { samples, seed } => {
            let mc = RootCountLaw::monte_carlo(g, q, samples, seed)?;
            let report = EstimateReport::equal(format!("root_count_law_tv(q={q})"), mc.total_variation(&exact), 0.0, 0.01)
                .sampled(samples, f64::NAN);
            Ok((mc, report))
        }
    }
}

/// Empirical `P(A in roots)` against the minor `det K_q[A, A]`.
pub fn determinantal_marginal(g: &WeightedGraph, q: f64, a: &[usize], samples: usize, seed: u64) -> Result<EstimateReport> {
    if a.len() > 3 {
        return Err(Error::InvalidParameter {
            name: "A",
            reason: "at most 3 vertices".into(),
        });
    }
    if let Some(&bad) = a.iter().find(|&&x| x >= g.n()) {
        return Err(Error::InvalidSubset(bad));
    }
    let name = format!("determinantal_marginal(q={q}, A={a:?})");
    if a.is_empty() {
        return Ok(EstimateReport::equal(name, 1.0, 1.0, 0.0));
    }
    let k = green_kernel(g, q, KernelMethod::Exact)?;
    let minor = DMatrix::from_fn(a.len(), a.len(), |i, j| k[(a[i], a[j])]);
    let expected = minor.determinant();
    let hits = sample_batch(g, q, samples, seed, |f, _| a.iter().all(|&x| f.is_root(x)))?;
    let freq = hits.iter().filter(|&&h| h).count() as f64 / samples as f64;
    let se = (expected * (1.0 - expected) / samples as f64).sqrt();
    Ok(EstimateReport::equal(name, freq, expected, 3.0 * se).sampled(samples, se))
}

/// Walks from `x` until it hits a vertex marked in `target`; returns the
/// elapsed continuous time.
fn hitting_time(g: &WeightedGraph, x: usize, target: impl Fn(usize) -> bool, rng: &mut Rng) -> f64 {
    let mut x = x;
    let mut t = 0.0;
    while !target(x) {
        let wx = g.exit_rate(x);
        let u: f64 = rng.random();
        t -= (1.0 - u).ln() / wx;
        let mut v = rng.random::<f64>() * wx;
        let row = g.neighbors(x);
        let mut next = row[row.len() - 1].0;
        for &(y, r) in row {
            if v < r {
                next = y;
                break;
            }
            v -= r;
        }
        x = next;
    }
    t
}

/// Monte Carlo mean and standard error of `H_roots` from each start.
pub fn hitting_time_estimates(g: &WeightedGraph, q: f64, starts: &[usize], samples: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    starts
        .iter()
        .map(|&x| {
            if x >= g.n() {
                return Err(Error::InvalidSubset(x));
            }
            let h = sample_batch(g, q, samples, derive(seed, x as u64), |f, rng| {
                hitting_time(g, x, |y| f.is_root(y), rng)
            })?;
            let m = h.iter().sum::<f64>() / samples as f64;
            let var = h.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (samples as f64 - 1.0).max(1.0);
            Ok((m, (var / samples as f64).sqrt()))
        })
        .collect()
}

/// `E[H_roots] = P(|roots| > 1) / q` from every start, and agreement of the
/// estimates across starts.
pub fn hitting_identity(g: &WeightedGraph, q: f64, starts: &[usize], samples: usize, seed: u64) -> Result<Vec<EstimateReport>> {
    let law = RootCountLaw::exact(g, q)?;
    let expected = (1.0 - law.p(1)) / q;
    let est = hitting_time_estimates(g, q, starts, samples, seed)?;
    let mut out = Vec::new();
    for (&x, &(m, se)) in starts.iter().zip(&est) {
        out.push(EstimateReport::equal(format!("hitting_time(q={q}, start={x})"), m, expected, 3.0 * se).sampled(samples, se));
    }
    for i in 0..starts.len() {
        for j in i + 1..starts.len() {
            let (mi, si) = est[i];
            let (mj, sj) = est[j];
            let se = (si * si + sj * sj).sqrt();
            out.push(
                EstimateReport::equal(
                    format!("hitting_time_agreement(q={q}, starts=({}, {}))", starts[i], starts[j]),
                    mi,
                    mj,
                    3.0 * se,
                )
                .sampled(samples, se),
            );
        }
    }
    Ok(out)
}

/// Per-forest quantities used by the exact identity checks.
struct ForestTerms {
    kept: usize,
    dropped: usize,
    /// `(1 / |kept|) sum_kept wbar`.
    mean_wbar: f64,
    alpha_bar: f64,
    /// `(1 / |kept|) sum_kept sum_dropped P(x, z) E_z H`.
    mean_excursion: f64,
    inv_beta: f64,
    /// `(1 / |dropped|) sum_dropped E_z H`, zero when nothing is dropped.
    mean_hitting: f64,
    inv_gamma: f64,
    /// `E_x H` for every vertex.
    hitting: Vec<f64>,
}

fn forest_terms(g: &WeightedGraph, roots: &[usize]) -> Result<ForestTerms> {
    let n = g.n();
    let alpha = g.alpha();
    if roots.len() == n {
        let w = g.exit_rates();
        return Ok(ForestTerms {
            kept: n,
            dropped: 0,
            mean_wbar: w.iter().sum::<f64>() / n as f64,
            alpha_bar: alpha,
            mean_excursion: 0.0,
            inv_beta: 0.0,
            mean_hitting: 0.0,
            inv_gamma: 0.0,
            hitting: vec![0.0; n],
        });
    }
    let c = schur_complement(g, roots)?;
    let wbar: Vec<f64> = (0..c.kept.len()).map(|i| -c.lbar[(i, i)]).collect();
    let mut hitting = vec![0.0; n];
    for (a, &z) in c.dropped.iter().enumerate() {
        hitting[z] = c.hitting_times[a];
    }
    let excursions: Vec<f64> = c
        .kept
        .iter()
        .map(|&x| g.neighbors(x).iter().map(|&(z, r)| r / alpha * hitting[z]).sum())
        .collect();
    Ok(ForestTerms {
        kept: c.kept.len(),
        dropped: c.dropped.len(),
        mean_wbar: wbar.iter().sum::<f64>() / c.kept.len() as f64,
        alpha_bar: c.alpha_bar,
        mean_excursion: excursions.iter().sum::<f64>() / c.kept.len() as f64,
        inv_beta: c.inv_beta(),
        mean_hitting: c.hitting_times.iter().sum::<f64>() / c.dropped.len() as f64,
        inv_gamma: c.inv_gamma(),
        hitting,
    })
}

/// Exact checks of the mean identities for the coarse constants, by forest
/// enumeration. For every size `m` of the root set:
///
/// - `E[mean wbar; |kept| = m] = q (n - m + 1) / m * P(|kept| = m - 1)`,
/// - `E[mean excursion; |kept| = m] = (n - m) / (alpha m) * P(|kept| = m)`,
/// - `E[mean hitting time; |kept| = m] = n / (n - m) / q * P(|kept| = m + 1)`,
///
/// together with their sums over `m` and the inequalities for `alpha_bar`,
/// `1 / beta` and `1 / gamma`. Summing the last identity over `m >= 1`
/// gives `(1/q) E[n / (|dropped| + 1); |kept| >= 2]`.
pub fn estimate_identities(g: &WeightedGraph, q: f64) -> Result<Vec<EstimateReport>> {
    let n = g.n();
    if n > MAX_IDENTITY_SIZE {
        return Err(Error::GraphTooLarge {
            n,
            max: MAX_IDENTITY_SIZE,
        });
    }
    let alpha = g.alpha();
    let ensemble = enumerate_forests(g, q)?;
    let law = ensemble.root_count_law();
    let p = |k: usize| law.get(k).copied().unwrap_or(0.0);

    let mut by_m = vec![[0.0f64; 3]; n + 1];
    let (mut e_alpha_bar, mut e_inv_beta, mut e_inv_gamma) = (0.0, 0.0, 0.0);
    let (mut e_wbar, mut e_exc, mut e_hit) = (0.0, 0.0, 0.0);
    let mut terms_cache = std::collections::BTreeMap::new();
    for (f, w) in &ensemble.forests {
        let pr = w / ensemble.partition_sum;
        let roots = f.roots().to_vec();
        if !terms_cache.contains_key(&roots) {
            let t = forest_terms(g, &roots)?;
            terms_cache.insert(roots.clone(), t);
        }
        let t = &terms_cache[&roots];
        by_m[t.kept][0] += pr * t.mean_wbar;
        by_m[t.kept][1] += pr * t.mean_excursion;
        by_m[t.kept][2] += pr * t.mean_hitting;
        e_wbar += pr * t.mean_wbar;
        e_exc += pr * t.mean_excursion;
        e_hit += pr * t.mean_hitting;
        e_alpha_bar += pr * t.alpha_bar;
        e_inv_beta += pr * t.inv_beta;
        e_inv_gamma += pr * t.inv_gamma;
        debug_assert_eq!(t.kept + t.dropped, n);
    }

    let tol = 1e-10;
    let mut out = Vec::new();
    let nf = n as f64;
    for m in 1..=n {
        let mf = m as f64;
        let rhs = q * (nf - mf + 1.0) / mf * p(m - 1);
        out.push(EstimateReport::equal(
            format!("alpha_bar_identity(q={q}, m={m})"),
            by_m[m][0],
            rhs,
            relative_tolerance(rhs, tol),
        ));
        let rhs = (nf - mf) / (alpha * mf) * p(m);
        out.push(EstimateReport::equal(
            format!("beta_identity(q={q}, m={m})"),
            by_m[m][1],
            rhs,
            relative_tolerance(rhs, tol),
        ));
        let rhs = if m == n { 0.0 } else { nf / (nf - mf) / q * p(m + 1) };
        out.push(EstimateReport::equal(
            format!("gamma_identity(q={q}, m={m})"),
            by_m[m][2],
            rhs,
            relative_tolerance(rhs, tol),
        ));
    }

    let rhs_alpha: f64 = (1..=n).map(|k| p(k) * q * (nf - k as f64) / (k as f64 + 1.0)).sum();
    let rhs_beta: f64 = (1..=n).map(|k| p(k) * (nf - k as f64) / (alpha * k as f64)).sum();
    let rhs_gamma: f64 = (2..=n).map(|k| p(k) * nf / (nf - k as f64 + 1.0)).sum::<f64>() / q;
    out.push(EstimateReport::equal(
        format!("alpha_bar_mean_identity(q={q})"),
        e_wbar,
        rhs_alpha,
        relative_tolerance(rhs_alpha, tol),
    ));
    out.push(EstimateReport::equal(
        format!("beta_mean_identity(q={q})"),
        e_exc,
        rhs_beta,
        relative_tolerance(rhs_beta, tol),
    ));
    out.push(EstimateReport::equal(
        format!("gamma_mean_identity(q={q})"),
        e_hit,
        rhs_gamma,
        relative_tolerance(rhs_gamma, tol),
    ));
    out.push(EstimateReport::at_least(format!("alpha_bar_lower_bound(q={q})"), e_alpha_bar, e_wbar, tol));
    out.push(EstimateReport::at_least(format!("inv_beta_lower_bound(q={q})"), e_inv_beta, e_exc, tol));
    out.push(EstimateReport::at_least(format!("inv_gamma_lower_bound(q={q})"), e_inv_gamma, e_hit, tol));
    Ok(out)
}

/// `E[H_roots | |roots| = m] = P(|roots| = m + 1) / (q P(|roots| = m))`
/// from every start, by enumeration.
pub fn conditional_hitting_identity(g: &WeightedGraph, q: f64) -> Result<Vec<EstimateReport>> {
    let n = g.n();
    if n > MAX_IDENTITY_SIZE {
        return Err(Error::GraphTooLarge {
            n,
            max: MAX_IDENTITY_SIZE,
        });
    }
    let ensemble = enumerate_forests(g, q)?;
    let law = ensemble.root_count_law();
    let mut acc = vec![vec![0.0; n]; n + 1];
    for (roots, pr) in ensemble.root_set_law() {
        let t = forest_terms(g, &roots)?;
        for x in 0..n {
            acc[roots.len()][x] += pr * t.hitting[x];
        }
    }
    let mut out = Vec::new();
    for m in 1..=n {
        if law[m] == 0.0 {
            continue;
        }
        let next = if m < n { law[m + 1] } else { 0.0 };
        let rhs = next / (q * law[m]);
        for x in 0..n {
            out.push(EstimateReport::equal(
                format!("conditional_hitting(q={q}, m={m}, start={x})"),
                acc[m][x] / law[m],
                rhs,
                relative_tolerance(rhs, 1e-10),
            ));
        }
    }
    Ok(out)
}

/// Lower bounds on the mean sizes of the kept and dropped sets.
///
/// Exact expectations come from the kernel diagonal,
/// `E|kept| = sum_x K_q(x, x)`. With `samples > 0` the same bounds are also
/// checked on Monte Carlo means with a three standard error slack.
pub fn cardinality_bounds(g: &WeightedGraph, q: f64, r: f64, samples: usize, seed: u64) -> Result<Vec<EstimateReport>> {
    if !(r > 0.0 && r < 1.0) && r != 1.0 {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("must lie in (0, 1], got {r}"),
        });
    }
    let n = g.n();
    let nf = n as f64;
    let alpha = g.alpha();
    let w = g.exit_rates();
    let rapid: Vec<usize> = (0..n).filter(|&x| w[x] >= r * alpha).collect();
    let m_l = w.iter().sum::<f64>() / (alpha * nf);
    let kept_bound = nf * q / (q + alpha);
    let dropped_bound = nf * alpha * m_l / (q + 2.0 * alpha);
    let rapid_bound = rapid.len() as f64 * r * alpha / (q + 2.0 * alpha);

    let k = green_kernel(g, q, KernelMethod::Exact)?;
    let diag: Vec<f64> = (0..n).map(|x| k[(x, x)]).collect();
    let e_kept: f64 = diag.iter().sum();
    let e_rapid: f64 = rapid.iter().map(|&x| 1.0 - diag[x]).sum();
    let tol = 1e-12;
    let mut out = vec![
        EstimateReport::at_least(format!("expected_kept(q={q})"), e_kept, kept_bound, tol),
        EstimateReport::at_least(format!("expected_dropped(q={q})"), nf - e_kept, dropped_bound, tol),
        EstimateReport::at_least(format!("expected_dropped_rapid(q={q}, r={r})"), e_rapid, rapid_bound, tol),
    ];
    let lower_diag = (0..n).all(|x| diag[x] >= q / (q + w[x]) - tol);
    let upper_diag = (0..n).all(|x| 1.0 - diag[x] >= w[x] / (q + 2.0 * alpha) - tol);
    out.push(EstimateReport::equal(
        format!("kernel_diagonal_bounds(q={q})"),
        f64::from(u8::from(lower_diag && upper_diag)),
        1.0,
        0.0,
    ));

    if samples > 0 {
        let draws = sample_batch(g, q, samples, seed, |f, _| {
            let kept = f.root_count() as f64;
            let rapid_dropped = rapid.iter().filter(|&&x| !f.is_root(x)).count() as f64;
            (kept, rapid_dropped)
        })?;
        let stats = |vals: Vec<f64>| {
            let m = vals.iter().sum::<f64>() / samples as f64;
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (samples as f64 - 1.0).max(1.0);
            (m, (var / samples as f64).sqrt())
        };
        let (mk, sk) = stats(draws.iter().map(|d| d.0).collect());
        let (mr, sr) = stats(draws.iter().map(|d| d.1).collect());
        out.push(EstimateReport::at_least(format!("mc_expected_kept(q={q})"), mk, kept_bound, 3.0 * sk).sampled(samples, sk));
        out.push(
            EstimateReport::at_least(format!("mc_expected_dropped(q={q})"), nf - mk, dropped_bound, 3.0 * sk)
                .sampled(samples, sk),
        );
        out.push(
            EstimateReport::at_least(format!("mc_expected_dropped_rapid(q={q}, r={r})"), mr, rapid_bound, 3.0 * sr)
                .sampled(samples, sr),
        );
    }
    Ok(out)
}

/// Monte Carlo estimates of the coarse constants at one value of `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TildeEstimate {
    pub q: f64,
    /// `q mean(|dropped| / (1 + |kept|))`.
    pub alpha_tilde: f64,
    /// `(1 / alpha) mean(|dropped| / |kept|)`.
    pub inv_beta_tilde: f64,
    /// `(1 / q) mean(n / (1 + |dropped|))`.
    pub inv_gamma_tilde: f64,
    pub samples: usize,
}

impl TildeEstimate {
    /// `alpha_tilde / beta_tilde`, minimized by the `q` selection.
    pub fn objective(&self) -> f64 {
        self.alpha_tilde * self.inv_beta_tilde
    }

    /// Estimates from a list of sampled root counts.
    pub fn from_root_counts(n: usize, alpha: f64, q: f64, counts: &[usize]) -> Self {
        let nf = n as f64;
        let s = counts.len() as f64;
        let mut a = 0.0;
        let mut b = 0.0;
        let mut c = 0.0;
        for &k in counts {
            let k = k as f64;
            a += (nf - k) / (1.0 + k);
            b += (nf - k) / k;
            c += nf / (1.0 + nf - k);
        }
        TildeEstimate {
            q,
            alpha_tilde: q * a / s,
            inv_beta_tilde: b / (alpha * s),
            inv_gamma_tilde: c / (q * s),
            samples: counts.len(),
        }
    }
}

/// Tilde estimates on a grid of `q`; grid point `k` uses seed `derive(seed, k)`.
pub fn mc_tilde_estimates(g: &WeightedGraph, q_grid: &[f64], samples: usize, seed: u64) -> Result<Vec<TildeEstimate>> {
    if q_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "q_grid",
            reason: "must be nonempty".into(),
        });
    }
    if samples == 0 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "must be at least 1".into(),
        });
    }
    q_grid
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            let counts = sample_batch(g, q, samples, derive(seed, k as u64), |f, _| f.root_count())?;
            Ok(TildeEstimate::from_root_counts(g.n(), g.alpha(), q, &counts))
        })
        .collect()
}

/// Exact expectation of the tilde estimates under the root-count law.
pub fn exact_tilde_estimates(g: &WeightedGraph, q: f64) -> Result<TildeEstimate> {
    let law = RootCountLaw::exact(g, q)?;
    let (n, nf) = (g.n(), g.n() as f64);
    let mut t = TildeEstimate {
        q,
        alpha_tilde: 0.0,
        inv_beta_tilde: 0.0,
        inv_gamma_tilde: 0.0,
        samples: 0,
    };
    for k in 1..=n {
        let (p, kf) = (law.p(k), k as f64);
        t.alpha_tilde += q * p * (nf - kf) / (1.0 + kf);
        t.inv_beta_tilde += p * (nf - kf) / (g.alpha() * kf);
        t.inv_gamma_tilde += p * nf / (q * (1.0 + nf - kf));
    }
    Ok(t)
}
