//! The validation suite: every estimator check over the graph zoo.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    cardinality_bounds, conditional_hitting_identity, determinantal_marginal, estimate_identities, exact_tilde_estimates,
    hitting_identity, partition_function_check, root_count_law, EstimateReport, EstimationMode, RootCountLaw,
    MAX_IDENTITY_SIZE,
};
use crate::forest::{enumerate_forests, sample_batch};
use crate::graph::WeightedGraph;
use crate::rng::derive;
use crate::zoo::{named_graphs, zoo, ZooGraph};

/// Values of `q` used by the exact checks.
pub const EXACT_Q: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub graph: String,
    pub n: usize,
    #[serde(flatten)]
    pub report: EstimateReport,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub records: Vec<ValidationRecord>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &ValidationRecord> {
        self.records.iter().filter(|r| !r.report.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.failures().next().is_none()
    }

    /// One JSON record per line.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&serde_json::to_string(r).expect("records serialize"));
            s.push('\n');
        }
        s
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(ValidationReport { records })
    }

    fn push(&mut self, g: &ZooGraph, reports: impl IntoIterator<Item = EstimateReport>) {
        for report in reports {
            self.records.push(ValidationRecord {
                graph: g.name.clone(),
                n: g.graph.n(),
                report,
            });
        }
    }
}

/// Exact checks on one graph at one `q`.
pub fn exact_checks(g: &WeightedGraph, q: f64) -> Result<Vec<EstimateReport>> {
    let mut out = vec![partition_function_check(g, q)?];
    let spectral = RootCountLaw::exact(g, q)?;
    let enumerated = RootCountLaw::from_ensemble(&enumerate_forests(g, q)?);
    for k in 0..=g.n() {
        out.push(EstimateReport::equal(
            format!("root_count_probability(q={q}, k={k})"),
            spectral.p(k),
            enumerated.p(k),
            1e-10,
        ));
    }
    if g.n() <= MAX_IDENTITY_SIZE {
        out.extend(estimate_identities(g, q)?);
        out.extend(conditional_hitting_identity(g, q)?);
    }
    out.extend(cardinality_bounds(g, q, 0.5, 0, 0)?);
    Ok(out)
}

/// Monte Carlo checks on one graph at one `q`.
pub fn monte_carlo_checks(g: &WeightedGraph, q: f64, samples: usize, seed: u64) -> Result<Vec<EstimateReport>> {
    let n = g.n();
    let mut out = Vec::new();
    let (_, tv) = root_count_law(g, q, EstimationMode::MonteCarlo { samples, seed: derive(seed, 1) })?;
    out.push(tv);
    let mut sets: Vec<Vec<usize>> = (0..n).map(|x| vec![x]).collect();
    for x in 0..n {
        for y in x + 1..n {
            sets.push(vec![x, y]);
        }
    }
    for (i, a) in sets.iter().enumerate() {
        out.push(determinantal_marginal(g, q, a, samples, derive(seed, 100 + i as u64))?);
    }
    let starts: Vec<usize> = (0..n).collect();
    out.extend(hitting_identity(g, q, &starts, samples, derive(seed, 2))?);

    let exact = exact_tilde_estimates(g, q)?;
    let counts = sample_batch(g, q, samples, derive(seed, 3), |f, _| f.root_count())?;
    let nf = n as f64;
    let per_sample: Vec<f64> = counts.iter().map(|&k| q * (nf - k as f64) / (1.0 + k as f64)).collect();
    let mean = per_sample.iter().sum::<f64>() / samples as f64;
    let var = per_sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples as f64 - 1.0).max(1.0);
    let se = (var / samples as f64).sqrt();
    out.push(EstimateReport::equal(format!("alpha_tilde(q={q})"), mean, exact.alpha_tilde, 3.0 * se).sampled(samples, se));
    out.extend(cardinality_bounds(g, q, 0.5, samples, derive(seed, 4))?.into_iter().filter(|r| r.samples.is_some()));
    Ok(out)
}

/// Exact checks over all connected graphs with `n <= max_n` at every
/// `q` in [`EXACT_Q`]; Monte Carlo checks on the named graphs when
/// `samples > 0`.
pub fn run_validation(max_n: usize, samples: usize, seed: u64) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    for g in zoo(max_n, seed)? {
        for q in EXACT_Q {
            report.push(&g, exact_checks(&g.graph, q)?);
        }
    }
    if samples > 0 {
        for (i, (g, q)) in named_graphs(seed)?.into_iter().enumerate() {
            report.push(&g, monte_carlo_checks(&g.graph, q, samples, derive(seed, i as u64))?);
        }
    }
    Ok(report)
}
