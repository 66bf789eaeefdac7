//! Acceptance suite. Runs every criterion at its stated tolerance and
//! prints one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use intertwine::coarsen::schur_complement;
use intertwine::estimators::{
    cardinality_bounds, conditional_hitting_identity, determinantal_marginal, estimate_identities,
    hitting_identity, partition_function_check, root_count_law, EstimateReport, EstimationMode,
};
use intertwine::filterbank::{analyze, build_reconstructors, reconstruct};
use intertwine::forest::wilson_sample;
use intertwine::generators::{self, piecewise_regular, random_signal};
use intertwine::norms::{conditional, norm, operator_norm, PNorm};
use intertwine::pyramid::{
    analysis_norm, analyze_levels, decompose, jackson_bound_with, jackson_constants_bound, jackson_constants_exact,
    reconstruct_full, select_q_detailed, select_qprime, Compressor, PyramidConfig, PyramidLevel,
};
use intertwine::rng::{derive, stream};
use intertwine::validation::EXACT_Q;
use intertwine::zoo::{named_graphs, random_connected, zoo};
use intertwine::WeightedGraph;
use rand::Rng as _;

type Outcome = Result<String, String>;

const SEED: u64 = 20240601;
const MC_SAMPLES: usize = 100_000;

fn rel_inf_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn failures(reports: &[EstimateReport]) -> Vec<String> {
    reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{}: lhs={} rhs={} tol={}", r.quantity, r.lhs, r.rhs, r.tolerance))
        .collect()
}

fn summarize(name: &str, reports: &[EstimateReport]) -> Outcome {
    let bad = failures(reports);
    if bad.is_empty() {
        Ok(format!("{} {name} checks", reports.len()))
    } else {
        Err(format!("{}/{} failed; first: {}", bad.len(), reports.len(), bad[0]))
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(())
    } else {
        Err(format!("took {:.1}s, limit {:.0}s", t.as_secs_f64(), limit.as_secs_f64()))
    }
}

/// The three large graphs shared by criteria 5, 7, 8 and 10.
struct Bench {
    name: &'static str,
    graph: WeightedGraph,
    levels: Vec<PyramidLevel>,
}

fn benches() -> Vec<Bench> {
    let graphs = vec![
        ("path1024", generators::path(1024).unwrap()),
        ("grid32x32", generators::grid(32, 32).unwrap()),
        (
            "geometric500",
            generators::connected_geometric(500, generators::default_radius(500), SEED, 100)
                .unwrap()
                .graph,
        ),
    ];
    graphs
        .into_iter()
        .enumerate()
        .map(|(i, (name, graph))| {
            let config = PyramidConfig {
                seed: derive(SEED, i as u64),
                ..PyramidConfig::default()
            };
            let f = random_signal(graph.n(), derive(SEED, 10 + i as u64));
            let (_, levels) = decompose(&graph, &f, &config).unwrap();
            Bench { name, graph, levels }
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut reports = Vec::new();
    for g in zoo(5, SEED).map_err(|e| e.to_string())? {
        for q in EXACT_Q {
            reports.push(partition_function_check(&g.graph, q).map_err(|e| e.to_string())?);
        }
    }
    within(Duration::from_secs(10), start)?;
    summarize("partition function", &reports)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut reports = Vec::new();
    for (i, (g, q)) in named_graphs(SEED).map_err(|e| e.to_string())?.into_iter().enumerate() {
        let mode = EstimationMode::MonteCarlo {
            samples: MC_SAMPLES,
            seed: derive(SEED, 200 + i as u64),
        };
        let (_, mut r) = root_count_law(&g.graph, q, mode).map_err(|e| e.to_string())?;
        r.quantity = format!("{} {}", g.name, r.quantity);
        if !(r.lhs < 0.01) {
            r.pass = false;
        }
        reports.push(r);
    }
    within(Duration::from_secs(60), start)?;
    let worst = reports.iter().map(|r| r.lhs).fold(0.0, f64::max);
    summarize("root-count TV", &reports).map(|s| format!("{s}, max TV {worst:.4}"))
}

fn criterion_3() -> Outcome {
    let mut reports = Vec::new();
    for (i, (g, q)) in named_graphs(SEED).map_err(|e| e.to_string())?.into_iter().enumerate() {
        let n = g.graph.n();
        let mut sets: Vec<Vec<usize>> = (0..n).map(|x| vec![x]).collect();
        for x in 0..n {
            for y in x + 1..n {
                sets.push(vec![x, y]);
            }
        }
        for (j, a) in sets.iter().enumerate() {
            let seed = derive(derive(SEED, 300 + i as u64), j as u64);
            reports.push(determinantal_marginal(&g.graph, q, a, MC_SAMPLES, seed).map_err(|e| e.to_string())?);
        }
    }
    summarize("marginal", &reports)
}

fn criterion_4() -> Outcome {
    let mut reports = Vec::new();
    for (i, (g, q)) in named_graphs(SEED).map_err(|e| e.to_string())?.into_iter().enumerate() {
        let starts: Vec<usize> = (0..g.graph.n()).collect();
        reports.extend(
            hitting_identity(&g.graph, q, &starts, MC_SAMPLES, derive(SEED, 400 + i as u64))
                .map_err(|e| e.to_string())?,
        );
    }
    summarize("hitting-time", &reports)
}

fn criterion_5(benches: &[Bench]) -> Outcome {
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for (i, b) in benches.iter().enumerate() {
        let n = b.graph.n();
        // One level on a freshly drawn forest.
        let q = b.graph.alpha() / 2.0;
        let forest = wilson_sample(&b.graph, q, derive(SEED, 500 + i as u64)).map_err(|e| e.to_string())?;
        let coarse = schur_complement(&b.graph, forest.roots()).map_err(|e| e.to_string())?;
        let qprime = select_qprime(&coarse).unwrap_or(q);
        let bank = build_reconstructors(&b.graph, &coarse, qprime).map_err(|e| e.to_string())?;
        for s in 0..3 {
            let f = random_signal(n, derive(SEED, 510 + 10 * i as u64 + s));
            let back = reconstruct(&bank, &analyze(&bank, &f).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            worst = worst.max(rel_inf_error(&back, &f));
        }
        // Multi-level on the shared stack.
        for s in 0..3 {
            let f = random_signal(n, derive(SEED, 520 + 10 * i as u64 + s));
            let coeffs = analyze_levels(&b.levels, &f).map_err(|e| e.to_string())?;
            if coeffs.coefficient_count() != n {
                return Err(format!("{}: {} coefficients for {n} vertices", b.name, coeffs.coefficient_count()));
            }
            let back = reconstruct_full(&coeffs, &b.levels).map_err(|e| e.to_string())?;
            worst = worst.max(rel_inf_error(&back, &f));
        }
        details.push(format!("{} depth {}", b.name, b.levels.len()));
    }
    if worst <= 1e-8 {
        Ok(format!("max relative inf-error {worst:.2e}; {}", details.join(", ")))
    } else {
        Err(format!("max relative inf-error {worst:.2e} > 1e-8"))
    }
}

/// `(a^p + b)^{1/p}` including the `p = infinity` limit.
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

fn criterion_6() -> Outcome {
    let slack = |bound: f64| bound * (1.0 + 1e-9) + 1e-12;
    let mut checks = 0usize;
    let mut violations = Vec::new();
    let mut configs = 0;
    let mut attempt = 0u64;
    while configs < 50 {
        attempt += 1;
        let seed = derive(SEED, 600 + attempt);
        let mut rng = stream(seed, 0);
        let n = rng.random_range(4..=24);
        let g = random_connected(n, rng.random_range(0.15..0.6), seed).map_err(|e| e.to_string())?;
        let kept: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < 0.4).collect();
        if kept.is_empty() || kept.len() == n {
            continue;
        }
        configs += 1;
        let cl = schur_complement(&g, &kept).map_err(|e| e.to_string())?;
        let qprime = g.alpha() * 10f64.powf(rng.random_range(-1.5..1.0));
        let bank = build_reconstructors(&g, &cl, qprime).map_err(|e| e.to_string())?;
        let it = intertwining_error_matrix(&bank.kernel, &cl.lbar, &g, &cl.kept);
        let mu = g.mu();
        let mu_dropped = conditional(&cl.dropped.iter().map(|&x| mu[x]).collect::<Vec<_>>());
        let ab = g.alpha() / cl.beta;
        let l = g.laplacian();
        // (K - Id) restricted to dropped rows, composed with nothing: the
        // detail bound is checked on random f only.
        let max_k_dropped = (0..n)
            .map(|x| cl.dropped.iter().map(|&y| bank.kernel[(x, y)]).sum::<f64>())
            .fold(0.0, f64::max);
        for p in PNorm::ALL {
            let rbar_bound = p_sum(1.0 + 2.0 * cl.alpha_bar / qprime, ab, p) * p.root(cl.mu_kept);
            let det = 1.0 + qprime / cl.gamma;
            let rbreve_bound = match p {
                PNorm::One => 1.0 + det,
                PNorm::Two => (ab + det * det).sqrt(),
                PNorm::Inf => ab.max(det),
            } * p.root(cl.mu_dropped);
            let e_bound = 2.0 * qprime * ab.powf(p.inv_conjugate()) / p.root(cl.mu_kept);
            let detail_bound = p.root(max_k_dropped) / (qprime * p.root(cl.mu_dropped));

            let exact = [
                ("Rbar", operator_norm(&bank.rbar, &cl.mu_bar, mu, p), rbar_bound),
                ("Rbreve", operator_norm(&bank.rbreve, &mu_dropped, mu, p), rbreve_bound),
                ("E", operator_norm(&it, mu, &cl.mu_bar, p), e_bound),
            ];
            for (name, value, bound) in exact {
                checks += 1;
                if value > slack(bound) {
                    violations.push(format!("config {configs} p={} {name}: {value} > {bound}", p.label()));
                }
            }
            for s in 0..4u64 {
                let mut r = stream(seed, 1 + s);
                let fk: Vec<f64> = (0..cl.kept.len()).map(|_| r.random_range(-1.0..1.0)).collect();
                let fd: Vec<f64> = (0..cl.dropped.len()).map(|_| r.random_range(-1.0..1.0)).collect();
                let f: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
                let rf = mat_vec(&bank.rbar, &fk);
                let rbf = mat_vec(&bank.rbreve, &fd);
                let ef = mat_vec(&it, &f);
                let a = analyze(&bank, &f).map_err(|e| e.to_string())?;
                let lf = mat_vec(&l, &f);
                let cases = [
                    ("Rbar f", norm(&rf, mu, p), rbar_bound * norm(&fk, &cl.mu_bar, p)),
                    ("Rbreve f", norm(&rbf, mu, p), rbreve_bound * norm(&fd, &mu_dropped, p)),
                    ("E f", norm(&ef, &cl.mu_bar, p), e_bound * norm(&f, mu, p)),
                    ("detail", norm(&a.fbreve, &mu_dropped, p), detail_bound * norm(&lf, mu, p)),
                ];
                for (name, value, bound) in cases {
                    checks += 1;
                    if value > slack(bound) {
                        violations.push(format!("config {configs} p={} {name}: {value} > {bound}", p.label()));
                    }
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(format!("{configs} configurations, {checks} inequalities, zero violations"))
    } else {
        Err(format!("{} violations; first: {}", violations.len(), violations[0]))
    }
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * nalgebra::DVector::from_column_slice(v)).iter().copied().collect()
}

/// `E = Lbar K_{kept, .} - K_{kept, .} L`, computed from scratch.
fn intertwining_error_matrix(kernel: &DMatrix<f64>, lbar: &DMatrix<f64>, g: &WeightedGraph, kept: &[usize]) -> DMatrix<f64> {
    let lambda = kernel.select_rows(kept);
    lbar * &lambda - &lambda * g.laplacian()
}

fn criterion_7(benches: &[Bench]) -> Outcome {
    let mut checks = 0;
    for (i, b) in benches.iter().enumerate() {
        let mu = b.graph.mu();
        for s in 0..5u64 {
            let f = random_signal(b.graph.n(), derive(SEED, 700 + 10 * i as u64 + s));
            for k in 1..=b.levels.len() {
                let coeffs = analyze_levels(&b.levels[..k], &f).map_err(|e| e.to_string())?;
                let inf = analysis_norm(&coeffs, mu, PNorm::Inf);
                let one = analysis_norm(&coeffs, mu, PNorm::One);
                let f_inf = norm(&f, mu, PNorm::Inf);
                let f_one = norm(&f, mu, PNorm::One);
                checks += 2;
                if inf > 2.0 * f_inf * (1.0 + 1e-12) {
                    return Err(format!("{} depth {k}: ||U f||_inf = {inf} > 2 * {f_inf}", b.name));
                }
                if one > (1.0 + k as f64) * f_one * (1.0 + 1e-12) {
                    return Err(format!("{} depth {k}: ||U f||_1 = {one} > {} * {f_one}", b.name, 1 + k));
                }
            }
        }
    }
    Ok(format!("{checks} inequalities over all depths"))
}

fn criterion_8(benches: &[Bench]) -> Outcome {
    let mut checks = 0;
    let mut tightest = 0.0f64;
    for p in PNorm::ALL {
        for (i, b) in benches.iter().enumerate() {
            let exact = jackson_constants_exact(&b.levels, p);
            let bound = jackson_constants_bound(&b.levels, p);
            let count = if i == 0 { 16 } else { 17 };
            for s in 0..count {
                let f = random_signal(b.graph.n(), derive(SEED, 800 + 100 * i as u64 + s));
                let r = jackson_bound_with(&b.levels, &f, p, &exact, &bound).map_err(|e| e.to_string())?;
                checks += 1;
                if !r.holds() {
                    return Err(format!(
                        "{} p={} signal {s}: lhs {} rhs_exact {} rhs_bound {}",
                        b.name,
                        p.label(),
                        r.lhs,
                        r.rhs_exact,
                        r.rhs_bound
                    ));
                }
                tightest = tightest.max(r.lhs / r.rhs_exact);
            }
        }
    }
    Ok(format!("{checks} signal/norm pairs, largest lhs/rhs_exact {tightest:.3e}"))
}

fn criterion_9() -> Outcome {
    let mut reports = Vec::new();
    for g in zoo(5, SEED).map_err(|e| e.to_string())? {
        for q in EXACT_Q {
            reports.extend(estimate_identities(&g.graph, q).map_err(|e| e.to_string())?);
            reports.extend(conditional_hitting_identity(&g.graph, q).map_err(|e| e.to_string())?);
            reports.extend(cardinality_bounds(&g.graph, q, 0.5, 0, 0).map_err(|e| e.to_string())?);
        }
    }
    let loose: Vec<&EstimateReport> = reports
        .iter()
        .filter(|r| matches!(r.relation, intertwine::estimators::Relation::Equal) && r.tolerance > 1e-10 * r.rhs.abs().max(1.0) * (1.0 + 1e-12))
        .collect();
    if let Some(r) = loose.first() {
        return Err(format!("{} tolerance {} looser than 1e-10 relative", r.quantity, r.tolerance));
    }
    summarize("identity", &reports)
}

fn criterion_10(benches: &[Bench]) -> Outcome {
    let mut checks = 0;
    for (i, b) in benches.iter().enumerate() {
        for level in &b.levels {
            let g = &level.graph;
            let sel = select_q_detailed(g, 0.125, 1.0, 16, 1, derive(SEED, 1000 + i as u64)).map_err(|e| e.to_string())?;
            let (lo, hi) = (0.125 * g.alpha(), g.alpha());
            if !(sel.q >= lo * (1.0 - 1e-12) && sel.q <= hi * (1.0 + 1e-12)) {
                return Err(format!("{} level {}: q = {} outside [{lo}, {hi}]", b.name, level.index, sel.q));
            }
            let best = sel.objective(sel.q).unwrap();
            let first = sel.grid.first().unwrap().objective();
            let last = sel.grid.last().unwrap().objective();
            if best > first || best > last {
                return Err(format!("{} level {}: objective {best} above an endpoint", b.name, level.index));
            }
            if level.coarse.alpha_bar > 0.0 {
                let lhs = 1.0 + 2.0 * level.coarse.alpha_bar / level.qprime;
                let rhs = g.n() as f64 / level.coarse.kept.len() as f64;
                if (lhs - rhs).abs() > 1e-12 * rhs {
                    return Err(format!("{} level {}: 1 + 2 alpha_bar/q' = {lhs}, |X_i|/|X_i+1| = {rhs}", b.name, level.index));
                }
            }
            checks += 1;
        }
    }
    Ok(format!("{checks} levels"))
}

fn criterion_11() -> Outcome {
    let g = generators::grid(16, 16).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for (t, theta) in [2.0, 4.0, 8.0].into_iter().enumerate() {
        let f = random_signal(g.n(), derive(SEED, 1100 + t as u64));
        let config = PyramidConfig {
            sparsify: true,
            theta_sparsify: theta,
            seed: derive(SEED, 1110),
            ..PyramidConfig::default()
        };
        let (coeffs, levels) = decompose(&g, &f, &config).map_err(|e| e.to_string())?;
        let back = reconstruct_full(&coeffs, &levels).map_err(|e| e.to_string())?;
        let residual = rel_inf_error(&back, &f);
        if !residual.is_finite() {
            return Err(format!("theta {theta}: residual {residual}"));
        }
        let mut removed = 0;
        for level in &levels {
            let info = level.coarse.sparsification.as_ref().ok_or("level without sparsification record")?;
            removed += info.removed_pairs;
            for (x, (&used, &budget)) in info.row_perturbation.iter().zip(&info.row_budget).enumerate() {
                if used > budget * (1.0 + 1e-12) + 1e-15 {
                    return Err(format!("theta {theta} level {} row {x}: {used} > {budget}", level.index));
                }
            }
        }
        notes.push(format!("theta {theta}: depth {} removed {removed} residual {residual:.1e}", levels.len()));
    }
    Ok(notes.join("; "))
}

fn criterion_12() -> Outcome {
    let start = Instant::now();
    let n = 1024;
    let g = generators::path(n).map_err(|e| e.to_string())?;
    let signal = piecewise_regular(n);
    let f = &signal.values;
    let (coeffs, levels) = decompose(&g, f, &PyramidConfig::default()).map_err(|e| e.to_string())?;
    let compressor = Compressor::new(&coeffs, &levels).map_err(|e| e.to_string())?;
    let fractions: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let curve = compressor.curve(&fractions).map_err(|e| e.to_string())?;
    for w in curve.windows(2) {
        if w[1].relative_l2_error > w[0].relative_l2_error {
            return Err(format!(
                "error increases from {} at {} to {} at {}",
                w[0].relative_l2_error, w[0].kept_fraction, w[1].relative_l2_error, w[1].kept_fraction
            ));
        }
    }
    let full = curve.last().unwrap();
    // Against the signal itself, not only the untruncated reconstruction.
    let (all, _) = compressor.compress(1.0).map_err(|e| e.to_string())?;
    let diff: Vec<f64> = all.iter().zip(f).map(|(a, b)| a - b).collect();
    let vs_signal = norm(&diff, g.mu(), PNorm::Two) / norm(f, g.mu(), PNorm::Two);
    if full.relative_l2_error > 1e-8 || vs_signal > 1e-8 {
        return Err(format!("error at 100%: {} (vs signal {vs_signal})", full.relative_l2_error));
    }
    let kept = compressor.keep_count(0.1);
    let top = (kept as f64 / 10.0).round().max(1.0) as usize;
    let near = compressor.ranking()[..top]
        .iter()
        .filter(|d| signal.distance_to_breakpoint(d.vertex) <= 2)
        .count();
    within(Duration::from_secs(120), start)?;
    let share = near as f64 / top as f64;
    let at10 = compressor.compress(0.1).map_err(|e| e.to_string())?.1.relative_l2_error;
    // Same statistic on a two-level decomposition, for comparison.
    let shallow = PyramidConfig {
        max_levels: 2,
        ..PyramidConfig::default()
    };
    let (c2, l2) = decompose(&g, f, &shallow).map_err(|e| e.to_string())?;
    let comp2 = Compressor::new(&c2, &l2).map_err(|e| e.to_string())?;
    let top2 = (comp2.keep_count(0.1) as f64 / 10.0).round().max(1.0) as usize;
    let near2 = comp2.ranking()[..top2]
        .iter()
        .filter(|d| signal.distance_to_breakpoint(d.vertex) <= 2)
        .count();
    let msg = format!(
        "depth {}, error at 10% {at10:.2e}, {near}/{top} top-decile details within 2 of a breakpoint (two-level: {near2}/{top2})",
        levels.len()
    );
    if share >= 0.8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let total = Instant::now();
    let mut failed = 0;
    let mut run = |id: usize, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let t = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {id:>2} {name} ({t:.1}s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {id:>2} {name} ({t:.1}s): {msg}");
            }
        }
    };
    run(1, "partition function", &criterion_1);
    run(2, "root-count law", &criterion_2);
    run(3, "determinantal marginals", &criterion_3);
    run(4, "hitting-time identity", &criterion_4);
    let b = benches();
    run(5, "exact reconstruction", &|| criterion_5(&b));
    run(6, "operator-norm bounds", &criterion_6);
    run(7, "analysis-norm bound", &|| criterion_7(&b));
    run(8, "Jackson inequality", &|| criterion_8(&b));
    run(9, "estimate identities", &criterion_9);
    run(10, "parameter selection", &|| criterion_10(&b));
    run(11, "sparsification budget", &criterion_11);
    run(12, "compression", &criterion_12);
    println!("acceptance: {} of 12 failed ({:.1}s)", failed, total.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
