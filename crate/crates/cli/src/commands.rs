use std::fs;
use std::path::Path;
use std::process::ExitCode;

use intertwine::error::{Error, Result};
use intertwine::generators::{self, connected_geometric, default_radius};
use intertwine::io::{read_graph, read_vector, write_graph, write_vector};
use intertwine::pyramid::{curve_csv, select_q_detailed, Compressor};
use intertwine::validation::run_validation;
use intertwine::{decompose, reconstruct_full, PyramidConfig, WeightedGraph};

use crate::{GenArgs, GraphKind, PipelineArgs, SignalKind, TuneArgs, ValidateArgs};

/// Kept fractions of the compression curve.
const CURVE_STEPS: usize = 20;

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn gen(a: &GenArgs) -> Result<ExitCode> {
    let g = match a.kind {
        GraphKind::Path => generators::path(a.n)?,
        GraphKind::Cycle => generators::cycle(a.n)?,
        GraphKind::Grid => generators::grid(a.n, a.cols.unwrap_or(a.n))?,
        GraphKind::Geometric => connected_geometric(a.n, a.radius.unwrap_or_else(|| default_radius(a.n)), a.seed, 1)?.graph,
    };
    write(&a.out, &write_graph(&g))?;
    if let (Some(kind), Some(path)) = (a.signal_kind, &a.signal) {
        let values = match kind {
            SignalKind::Piecewise => {
                if !matches!(a.kind, GraphKind::Path) {
                    return Err(Error::InvalidParameter {
                        name: "signal_kind",
                        reason: "the piecewise signal is defined on paths".into(),
                    });
                }
                let s = generators::piecewise_regular(a.n);
                let cuts: Vec<String> = s.breakpoints.iter().map(|b| b.to_string()).collect();
                println!("breakpoints={}", cuts.join(","));
                s.values
            }
            SignalKind::FourierSign => generators::fourier_sign(&g)?,
            SignalKind::Random => generators::random_signal(g.n(), a.seed),
        };
        write(path, &write_vector(&values))?;
    }
    println!("n={} edges={} alpha={}", g.n(), g.edge_count(), g.alpha());
    Ok(ExitCode::SUCCESS)
}

fn load(a: &PipelineArgs) -> Result<(WeightedGraph, Vec<f64>, PyramidConfig)> {
    let g = read_graph(&a.graph, a.mu.as_deref())?;
    let f = read_vector(&a.signal, Some(g.n()))?;
    let config = PyramidConfig {
        max_levels: a.levels,
        min_size: a.min_size,
        theta1: a.theta1,
        theta2: a.theta2,
        theta_sparsify: a.theta,
        sparsify: a.sparsify,
        grid_size: a.grid,
        samples: a.samples,
        seed: a.seed,
    };
    Ok((g, f, config))
}

fn relative_residual(f: &[f64], rec: &[f64]) -> f64 {
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = f.iter().zip(rec).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

pub fn analyze(a: &PipelineArgs) -> Result<ExitCode> {
    let (g, f, config) = load(a)?;
    let (coeffs, levels) = decompose(&g, &f, &config)?;
    let rec = reconstruct_full(&coeffs, &levels)?;
    write(&a.out.join("coefficients.json"), &coeffs.to_json())?;
    write(&a.out.join("reconstruction.txt"), &write_vector(&rec))?;
    println!(
        "levels={} coarse_size={} coefficients={} reconstruction_residual={:e}",
        coeffs.depth(),
        coeffs.approx.approx_values.len(),
        coeffs.coefficient_count(),
        relative_residual(&f, &rec)
    );
    Ok(ExitCode::SUCCESS)
}

pub fn compress(a: &PipelineArgs) -> Result<ExitCode> {
    let (g, f, config) = load(a)?;
    let (coeffs, levels) = decompose(&g, &f, &config)?;
    let compressor = Compressor::new(&coeffs, &levels)?;
    let (fc, report) = compressor.compress(a.keep)?;
    let mut fractions: Vec<f64> = (0..=CURVE_STEPS).map(|i| i as f64 / CURVE_STEPS as f64).collect();
    if !fractions.contains(&a.keep) {
        fractions.push(a.keep);
        fractions.sort_by(f64::total_cmp);
    }
    let curve = compressor.curve(&fractions)?;
    write(&a.out.join("coefficients.json"), &coeffs.to_json())?;
    write(&a.out.join("compressed.txt"), &write_vector(&fc))?;
    write(&a.out.join("curve.csv"), &curve_csv(&curve))?;
    write(
        &a.out.join("compression.json"),
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    println!(
        "kept_fraction={} kept_count={} total_details={} relative_l2_error={:e}",
        report.kept_fraction, report.kept_count, report.total_details, report.relative_l2_error
    );
    Ok(ExitCode::SUCCESS)
}

pub fn tune(a: &TuneArgs) -> Result<ExitCode> {
    let g = read_graph(&a.graph, a.mu.as_deref())?;
    let s = select_q_detailed(&g, a.theta1, a.theta2, a.grid, a.samples, a.seed)?;
    let mut csv = String::from("q,alpha_tilde,inv_beta_tilde,inv_gamma_tilde,objective\n");
    for t in &s.grid {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            t.q,
            t.alpha_tilde,
            t.inv_beta_tilde,
            t.inv_gamma_tilde,
            t.objective()
        ));
    }
    match &a.out {
        Some(path) => write(path, &csv)?,
        None => print!("{csv}"),
    }
    println!("alpha={} selected_q={}", g.alpha(), s.q);
    Ok(ExitCode::SUCCESS)
}

pub fn validate(a: &ValidateArgs) -> Result<ExitCode> {
    if a.max_n > intertwine::estimators::MAX_IDENTITY_SIZE {
        return Err(Error::GraphTooLarge {
            n: a.max_n,
            max: intertwine::estimators::MAX_IDENTITY_SIZE,
        });
    }
    let report = run_validation(a.max_n, a.samples, a.seed)?;
    write(&a.out, &report.to_jsonl())?;
    let failed: Vec<_> = report.failures().collect();
    for r in &failed {
        eprintln!("fail graph={} quantity={} lhs={} rhs={} tolerance={}", r.graph, r.report.quantity, r.report.lhs, r.report.rhs, r.report.tolerance);
    }
    println!("checks={} passed={} failed={}", report.records.len(), report.records.len() - failed.len(), failed.len());
    Ok(if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
