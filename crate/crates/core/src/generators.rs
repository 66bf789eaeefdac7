//! Benchmark graphs and signals.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng;
use crate::spectral::spectral_decompose;

/// Path `0 - 1 - ... - (n-1)` with unit rates.
pub fn path(n: usize) -> Result<WeightedGraph> {
    check_size(n)?;
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    WeightedGraph::from_edges(n, &edges, None)
}

/// Cycle on `n >= 3` vertices with unit rates; `n = 2` gives a single edge.
pub fn cycle(n: usize) -> Result<WeightedGraph> {
    check_size(n)?;
    let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    if n > 2 {
        edges.push((n - 1, 0, 1.0));
    }
    WeightedGraph::from_edges(n, &edges, None)
}

/// `rows x cols` grid with unit rates; vertex `(r, c)` has id `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> Result<WeightedGraph> {
    check_size(rows * cols)?;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1, 1.0));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, 1.0));
            }
        }
    }
    WeightedGraph::from_edges(rows * cols, &edges, None)
}

/// Radius giving a connected random geometric graph with high probability.
pub fn default_radius(n: usize) -> f64 {
    1.5 * ((n as f64).ln() / (std::f64::consts::PI * n as f64)).sqrt()
}

/// Points of a geometric graph and the graph itself.
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    pub points: Vec<(f64, f64)>,
    pub radius: f64,
    pub graph: WeightedGraph,
}

/// `n` uniform points in the unit square joined when closer than `radius`,
/// with rate `exp(-d^2 / (2 sigma^2))`, `sigma = radius / 2`.
pub fn geometric(n: usize, radius: f64, seed: u64) -> Result<GeometricGraph> {
    check_size(n)?;
    if !(radius > 0.0) {
        return Err(Error::NonPositiveParameter {
            name: "radius",
            value: radius,
        });
    }
    let mut rng = rng::stream(seed, 0);
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let sigma2 = (radius / 2.0).powi(2);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d2 = (points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2);
            if d2 < radius * radius {
                edges.push((i, j, (-d2 / (2.0 * sigma2)).exp()));
            }
        }
    }
    match WeightedGraph::from_edges(n, &edges, None) {
        Ok(graph) => Ok(GeometricGraph { points, radius, graph }),
        Err(Error::Disconnected { .. }) => Err(Error::RadiusDisconnected { radius }),
        Err(e) => Err(e),
    }
}

/// Retries [`geometric`] with derived seeds until the graph is connected.
pub fn connected_geometric(n: usize, radius: f64, seed: u64, attempts: usize) -> Result<GeometricGraph> {
    let mut last = Error::RadiusDisconnected { radius };
    for a in 0..attempts.max(1) {
        match geometric(n, radius, rng::derive(seed, a as u64)) {
            Ok(g) => return Ok(g),
            Err(e @ Error::RadiusDisconnected { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("need at least 2 vertices, got {n}"),
        });
    }
    Ok(())
}

/// Piecewise-regular signal on a path and the positions of its jumps.
///
/// A breakpoint `b` separates vertices `b - 1` and `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSignal {
    pub values: Vec<f64>,
    pub breakpoints: Vec<usize>,
}

impl PiecewiseSignal {
    /// Path distance from `x` to the nearest jump.
    pub fn distance_to_breakpoint(&self, x: usize) -> usize {
        self.breakpoints
            .iter()
            .map(|&b| if x < b { b - 1 - x } else { x - b })
            .min()
            .unwrap_or(usize::MAX)
    }
}

/// Constant, linear, oscillating and quadratic pieces separated by jumps.
pub fn piecewise_regular(n: usize) -> PiecewiseSignal {
    const CUTS: [f64; 6] = [0.1, 0.25, 0.4, 0.55, 0.7, 0.85];
    let breakpoints: Vec<usize> = CUTS.iter().map(|c| (c * n as f64).round() as usize).collect();
    let values = (0..n)
        .map(|x| {
            let t = x as f64 / n as f64;
            match breakpoints.iter().filter(|&&b| x >= b).count() {
                0 => 1.0,
                1 => -0.5 + 4.0 * (t - 0.1),
                2 => 2.0,
                3 => 0.5 * (2.0 * std::f64::consts::PI * (t - 0.4) / 0.15).sin() - 1.0,
                4 => 0.0,
                5 => 1.5 - 10.0 * (t - 0.7).powi(2),
                _ => -1.5,
            }
        })
        .collect();
    PiecewiseSignal { values, breakpoints }
}

/// `sign(e_1)` for the first nontrivial eigenvector, with `sign(0) = 1`.
pub fn fourier_sign(g: &WeightedGraph) -> Result<Vec<f64>> {
    let s = spectral_decompose(g)?;
    if s.len() < 2 {
        return Err(Error::DegenerateGraph);
    }
    Ok(s.eigenvector(1).iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect())
}

/// Uniform random values in `[-1, 1]`.
pub fn random_signal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, 0);
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_constructions() {
        let p = path(3).unwrap();
        assert_eq!(p.alpha(), 2.0);
        assert_eq!(p.edge_count(), 2);
        let c = cycle(3).unwrap();
        let s = spectral_decompose(&c).unwrap();
        for (l, want) in s.eigenvalues.iter().zip([0.0, 3.0, 3.0]) {
            assert!((l - want).abs() < 1e-10);
        }
        let g = grid(3, 4).unwrap();
        assert_eq!(g.n(), 12);
        assert_eq!(g.edge_count(), 3 * 3 + 2 * 4);
        assert!(path(1).is_err());
    }

    #[test]
    fn geometric_graphs() {
        let g = connected_geometric(200, default_radius(200), 1, 20).unwrap();
        assert_eq!(g.graph.n(), 200);
        assert!(g.graph.is_connected());
        assert!(matches!(geometric(50, 0.01, 3), Err(Error::RadiusDisconnected { .. })));
        let again = connected_geometric(200, default_radius(200), 1, 20).unwrap();
        assert_eq!(again.points, g.points);
    }

    #[test]
    fn signals() {
        let s = piecewise_regular(1024);
        assert_eq!(s.values.len(), 1024);
        for &b in &s.breakpoints {
            assert!((s.values[b] - s.values[b - 1]).abs() > 0.2);
        }
        assert_eq!(s.distance_to_breakpoint(s.breakpoints[0]), 0);
        assert_eq!(s.distance_to_breakpoint(s.breakpoints[0] - 3), 2);
        let sign = fourier_sign(&path(10).unwrap()).unwrap();
        let mut distinct: Vec<f64> = sign.clone();
        distinct.dedup();
        assert_eq!(distinct.len(), 2);
    }
}
