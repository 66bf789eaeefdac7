//! Finite reversible weighted graphs and their generators.
//!
//! A [`WeightedGraph`] stores the jump rates `w(x, y)` of a continuous-time
//! random walk together with a reversible probability measure `mu`. Its
//! generator (the graph Laplacian) acts on functions by
//! `(L f)(x) = sum_y w(x, y) (f(y) - f(x))`.

use nalgebra::DMatrix;

use crate::config::Tolerances;
use crate::error::{Error, Result};

/// A finite weighted graph carrying a reversible Markov generator.
///
/// Rates are stored as sorted adjacency lists. The measure is normalized to
/// a probability vector and satisfies detailed balance with the rates.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    mu: Vec<f64>,
    exit: Vec<f64>,
    alpha: f64,
    components: usize,
}

/// Builds a validated graph from directed rate entries `(x, y, w(x, y))`.
///
/// The vertex count is one more than the largest index, or the length of
/// `mu` when it is given.
pub fn build_graph(edges: &[(usize, usize, f64)], mu: Option<&[f64]>) -> Result<WeightedGraph> {
    let from_edges = edges.iter().map(|&(x, y, _)| x.max(y) + 1).max().unwrap_or(1);
    let n = mu.map_or(from_edges, |m| m.len());
    WeightedGraph::from_edges(n, edges, mu)
}

impl WeightedGraph {
    /// Builds a graph on `n` vertices with the default tolerances.
    ///
    /// Each entry `(x, y, r)` sets `w(x, y) = r`. When the reverse entry is
    /// missing it is filled in by detailed balance: symmetrically when `mu`
    /// is omitted, `w(y, x) = mu(x) r / mu(y)` otherwise. When `mu` is
    /// omitted the rates must be symmetric and `mu` is uniform.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], mu: Option<&[f64]>) -> Result<Self> {
        Self::from_edges_with(n, edges, mu, &Tolerances::default())
    }

    pub fn from_edges_with(
        n: usize,
        edges: &[(usize, usize, f64)],
        mu: Option<&[f64]>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "graph needs at least one vertex".into(),
            });
        }
        let mu = match mu {
            Some(m) => normalize_measure(m, n)?,
            None => vec![1.0 / n as f64; n],
        };

        let mut given: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(x, y, r) in edges {
            if x >= n || y >= n {
                return Err(Error::InvalidEdge {
                    from: x,
                    to: y,
                    reason: "vertex index out of range",
                });
            }
            if x == y {
                return Err(Error::InvalidEdge {
                    from: x,
                    to: y,
                    reason: "self-loop",
                });
            }
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::NonPositiveRate { from: x, to: y, rate: r });
            }
            if given[x].iter().any(|&(t, _)| t == y) {
                return Err(Error::InvalidEdge {
                    from: x,
                    to: y,
                    reason: "duplicate entry",
                });
            }
            given[x].push((y, r));
        }

        let mut adj = given.clone();
        for x in 0..n {
            for &(y, r) in &given[x] {
                if !given[y].iter().any(|&(t, _)| t == x) {
                    adj[y].push((x, mu[x] * r / mu[y]));
                }
            }
        }
        for row in adj.iter_mut() {
            row.sort_by_key(|&(y, _)| y);
        }

        let scale = adj
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().map(move |&(_, r)| (x, r)))
            .map(|(x, r)| mu[x] * r)
            .fold(0.0, f64::max);
        for x in 0..n {
            for &(y, r) in &adj[x] {
                let back = rate_in(&adj[y], x);
                let lhs = mu[x] * r;
                let rhs = mu[y] * back;
                if (lhs - rhs).abs() > tol.exact * scale {
                    return Err(Error::ReversibilityViolation { x, y, lhs, rhs });
                }
            }
        }

        let g = Self::assemble(adj, mu);
        if g.components > 1 {
            return Err(Error::Disconnected {
                components: g.components,
            });
        }
        Ok(g)
    }

    /// Builds a graph from a dense generator matrix and a positive measure.
    ///
    /// Off-diagonal entries become rates and the diagonal is recomputed from
    /// them, so rows sum to zero exactly. Rates are averaged in the
    /// `mu`-weighted sense to make detailed balance hold to roundoff; a
    /// relative defect above `1e-8` is rejected. Disconnected supports are
    /// accepted and reported by [`WeightedGraph::components`].
    pub fn from_generator(l: &DMatrix<f64>, mu: &[f64]) -> Result<Self> {
        let n = l.nrows();
        if l.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: l.ncols(),
            });
        }
        let mu = normalize_measure(mu, n)?;
        let scale = (0..n).map(|x| l[(x, x)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let flux_scale = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|&(x, y)| x != y)
            .map(|(x, y)| (mu[x] * l[(x, y)]).abs())
            .fold(0.0, f64::max);
        let mut adj = vec![Vec::new(); n];
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let v = l[(x, y)];
                if v < -1e-12 * scale {
                    return Err(Error::NonPositiveRate { from: x, to: y, rate: v });
                }
                let (fx, fy) = (mu[x] * l[(x, y)], mu[y] * l[(y, x)]);
                if (fx - fy).abs() > 1e-8 * flux_scale {
                    return Err(Error::ReversibilityViolation { x, y, lhs: fx, rhs: fy });
                }
                let flux = 0.5 * (fx + fy);
                if flux > 1e-15 * flux_scale {
                    adj[x].push((y, flux / mu[x]));
                }
            }
        }
        Ok(Self::assemble(adj, mu))
    }

    fn assemble(adj: Vec<Vec<(usize, f64)>>, mu: Vec<f64>) -> Self {
        let exit: Vec<f64> = adj.iter().map(|row| row.iter().map(|&(_, r)| r).sum()).collect();
        let alpha = exit.iter().cloned().fold(0.0, f64::max);
        let components = count_components(&adj);
        WeightedGraph {
            adj,
            mu,
            exit,
            alpha,
            components,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Maximal total exit rate.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Total exit rate `w(x)`.
    pub fn exit_rate(&self, x: usize) -> f64 {
        self.exit[x]
    }

    pub fn exit_rates(&self) -> &[f64] {
        &self.exit
    }

    /// Out-neighbours of `x` with their rates, sorted by vertex.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adj[x]
    }

    /// The rate `w(x, y)`, zero when there is no edge.
    pub fn rate(&self, x: usize, y: usize) -> f64 {
        rate_in(&self.adj[x], y)
    }

    /// Number of connected components of the support graph.
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn is_connected(&self) -> bool {
        self.components == 1
    }

    /// Directed rate entries `(x, y, w(x, y))` in row order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().map(move |&(y, r)| (x, y, r)))
    }

    /// Number of unordered vertex pairs carrying a rate.
    pub fn edge_count(&self) -> usize {
        self.edges().filter(|&(x, y, _)| x < y).count()
    }

    /// Dense generator matrix.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut l = DMatrix::zeros(n, n);
        for (x, row) in self.adj.iter().enumerate() {
            for &(y, r) in row {
                l[(x, y)] = r;
            }
            l[(x, x)] = -self.exit[x];
        }
        l
    }

    /// Applies the generator: `(L f)(x) = sum_y w(x, y) (f(y) - f(x))`.
    pub fn laplacian_apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: f.len(),
            });
        }
        Ok(self
            .adj
            .iter()
            .enumerate()
            .map(|(x, row)| row.iter().map(|&(y, r)| r * (f[y] - f[x])).sum())
            .collect())
    }

    /// Mean eigenvalue of `-L / alpha`, i.e. `trace(-L) / (alpha n)`.
    pub fn mean_rate_ratio(&self) -> f64 {
        self.exit.iter().sum::<f64>() / (self.alpha * self.n() as f64)
    }
}

fn rate_in(row: &[(usize, f64)], y: usize) -> f64 {
    row.binary_search_by_key(&y, |&(t, _)| t)
        .map(|i| row[i].1)
        .unwrap_or(0.0)
}

fn normalize_measure(mu: &[f64], n: usize) -> Result<Vec<f64>> {
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: mu.len(),
        });
    }
    if let Some(bad) = mu.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidMeasure(format!("entry {bad} is not strictly positive")));
    }
    let total: f64 = mu.iter().sum();
    Ok(mu.iter().map(|v| v / total).collect())
}

fn count_components(adj: &[Vec<(usize, f64)>]) -> usize {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        stack.push(s);
        while let Some(x) = stack.pop() {
            for &(y, _) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    count
}
