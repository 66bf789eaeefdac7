//! Small test graphs: every connected graph up to isomorphism, with unit
//! and random reversible rates, plus a few named graphs.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::generators;
use crate::graph::WeightedGraph;
use crate::rng;

/// Largest size for which connected graphs are enumerated.
pub const MAX_ZOO_SIZE: usize = 6;

#[derive(Debug, Clone)]
pub struct ZooGraph {
    pub name: String,
    pub graph: WeightedGraph,
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn heap(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(p.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, p, out);
            let j = if k % 2 == 0 { i } else { 0 };
            p.swap(j, k - 1);
        }
    }
    heap(n, &mut p, &mut out);
    out
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &(a, b) in edges {
            let y = if a == x {
                b
            } else if b == x {
                a
            } else {
                continue;
            };
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Edge lists of all connected simple graphs on `n` vertices, one per
/// isomorphism class, ordered by edge count then canonical code.
pub fn connected_graphs(n: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if n == 0 || n > MAX_ZOO_SIZE {
        return Err(Error::GraphTooLarge { n, max: MAX_ZOO_SIZE });
    }
    let all = pairs(n);
    let index = |i: usize, j: usize| all.iter().position(|&p| p == (i.min(j), i.max(j))).unwrap();
    let perms = permutations(n);
    // For each permutation, where every pair bit goes.
    let maps: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| all.iter().map(|&(i, j)| index(p[i], p[j])).collect())
        .collect();
    let mut canon = std::collections::BTreeSet::new();
    for mask in 0u32..(1 << all.len()) {
        let edges: Vec<(usize, usize)> = (0..all.len()).filter(|&b| mask >> b & 1 == 1).map(|b| all[b]).collect();
        if edges.len() + 1 < n || !connected(n, &edges) {
            continue;
        }
        let code = maps
            .iter()
            .map(|m| (0..all.len()).filter(|&b| mask >> b & 1 == 1).fold(0u32, |acc, b| acc | 1 << m[b]))
            .min()
            .unwrap();
        canon.insert((code.count_ones(), code));
    }
    Ok(canon
        .into_iter()
        .map(|(_, code)| (0..all.len()).filter(|&b| code >> b & 1 == 1).map(|b| all[b]).collect())
        .collect())
}

/// Random reversible rates on an edge set: `mu` uniform in `[0.5, 1.5]`
/// (normalized), conductances `c` in `[0.5, 2]`, `w(x, y) = c(x, y) / mu(x)`.
pub fn random_rates(n: usize, edges: &[(usize, usize)], seed: u64) -> Result<WeightedGraph> {
    let mut rng = rng::stream(seed, 0);
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    let mu: Vec<f64> = raw.iter().map(|m| m / total).collect();
    let mut rates = Vec::with_capacity(2 * edges.len());
    for &(x, y) in edges {
        let c: f64 = rng.random_range(0.5..2.0) / n as f64;
        rates.push((x, y, c / mu[x]));
        rates.push((y, x, c / mu[y]));
    }
    WeightedGraph::from_edges(n, &rates, Some(&mu))
}

/// Connected graphs with `2 <= n <= max_n`, each with unit and random rates.
pub fn zoo(max_n: usize, seed: u64) -> Result<Vec<ZooGraph>> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for (i, edges) in connected_graphs(n)?.into_iter().enumerate() {
            let unit: Vec<_> = edges.iter().map(|&(x, y)| (x, y, 1.0)).collect();
            out.push(ZooGraph {
                name: format!("n{n}_g{i}_unit"),
                graph: WeightedGraph::from_edges(n, &unit, None)?,
            });
            out.push(ZooGraph {
                name: format!("n{n}_g{i}_random"),
                graph: random_rates(n, &edges, rng::derive(seed, (n * 1000 + i) as u64))?,
            });
        }
    }
    Ok(out)
}

/// A connected Erdos-Renyi graph with random reversible rates, retried
/// with derived seeds until connected.
pub fn random_connected(n: usize, edge_probability: f64, seed: u64) -> Result<WeightedGraph> {
    for attempt in 0..1000u64 {
        let s = rng::derive(seed, attempt);
        let mut rng = rng::stream(s, 1);
        let edges: Vec<(usize, usize)> = pairs(n).into_iter().filter(|_| rng.random::<f64>() < edge_probability).collect();
        if connected(n, &edges) {
            return random_rates(n, &edges, s);
        }
    }
    Err(Error::Disconnected { components: 0 })
}

/// Named graphs used by the Monte Carlo checks, with the `q` each is run at.
pub fn named_graphs(seed: u64) -> Result<Vec<(ZooGraph, f64)>> {
    Ok(vec![
        (
            ZooGraph {
                name: "K2".into(),
                graph: generators::path(2)?,
            },
            2.0,
        ),
        (
            ZooGraph {
                name: "path3".into(),
                graph: generators::path(3)?,
            },
            1.0,
        ),
        (
            ZooGraph {
                name: "cycle3".into(),
                graph: generators::cycle(3)?,
            },
            3.0,
        ),
        (
            ZooGraph {
                name: "random6".into(),
                graph: random_connected(6, 0.5, seed)?,
            },
            1.0,
        ),
    ])
}
