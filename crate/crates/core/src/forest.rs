//! Rooted spanning forests: Wilson sampling and exhaustive enumeration.
//!
//! The forest measure gives each rooted oriented spanning forest `phi` the
//! weight `q^{|roots(phi)|} * prod_{(x, y) in phi} w(x, y)`, with edges
//! oriented from a vertex to its parent.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng::{self, Rng};

/// Largest graph accepted by [`enumerate_forests`].
pub const MAX_ENUMERATION_SIZE: usize = 8;

/// Number of samples drawn from one random stream in batched sampling.
const BATCH_CHUNK: usize = 512;

/// A rooted spanning forest; `parent[x] == None` marks a root.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningForest {
    parent: Vec<Option<usize>>,
    roots: Vec<usize>,
    tree_label: Vec<usize>,
    q: f64,
}

impl SpanningForest {
    /// Validates a parent map and derives the roots and tree labels.
    pub fn from_parents(parent: Vec<Option<usize>>, q: f64) -> Result<Self> {
        let n = parent.len();
        if let Some((x, &Some(p))) = parent.iter().enumerate().find(|(_, p)| p.is_some_and(|p| p >= n)) {
            return Err(Error::InvalidEdge {
                from: x,
                to: p,
                reason: "parent out of range",
            });
        }
        let tree_label = tree_labels(&parent).ok_or(Error::InvalidParameter {
            name: "parent",
            reason: "parent map has a cycle".into(),
        })?;
        let roots = (0..n).filter(|&x| parent[x].is_none()).collect();
        Ok(SpanningForest {
            parent,
            roots,
            tree_label,
            q,
        })
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, x: usize) -> Option<usize> {
        self.parent[x]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// Sorted root set.
    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    pub fn is_root(&self, x: usize) -> bool {
        self.parent[x].is_none()
    }

    /// Root of the tree containing `x`.
    pub fn tree_label(&self, x: usize) -> usize {
        self.tree_label[x]
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Oriented edges `(x, parent(x))`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().enumerate().filter_map(|(x, p)| p.map(|p| (x, p)))
    }

    /// Debug dump: one `vertex parent` line per vertex, `-1` for roots.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (x, p) in self.parent.iter().enumerate() {
            match p {
                Some(p) => writeln!(out, "{x} {p}").unwrap(),
                None => writeln!(out, "{x} -1").unwrap(),
            }
        }
        out
    }

    /// Parses the output of [`SpanningForest::dump`].
    pub fn parse_dump(text: &str, q: f64) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let mut it = line.split_whitespace();
            let parse_err = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_string(),
            };
            let x: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err("bad vertex"))?;
            let p: i64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err("bad parent"))?;
            entries.push((x, p));
        }
        let mut parent = vec![None; entries.len()];
        for (line, &(x, p)) in entries.iter().enumerate() {
            if x >= parent.len() {
                return Err(Error::Parse {
                    line: line + 1,
                    message: format!("vertex {x} out of range"),
                });
            }
            parent[x] = if p < 0 { None } else { Some(p as usize) };
        }
        Self::from_parents(parent, q)
    }
}

/// Root label of every vertex, or `None` when the parent map has a cycle.
fn tree_labels(parent: &[Option<usize>]) -> Option<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = parent.len();
    let mut label = vec![UNSEEN; n];
    let mut on_path = vec![false; n];
    let mut path = Vec::new();
    for s in 0..n {
        let mut x = s;
        while label[x] == UNSEEN {
            if on_path[x] {
                return None;
            }
            on_path[x] = true;
            path.push(x);
            match parent[x] {
                Some(p) => x = p,
                None => {
                    label[x] = x;
                    break;
                }
            }
        }
        let root = label[x];
        for &v in &path {
            label[v] = root;
            on_path[v] = false;
        }
        path.clear();
    }
    Some(label)
}

/// Weight `q^{|roots|} prod w(x, parent(x))` of a forest.
pub fn forest_weight(g: &WeightedGraph, f: &SpanningForest, q: f64) -> Result<f64> {
    let mut w = q.powi(f.root_count() as i32);
    for (x, p) in f.edges() {
        let r = g.rate(x, p);
        if r <= 0.0 {
            return Err(Error::EdgeNotInGraph { from: x, to: p });
        }
        w *= r;
    }
    Ok(w)
}

/// Reusable buffers for Wilson's algorithm with exponential killing.
#[derive(Debug, Clone)]
pub struct WilsonSampler {
    in_tree: Vec<bool>,
    next: Vec<usize>,
    steps: u64,
}

const KILLED: usize = usize::MAX;

impl WilsonSampler {
    pub fn new(n: usize) -> Self {
        WilsonSampler {
            in_tree: vec![false; n],
            next: vec![KILLED; n],
            steps: 0,
        }
    }

    /// Total number of walk jumps performed since construction.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Samples a forest from the forest measure with parameter `q`.
    ///
    /// Walks start at the lowest-index uncovered vertex. At `x` the walk is
    /// killed with probability `q / (q + w(x))`, making `x` a root, and
    /// otherwise jumps to `y` with probability `w(x, y) / (q + w(x))`. It
    /// also stops on hitting the current forest; the loop-erased trajectory
    /// is then grafted onto the forest.
    pub fn sample(&mut self, g: &WeightedGraph, q: f64, rng: &mut Rng) -> SpanningForest {
        let n = g.n();
        let mut parent = vec![None; n];
        self.sample_into(g, q, rng, &mut parent);
        SpanningForest::from_parents(parent, q).expect("Wilson output is acyclic")
    }

    /// Like [`WilsonSampler::sample`] but only writes the parent map.
    pub fn sample_into(&mut self, g: &WeightedGraph, q: f64, rng: &mut Rng, parent: &mut [Option<usize>]) {
        let n = g.n();
        self.in_tree.iter_mut().for_each(|b| *b = false);
        for start in 0..n {
            if self.in_tree[start] {
                continue;
            }
            let mut x = start;
            while !self.in_tree[x] {
                let wx = g.exit_rate(x);
                let u = rng.random::<f64>() * (q + wx);
                if u < q {
                    self.next[x] = KILLED;
                    break;
                }
                let mut acc = q;
                let row = g.neighbors(x);
                let mut y = row[row.len() - 1].0;
                for &(t, r) in row {
                    acc += r;
                    if u < acc {
                        y = t;
                        break;
                    }
                }
                self.next[x] = y;
                self.steps += 1;
                x = y;
            }
            let mut x = start;
            while !self.in_tree[x] {
                self.in_tree[x] = true;
                let nx = self.next[x];
                if nx == KILLED {
                    parent[x] = None;
                    break;
                }
                parent[x] = Some(nx);
                x = nx;
            }
        }
    }
}

/// Samples one forest; deterministic given `(g, q, seed)`.
pub fn wilson_sample(g: &WeightedGraph, q: f64, seed: u64) -> Result<SpanningForest> {
    check_q(q)?;
    let mut rng = rng::stream(seed, 0);
    Ok(WilsonSampler::new(g.n()).sample(g, q, &mut rng))
}

/// Draws `samples` forests and maps each through `f`.
///
/// Samples are drawn in fixed-size chunks, chunk `c` using stream `c` of
/// `seed`, so the output is identical for any thread count.
pub fn sample_batch<T, F>(g: &WeightedGraph, q: f64, samples: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&SpanningForest, &mut Rng) -> T + Sync,
{
    check_q(q)?;
    let chunks = samples.div_ceil(BATCH_CHUNK);
    let out: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, c as u64);
            let mut sampler = WilsonSampler::new(g.n());
            let len = BATCH_CHUNK.min(samples - c * BATCH_CHUNK);
            (0..len)
                .map(|_| {
                    let forest = sampler.sample(g, q, &mut rng);
                    f(&forest, &mut rng)
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// Mean number of walk jumps per sample over `samples` draws.
pub fn mean_sampling_steps(g: &WeightedGraph, q: f64, samples: usize, seed: u64) -> Result<f64> {
    check_q(q)?;
    let mut rng = rng::stream(seed, 0);
    let mut sampler = WilsonSampler::new(g.n());
    let mut parent = vec![None; g.n()];
    for _ in 0..samples {
        sampler.sample_into(g, q, &mut rng, &mut parent);
    }
    Ok(sampler.steps() as f64 / samples as f64)
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveParameter { name: "q", value: q })
    }
}

/// All rooted spanning forests of a small graph with their weights.
#[derive(Debug, Clone)]
pub struct ForestEnsemble {
    pub forests: Vec<(SpanningForest, f64)>,
    pub partition_sum: f64,
    pub q: f64,
}

impl ForestEnsemble {
    pub fn len(&self) -> usize {
        self.forests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forests.is_empty()
    }

    /// Probability of each root set.
    pub fn root_set_law(&self) -> BTreeMap<Vec<usize>, f64> {
        let mut law = BTreeMap::new();
        for (f, w) in &self.forests {
            *law.entry(f.roots().to_vec()).or_insert(0.0) += w / self.partition_sum;
        }
        law
    }

    /// Law of the number of roots, indexed by count `0..=n`.
    pub fn root_count_law(&self) -> Vec<f64> {
        let n = self.forests.first().map_or(0, |(f, _)| f.n());
        let mut law = vec![0.0; n + 1];
        for (f, w) in &self.forests {
            law[f.root_count()] += w / self.partition_sum;
        }
        law
    }
}

/// Enumerates every acyclic parent map of `g` (at most 8 vertices).
pub fn enumerate_forests(g: &WeightedGraph, q: f64) -> Result<ForestEnsemble> {
    check_q(q)?;
    let n = g.n();
    if n > MAX_ENUMERATION_SIZE {
        return Err(Error::GraphTooLarge {
            n,
            max: MAX_ENUMERATION_SIZE,
        });
    }
    // Choice c at vertex x: 0 means root, c >= 1 means the (c-1)-th neighbour.
    let radix: Vec<usize> = (0..n).map(|x| g.neighbors(x).len() + 1).collect();
    let mut digits = vec![0usize; n];
    let mut parent = vec![None; n];
    let mut forests = Vec::new();
    let mut partition_sum = 0.0;
    loop {
        for x in 0..n {
            parent[x] = match digits[x] {
                0 => None,
                c => Some(g.neighbors(x)[c - 1].0),
            };
        }
        if tree_labels(&parent).is_some() {
            let mut w = 1.0;
            for x in 0..n {
                w *= match digits[x] {
                    0 => q,
                    c => g.neighbors(x)[c - 1].1,
                };
            }
            partition_sum += w;
            forests.push((SpanningForest::from_parents(parent.clone(), q)?, w));
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(ForestEnsemble {
                    forests,
                    partition_sum,
                    q,
                });
            }
            digits[i] += 1;
            if digits[i] < radix[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}
