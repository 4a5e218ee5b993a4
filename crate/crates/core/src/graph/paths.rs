use rand::seq::index;
use rayon::prelude::*;

use super::Graph;
use crate::rng;
use crate::{Error, Result};

/// Largest graph for which all-pairs BFS is attempted.
pub const EXACT_PATH_LENGTH_LIMIT: usize = 20_000;

const UNSEEN: u32 = u32::MAX;

struct Bfs {
    dist: Vec<u32>,
    queue: Vec<u32>,
}

impl Bfs {
    fn new(n: usize) -> Self {
        Bfs {
            dist: vec![UNSEEN; n],
            queue: Vec::with_capacity(n),
        }
    }

    /// Sum of hop distances from `source` and the number of nodes reached
    /// (including the source).
    fn distance_sum(&mut self, g: &Graph, source: usize) -> (u64, usize) {
        self.dist.fill(UNSEEN);
        self.queue.clear();
        self.dist[source] = 0;
        self.queue.push(source as u32);
        let mut head = 0;
        let mut sum = 0u64;
        while head < self.queue.len() {
            let v = self.queue[head] as usize;
            head += 1;
            let next = self.dist[v] + 1;
            for &w in g.neighbors(v) {
                let slot = &mut self.dist[w as usize];
                if *slot == UNSEEN {
                    *slot = next;
                    sum += u64::from(next);
                    self.queue.push(w);
                }
            }
        }
        (sum, self.queue.len())
    }
}

/// Number of connected components.
pub fn connected_components(g: &Graph) -> usize {
    let n = g.n_nodes();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w as usize);
                }
            }
        }
    }
    components
}

fn require_connected(g: &Graph) -> Result<()> {
    if g.n_nodes() < 2 {
        return Err(Error::param("path length needs at least two nodes"));
    }
    match connected_components(g) {
        1 => Ok(()),
        components => Err(Error::Disconnected { components }),
    }
}

/// `(Σ distances, n_sources)`; the reduction is over integers, so the
/// result does not depend on how rayon splits the sources.
fn distance_total(g: &Graph, sources: &[usize]) -> u64 {
    let n = g.n_nodes();
    sources
        .par_iter()
        .map_init(|| Bfs::new(n), |bfs, &s| bfs.distance_sum(g, s).0)
        .sum()
}

/// Mean shortest-path distance over all unordered node pairs.
pub fn exact_average_path_length(g: &Graph) -> Result<f64> {
    let n = g.n_nodes();
    if n > EXACT_PATH_LENGTH_LIMIT {
        return Err(Error::TooLarge {
            n_nodes: n,
            limit: EXACT_PATH_LENGTH_LIMIT,
        });
    }
    require_connected(g)?;
    let sources: Vec<usize> = (0..n).collect();
    // Ordered-pair total is twice the unordered one; so is the pair count.
    let total = distance_total(g, &sources);
    Ok(total as f64 / (n as f64 * (n - 1) as f64))
}

/// Mean distance from `n_sources` distinct, uniformly drawn sources to every
/// other node.
pub fn sampled_average_path_length(g: &Graph, n_sources: usize, seed: u64) -> Result<f64> {
    let n = g.n_nodes();
    if n_sources == 0 || n_sources > n {
        return Err(Error::param(format!("n_sources must lie in 1..={n}, got {n_sources}")));
    }
    require_connected(g)?;
    let mut rng = rng::seeded(seed);
    let mut sources = index::sample(&mut rng, n, n_sources).into_vec();
    sources.sort_unstable();
    let total = distance_total(g, &sources);
    Ok(total as f64 / (n_sources as f64 * (n - 1) as f64))
}
