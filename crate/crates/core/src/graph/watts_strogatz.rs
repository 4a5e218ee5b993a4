use rand::Rng;

use super::Graph;
use crate::rng;
use crate::{Error, Result};

/// Redraws allowed when a rewired endpoint collides with the source node or
/// one of its current neighbors; after that the original edge is kept.
const MAX_REWIRE_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WattsStrogatzParams {
    pub n_nodes: usize,
    /// Ring lattice degree; node `i` starts linked to `i ± 1, …, i ± k_ring/2`.
    pub k_ring: usize,
    pub p_rewire: f64,
    pub seed: u64,
}

impl WattsStrogatzParams {
    pub fn new(n_nodes: usize, k_ring: usize, p_rewire: f64, seed: u64) -> Self {
        WattsStrogatzParams {
            n_nodes,
            k_ring,
            p_rewire,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes <= 2 {
            return Err(Error::param(format!("n_nodes must exceed 2, got {}", self.n_nodes)));
        }
        if u32::try_from(self.n_nodes).is_err() {
            return Err(Error::param(format!("n_nodes {} exceeds the u32 id range", self.n_nodes)));
        }
        if self.k_ring < 2 || self.k_ring % 2 != 0 {
            return Err(Error::param(format!("k_ring must be even and at least 2, got {}", self.k_ring)));
        }
        if self.k_ring >= self.n_nodes {
            return Err(Error::param(format!(
                "k_ring ({}) must be below n_nodes ({})",
                self.k_ring, self.n_nodes
            )));
        }
        if !(0.0..=1.0).contains(&self.p_rewire) {
            return Err(Error::param(format!("p_rewire must lie in [0, 1], got {}", self.p_rewire)));
        }
        Ok(())
    }
}

/// Ring lattice followed by a rewiring sweep.
///
/// Nodes are visited in ascending order and, for each, its clockwise edges
/// `(i, i + d)` for `d = 1..=k_ring/2`. Each such edge is rewired with
/// probability `p_rewire` by moving its far endpoint to a node drawn
/// uniformly from those that are neither `i` nor already adjacent to `i`.
/// The sweep is sequential, so the single RNG stream fixes the output.
pub fn generate_watts_strogatz(params: &WattsStrogatzParams) -> Result<Graph> {
    params.validate()?;
    let n = params.n_nodes;
    let half = params.k_ring / 2;
    let mut adj: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            let mut list = Vec::with_capacity(params.k_ring + 4);
            for d in 1..=half {
                list.push(((i + d) % n) as u32);
                list.push(((i + n - d) % n) as u32);
            }
            list
        })
        .collect();

    let mut rng = rng::seeded(params.seed);
    for i in 0..n {
        for d in 1..=half {
            if rng.random::<f64>() >= params.p_rewire {
                continue;
            }
            let old = ((i + d) % n) as u32;
            debug_assert!(adj[i].contains(&old));
            for _ in 0..MAX_REWIRE_ATTEMPTS {
                let u = rng.random_range(0..n as u32);
                if u as usize == i || adj[i].contains(&u) {
                    continue;
                }
                remove(&mut adj[i], old);
                remove(&mut adj[old as usize], i as u32);
                adj[i].push(u);
                adj[u as usize].push(i as u32);
                break;
            }
        }
    }
    Graph::from_adjacency(adj)
}

fn remove(list: &mut Vec<u32>, v: u32) {
    if let Some(pos) = list.iter().position(|&x| x == v) {
        list.swap_remove(pos);
    }
}
