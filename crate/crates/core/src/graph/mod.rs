//! Undirected interaction graphs in compressed row form.

mod io;
mod paths;
mod watts_strogatz;

pub use io::{read_edge_list, write_edge_list};
pub use paths::{connected_components, exact_average_path_length, sampled_average_path_length, EXACT_PATH_LENGTH_LIMIT};
pub use watts_strogatz::{generate_watts_strogatz, WattsStrogatzParams};

use crate::{Error, Result};

/// Node ids are `u32`; the adjacency of node `i` is
/// `neighbor_ids[row_offsets[i]..row_offsets[i + 1]]`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    row_offsets: Vec<usize>,
    neighbor_ids: Vec<u32>,
}

impl Graph {
    /// Builds a graph from adjacency lists. Lists are sorted here; self-loops,
    /// duplicates and asymmetric entries are rejected.
    pub fn from_adjacency(mut adjacency: Vec<Vec<u32>>) -> Result<Graph> {
        let n = adjacency.len();
        if u32::try_from(n).is_err() {
            return Err(Error::param(format!("{n} nodes exceed the u32 id range")));
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        let total: usize = adjacency.iter().map(Vec::len).sum();
        let mut neighbor_ids = Vec::with_capacity(total);
        for list in &mut adjacency {
            list.sort_unstable();
            neighbor_ids.extend_from_slice(list);
            row_offsets.push(neighbor_ids.len());
        }
        let g = Graph {
            row_offsets,
            neighbor_ids,
        };
        g.validate()?;
        Ok(g)
    }

    /// Builds a graph on `n_nodes` nodes from undirected edges.
    pub fn from_edges(n_nodes: usize, edges: &[(u32, u32)]) -> Result<Graph> {
        let mut adjacency = vec![Vec::new(); n_nodes];
        for &(a, b) in edges {
            if a as usize >= n_nodes || b as usize >= n_nodes {
                return Err(Error::param(format!("edge ({a}, {b}) out of range for {n_nodes} nodes")));
            }
            adjacency[a as usize].push(b);
            if a != b {
                adjacency[b as usize].push(a);
            }
        }
        Graph::from_adjacency(adjacency)
    }

    pub fn n_nodes(&self) -> usize {
        self.row_offsets.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.neighbor_ids.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbor_ids[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn neighbor_ids(&self) -> &[u32] {
        &self.neighbor_ids
    }

    /// Each undirected edge once as `(i, j)` with `i < j`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n_nodes()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .filter(move |&&j| (j as usize) > i)
                .map(move |&j| (i as u32, j))
        })
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n_nodes()).map(|i| self.degree(i)).min().unwrap_or(0)
    }

    /// Full scan of the structural invariants: sorted lists without
    /// self-loops or duplicates, and symmetric adjacency.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_nodes();
        if *self.row_offsets.last().unwrap() != self.neighbor_ids.len() {
            return Err(Error::param("row offsets do not cover the neighbor array"));
        }
        for i in 0..n {
            if self.row_offsets[i] > self.row_offsets[i + 1] {
                return Err(Error::param("row offsets are not monotone"));
            }
            let list = self.neighbors(i);
            for w in list.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::param(format!("duplicate edge ({i}, {})", w[0])));
                }
            }
            for &j in list {
                let j = j as usize;
                if j >= n {
                    return Err(Error::param(format!("neighbor {j} of node {i} out of range")));
                }
                if j == i {
                    return Err(Error::param(format!("self-loop at node {i}")));
                }
                if self.neighbors(j).binary_search(&(i as u32)).is_err() {
                    return Err(Error::param(format!("edge ({i}, {j}) is not symmetric")));
                }
            }
        }
        Ok(())
    }
}
