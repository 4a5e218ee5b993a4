//! Synchronous multipolar update.
//!
//! Every agent holds a point `x` on the unit simplex and a positive bias
//! vector `r`. One step replaces each `x_i` by
//!
//! ```text
//! (x_i + r_i ⊙ Σ_{j ∈ N(i)} x_j) / ‖x_i + r_i ⊙ Σ_{j ∈ N(i)} x_j‖₁
//! ```
//!
//! reading all neighbors from the previous state. The neighbor sum runs in
//! ascending neighbor order, so each row is computed by the same sequence
//! of floating point operations no matter which thread handles it.

use std::io::Write;

use rayon::prelude::*;

use crate::graph::Graph;
use crate::{Error, Result};

/// Rows must sum to one within this tolerance.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Below this many agents a step runs on the calling thread.
const PARALLEL_THRESHOLD: usize = 4096;

/// Row-major `n_agents × n_options` matrix of simplex rows.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionMatrix {
    n_options: usize,
    values: Vec<f64>,
}

impl OpinionMatrix {
    pub fn new(n_options: usize, values: Vec<f64>) -> Result<OpinionMatrix> {
        if n_options < 2 {
            return Err(Error::param(format!("need at least two options, got {n_options}")));
        }
        if values.len() % n_options != 0 {
            return Err(Error::param("value count is not a multiple of n_options"));
        }
        for (i, row) in values.chunks_exact(n_options).enumerate() {
            if !on_simplex(row) {
                return Err(Error::param(format!("row {i} is not on the unit simplex: {row:?}")));
            }
        }
        Ok(OpinionMatrix { n_options, values })
    }

    pub fn n_agents(&self) -> usize {
        self.values.len() / self.n_options
    }

    pub fn n_options(&self) -> usize {
        self.n_options
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_options..(i + 1) * self.n_options]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.n_options)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mean of one option's column over all agents.
    pub fn column_mean(&self, option: usize) -> f64 {
        self.rows().map(|r| r[option]).sum::<f64>() / self.n_agents() as f64
    }

    /// Largest L1 distance between corresponding rows.
    pub fn max_row_distance(&self, other: &OpinionMatrix) -> f64 {
        self.rows()
            .zip(other.rows())
            .map(|(a, b)| l1_distance(a, b))
            .fold(0.0, f64::max)
    }
}

fn on_simplex(row: &[f64]) -> bool {
    row.iter().all(|&v| v >= 0.0 && v.is_finite()) && (row.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOLERANCE
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Row-major `n_agents × n_options` matrix of strictly positive bias entries.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasMatrix {
    n_options: usize,
    values: Vec<f64>,
}

impl BiasMatrix {
    pub fn new(n_options: usize, values: Vec<f64>) -> Result<BiasMatrix> {
        if n_options < 2 || values.len() % n_options != 0 {
            return Err(Error::param("bias values do not form rows of at least two options"));
        }
        if let Some(v) = values.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::param(format!("bias entries must be positive and finite, found {v}")));
        }
        Ok(BiasMatrix { n_options, values })
    }

    /// The same bias row for every agent.
    pub fn uniform(n_agents: usize, bias: &[f64]) -> Result<BiasMatrix> {
        BiasMatrix::new(bias.len(), bias.repeat(n_agents))
    }

    pub fn n_agents(&self) -> usize {
        self.values.len() / self.n_options
    }

    pub fn n_options(&self) -> usize {
        self.n_options
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_options..(i + 1) * self.n_options]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceSettings {
    /// Stop once the largest per-agent L1 change in a step drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        ConvergenceSettings {
            tolerance: 1e-8,
            max_iterations: 10_000,
        }
    }
}

impl ConvergenceSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::param(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_state: OpinionMatrix,
    pub iterations_used: usize,
    pub converged: bool,
    /// Largest per-agent L1 change in the last step.
    pub final_residual: f64,
}

/// Every agent starts at `point`, or at the barycenter when `None`.
///
/// Points on the simplex boundary are refused: unanimous vertex states are
/// fixed points of the update, and a zero entry can never become positive
/// again for an agent that starts there alone.
pub fn init_opinions(n_agents: usize, n_options: usize, point: Option<&[f64]>) -> Result<OpinionMatrix> {
    if n_options < 2 {
        return Err(Error::param(format!("need at least two options, got {n_options}")));
    }
    let row = match point {
        None => vec![1.0 / n_options as f64; n_options],
        Some(p) => {
            if p.len() != n_options {
                return Err(Error::param(format!("initial point has {} entries, expected {n_options}", p.len())));
            }
            if !on_simplex(p) {
                return Err(Error::param(format!("initial point {p:?} is not on the unit simplex")));
            }
            if p.iter().any(|&v| v == 0.0) {
                log::warn!("initial point {p:?} lies on the simplex boundary; vertex states are fixed points of the dynamics");
                return Err(Error::param(format!(
                    "initial point {p:?} lies on the simplex boundary (vertex states are fixed points); use an interior point"
                )));
            }
            p.to_vec()
        }
    };
    Ok(OpinionMatrix {
        n_options,
        values: row.repeat(n_agents),
    })
}

fn check_dimensions(state: &OpinionMatrix, g: &Graph, biases: &BiasMatrix) -> Result<()> {
    if state.n_agents() != g.n_nodes() {
        return Err(Error::param(format!(
            "state has {} agents, graph has {} nodes",
            state.n_agents(),
            g.n_nodes()
        )));
    }
    if biases.n_agents() != state.n_agents() || biases.n_options() != state.n_options() {
        return Err(Error::param(format!(
            "bias matrix is {}×{}, state is {}×{}",
            biases.n_agents(),
            biases.n_options(),
            state.n_agents(),
            state.n_options()
        )));
    }
    Ok(())
}

/// New row for agent `i`, written into `out`; returns its L1 change.
#[inline]
fn update_row(i: usize, old: &OpinionMatrix, g: &Graph, biases: &BiasMatrix, out: &mut [f64]) -> f64 {
    let k = old.n_options;
    out.fill(0.0);
    for &j in g.neighbors(i) {
        let xj = old.row(j as usize);
        for l in 0..k {
            out[l] += xj[l];
        }
    }
    let xi = old.row(i);
    let ri = biases.row(i);
    let mut norm = 0.0;
    for l in 0..k {
        out[l] = xi[l] + ri[l] * out[l];
        norm += out[l];
    }
    debug_assert!(norm > 0.0, "normalizer vanished for agent {i}");
    let mut sum = 0.0;
    for v in out.iter_mut() {
        *v /= norm;
        sum += *v;
    }
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        for v in out.iter_mut() {
            *v /= sum;
        }
    }
    l1_distance(out, xi)
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Writes the successor of `old` into `new` and returns the largest per-row
/// L1 change (NaN if any row went non-finite).
fn step_into(old: &OpinionMatrix, g: &Graph, biases: &BiasMatrix, new: &mut OpinionMatrix) -> f64 {
    let k = old.n_options;
    if old.n_agents() < PARALLEL_THRESHOLD {
        new.values
            .chunks_exact_mut(k)
            .enumerate()
            .map(|(i, out)| update_row(i, old, g, biases, out))
            .fold(0.0, nan_max)
    } else {
        new.values
            .par_chunks_exact_mut(k)
            .enumerate()
            .map(|(i, out)| update_row(i, old, g, biases, out))
            .reduce(|| 0.0, nan_max)
    }
}

/// One synchronous update of every agent.
pub fn step(state: &OpinionMatrix, g: &Graph, biases: &BiasMatrix) -> Result<OpinionMatrix> {
    check_dimensions(state, g, biases)?;
    let mut next = state.clone();
    let residual = step_into(state, g, biases, &mut next);
    if residual.is_nan() {
        return Err(Error::Numerical("non-finite opinion after update".into()));
    }
    Ok(next)
}

/// Iterates [`step`] until the residual falls below the tolerance or the
/// iteration budget runs out.
pub fn run(state: OpinionMatrix, g: &Graph, biases: &BiasMatrix, settings: &ConvergenceSettings) -> Result<RunResult> {
    run_with_observer(state, g, biases, settings, |_, _| Ok(()))
}

/// Like [`run`], calling `observe(t, state)` after every step `t = 1, 2, …`.
pub fn run_with_observer<F>(
    state: OpinionMatrix,
    g: &Graph,
    biases: &BiasMatrix,
    settings: &ConvergenceSettings,
    mut observe: F,
) -> Result<RunResult>
where
    F: FnMut(usize, &OpinionMatrix) -> Result<()>,
{
    settings.validate()?;
    check_dimensions(&state, g, biases)?;
    let mut current = state;
    let mut next = current.clone();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < settings.max_iterations {
        residual = step_into(&current, g, biases, &mut next);
        std::mem::swap(&mut current, &mut next);
        iterations += 1;
        if residual.is_nan() {
            return Err(Error::Numerical(format!("non-finite opinion at iteration {iterations}")));
        }
        observe(iterations, &current)?;
        if residual < settings.tolerance {
            break;
        }
    }
    let converged = residual < settings.tolerance;
    log::debug!("dynamics stopped after {iterations} iterations, residual {residual:e}, converged={converged}");
    Ok(RunResult {
        final_state: current,
        iterations_used: iterations,
        converged,
        final_residual: residual,
    })
}

/// Writes `agent_id,x0,x1,…` with shortest round-tripping float text.
pub fn write_snapshot<W: Write>(state: &OpinionMatrix, mut out: W) -> Result<()> {
    write!(out, "agent_id")?;
    for l in 0..state.n_options {
        write!(out, ",x{l}")?;
    }
    writeln!(out)?;
    for (i, row) in state.rows().enumerate() {
        write!(out, "{i}")?;
        for v in row {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}
