use std::io::Write;

use rand::seq::SliceRandom;

use super::{AgentAllocation, RegionTable};
use crate::decimal::Decimal;
use crate::dynamics::BiasMatrix;
use crate::rng;
use crate::{Error, Result};

/// Group `A` holds the affirmative option (opinion index 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    A,
    B,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::A => "a",
            Group::B => "b",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasAssignment {
    epsilon: f64,
    groups: Vec<Group>,
}

impl BiasAssignment {
    pub fn new(epsilon: f64, groups: Vec<Group>) -> Result<BiasAssignment> {
        check_epsilon(epsilon)?;
        Ok(BiasAssignment { epsilon, groups })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn n_agents(&self) -> usize {
        self.groups.len()
    }

    pub fn count(&self, group: Group) -> usize {
        self.groups.iter().filter(|&&g| g == group).count()
    }

    /// `[1 - ε, ε]` for group a, `[ε, 1 - ε]` for group b.
    pub fn bias_vector(&self, agent: usize) -> [f64; 2] {
        let e = self.epsilon;
        match self.groups[agent] {
            Group::A => [1.0 - e, e],
            Group::B => [e, 1.0 - e],
        }
    }

    pub fn bias_matrix(&self) -> BiasMatrix {
        let values = (0..self.groups.len()).flat_map(|i| self.bias_vector(i)).collect();
        BiasMatrix::new(2, values).expect("binary biases are positive")
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 0.5 {
        Ok(())
    } else {
        Err(Error::param(format!("epsilon must lie in (0, 0.5), got {epsilon}")))
    }
}

/// Within each region's range the first `round_half_up(len * predictor_rate)`
/// agents join group a and the rest group b. The rounding is done on the
/// shortest decimal form of the rate, so `0.65` of 10 agents is exactly 6.5
/// and rounds to 7.
pub fn assign_biases(alloc: &AgentAllocation, table: &RegionTable, epsilon: f64) -> Result<BiasAssignment> {
    check_epsilon(epsilon)?;
    if alloc.n_regions() != table.len() {
        return Err(Error::param(format!(
            "allocation has {} regions, table has {}",
            alloc.n_regions(),
            table.len()
        )));
    }
    let mut groups = Vec::with_capacity(alloc.n_total());
    for (range, rec) in alloc.ranges().iter().zip(table.records()) {
        let len = range.len();
        let n_a = Decimal::from_f64(rec.predictor_rate)
            .and_then(|d| d.mul_round_half_up(len as u64))
            .ok_or_else(|| Error::param(format!("predictor_rate of {:?} cannot be rounded exactly", rec.region_id)))?;
        let n_a = (n_a as usize).min(len);
        groups.extend(std::iter::repeat_n(Group::A, n_a));
        groups.extend(std::iter::repeat_n(Group::B, len - n_a));
    }
    Ok(BiasAssignment { epsilon, groups })
}

/// A uniformly random permutation of `0..n` (Fisher-Yates on the seeded stream).
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::seeded(seed));
    perm
}

/// Redistributes the same labels over the agents uniformly at random.
pub fn shuffle_biases(assign: &BiasAssignment, seed: u64) -> BiasAssignment {
    let perm = random_permutation(assign.groups.len(), seed);
    BiasAssignment {
        epsilon: assign.epsilon,
        groups: perm.iter().map(|&src| assign.groups[src]).collect(),
    }
}

/// Writes `agent_id,region_id,group`.
pub fn write_assignment<W: Write>(
    alloc: &AgentAllocation,
    table: &RegionTable,
    assign: &BiasAssignment,
    mut out: W,
) -> Result<()> {
    writeln!(out, "agent_id,region_id,group")?;
    for (range, rec) in alloc.ranges().iter().zip(table.records()) {
        for agent in range.clone() {
            writeln!(out, "{agent},{},{}", rec.region_id, assign.groups[agent].label())?;
        }
    }
    out.flush()?;
    Ok(())
}
