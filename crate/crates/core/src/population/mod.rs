//! Regional statistics and how they are laid out over the agents.
//!
//! Regions are sorted by municipality, given consecutive runs of agent
//! indices sized by population share, and each run is split into a prefix of
//! group-a agents and a suffix of group-b agents according to the region's
//! predictor rate.

mod allocation;
mod bias;
mod csv_io;
mod synthetic;

pub use allocation::{allocate_agents, AgentAllocation};
pub use bias::{assign_biases, random_permutation, shuffle_biases, write_assignment, BiasAssignment, Group};
pub use csv_io::{load_regions, save_regions, REGION_CSV_HEADER};
pub use synthetic::{synthesize_regions, SyntheticDataParams};

use std::collections::HashSet;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RegionRecord {
    pub region_id: String,
    pub municipality_id: String,
    pub population: u64,
    /// Fraction in `[0, 1]`.
    pub predictor_rate: f64,
    /// Fraction in `[0, 1]`, when measured.
    pub outcome_rate: Option<f64>,
}

/// Regions ordered by `(municipality_id, region_id)`, compared as strings.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTable {
    records: Vec<RegionRecord>,
}

impl RegionTable {
    /// Validates the records and sorts them.
    pub fn new(mut records: Vec<RegionRecord>) -> Result<RegionTable> {
        let mut ids = HashSet::with_capacity(records.len());
        for r in &records {
            if !ids.insert(r.region_id.as_str()) {
                return Err(Error::Input(format!("duplicate region_id {:?}", r.region_id)));
            }
            check_rate(r.predictor_rate, "predictor_rate", &r.region_id)?;
            if let Some(o) = r.outcome_rate {
                check_rate(o, "outcome_rate", &r.region_id)?;
            }
        }
        if records.iter().map(|r| r.population).sum::<u64>() == 0 {
            return Err(Error::Input("total population is zero".into()));
        }
        records.sort_by(|a, b| {
            (a.municipality_id.as_str(), a.region_id.as_str()).cmp(&(b.municipality_id.as_str(), b.region_id.as_str()))
        });
        Ok(RegionTable { records })
    }

    pub fn records(&self) -> &[RegionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_population(&self) -> u64 {
        self.records.iter().map(|r| r.population).sum()
    }

    pub fn has_outcomes(&self) -> bool {
        self.records.iter().any(|r| r.outcome_rate.is_some())
    }

    /// Population-weighted mean predictor rate.
    pub fn weighted_predictor_mean(&self) -> f64 {
        let total = self.total_population() as f64;
        self.records
            .iter()
            .map(|r| r.population as f64 * r.predictor_rate)
            .sum::<f64>()
            / total
    }
}

fn check_rate(v: f64, what: &str, region: &str) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} {v} of region {region:?} outside [0, 1]")))
    }
}

#[cfg(test)]
pub(crate) fn record(id: &str, muni: &str, population: u64, predictor: f64, outcome: Option<f64>) -> RegionRecord {
    RegionRecord {
        region_id: id.into(),
        municipality_id: muni.into(),
        population,
        predictor_rate: predictor,
        outcome_rate: outcome,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_by_municipality_then_region() {
        let t = RegionTable::new(vec![
            record("r3", "m2", 10, 0.5, None),
            record("r2", "m1", 10, 0.5, None),
            record("r1", "m2", 10, 0.5, None),
            record("r0", "m1", 10, 0.5, None),
        ])
        .unwrap();
        let ids: Vec<_> = t.records().iter().map(|r| r.region_id.as_str()).collect();
        assert_eq!(ids, ["r0", "r2", "r1", "r3"]);
    }

    #[test]
    fn validation_errors() {
        assert!(RegionTable::new(vec![record("a", "m", 1, 0.5, None), record("a", "n", 1, 0.5, None)]).is_err());
        assert!(RegionTable::new(vec![record("a", "m", 0, 0.5, None)]).is_err());
        assert!(RegionTable::new(vec![record("a", "m", 1, 1.2, None)]).is_err());
        assert!(RegionTable::new(vec![record("a", "m", 1, 0.5, Some(-0.1))]).is_err());
        assert!(RegionTable::new(vec![]).is_err());
    }

    #[test]
    fn weighted_mean() {
        let t = RegionTable::new(vec![record("a", "m", 1, 0.2, None), record("b", "m", 3, 0.6, None)]).unwrap();
        assert!((t.weighted_predictor_mean() - 0.5).abs() < 1e-15);
    }
}
