use std::ops::Range;

use super::RegionTable;
use crate::{Error, Result};

/// Contiguous agent index ranges, one per region in table order, tiling
/// `0..n_total`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentAllocation {
    ranges: Vec<Range<usize>>,
}

impl AgentAllocation {
    pub fn from_lengths(lengths: &[usize]) -> AgentAllocation {
        let mut start = 0;
        let ranges = lengths
            .iter()
            .map(|&len| {
                let r = start..start + len;
                start += len;
                r
            })
            .collect();
        AgentAllocation { ranges }
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.ranges.iter().map(|r| r.len()).collect()
    }

    pub fn n_regions(&self) -> usize {
        self.ranges.len()
    }

    pub fn n_total(&self) -> usize {
        self.ranges.last().map_or(0, |r| r.end)
    }

    /// Region index of every agent.
    pub fn region_of_agents(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_total());
        for (region, r) in self.ranges.iter().enumerate() {
            out.extend(std::iter::repeat_n(region, r.len()));
        }
        out
    }
}

/// Largest-remainder apportionment of `n_total` agents by population share.
///
/// Each region first receives `floor(n_total * pop / total)`; the leftover
/// agents go one each to the regions with the largest remainders, earlier
/// table rows winning ties. Everything is integer arithmetic.
pub fn allocate_agents(table: &RegionTable, n_total: usize) -> Result<AgentAllocation> {
    let total = u128::from(table.total_population());
    if total == 0 {
        return Err(Error::Input("total population is zero".into()));
    }
    let populated = table.records().iter().filter(|r| r.population > 0).count();
    if n_total < populated {
        return Err(Error::Input(format!(
            "{n_total} agents cannot cover {populated} populated regions"
        )));
    }
    let n = n_total as u128;
    let mut lengths = Vec::with_capacity(table.len());
    let mut remainders = Vec::with_capacity(table.len());
    for (idx, r) in table.records().iter().enumerate() {
        let scaled = n * u128::from(r.population);
        lengths.push((scaled / total) as usize);
        remainders.push((scaled % total, idx));
    }
    let leftover = n_total - lengths.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, idx) in remainders.iter().take(leftover) {
        lengths[idx] += 1;
    }
    Ok(AgentAllocation::from_lengths(&lengths))
}
