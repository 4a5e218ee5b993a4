use std::io::{Read, Write};

use super::{RegionRecord, RegionTable};
use crate::decimal::{fraction_to_percent, Decimal};
use crate::{Error, Result};

pub const REGION_CSV_HEADER: [&str; 5] = ["region_id", "municipality_id", "population", "predictor_pct", "outcome_pct"];

/// Reads the region CSV. Percentages become fractions; rows end up sorted
/// by `(municipality_id, region_id)`.
pub fn load_regions<R: Read>(source: R) -> Result<RegionTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(source);
    let mut rows = reader.records();

    let header = match rows.next() {
        Some(h) => h.map_err(|e| csv_error(&e))?,
        None => return Err(Error::parse(1, "empty file")),
    };
    if header.iter().ne(REGION_CSV_HEADER.iter().copied()) {
        return Err(Error::parse(1, format!("expected header {:?}", REGION_CSV_HEADER.join(","))));
    }

    let mut records = Vec::new();
    let mut seen = std::collections::HashMap::new();
    for row in rows {
        let row = row.map_err(|e| csv_error(&e))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        if row.len() != 5 {
            return Err(Error::parse(line, format!("expected 5 fields, found {}", row.len())));
        }
        let region_id = row[0].to_string();
        if region_id.is_empty() {
            return Err(Error::parse(line, "empty region_id"));
        }
        if let Some(first) = seen.insert(region_id.clone(), line) {
            return Err(Error::parse(line, format!("duplicate region_id {region_id:?} (first seen on line {first})")));
        }
        let population = row[2]
            .parse::<u64>()
            .map_err(|_| Error::parse(line, format!("population {:?} is not a non-negative integer", &row[2])))?;
        let predictor_rate = parse_pct(&row[3], "predictor_pct", line)?;
        let outcome_rate = if row[4].is_empty() {
            None
        } else {
            Some(parse_pct(&row[4], "outcome_pct", line)?)
        };
        records.push(RegionRecord {
            region_id,
            municipality_id: row[1].to_string(),
            population,
            predictor_rate,
            outcome_rate,
        });
    }
    RegionTable::new(records)
}

fn parse_pct(field: &str, what: &str, line: u64) -> Result<f64> {
    let d = Decimal::parse(field).ok_or_else(|| Error::parse(line, format!("{what} {field:?} is not a decimal number")))?;
    if d.cmp_int(100) == std::cmp::Ordering::Greater {
        return Err(Error::parse(line, format!("{what} {field} outside [0, 100]")));
    }
    d.shift(-2)
        .map(Decimal::to_f64)
        .ok_or_else(|| Error::parse(line, format!("{what} {field:?} has too many digits")))
}

fn csv_error(e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::parse(line, e.to_string())
}

pub fn save_regions<W: Write>(table: &RegionTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REGION_CSV_HEADER).map_err(to_io)?;
    for r in table.records() {
        let outcome = r.outcome_rate.map(fraction_to_percent).unwrap_or_default();
        w.write_record([
            r.region_id.as_str(),
            r.municipality_id.as_str(),
            &r.population.to_string(),
            &fraction_to_percent(r.predictor_rate),
            &outcome,
        ])
        .map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}

fn to_io(e: csv::Error) -> Error {
    Error::Io(e.into())
}
