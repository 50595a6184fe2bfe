//! Per-cell quartile summaries of experiment records.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::BenchError;
use crate::search::Algorithm;

use super::experiment::{ExperimentRecord, RunStatus};
use super::generate::MapKind;

/// Lower quartile, median and upper quartile by linear interpolation.
pub fn quartiles(values: &[f64]) -> Option<[f64; 3]> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let at = |q: f64| {
        let pos = q * (sorted.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    };
    Some([at(0.25), at(0.5), at(0.75)])
}

pub fn median(values: &[f64]) -> Option<f64> {
    quartiles(values).map(|q| q[1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub map: MapKind,
    pub size: usize,
    pub algorithm: Algorithm,
    pub tau: Option<u32>,
    pub runs: usize,
    pub completed: usize,
    pub optimality_gap: Option<[f64; 3]>,
    pub runtime_ratio: Option<[f64; 3]>,
    pub avg_width: Option<[f64; 3]>,
}

/// Groups records by (map, size, algorithm, tau) in that order.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(MapKind, usize, &'static str, Option<u32>), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.map, r.size, r.algorithm.id(), r.tau))
            .or_default()
            .push(r);
    }
    groups
        .into_values()
        .map(|rs| {
            let ok: Vec<&&ExperimentRecord> = rs.iter().filter(|r| r.status == RunStatus::Ok).collect();
            let pick = |f: fn(&ExperimentRecord) -> Option<f64>| {
                quartiles(&ok.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
            };
            SummaryRow {
                map: rs[0].map,
                size: rs[0].size,
                algorithm: rs[0].algorithm,
                tau: rs[0].tau,
                runs: rs.len(),
                completed: ok.len(),
                optimality_gap: pick(|r| r.optimality_gap),
                runtime_ratio: pick(|r| r.runtime_ratio),
                avg_width: pick(|r| r.avg_width),
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut out: W) -> Result<(), BenchError> {
    writeln!(
        out,
        "map,size,algorithm,tau,runs,completed,gap_q1,gap_median,gap_q3,ratio_q1,ratio_median,ratio_q3,width_q1,width_median,width_q3"
    )?;
    let cells = |q: Option<[f64; 3]>| match q {
        Some([a, b, c]) => format!("{a},{b},{c}"),
        None => ",,".to_string(),
    };
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.map.id(),
            row.size,
            row.algorithm.id(),
            row.tau.map(|t| t.to_string()).unwrap_or_default(),
            row.runs,
            row.completed,
            cells(row.optimality_gap),
            cells(row.runtime_ratio),
            cells(row.avg_width),
        )?;
    }
    out.flush()?;
    Ok(())
}
