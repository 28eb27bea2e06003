use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{ExperimentId, RunError, StoredReport};
use crate::corpus::{Direction, LanguagePair};
use crate::metrics::MetricReport;

/// One stored report positioned in the table grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub model: String,
    pub direction: Direction,
    pub experiment: ExperimentId,
    pub pair: LanguagePair,
    pub report: MetricReport,
}

impl From<&StoredReport> for TableEntry {
    fn from(s: &StoredReport) -> Self {
        Self {
            model: s.model.clone(),
            direction: s.config.direction,
            experiment: s.config.experiment(),
            pair: s.config.pair,
            report: s.report.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub model: String,
    pub direction: Direction,
    pub experiment: ExperimentId,
    /// Indexed like [`LanguagePair::ALL`].
    pub cells: Vec<Option<MetricReport>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<TableRow>,
}

/// Groups reports by model, then direction and experiment. A later entry for
/// the same cell replaces an earlier one.
pub fn emit_table(entries: &[TableEntry]) -> Result<ResultTable, RunError> {
    if entries.is_empty() {
        return Err(RunError::EmptyTable);
    }
    type Key = (String, Direction, (u8, usize, u8), ExperimentId);
    let mut grid: BTreeMap<Key, Vec<Option<MetricReport>>> = BTreeMap::new();
    for e in entries {
        let key = (e.model.clone(), e.direction, e.experiment.sort_key(), e.experiment);
        let cells = grid.entry(key).or_insert_with(|| vec![None; LanguagePair::ALL.len()]);
        let col = LanguagePair::ALL.iter().position(|p| *p == e.pair).expect("pair in ALL");
        cells[col] = Some(e.report.clone());
    }
    let rows = grid
        .into_iter()
        .map(|((model, direction, _, experiment), cells)| TableRow { model, direction, experiment, cells })
        .collect();
    Ok(ResultTable { rows })
}

impl ResultTable {
    fn header(&self) -> Vec<String> {
        let mut h = vec!["Model".to_string(), "Direction".into(), "Experiment".into()];
        for pair in LanguagePair::ALL {
            let lang = pair.code().trim_start_matches("en-").to_uppercase();
            h.extend(["BLEU", "R", "M"].map(|m| format!("{lang} {m}")));
        }
        h
    }

    fn body(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|row| {
                let mut line = vec![row.model.clone(), row.direction.code().to_string(), row.experiment.label()];
                for cell in &row.cells {
                    match cell {
                        Some(r) => line.extend(r.cells()),
                        None => line.extend(["-", "-", "-"].map(String::from)),
                    }
                }
                line
            })
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = self.header().join("\t") + "\n";
        for line in self.body() {
            out += &(line.join("\t") + "\n");
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let header = self.header();
        let mut out = String::new();
        let _ = writeln!(out, "| {} |", header.join(" | "));
        let align: Vec<&str> = header
            .iter()
            .enumerate()
            .map(|(i, _)| if i < 3 { "---" } else { "---:" })
            .collect();
        let _ = writeln!(out, "|{}|", align.join("|"));
        for line in self.body() {
            let _ = writeln!(out, "| {} |", line.join(" | "));
        }
        out
    }
}
