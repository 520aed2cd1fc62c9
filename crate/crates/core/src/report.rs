//! Serialized reports: single-code analyses, line-delimited table records and
//! the aligned text table. Points are always named `c{k},{j}`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pointset::PointSet;
use crate::retraction::{RetractWitness, SearchStats, WitnessError};
use crate::sections::{build_from_code, GridPoset, SectionCode};
use crate::solver::{Method, Route, SegmentEntry};
use crate::split::SplitLog;

/// Version of the record layout below.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("malformed record: {0}")]
    Json(String),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("unknown point name {0:?}")]
    Point(String),
    #[error("point {0:?} is mapped twice")]
    Duplicate(String),
    #[error("witness does not validate: {0}")]
    Witness(#[from] WitnessError),
    #[error("record claims {claimed} but carries {}a witness", if *.has_witness { "" } else { "no " })]
    Answer { claimed: Answer, has_witness: bool },
    #[error("witness says {field} = {claimed}, the map gives {actual}")]
    Mismatch { field: &'static str, claimed: String, actual: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    Undecided,
}

impl From<bool> for Answer {
    fn from(b: bool) -> Self {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }
}

impl std::fmt::Display for Answer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub retract_points: Vec<String>,
    /// `[from, to]` for every point of the poset.
    pub map: Vec<[String; 2]>,
    pub class: String,
    pub retract_height: usize,
}

impl WitnessReport {
    pub fn new(grid: &GridPoset, w: &RetractWitness) -> Self {
        WitnessReport {
            retract_points: w.retract().iter().map(|x| grid.name(x)).collect(),
            map: w.domain().iter().map(|x| [grid.name(x), grid.name(w.apply(x))]).collect(),
            class: w.class().name().to_string(),
            retract_height: w.class().height(),
        }
    }

    /// Rebuilds and revalidates the witness on `grid`.
    pub fn to_witness(&self, grid: &GridPoset) -> Result<RetractWitness, ReportError> {
        let point = |name: &str| grid.point_by_name(name).ok_or_else(|| ReportError::Point(name.to_string()));
        let mut map = vec![None; grid.len()];
        let mut domain = PointSet::EMPTY;
        for [from, to] in &self.map {
            let x = point(from)?;
            if domain.contains(x) {
                return Err(ReportError::Duplicate(from.clone()));
            }
            domain.insert(x);
            map[x] = Some(point(to)?);
        }
        let w = RetractWitness::new(grid.poset(), domain, map)?;
        let retract: PointSet = self.retract_points.iter().map(|n| point(n)).collect::<Result<_, _>>()?;
        let checks = [
            ("retract_points", format!("{:?}", retract.to_vec()), format!("{:?}", w.retract().to_vec())),
            ("class", self.class.clone(), w.class().name().to_string()),
            ("retract_height", self.retract_height.to_string(), w.class().height().to_string()),
        ];
        for (field, claimed, actual) in checks {
            if claimed != actual {
                return Err(ReportError::Mismatch { field, claimed, actual });
            }
        }
        Ok(w)
    }
}

/// Result of deciding one code with one method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub code: SectionCode,
    pub height: usize,
    pub answer: Answer,
    pub method: Method,
    /// False for codes outside the table universe (not starting with `1`).
    pub table_code: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub route: Option<Route>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<WitnessReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split_log: Option<SplitLog>,
    pub elapsed_ms: u64,
    pub search_stats: SearchStats,
}

impl AnalysisReport {
    pub fn from_entry(entry: &SegmentEntry, elapsed_ms: u64, search_stats: SearchStats) -> Self {
        let grid = build_from_code(&entry.code);
        AnalysisReport {
            schema: SCHEMA_VERSION,
            code: entry.code.clone(),
            height: entry.code.len(),
            answer: entry.answer.into(),
            method: entry.method,
            table_code: entry.code.is_lower_segment_code(),
            route: Some(entry.route),
            witness: entry.witness.as_ref().map(|w| WitnessReport::new(&grid, w)),
            split_log: entry.log,
            elapsed_ms,
            search_stats,
        }
    }

    pub fn undecided(code: &SectionCode, method: Method, elapsed_ms: u64, search_stats: SearchStats) -> Self {
        AnalysisReport {
            schema: SCHEMA_VERSION,
            code: code.clone(),
            height: code.len(),
            answer: Answer::Undecided,
            method,
            table_code: code.is_lower_segment_code(),
            route: None,
            witness: None,
            split_log: None,
            elapsed_ms,
            search_stats,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }

    /// Human-readable multi-line form.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} ({}): {}", self.code, self.method, self.answer);
        if let Some(route) = self.route {
            let _ = write!(out, " [{}]", serde_json::to_value(route).unwrap().as_str().unwrap());
        }
        if !self.table_code {
            out.push_str("\nwarning: code does not start with 1, outside the table universe");
        }
        if let Some(w) = &self.witness {
            let _ = write!(out, "\nretract: {} of height {}: {}", w.class, w.retract_height, w.retract_points.join(" "));
            let moved: Vec<String> = w.map.iter().filter(|[a, b]| a != b).map(|[a, b]| format!("{a}->{b}")).collect();
            let _ = write!(out, "\nmap: {}", moved.join(" "));
        }
        if let Some(log) = &self.split_log {
            let _ = write!(
                out,
                "\nsplit contexts: {} (pruned {:?}, no t {}, no s {}, no stacking {}, no tau {}, passed {})",
                log.contexts, log.pruned, log.no_t, log.no_s, log.no_stacking, log.no_tau, log.passed
            );
        }
        let _ = write!(
            out,
            "\n{} ms, {} candidates, {} csp calls, {} nodes",
            self.elapsed_ms, self.search_stats.candidates, self.search_stats.csp_calls, self.search_stats.nodes
        );
        out
    }
}

/// One table row; contains nothing that depends on timing or scheduling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRecord {
    pub schema: u32,
    pub code: SectionCode,
    pub height: usize,
    pub tbase_levels: Vec<usize>,
    pub answer: Answer,
    pub method: Method,
    pub route: Route,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<WitnessReport>,
}

impl TableRecord {
    pub fn from_entry(entry: &SegmentEntry) -> Self {
        let grid = build_from_code(&entry.code);
        TableRecord {
            schema: SCHEMA_VERSION,
            code: entry.code.clone(),
            height: entry.code.len(),
            tbase_levels: entry.tbase_levels.clone(),
            answer: entry.answer.into(),
            method: entry.method,
            route: entry.route,
            witness: entry.witness.as_ref().map(|w| WitnessReport::new(&grid, w)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    /// Parses one line and revalidates its witness.
    pub fn parse(line: &str) -> Result<Self, ReportError> {
        let rec: TableRecord = serde_json::from_str(line).map_err(|e| ReportError::Json(e.to_string()))?;
        if rec.schema != SCHEMA_VERSION {
            return Err(ReportError::Schema(rec.schema));
        }
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        let has_witness = self.witness.is_some();
        if (self.answer == Answer::Yes) != has_witness {
            return Err(ReportError::Answer { claimed: self.answer, has_witness });
        }
        if let Some(w) = &self.witness {
            let grid = build_from_code(&self.code);
            let r = w.to_witness(&grid)?;
            if r.domain() != grid.poset().points() {
                return Err(ReportError::Mismatch {
                    field: "map",
                    claimed: format!("{} points", r.domain().len()),
                    actual: format!("{} points", grid.len()),
                });
            }
        }
        Ok(())
    }
}

/// Line-delimited records, one per entry, newline terminated.
pub fn table_json_lines<'a>(entries: impl IntoIterator<Item = &'a SegmentEntry>) -> String {
    entries.into_iter().map(|e| TableRecord::from_entry(e).to_json() + "\n").collect()
}

/// Aligned text table: one block per height, rows `code  levels  y/n`.
/// Level lists are printed for codes ending in `1` of height at least 2.
pub fn table_text<'a>(entries: impl IntoIterator<Item = &'a SegmentEntry>) -> String {
    let entries: Vec<&SegmentEntry> = entries.into_iter().collect();
    let code_w = entries.iter().map(|e| e.code.len()).max().unwrap_or(0).max(4);
    let levels = |e: &SegmentEntry| {
        if e.code.ends_with_crown() && e.code.len() >= 2 {
            e.tbase_levels.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
        } else {
            String::new()
        }
    };
    let level_w = entries.iter().map(|e| levels(e).len()).max().unwrap_or(0).max(6);
    let mut out = String::new();
    let mut current = None;
    for e in entries {
        if current != Some(e.code.len()) {
            if current.is_some() {
                out.push('\n');
            }
            current = Some(e.code.len());
            let _ = writeln!(out, "height {}", e.code.len());
        }
        let yn = if e.answer { "y" } else { "n" };
        let _ = writeln!(out, "  {:<code_w$}  {:<level_w$}  {yn}", e.code.as_str(), levels(e));
    }
    out
}
