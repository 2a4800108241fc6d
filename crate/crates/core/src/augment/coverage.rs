use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{AugmentationStage, HarmonizedDataset};
use crate::normalize::normalize_text;
use crate::schema::Field;

/// Fields tracked by the coverage report, in row order.
pub const COVERAGE_FIELDS: [&str; 4] = ["species", "infectiousAgent", "healthCondition", "funding.identifier"];

const RECORDS_BLOCK: &str = "# of records with";
const DISTINCT_BLOCK: &str = "# of different";
const TOTAL_ROW: &str = "Total records";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageColumn {
    pub stage: Option<AugmentationStage>,
    pub total_records: usize,
    pub records_with_field: BTreeMap<String, usize>,
    pub distinct_values: BTreeMap<String, usize>,
}

/// Per-stage completeness counts, one column per executed stage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub columns: Vec<CoverageColumn>,
}

fn value_keys(record: &HarmonizedDataset, field: &str) -> Vec<String> {
    let field_terms = |f: Field| {
        record
            .terms(f)
            .iter()
            .filter_map(|t| {
                let key = t.curie.clone().unwrap_or_else(|| normalize_text(&t.raw_text));
                (!key.is_empty()).then_some(key)
            })
            .collect()
    };
    match field {
        "species" => field_terms(Field::Species),
        "infectiousAgent" => field_terms(Field::InfectiousAgent),
        "healthCondition" => field_terms(Field::HealthCondition),
        _ => record
            .funding
            .iter()
            .filter_map(|f| f.identifier.as_deref())
            .map(crate::validate::collapse_whitespace)
            .filter(|g| !g.is_empty())
            .collect(),
    }
}

/// Coverage counts for one corpus state.
pub fn coverage_report(corpus: &[HarmonizedDataset], stage: AugmentationStage) -> CoverageColumn {
    let mut column = CoverageColumn { stage: Some(stage), total_records: corpus.len(), ..Default::default() };
    for field in COVERAGE_FIELDS {
        let mut with = 0;
        let mut distinct = BTreeSet::new();
        for record in corpus {
            let keys = value_keys(record, field);
            if !keys.is_empty() {
                with += 1;
            }
            distinct.extend(keys);
        }
        column.records_with_field.insert(field.to_string(), with);
        column.distinct_values.insert(field.to_string(), distinct.len());
    }
    column
}

impl CoverageReport {
    fn stage_name(column: &CoverageColumn) -> &'static str {
        column.stage.map_or("Unknown", AugmentationStage::name)
    }

    /// Tab-delimited table in two blocks: records carrying each field, then
    /// distinct values per field. Columns are stages.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let header = |out: &mut String, title: &str| {
            out.push_str(title);
            for c in &self.columns {
                out.push('\t');
                out.push_str(Self::stage_name(c));
            }
            out.push('\n');
        };
        let row = |out: &mut String, label: &str, values: Vec<usize>| {
            out.push_str(label);
            for v in values {
                let _ = write!(out, "\t{v}");
            }
            out.push('\n');
        };
        header(&mut out, RECORDS_BLOCK);
        for field in COVERAGE_FIELDS {
            row(&mut out, field, self.columns.iter().map(|c| c.records_with_field[field]).collect());
        }
        row(&mut out, TOTAL_ROW, self.columns.iter().map(|c| c.total_records).collect());
        out.push('\n');
        header(&mut out, DISTINCT_BLOCK);
        for field in COVERAGE_FIELDS {
            row(&mut out, field, self.columns.iter().map(|c| c.distinct_values[field]).collect());
        }
        out
    }

    /// Reads back the table written by [`to_tsv`](Self::to_tsv).
    pub fn from_tsv(text: &str) -> Result<CoverageReport, String> {
        let mut report = CoverageReport::default();
        let mut block: Option<&str> = None;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split('\t').collect();
            let bad = |m: &str| format!("coverage report line {}: {m}", i + 1);
            match cells[0] {
                RECORDS_BLOCK | DISTINCT_BLOCK => {
                    let stages = cells[1..]
                        .iter()
                        .map(|s| s.parse::<AugmentationStage>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| bad(&e))?;
                    if report.columns.is_empty() {
                        report.columns = stages
                            .into_iter()
                            .map(|s| CoverageColumn { stage: Some(s), ..Default::default() })
                            .collect();
                    } else if stages.len() != report.columns.len() {
                        return Err(bad("blocks disagree on columns"));
                    }
                    block = Some(if cells[0] == RECORDS_BLOCK { RECORDS_BLOCK } else { DISTINCT_BLOCK });
                }
                label => {
                    let block = block.ok_or_else(|| bad("row before block header"))?;
                    if cells.len() != report.columns.len() + 1 {
                        return Err(bad("wrong number of cells"));
                    }
                    for (col, cell) in report.columns.iter_mut().zip(&cells[1..]) {
                        let v: usize = cell.trim().parse().map_err(|_| bad("count is not a number"))?;
                        match (block, label) {
                            (RECORDS_BLOCK, TOTAL_ROW) => col.total_records = v,
                            (RECORDS_BLOCK, f) if COVERAGE_FIELDS.contains(&f) => {
                                col.records_with_field.insert(f.to_string(), v);
                            }
                            (DISTINCT_BLOCK, f) if COVERAGE_FIELDS.contains(&f) => {
                                col.distinct_values.insert(f.to_string(), v);
                            }
                            _ => return Err(bad(&format!("unexpected row '{label}'"))),
                        }
                    }
                }
            }
        }
        Ok(report)
    }
}
