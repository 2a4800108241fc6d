//! Source parsers and batch harvesting into canonical records.

mod generalist;
mod rules;
mod sra;
pub mod xml;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use generalist::parse_generalist;
pub use rules::{coerce_date, parse_structured_source, split_list, MappingRule, RuleSet, RulesError, Target, Transform};
pub use sra::{parse_sra_xml, SRA_CATALOG};

use crate::ids::make_id;
use crate::model::{ConditionsOfAccess, DataCatalog, HarmonizedDataset};
use crate::registry::Registry;
use crate::validate::canonicalize_record;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Xml,
    StructuredText,
    StructuredRecord,
}

impl SourceFormat {
    pub fn from_extension(ext: &str) -> Option<SourceFormat> {
        match ext.to_ascii_lowercase().as_str() {
            "xml" => Some(SourceFormat::Xml),
            "txt" | "soft" => Some(SourceFormat::StructuredText),
            "json" => Some(SourceFormat::StructuredRecord),
            _ => None,
        }
    }
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One exported metadata document as read from disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSourceDocument {
    pub source_slug: String,
    /// Identifier known before parsing (the file stem); parsers report the
    /// authoritative native id.
    pub native_id: String,
    pub payload: Vec<u8>,
    pub format: SourceFormat,
}

impl RawSourceDocument {
    pub fn new(slug: &str, native_id: &str, payload: Vec<u8>, format: SourceFormat) -> Self {
        RawSourceDocument { source_slug: slug.into(), native_id: native_id.into(), payload, format }
    }
}

/// Per-document failure; the batch records it and continues.
#[derive(Debug, Error)]
pub enum HarvestError {
    #[error("parse error at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error("parse error: {0}")]
    Json(String),
    #[error("expected a {expected} payload, got {found}")]
    Format { expected: SourceFormat, found: SourceFormat },
    #[error("missing native identifier ({0})")]
    MissingId(String),
    #[error("required source path '{0}' not found")]
    MissingPath(String),
    #[error("{0}")]
    Invalid(String),
}

/// Failures that stop a batch before any document is processed.
#[derive(Debug, Error)]
pub enum BatchError {
    #[error("source '{0}' is not in the registry")]
    UnknownSource(String),
    #[error("cannot read input directory {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct HarvestStats {
    pub parsed: usize,
    pub rejected: usize,
    pub reject_reasons: Vec<String>,
}

/// How documents of one source are turned into records.
#[derive(Debug, Clone, Copy)]
pub enum Parser<'a> {
    /// Rules for structured sources; XML and generalist JSON by extension
    /// otherwise.
    Rules(&'a RuleSet),
    ByFormat,
}

fn input_files(dir: &Path) -> Result<Vec<PathBuf>, BatchError> {
    let io = |source| BatchError::Io { path: dir.to_path_buf(), source };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let entry = entry.map_err(io)?;
        let path = entry.path();
        let hidden = path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.'));
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn read_document(path: &Path, slug: &str) -> Result<RawSourceDocument, HarvestError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let format = SourceFormat::from_extension(ext)
        .ok_or_else(|| HarvestError::Invalid(format!("unsupported file type '.{ext}'")))?;
    let payload = std::fs::read(path).map_err(|e| HarvestError::Invalid(e.to_string()))?;
    if payload.iter().all(u8::is_ascii_whitespace) {
        return Err(HarvestError::Invalid("empty payload".into()));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    Ok(RawSourceDocument::new(slug, stem, payload, format))
}

/// Parses one document into an un-canonicalized record with `_id`, catalog
/// and access filled from the registry entry.
pub fn harvest_document(
    doc: &RawSourceDocument,
    catalog_name: &str,
    access: ConditionsOfAccess,
    parser: Parser<'_>,
) -> Result<HarmonizedDataset, HarvestError> {
    let (native, mut record) = match (parser, doc.format) {
        (Parser::Rules(rules), _) => parse_structured_source(doc, rules)?,
        (Parser::ByFormat, SourceFormat::Xml) => parse_sra_xml(doc)?,
        (Parser::ByFormat, SourceFormat::StructuredRecord) => parse_generalist(doc, catalog_name)?,
        (Parser::ByFormat, SourceFormat::StructuredText) => {
            return Err(HarvestError::Invalid("line-oriented documents need a rules file".into()))
        }
    };
    record.id = make_id(&doc.source_slug, &native);
    if record.included_in_data_catalog.is_none() {
        record.included_in_data_catalog = Some(DataCatalog { name: catalog_name.to_string(), url: None });
    }
    if access != ConditionsOfAccess::Varied && record.conditions_of_access == ConditionsOfAccess::Unknown {
        record.conditions_of_access = access;
    }
    record.stamp_ingest();
    Ok(record)
}

/// Harvests every file in `input_dir`. Each document ends up either in the
/// returned corpus (canonical, valid, sorted by `_id`) or in the reject
/// list with a reason.
pub fn harvest_batch(
    input_dir: &Path,
    source_slug: &str,
    registry: &Registry,
    parser: Parser<'_>,
) -> Result<(Vec<HarmonizedDataset>, HarvestStats), BatchError> {
    let entry = registry.get(source_slug).ok_or_else(|| BatchError::UnknownSource(source_slug.to_string()))?;
    let files = input_files(input_dir)?;
    let results: Vec<Result<HarmonizedDataset, String>> = files
        .par_iter()
        .map(|path| {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            let doc = read_document(path, source_slug).map_err(|e| format!("{name}: {e}"))?;
            let record =
                harvest_document(&doc, &entry.name, entry.access, parser).map_err(|e| format!("{name}: {e}"))?;
            canonicalize_record(&record).map_err(|report| {
                let id = if record.id.is_empty() { name.to_string() } else { format!("{name} ({})", record.id) };
                format!("{id}: {report}")
            })
        })
        .collect();

    let mut stats = HarvestStats::default();
    let mut seen = BTreeSet::new();
    let mut records = Vec::new();
    for result in results {
        match result {
            Ok(record) if !seen.insert(record.id.clone()) => {
                stats.rejected += 1;
                stats.reject_reasons.push(format!("{}: duplicate _id", record.id));
            }
            Ok(record) => {
                stats.parsed += 1;
                records.push(record);
            }
            Err(reason) => {
                stats.rejected += 1;
                stats.reject_reasons.push(reason);
            }
        }
    }
    records.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((records, stats))
}
