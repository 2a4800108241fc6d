use std::path::{Path, PathBuf};

use harmonize_core::augment::CoverageReport;
use harmonize_core::corpus::{read_corpus, CorpusError};
use harmonize_core::HarmonizedDataset;
use harmonize_search::{SearchConfig, SearchError, SearchIndex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("cannot read report {path}: {source}")]
    ReportIo { path: PathBuf, source: std::io::Error },
    #[error("invalid report {path}: {message}")]
    Report { path: PathBuf, message: String },
    #[error(transparent)]
    Index(#[from] SearchError),
}

/// An immutable index plus the coverage report that came with it.
#[derive(Debug)]
pub struct Snapshot {
    pub generation: u64,
    pub index: SearchIndex,
    pub report: Option<CoverageReport>,
}

impl Snapshot {
    pub fn build(
        generation: u64,
        corpus: Vec<HarmonizedDataset>,
        report: Option<CoverageReport>,
        config: &SearchConfig,
    ) -> Result<Snapshot, LoadError> {
        Ok(Snapshot { generation, index: SearchIndex::build(corpus, config.clone())?, report })
    }

    pub fn load(
        generation: u64,
        corpus: &Path,
        report: Option<&Path>,
        config: &SearchConfig,
    ) -> Result<Snapshot, LoadError> {
        let records = read_corpus(corpus)?;
        let report = report.map(read_report).transpose()?;
        Self::build(generation, records, report, config)
    }
}

pub fn read_report(path: &Path) -> Result<CoverageReport, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::ReportIo { path: path.into(), source })?;
    CoverageReport::from_tsv(&text).map_err(|message| LoadError::Report { path: path.into(), message })
}
