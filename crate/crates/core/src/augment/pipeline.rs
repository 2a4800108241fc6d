use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::lexicon::{CorrectionsList, Lexicons};
use crate::model::{AugmentationStage, HarmonizedDataset};
use crate::validate::canonicalize_record;

use super::citation::augment_with;
use super::coverage::{coverage_report, CoverageReport};
use super::disease::standardize_health_conditions;
use super::organism::{split_with, DelineationConfig};
use super::textmine::{extract_with, ConceptDictionary};
use super::topics::TopicClassifier;
use super::AnnotationStore;

/// External inputs consulted by the augmentation stages. Each stage fails
/// fast when an input it needs is absent.
#[derive(Clone, Copy, Default)]
pub struct PipelineInputs<'a> {
    pub lexicons: Option<&'a Lexicons>,
    pub annotations: Option<&'a AnnotationStore>,
    pub corrections: Option<&'a CorrectionsList>,
    pub classifier: Option<&'a dyn TopicClassifier>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PipelineError {
    #[error("stage order: {0}")]
    StageOrder(String),
    #[error("stage {stage} needs {input}")]
    MissingInput { stage: AugmentationStage, input: &'static str },
    #[error("duplicate _id '{0}' in corpus")]
    DuplicateId(String),
    #[error("record '{id}' invalid after {stage}: {message}")]
    Invalid { id: String, stage: AugmentationStage, message: String },
}

/// Stages must be augmentation stages in strictly increasing order.
pub fn check_stage_order(stages: &[AugmentationStage]) -> Result<(), PipelineError> {
    if stages.contains(&AugmentationStage::Ingest) {
        return Err(PipelineError::StageOrder("Ingest is the baseline, not a runnable stage".into()));
    }
    for pair in stages.windows(2) {
        if pair[0] >= pair[1] {
            return Err(PipelineError::StageOrder(format!("{} cannot run after {}", pair[1], pair[0])));
        }
    }
    Ok(())
}

enum Step<'a> {
    Standardize(&'a Lexicons),
    Citation(&'a Lexicons, &'a AnnotationStore),
    TextMine(&'a Lexicons, &'a CorrectionsList, ConceptDictionary, Option<&'a AnnotationStore>),
    Topics(&'a dyn TopicClassifier),
}

fn plan<'a>(stage: AugmentationStage, inputs: &PipelineInputs<'a>) -> Result<Step<'a>, PipelineError> {
    let missing = |input| PipelineError::MissingInput { stage, input };
    let lexicons = || inputs.lexicons.ok_or_else(|| missing("lexicons"));
    Ok(match stage {
        AugmentationStage::Standardization => Step::Standardize(lexicons()?),
        AugmentationStage::CitationAugmentation => {
            Step::Citation(lexicons()?, inputs.annotations.ok_or_else(|| missing("annotations"))?)
        }
        AugmentationStage::TextMiningAugmentation => {
            let lex = lexicons()?;
            let corrections = inputs.corrections.ok_or_else(|| missing("corrections"))?;
            Step::TextMine(lex, corrections, ConceptDictionary::build(lex), inputs.annotations)
        }
        AugmentationStage::TopicClassification => {
            Step::Topics(inputs.classifier.ok_or_else(|| missing("classifier"))?)
        }
        AugmentationStage::Ingest => unreachable!("rejected by check_stage_order"),
    })
}

/// True when at least one of the record's pmids has annotations on file.
fn is_linked(record: &HarmonizedDataset, store: &AnnotationStore) -> bool {
    record.citation.iter().filter_map(|c| c.pmid.as_deref()).any(|p| store.get(p.trim()).is_some())
}

fn apply(step: &Step<'_>, record: &HarmonizedDataset, config: &DelineationConfig) -> HarmonizedDataset {
    match step {
        Step::Standardize(lex) => {
            let split = split_with(record, &lex.taxonomy, &lex.overrides, config);
            standardize_health_conditions(&split, &lex.ontologies)
        }
        Step::Citation(lex, store) => {
            let anns: Vec<_> = record
                .citation
                .iter()
                .filter_map(|c| c.pmid.as_deref())
                .filter_map(|p| store.get(p.trim()))
                .collect();
            if anns.is_empty() {
                record.clone()
            } else {
                augment_with(record, &anns, lex, config)
            }
        }
        Step::TextMine(lex, corrections, dict, store) => {
            if store.is_some_and(|s| is_linked(record, s)) {
                record.clone()
            } else {
                extract_with(record, dict, lex, corrections, config)
            }
        }
        Step::Topics(classifier) => super::classify_topics(record, *classifier),
    }
}

/// Runs `stages` over every record and reports coverage before the first
/// stage and after each one. Output is sorted by `_id`.
pub fn run_pipeline(
    corpus: &[HarmonizedDataset],
    stages: &[AugmentationStage],
    inputs: &PipelineInputs<'_>,
) -> Result<(Vec<HarmonizedDataset>, CoverageReport), PipelineError> {
    check_stage_order(stages)?;
    let steps = stages.iter().map(|&s| plan(s, inputs).map(|p| (s, p))).collect::<Result<Vec<_>, _>>()?;

    let mut seen = BTreeSet::new();
    for record in corpus {
        if !seen.insert(record.id.as_str()) {
            return Err(PipelineError::DuplicateId(record.id.clone()));
        }
    }
    let mut current = corpus.to_vec();
    current.sort_by(|a, b| a.id.cmp(&b.id));

    let config = DelineationConfig::default();
    let mut report = CoverageReport { columns: vec![coverage_report(&current, AugmentationStage::Ingest)] };
    for (stage, step) in &steps {
        current = current
            .par_iter()
            .map(|record| {
                canonicalize_record(&apply(step, record, &config)).map_err(|r| PipelineError::Invalid {
                    id: record.id.clone(),
                    stage: *stage,
                    message: r.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        report.columns.push(coverage_report(&current, *stage));
    }
    Ok((current, report))
}
