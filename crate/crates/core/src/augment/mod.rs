//! The staged enrichment pipeline: organism standardization and host/pathogen
//! delineation, the disease-ontology cascade, citation-linked augmentation,
//! dictionary text mining, topic classification and coverage reporting.

mod agreement;
mod annotations;
mod citation;
mod coverage;
mod disease;
mod organism;
mod pipeline;
mod textmine;
mod topics;

use thiserror::Error;

pub use agreement::hierarchical_agreement;
pub use annotations::{AnnotationStore, PublicationAnnotations};
pub use citation::{audit_citation_soundness, augment_from_citation};
pub use coverage::{coverage_report, CoverageColumn, CoverageReport, COVERAGE_FIELDS};
pub use disease::{map_health_condition, standardize_health_conditions};
pub use organism::{
    delineate_host_pathogen, delineate_with, split_organism_field, standardize_organism, DelineationConfig,
};
pub use pipeline::{check_stage_order, run_pipeline, PipelineError, PipelineInputs};
pub use textmine::{extract_concepts, ConceptDictionary};
pub use topics::{classify_topics, KeywordClassifier, TopicClassifier};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AugmentError {
    #[error("taxon '{0}' does not resolve in the taxonomy")]
    UnresolvedTaxon(String),
    #[error("curie '{0}' does not resolve in the topic ontology")]
    UnresolvedCurie(String),
}
