//! Harmonized dataset metadata: the unified record model, source harvesters,
//! bundled reference lexicons and the staged augmentation pipeline.

pub mod augment;
pub mod corpus;
pub mod harvest;
pub mod ids;
pub mod lexicon;
pub mod model;
pub mod normalize;
pub mod registry;
pub mod schema;
pub mod tsv;
pub mod validate;

pub use model::{
    AugmentationStage, Classification, ConditionsOfAccess, HarmonizedDataset, Ontology,
    SourceRegistryEntry, TermRef,
};
pub use schema::{Field, SchemaError};
pub use validate::{canonicalize_record, validate_record, ValidationReport};
