//! Bundled reference vocabularies: taxonomy with lineages, disease and topic
//! ontology subsets, the host/pathogen override table, topic keyword rules
//! and the corrections list.

mod corrections;
mod ontology;
mod overrides;
mod taxonomy;
mod topic_rules;

use std::path::Path;

pub use corrections::{Correction, CorrectionsList};
pub use ontology::{OntologyLexicon, OntologyTerm};
pub use overrides::Overrides;
pub use taxonomy::{lineage_contains, LineageNode, TaxonEntry, TaxonomyLexicon};
pub use topic_rules::TopicRules;

use crate::tsv::TableError;

pub const TAXONOMY_FILE: &str = "taxonomy.tsv";
pub const ONTOLOGY_FILE: &str = "ontologies.tsv";
pub const OVERRIDES_FILE: &str = "overrides.tsv";
pub const TOPIC_RULES_FILE: &str = "topic_rules.tsv";

/// Everything the augmentation stages look terms up in.
#[derive(Debug, Clone, Default)]
pub struct Lexicons {
    pub taxonomy: TaxonomyLexicon,
    pub ontologies: OntologyLexicon,
    pub overrides: Overrides,
    pub topic_rules: TopicRules,
}

impl Lexicons {
    /// Loads a lexicon directory. The taxonomy and ontology files are
    /// required; overrides and topic rules are optional.
    pub fn load_dir(dir: &Path) -> Result<Lexicons, TableError> {
        let optional = |name: &str| Some(dir.join(name)).filter(|p| p.exists());
        Ok(Lexicons {
            taxonomy: TaxonomyLexicon::load(&dir.join(TAXONOMY_FILE))?,
            ontologies: OntologyLexicon::load(&dir.join(ONTOLOGY_FILE))?,
            overrides: optional(OVERRIDES_FILE).map(|p| Overrides::load(&p)).transpose()?.unwrap_or_default(),
            topic_rules: optional(TOPIC_RULES_FILE).map(|p| TopicRules::load(&p)).transpose()?.unwrap_or_default(),
        })
    }

    /// Load warnings from every table, prefixed by table name.
    pub fn warnings(&self) -> Vec<String> {
        let mut out: Vec<String> = self.taxonomy.warnings().iter().map(|w| format!("taxonomy: {w}")).collect();
        out.extend(self.ontologies.warnings().iter().map(|w| format!("ontologies: {w}")));
        out
    }
}
