use crate::lexicon::{OntologyLexicon, OntologyTerm};
use crate::model::{AugmentationStage, HarmonizedDataset, Ontology, TermRef};
use crate::schema::Field;

use super::organism::push_dedup;

pub(crate) fn ontology_term(raw_text: &str, term: &OntologyTerm) -> TermRef {
    TermRef {
        raw_text: raw_text.to_string(),
        curie: Some(term.curie.clone()),
        label: Some(term.label.clone()),
        synonyms: term.synonyms.clone(),
        ontology: Some(term.ontology),
        classification: None,
    }
}

/// Maps a condition through MONDO, HPO, DOID and NCIT in that order; the
/// first hit wins. A term that already carries a resolvable disease curie
/// keeps it. Unmatched terms come back unchanged.
pub fn map_health_condition(raw: &TermRef, ontologies: &OntologyLexicon) -> TermRef {
    if let Some(existing) = raw.curie.as_deref().and_then(|c| ontologies.get(c)) {
        if Ontology::DISEASE_CASCADE.contains(&existing.ontology) {
            return ontology_term(&raw.raw_text, existing);
        }
    }
    Ontology::DISEASE_CASCADE
        .iter()
        .find_map(|&o| ontologies.lookup_ontology_term(&raw.raw_text, o))
        .map(|t| ontology_term(&raw.raw_text, t))
        .unwrap_or_else(|| raw.clone())
}

/// Standardization of the healthCondition list, merging terms that resolve
/// to the same curie.
pub fn standardize_health_conditions(record: &HarmonizedDataset, ontologies: &OntologyLexicon) -> HarmonizedDataset {
    let mut out = record.clone();
    let mut mapped = Vec::new();
    for raw in &record.health_condition {
        push_dedup(&mut mapped, map_health_condition(raw, ontologies));
    }
    if mapped != record.health_condition {
        out.set_terms(Field::HealthCondition, mapped, AugmentationStage::Standardization);
    }
    out
}
