use crate::lexicon::{lineage_contains, Overrides, TaxonEntry, TaxonomyLexicon};
use crate::model::{AugmentationStage, Classification, HarmonizedDataset, Ontology, TermRef};
use crate::schema::Field;

use super::AugmentError;

/// Clade names that decide host versus pathogen when no override applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelineationConfig {
    pub host_clades: Vec<String>,
    pub pathogen_clades: Vec<String>,
}

impl Default for DelineationConfig {
    fn default() -> Self {
        let owned = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
        DelineationConfig {
            host_clades: owned(&["Vertebrata", "Arthropoda", "Viridiplantae"]),
            pathogen_clades: owned(&["Bacteria", "Viruses", "Apicomplexa", "Euglenozoa", "Fungi"]),
        }
    }
}

pub(crate) fn taxon_term(raw_text: &str, entry: &TaxonEntry) -> TermRef {
    let mut synonyms: Vec<String> = Vec::new();
    for name in entry.synonyms.iter().chain(&entry.common_names) {
        if *name != entry.scientific_name && !synonyms.contains(name) {
            synonyms.push(name.clone());
        }
    }
    TermRef {
        raw_text: raw_text.to_string(),
        curie: Some(entry.curie()),
        label: Some(entry.scientific_name.clone()),
        synonyms,
        ontology: Some(Ontology::NcbiTaxon),
        classification: None,
    }
}

fn resolve<'a>(term: &TermRef, taxonomy: &'a TaxonomyLexicon) -> Option<&'a TaxonEntry> {
    if let Some(curie) = &term.curie {
        if let Some(entry) = taxonomy.get_curie(curie) {
            return Some(entry);
        }
    }
    taxonomy.lookup_organism(&term.raw_text)
}

/// Resolves a free-text organism against the taxonomy. Unmatched terms come
/// back unchanged.
pub fn standardize_organism(raw: &TermRef, taxonomy: &TaxonomyLexicon) -> TermRef {
    match resolve(raw, taxonomy) {
        Some(entry) => TermRef { classification: raw.classification, ..taxon_term(&raw.raw_text, entry) },
        None => raw.clone(),
    }
}

fn in_clade(entry: &TaxonEntry, clade: &str) -> bool {
    lineage_contains(entry, clade) || entry.scientific_name.eq_ignore_ascii_case(clade)
}

pub fn delineate_with(
    term: &TermRef,
    taxonomy: &TaxonomyLexicon,
    overrides: &Overrides,
    config: &DelineationConfig,
) -> Result<Classification, AugmentError> {
    let entry = resolve(term, taxonomy).ok_or_else(|| {
        AugmentError::UnresolvedTaxon(term.curie.clone().unwrap_or_else(|| term.raw_text.clone()))
    })?;
    if let Some(class) = overrides.get(entry.taxid) {
        return Ok(class);
    }
    if config.host_clades.iter().any(|c| in_clade(entry, c)) {
        return Ok(Classification::Host);
    }
    if config.pathogen_clades.iter().any(|c| in_clade(entry, c)) {
        return Ok(Classification::Pathogen);
    }
    Ok(Classification::Ambiguous)
}

/// Host/pathogen call for a resolved organism: override table first, then
/// host clades, then pathogen clades, else Ambiguous.
pub fn delineate_host_pathogen(
    term: &TermRef,
    taxonomy: &TaxonomyLexicon,
    overrides: &Overrides,
) -> Result<Classification, AugmentError> {
    delineate_with(term, taxonomy, overrides, &DelineationConfig::default())
}

fn term_key(t: &TermRef) -> String {
    t.curie.clone().unwrap_or_else(|| crate::normalize::normalize_text(&t.raw_text))
}

pub(crate) fn push_dedup(terms: &mut Vec<TermRef>, term: TermRef) {
    let key = term_key(&term);
    if !terms.iter().any(|t| term_key(t) == key) {
        terms.push(term);
    }
}

/// Standardizes and classifies one organism; unresolved ones have no class.
pub(crate) fn classify_organism(
    raw: &TermRef,
    taxonomy: &TaxonomyLexicon,
    overrides: &Overrides,
    config: &DelineationConfig,
) -> TermRef {
    let mut term = standardize_organism(raw, taxonomy);
    term.classification = delineate_with(&term, taxonomy, overrides, config).ok().or(raw.classification);
    term
}

/// Routes every organism under `species` to species (hosts and ambiguous
/// taxa) or infectiousAgent (pathogens), standardizing both lists. Writes
/// happen at the Standardization stage and only when a list changes.
pub fn split_organism_field(
    record: &HarmonizedDataset,
    taxonomy: &TaxonomyLexicon,
    overrides: &Overrides,
) -> HarmonizedDataset {
    split_with(record, taxonomy, overrides, &DelineationConfig::default())
}

pub(crate) fn split_with(
    record: &HarmonizedDataset,
    taxonomy: &TaxonomyLexicon,
    overrides: &Overrides,
    config: &DelineationConfig,
) -> HarmonizedDataset {
    let mut out = record.clone();
    let mut species = Vec::new();
    let mut agents = Vec::new();
    for raw in &record.infectious_agent {
        push_dedup(&mut agents, classify_organism(raw, taxonomy, overrides, config));
    }
    for raw in &record.species {
        let term = classify_organism(raw, taxonomy, overrides, config);
        match term.classification {
            Some(Classification::Pathogen) => push_dedup(&mut agents, term),
            _ => push_dedup(&mut species, term),
        }
    }
    if species != record.species {
        out.set_terms(Field::Species, species, AugmentationStage::Standardization);
    }
    if agents != record.infectious_agent {
        out.set_terms(Field::InfectiousAgent, agents, AugmentationStage::Standardization);
    }
    out
}
