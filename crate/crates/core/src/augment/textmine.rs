use std::collections::HashMap;

use crate::lexicon::{Correction, CorrectionsList, Lexicons};
use crate::model::{AugmentationStage, Classification, HarmonizedDataset, Ontology, TermRef};
use crate::normalize::normalized_words;
use crate::schema::Field;

use super::disease::{map_health_condition, ontology_term};
use super::organism::{classify_organism, push_dedup, taxon_term, DelineationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Concept {
    Taxon(u32),
    Disease,
}

/// Normalized surface phrases of every organism and disease name, for
/// leftmost-longest scanning.
#[derive(Debug, Clone, Default)]
pub struct ConceptDictionary {
    phrases: HashMap<String, Vec<Concept>>,
    max_words: usize,
}

impl ConceptDictionary {
    pub fn build(lexicons: &Lexicons) -> ConceptDictionary {
        let mut dict = ConceptDictionary::default();
        for (name, &taxid) in lexicons.taxonomy.name_index() {
            dict.add(name.clone(), Concept::Taxon(taxid));
        }
        for term in lexicons.ontologies.terms().filter(|t| Ontology::DISEASE_CASCADE.contains(&t.ontology)) {
            for name in std::iter::once(&term.label).chain(&term.synonyms) {
                dict.add(normalized_words(name).join(" "), Concept::Disease);
            }
        }
        dict
    }

    fn add(&mut self, phrase: String, concept: Concept) {
        if phrase.is_empty() {
            return;
        }
        self.max_words = self.max_words.max(phrase.split(' ').count());
        let entry = self.phrases.entry(phrase).or_default();
        if !entry.contains(&concept) {
            entry.push(concept);
        }
    }

    /// Leftmost-longest, non-overlapping matches in `text`, as normalized
    /// phrases in order of occurrence.
    pub fn scan(&self, text: &str) -> Vec<String> {
        let words = normalized_words(text);
        let mut out = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let limit = self.max_words.min(words.len() - i);
            let hit = (1..=limit).rev().find_map(|n| {
                let phrase = words[i..i + n].join(" ");
                self.phrases.contains_key(&phrase).then_some((n, phrase))
            });
            match hit {
                Some((n, phrase)) => {
                    out.push(phrase);
                    i += n;
                }
                None => i += 1,
            }
        }
        out
    }

    fn concepts(&self, phrase: &str) -> &[Concept] {
        self.phrases.get(phrase).map_or(&[], Vec::as_slice)
    }
}

fn corrected(term: TermRef, field: Field, phrase: &str, corrections: &CorrectionsList, lexicons: &Lexicons) -> Option<TermRef> {
    match corrections.correction(phrase, field) {
        None => Some(term),
        Some(Correction::Suppress) => None,
        Some(Correction::Remap(curie)) => {
            if let Some(t) = lexicons.ontologies.get(curie) {
                return Some(ontology_term(&term.raw_text, t));
            }
            if let Some(e) = lexicons.taxonomy.get_curie(curie) {
                return Some(TermRef { classification: term.classification, ..taxon_term(&term.raw_text, e) });
            }
            log::warn!("correction remaps '{phrase}' to unknown curie {curie}; dropped");
            None
        }
    }
}

/// Dictionary scan of name and description. Matches pass through the
/// corrections list, are standardized, and fill empty fields at the
/// TextMiningAugmentation stage.
pub fn extract_concepts(
    record: &HarmonizedDataset,
    lexicons: &Lexicons,
    corrections: &CorrectionsList,
) -> HarmonizedDataset {
    extract_with(record, &ConceptDictionary::build(lexicons), lexicons, corrections, &DelineationConfig::default())
}

pub(crate) fn extract_with(
    record: &HarmonizedDataset,
    dict: &ConceptDictionary,
    lexicons: &Lexicons,
    corrections: &CorrectionsList,
    config: &DelineationConfig,
) -> HarmonizedDataset {
    let mut phrases = Vec::new();
    for text in [record.name.as_deref(), record.description.as_deref()].into_iter().flatten() {
        phrases.extend(dict.scan(text));
    }
    let mut diseases = Vec::new();
    let mut hosts = Vec::new();
    let mut agents = Vec::new();
    for phrase in &phrases {
        for concept in dict.concepts(phrase) {
            match *concept {
                Concept::Disease => {
                    let term = map_health_condition(&TermRef::raw(phrase.as_str()), &lexicons.ontologies);
                    if let Some(t) = corrected(term, Field::HealthCondition, phrase, corrections, lexicons) {
                        push_dedup(&mut diseases, t);
                    }
                }
                Concept::Taxon(taxid) => {
                    let seed = TermRef { curie: Some(format!("NCBITaxon:{taxid}")), ..TermRef::raw(phrase.as_str()) };
                    let term = classify_organism(&seed, &lexicons.taxonomy, &lexicons.overrides, config);
                    let (field, bucket) = match term.classification {
                        Some(Classification::Pathogen) => (Field::InfectiousAgent, &mut agents),
                        _ => (Field::Species, &mut hosts),
                    };
                    if let Some(t) = corrected(term, field, phrase, corrections, lexicons) {
                        push_dedup(bucket, t);
                    }
                }
            }
        }
    }
    let mut out = record.clone();
    let stage = AugmentationStage::TextMiningAugmentation;
    out.set_terms(Field::HealthCondition, diseases, stage);
    out.set_terms(Field::Species, hosts, stage);
    out.set_terms(Field::InfectiousAgent, agents, stage);
    out
}
