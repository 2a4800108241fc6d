use crate::lexicon::{OntologyLexicon, TopicRules};
use crate::model::{AugmentationStage, HarmonizedDataset, Ontology, TermRef};
use crate::schema::Field;

use super::disease::ontology_term;
use super::organism::push_dedup;

/// Assigns EDAM topics to a record.
pub trait TopicClassifier: Send + Sync {
    fn classify(&self, record: &HarmonizedDataset) -> Result<Vec<TermRef>, String>;
}

/// Deterministic default: keyword and measurement-technique values looked up
/// in the keyword rule table, then directly against EDAM labels and
/// synonyms.
#[derive(Debug, Clone, Default)]
pub struct KeywordClassifier {
    rules: TopicRules,
    edam: OntologyLexicon,
}

impl KeywordClassifier {
    pub fn new(rules: TopicRules, edam: OntologyLexicon) -> Self {
        KeywordClassifier { rules, edam }
    }

    fn evidence(record: &HarmonizedDataset) -> Vec<&str> {
        let mut out: Vec<&str> = record.keywords.iter().map(String::as_str).collect();
        for t in &record.measurement_technique {
            out.push(&t.raw_text);
            if let Some(label) = &t.label {
                out.push(label);
            }
        }
        out
    }
}

impl TopicClassifier for KeywordClassifier {
    fn classify(&self, record: &HarmonizedDataset) -> Result<Vec<TermRef>, String> {
        let mut topics = Vec::new();
        for value in Self::evidence(record) {
            let term = match self.rules.lookup(value) {
                Some(curie) => Some(
                    self.edam
                        .get(curie)
                        .ok_or_else(|| format!("topic rule for '{value}' points at unknown {curie}"))?,
                ),
                None => self.edam.lookup_ontology_term(value, Ontology::Edam),
            };
            if let Some(term) = term {
                push_dedup(&mut topics, ontology_term(value, term));
            }
        }
        Ok(topics)
    }
}

/// Fills an empty topicCategory at the TopicClassification stage. A
/// classifier failure leaves the record unchanged.
pub fn classify_topics(record: &HarmonizedDataset, classifier: &dyn TopicClassifier) -> HarmonizedDataset {
    let mut out = record.clone();
    if !record.topic_category.is_empty() {
        return out;
    }
    match classifier.classify(record) {
        Ok(topics) => {
            out.set_terms(Field::TopicCategory, topics, AugmentationStage::TopicClassification);
        }
        Err(e) => log::warn!("{}: topic classification failed: {e}", record.id),
    }
    out
}
