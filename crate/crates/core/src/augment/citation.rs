use crate::lexicon::Lexicons;
use crate::model::{AugmentationStage, Classification, Funding, HarmonizedDataset, TermRef};
use crate::normalize::occurs_in;
use crate::schema::Field;

use super::disease::map_health_condition;
use super::organism::{classify_organism, push_dedup, DelineationConfig};
use super::PublicationAnnotations;

fn record_text(record: &HarmonizedDataset) -> String {
    let mut text = record.name.clone().unwrap_or_default();
    text.push_str(" \n ");
    text.push_str(record.description.as_deref().unwrap_or_default());
    text
}

/// Fills empty fields from the annotations of publications the record
/// cites. Diseases and organisms must occur in the record's name or
/// description; grants are taken as given, but only into empty funding.
pub fn augment_from_citation(
    record: &HarmonizedDataset,
    annotations: &[&PublicationAnnotations],
    lexicons: &Lexicons,
) -> HarmonizedDataset {
    augment_with(record, annotations, lexicons, &DelineationConfig::default())
}

pub(crate) fn augment_with(
    record: &HarmonizedDataset,
    annotations: &[&PublicationAnnotations],
    lexicons: &Lexicons,
    config: &DelineationConfig,
) -> HarmonizedDataset {
    let mut out = record.clone();
    let text = record_text(record);
    let mut diseases: Vec<TermRef> = Vec::new();
    let mut hosts: Vec<TermRef> = Vec::new();
    let mut agents: Vec<TermRef> = Vec::new();
    let mut grants: Vec<Funding> = Vec::new();
    for ann in annotations {
        let cited = record.citation.iter().any(|c| c.pmid.as_deref().map(str::trim) == Some(ann.pmid.as_str()));
        if !cited {
            log::warn!("{}: annotations for pmid {} do not match any citation; skipped", record.id, ann.pmid);
            continue;
        }
        for surface in ann.diseases.iter().filter(|s| occurs_in(&text, s)) {
            push_dedup(&mut diseases, map_health_condition(&TermRef::raw(surface.trim()), &lexicons.ontologies));
        }
        for surface in ann.organisms.iter().filter(|s| occurs_in(&text, s)) {
            let term = classify_organism(&TermRef::raw(surface.trim()), &lexicons.taxonomy, &lexicons.overrides, config);
            match term.classification {
                Some(Classification::Pathogen) => push_dedup(&mut agents, term),
                _ => push_dedup(&mut hosts, term),
            }
        }
        for grant in &ann.grants {
            let grant = crate::validate::collapse_whitespace(grant);
            if !grant.is_empty() && !grants.iter().any(|g| g.identifier.as_deref() == Some(grant.as_str())) {
                grants.push(Funding::grant(grant));
            }
        }
    }
    let stage = AugmentationStage::CitationAugmentation;
    out.set_terms(Field::HealthCondition, diseases, stage);
    out.set_terms(Field::Species, hosts, stage);
    out.set_terms(Field::InfectiousAgent, agents, stage);
    if out.funding.is_empty() && !grants.is_empty() {
        out.funding = grants;
        out.provenance.insert(Field::Funding.name().to_string(), stage);
    }
    out
}

/// Disease and organism values written by the citation stage that have no
/// normalized occurrence in the record's name or description.
pub fn audit_citation_soundness(corpus: &[HarmonizedDataset]) -> Vec<String> {
    let mut violations = Vec::new();
    for record in corpus {
        let text = record_text(record);
        for field in [Field::HealthCondition, Field::Species, Field::InfectiousAgent] {
            if record.provenance.get(field.name()) != Some(&AugmentationStage::CitationAugmentation) {
                continue;
            }
            for term in record.terms(field) {
                if !occurs_in(&text, &term.raw_text) {
                    violations.push(format!("{}: {} '{}' not found in name or description", record.id, field, term.raw_text));
                }
            }
        }
    }
    violations
}
