//! NCBI SRA experiment-package XML.

use crate::model::{Citation, DataCatalog, HarmonizedDataset, TermRef};

use super::xml::{parse_xml, XmlNode};
use super::{HarvestError, RawSourceDocument, SourceFormat};

pub const SRA_CATALOG: &str = "NCBI SRA";
const SRA_HOME: &str = "https://www.ncbi.nlm.nih.gov/sra";

fn push_unique(terms: &mut Vec<TermRef>, text: Option<&str>) {
    if let Some(text) = text {
        if !terms.iter().any(|t| t.raw_text == text) {
            terms.push(TermRef::raw(text));
        }
    }
}

fn technique(experiment: &XmlNode) -> Option<&str> {
    if let Some(strategy) = experiment.find("LIBRARY_STRATEGY").and_then(XmlNode::text) {
        return Some(strategy);
    }
    let platform = experiment.child("PLATFORM")?.children.first()?;
    platform.child("INSTRUMENT_MODEL").and_then(XmlNode::text).or(Some(platform.name.as_str()))
}

/// Maps one study (with its experiment packages) to a record. The native id
/// is the study accession.
pub fn parse_sra_xml(doc: &RawSourceDocument) -> Result<(String, HarmonizedDataset), HarvestError> {
    if doc.format != SourceFormat::Xml {
        return Err(HarvestError::Format { expected: SourceFormat::Xml, found: doc.format });
    }
    let root = parse_xml(&doc.payload)?;
    let mut packages = Vec::new();
    root.descendants("EXPERIMENT_PACKAGE", &mut packages);
    if packages.is_empty() {
        packages.push(&root);
    }

    let mut record = HarmonizedDataset::default();
    let mut accession: Option<String> = None;
    for package in packages {
        if let Some(study) = package.find("STUDY") {
            let acc = study
                .attr("accession")
                .or_else(|| study.path("IDENTIFIERS/PRIMARY_ID").and_then(XmlNode::text))
                .map(str::to_string);
            match (&accession, acc) {
                (None, Some(a)) => accession = Some(a),
                (Some(prev), Some(a)) if *prev != a => {
                    return Err(HarvestError::Invalid(format!("document mixes studies {prev} and {a}")))
                }
                _ => {}
            }
            let descriptor = study.child("DESCRIPTOR");
            let text_of = |name: &str| descriptor.and_then(|d| d.child(name)).and_then(XmlNode::text).map(str::to_string);
            record.name = record.name.take().or_else(|| text_of("STUDY_TITLE"));
            record.description = record
                .description
                .take()
                .or_else(|| text_of("STUDY_ABSTRACT"))
                .or_else(|| text_of("STUDY_DESCRIPTION"));
            let mut links = Vec::new();
            study.descendants("XREF_LINK", &mut links);
            for link in links {
                let db = link.child("DB").and_then(XmlNode::text).unwrap_or_default();
                if db.eq_ignore_ascii_case("pubmed") {
                    if let Some(id) = link.child("ID").and_then(XmlNode::text) {
                        if !record.citation.iter().any(|c| c.pmid.as_deref() == Some(id)) {
                            record.citation.push(Citation { pmid: Some(id.to_string()), ..Default::default() });
                        }
                    }
                }
            }
        }
        let mut samples = Vec::new();
        package.descendants("SAMPLE", &mut samples);
        for sample in samples {
            push_unique(&mut record.species, sample.find("SCIENTIFIC_NAME").and_then(XmlNode::text));
        }
        if let Some(experiment) = package.find("EXPERIMENT") {
            push_unique(&mut record.measurement_technique, technique(experiment));
        }
    }

    let accession = accession.ok_or_else(|| HarvestError::MissingId("STUDY accession".into()))?;
    record.identifier = Some(accession.clone());
    record.url = Some(format!("{SRA_HOME}/{accession}"));
    record.included_in_data_catalog = Some(DataCatalog { name: SRA_CATALOG.into(), url: Some(SRA_HOME.into()) });
    Ok((accession, record))
}
