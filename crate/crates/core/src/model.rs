//! The harmonized dataset record and its component types.
//!
//! Field names serialize exactly as the unified schema spells them
//! (`measurementTechnique`, `includedInDataCatalog`, `_id`, ...), so a corpus
//! line is a self-describing document that other tools can read without this
//! crate.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One dataset record in the unified schema.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarmonizedDataset {
    #[serde(rename = "_id")]
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identifier: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub author: Vec<Author>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub funding: Vec<Funding>,
    #[serde(rename = "measurementTechnique", skip_serializing_if = "Vec::is_empty")]
    pub measurement_technique: Vec<TermRef>,
    #[serde(rename = "includedInDataCatalog", skip_serializing_if = "Option::is_none")]
    pub included_in_data_catalog: Option<DataCatalog>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub distribution: Vec<Distribution>,
    #[serde(rename = "healthCondition", skip_serializing_if = "Vec::is_empty")]
    pub health_condition: Vec<TermRef>,
    #[serde(rename = "infectiousAgent", skip_serializing_if = "Vec::is_empty")]
    pub infectious_agent: Vec<TermRef>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub species: Vec<TermRef>,
    #[serde(rename = "variableMeasured", skip_serializing_if = "Vec::is_empty")]
    pub variable_measured: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub keywords: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
    #[serde(rename = "temporalCoverage", skip_serializing_if = "Option::is_none")]
    pub temporal_coverage: Option<TemporalCoverage>,
    #[serde(rename = "spatialCoverage", skip_serializing_if = "Vec::is_empty")]
    pub spatial_coverage: Vec<Organization>,
    #[serde(rename = "conditionsOfAccess")]
    pub conditions_of_access: ConditionsOfAccess,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub license: Option<String>,
    #[serde(rename = "usageInfo", skip_serializing_if = "Option::is_none")]
    pub usage_info: Option<String>,
    #[serde(rename = "sdPublisher", skip_serializing_if = "Option::is_none")]
    pub sd_publisher: Option<Organization>,
    #[serde(rename = "dateCreated", skip_serializing_if = "Option::is_none")]
    pub date_created: Option<String>,
    #[serde(rename = "dateModified", skip_serializing_if = "Option::is_none")]
    pub date_modified: Option<String>,
    #[serde(rename = "datePublished", skip_serializing_if = "Option::is_none")]
    pub date_published: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub citation: Vec<Citation>,
    #[serde(rename = "isBasedOn", skip_serializing_if = "Vec::is_empty")]
    pub is_based_on: Vec<Link>,
    #[serde(rename = "citedBy", skip_serializing_if = "Vec::is_empty")]
    pub cited_by: Vec<Link>,
    #[serde(rename = "hasPart", skip_serializing_if = "Vec::is_empty")]
    pub has_part: Vec<Link>,
    #[serde(rename = "isPartOf", skip_serializing_if = "Vec::is_empty")]
    pub is_part_of: Vec<Link>,
    #[serde(rename = "isRelatedTo", skip_serializing_if = "Vec::is_empty")]
    pub is_related_to: Vec<Link>,
    #[serde(rename = "isSimilarTo", skip_serializing_if = "Vec::is_empty")]
    pub is_similar_to: Vec<Link>,
    #[serde(rename = "sameAs", skip_serializing_if = "Vec::is_empty")]
    pub same_as: Vec<Link>,
    #[serde(rename = "isBasisFor", skip_serializing_if = "Vec::is_empty")]
    pub is_basis_for: Vec<Link>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nctid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(rename = "abstract", skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    #[serde(rename = "isAccessibleForFree", skip_serializing_if = "Option::is_none")]
    pub is_accessible_for_free: Option<bool>,
    #[serde(rename = "sourceOrganization", skip_serializing_if = "Vec::is_empty")]
    pub source_organization: Vec<Organization>,
    #[serde(rename = "topicCategory", skip_serializing_if = "Vec::is_empty")]
    pub topic_category: Vec<TermRef>,
    #[serde(rename = "_provenance", skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, AugmentationStage>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Author {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affiliation: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Funding {
    /// Grant number.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identifier: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub funder: Option<Organization>,
}

impl Funding {
    pub fn grant(identifier: impl Into<String>) -> Self {
        Funding { identifier: Some(identifier.into()), funder: None }
    }
}

/// A named entity with no further structure: funders, publishers, places,
/// source organizations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Organization {
    pub name: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataCatalog {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Distribution {
    #[serde(rename = "contentUrl", skip_serializing_if = "Option::is_none")]
    pub content_url: Option<String>,
    #[serde(rename = "encodingFormat", skip_serializing_if = "Option::is_none")]
    pub encoding_format: Option<String>,
    #[serde(rename = "dateModified", skip_serializing_if = "Option::is_none")]
    pub date_modified: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemporalCoverage {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Citation {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pmid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// Reference to another creative work by identifier.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Link {
    pub identifier: String,
}

/// A vocabulary-backed value: the surface text as found in the source plus,
/// once standardized, the ontology term it resolved to.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TermRef {
    pub raw_text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curie: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub synonyms: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ontology: Option<Ontology>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
}

impl TermRef {
    pub fn raw(text: impl Into<String>) -> Self {
        TermRef { raw_text: text.into(), ..Default::default() }
    }

    /// Preferred display value: the label when standardized, else the raw text.
    pub fn display(&self) -> &str {
        match &self.label {
            Some(label) if !label.trim().is_empty() => label,
            _ => &self.raw_text,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ontology {
    #[serde(rename = "NCBITaxon")]
    NcbiTaxon,
    #[serde(rename = "MONDO")]
    Mondo,
    #[serde(rename = "HPO")]
    Hpo,
    #[serde(rename = "DOID")]
    Doid,
    #[serde(rename = "NCIT")]
    Ncit,
    #[serde(rename = "EDAM")]
    Edam,
}

impl Ontology {
    pub const DISEASE_CASCADE: [Ontology; 4] =
        [Ontology::Mondo, Ontology::Hpo, Ontology::Doid, Ontology::Ncit];

    pub fn name(self) -> &'static str {
        match self {
            Ontology::NcbiTaxon => "NCBITaxon",
            Ontology::Mondo => "MONDO",
            Ontology::Hpo => "HPO",
            Ontology::Doid => "DOID",
            Ontology::Ncit => "NCIT",
            Ontology::Edam => "EDAM",
        }
    }

    /// CURIE prefix used by identifiers of this ontology. HPO terms are `HP:`.
    pub fn curie_prefix(self) -> &'static str {
        match self {
            Ontology::Hpo => "HP",
            other => other.name(),
        }
    }

    pub fn from_curie(curie: &str) -> Option<Ontology> {
        let (prefix, _) = curie.split_once(':')?;
        [
            Ontology::NcbiTaxon,
            Ontology::Mondo,
            Ontology::Hpo,
            Ontology::Doid,
            Ontology::Ncit,
            Ontology::Edam,
        ]
        .into_iter()
        .find(|o| o.curie_prefix() == prefix)
    }
}

impl fmt::Display for Ontology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ontology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "NCBITaxon" => Ok(Ontology::NcbiTaxon),
            "MONDO" => Ok(Ontology::Mondo),
            "HPO" | "HP" => Ok(Ontology::Hpo),
            "DOID" => Ok(Ontology::Doid),
            "NCIT" => Ok(Ontology::Ncit),
            "EDAM" => Ok(Ontology::Edam),
            other => Err(format!("unknown ontology '{other}'")),
        }
    }
}

/// Host/pathogen delineation outcome for an organism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Host,
    Pathogen,
    Ambiguous,
}

impl FromStr for Classification {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "host" => Ok(Classification::Host),
            "pathogen" => Ok(Classification::Pathogen),
            "ambiguous" => Ok(Classification::Ambiguous),
            other => Err(format!("unknown classification '{other}'")),
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Host => "Host",
            Classification::Pathogen => "Pathogen",
            Classification::Ambiguous => "Ambiguous",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionsOfAccess {
    Open,
    Registered,
    Controlled,
    Varied,
    #[default]
    Unknown,
}

impl ConditionsOfAccess {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionsOfAccess::Open => "Open",
            ConditionsOfAccess::Registered => "Registered",
            ConditionsOfAccess::Controlled => "Controlled",
            ConditionsOfAccess::Varied => "Varied",
            ConditionsOfAccess::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for ConditionsOfAccess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConditionsOfAccess {
    type Err = String;

    /// Accepts both the bare enum names and the registry spelling
    /// ("Registered Access").
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lowered = s.trim().to_ascii_lowercase();
        let word = lowered.strip_suffix(" access").unwrap_or(&lowered).trim();
        match word {
            "open" => Ok(ConditionsOfAccess::Open),
            "registered" => Ok(ConditionsOfAccess::Registered),
            "controlled" | "restricted" => Ok(ConditionsOfAccess::Controlled),
            "varied" => Ok(ConditionsOfAccess::Varied),
            "unknown" | "" | "-" => Ok(ConditionsOfAccess::Unknown),
            _ => Err(format!("unknown access condition '{}'", s.trim())),
        }
    }
}

/// Pipeline stage that wrote a field. Variants are declared in pipeline order
/// so the derived `Ord` is the stage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AugmentationStage {
    Ingest,
    Standardization,
    CitationAugmentation,
    TextMiningAugmentation,
    TopicClassification,
}

impl AugmentationStage {
    pub const ALL: [AugmentationStage; 5] = [
        AugmentationStage::Ingest,
        AugmentationStage::Standardization,
        AugmentationStage::CitationAugmentation,
        AugmentationStage::TextMiningAugmentation,
        AugmentationStage::TopicClassification,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AugmentationStage::Ingest => "Ingest",
            AugmentationStage::Standardization => "Standardization",
            AugmentationStage::CitationAugmentation => "CitationAugmentation",
            AugmentationStage::TextMiningAugmentation => "TextMiningAugmentation",
            AugmentationStage::TopicClassification => "TopicClassification",
        }
    }

    /// Short name used on the command line (`--stages standardize,citation`).
    pub fn cli_name(self) -> &'static str {
        match self {
            AugmentationStage::Ingest => "ingest",
            AugmentationStage::Standardization => "standardize",
            AugmentationStage::CitationAugmentation => "citation",
            AugmentationStage::TextMiningAugmentation => "textmine",
            AugmentationStage::TopicClassification => "topics",
        }
    }
}

impl fmt::Display for AugmentationStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugmentationStage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        AugmentationStage::ALL
            .into_iter()
            .find(|stage| stage.cli_name().eq_ignore_ascii_case(s) || stage.name() == s)
            .ok_or_else(|| format!("unknown stage '{s}'"))
    }
}

/// Emptiness as the schema sees it: whitespace-only text and lists holding
/// only blank entries count as absent.
pub trait Blank {
    fn is_blank(&self) -> bool;
}

impl Blank for String {
    fn is_blank(&self) -> bool {
        self.trim().is_empty()
    }
}

impl Blank for bool {
    fn is_blank(&self) -> bool {
        false
    }
}

impl<T: Blank> Blank for Option<T> {
    fn is_blank(&self) -> bool {
        self.as_ref().is_none_or(Blank::is_blank)
    }
}

impl<T: Blank> Blank for Vec<T> {
    fn is_blank(&self) -> bool {
        self.iter().all(Blank::is_blank)
    }
}

impl Blank for ConditionsOfAccess {
    fn is_blank(&self) -> bool {
        *self == ConditionsOfAccess::Unknown
    }
}

impl Blank for TermRef {
    fn is_blank(&self) -> bool {
        self.raw_text.is_blank() && self.curie.is_blank() && self.label.is_blank()
    }
}

impl Blank for Author {
    fn is_blank(&self) -> bool {
        self.name.is_blank()
    }
}

impl Blank for Funding {
    fn is_blank(&self) -> bool {
        self.identifier.is_blank() && self.funder.is_blank()
    }
}

impl Blank for Organization {
    fn is_blank(&self) -> bool {
        self.name.is_blank()
    }
}

impl Blank for DataCatalog {
    fn is_blank(&self) -> bool {
        self.name.is_blank()
    }
}

impl Blank for Distribution {
    fn is_blank(&self) -> bool {
        self.content_url.is_blank() && self.encoding_format.is_blank() && self.date_modified.is_blank()
    }
}

impl Blank for TemporalCoverage {
    fn is_blank(&self) -> bool {
        self.start.is_blank() && self.end.is_blank()
    }
}

impl Blank for Citation {
    fn is_blank(&self) -> bool {
        self.pmid.is_blank() && self.doi.is_blank() && self.name.is_blank()
    }
}

impl Blank for Link {
    fn is_blank(&self) -> bool {
        self.identifier.is_blank()
    }
}

/// Source repository row from the registry table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRegistryEntry {
    pub slug: String,
    pub name: String,
    #[serde(rename = "type")]
    pub source_type: String,
    pub research_domain: ResearchDomain,
    pub access: ConditionsOfAccess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResearchDomain {
    #[serde(rename = "IID")]
    Iid,
    Generalist,
    Unspecified,
}

impl FromStr for ResearchDomain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "IID" | "iid" => Ok(ResearchDomain::Iid),
            "Generalist" | "generalist" => Ok(ResearchDomain::Generalist),
            "-" | "" | "Unspecified" | "unspecified" => Ok(ResearchDomain::Unspecified),
            other => Err(format!("unknown research domain '{other}'")),
        }
    }
}
