//! Schema field registry: top-level fields with their tiers, the guarded
//! field writer that records provenance, and the flattened dotted-path
//! namespace used by queries, facets and mapping rules.

use std::fmt;
use std::str::FromStr;

use serde_json::Value;
use thiserror::Error;

use crate::model::{AugmentationStage, Blank, HarmonizedDataset, TermRef};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("unknown schema field '{0}'")]
    UnknownField(String),
    #[error("value for field '{field}' does not fit its type: {source}")]
    BadValue {
        field: &'static str,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tier {
    Required,
    Recommended,
    Optional,
}

macro_rules! schema_fields {
    ($( $variant:ident => $name:literal, $member:ident, $tier:ident; )*) => {
        /// A top-level field of [`HarmonizedDataset`] (excluding `_id` and
        /// `_provenance`, which are bookkeeping).
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Field {
            $( $variant, )*
        }

        impl Field {
            pub const ALL: &'static [Field] = &[ $( Field::$variant, )* ];

            pub fn name(self) -> &'static str {
                match self { $( Field::$variant => $name, )* }
            }

            pub fn tier(self) -> Tier {
                match self { $( Field::$variant => Tier::$tier, )* }
            }
        }

        impl FromStr for Field {
            type Err = SchemaError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $( $name => Ok(Field::$variant), )*
                    other => Err(SchemaError::UnknownField(other.to_string())),
                }
            }
        }

        impl HarmonizedDataset {
            /// Whether the field holds no value.
            pub fn is_field_empty(&self, field: Field) -> bool {
                match field { $( Field::$variant => self.$member.is_blank(), )* }
            }

            fn assign_json(&mut self, field: Field, value: Value) -> Result<(), SchemaError> {
                match field {
                    $( Field::$variant => {
                        self.$member = serde_json::from_value(value)
                            .map_err(|source| SchemaError::BadValue { field: $name, source })?;
                    } )*
                }
                Ok(())
            }

            fn json_is_blank(field: Field, value: &Value) -> Result<bool, SchemaError> {
                let mut probe = HarmonizedDataset::default();
                probe.assign_json(field, value.clone())?;
                Ok(probe.is_field_empty(field))
            }
        }
    };
}

schema_fields! {
    Name => "name", name, Required;
    Description => "description", description, Required;
    Identifier => "identifier", identifier, Required;
    Url => "url", url, Required;
    Author => "author", author, Required;
    Funding => "funding", funding, Required;
    MeasurementTechnique => "measurementTechnique", measurement_technique, Required;
    IncludedInDataCatalog => "includedInDataCatalog", included_in_data_catalog, Required;
    Distribution => "distribution", distribution, Required;
    HealthCondition => "healthCondition", health_condition, Recommended;
    InfectiousAgent => "infectiousAgent", infectious_agent, Recommended;
    Species => "species", species, Recommended;
    VariableMeasured => "variableMeasured", variable_measured, Recommended;
    Keywords => "keywords", keywords, Recommended;
    Doi => "doi", doi, Recommended;
    TemporalCoverage => "temporalCoverage", temporal_coverage, Recommended;
    SpatialCoverage => "spatialCoverage", spatial_coverage, Recommended;
    ConditionsOfAccess => "conditionsOfAccess", conditions_of_access, Recommended;
    License => "license", license, Recommended;
    UsageInfo => "usageInfo", usage_info, Recommended;
    SdPublisher => "sdPublisher", sd_publisher, Recommended;
    DateCreated => "dateCreated", date_created, Recommended;
    DateModified => "dateModified", date_modified, Recommended;
    DatePublished => "datePublished", date_published, Recommended;
    Citation => "citation", citation, Recommended;
    IsBasedOn => "isBasedOn", is_based_on, Recommended;
    CitedBy => "citedBy", cited_by, Recommended;
    HasPart => "hasPart", has_part, Optional;
    IsPartOf => "isPartOf", is_part_of, Optional;
    IsRelatedTo => "isRelatedTo", is_related_to, Optional;
    IsSimilarTo => "isSimilarTo", is_similar_to, Optional;
    SameAs => "sameAs", same_as, Optional;
    IsBasisFor => "isBasisFor", is_basis_for, Optional;
    Nctid => "nctid", nctid, Optional;
    Version => "version", version, Optional;
    Abstract => "abstract", abstract_text, Optional;
    IsAccessibleForFree => "isAccessibleForFree", is_accessible_for_free, Optional;
    SourceOrganization => "sourceOrganization", source_organization, Optional;
    TopicCategory => "topicCategory", topic_category, Optional;
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Field {
    /// Fields whose absence makes a record invalid. The remaining
    /// required-tier fields are reported as warnings because many sources
    /// (generalist deposits in particular) never provide them.
    pub const HARD_REQUIRED: [Field; 5] = [
        Field::Name,
        Field::Description,
        Field::Identifier,
        Field::Url,
        Field::IncludedInDataCatalog,
    ];

    pub fn is_term_list(self) -> bool {
        matches!(
            self,
            Field::MeasurementTechnique
                | Field::HealthCondition
                | Field::InfectiousAgent
                | Field::Species
                | Field::TopicCategory
        )
    }
}

impl HarmonizedDataset {
    /// Writes `value` into `field` if the write rules allow it, recording the
    /// writing stage in `_provenance`. Returns whether the value was written.
    ///
    /// A write happens when the field is currently empty, or when `stage` is
    /// `Standardization` and the current value came from `Ingest`. A blank
    /// value is never written over a non-empty one.
    pub fn set_field(
        &mut self,
        field: &str,
        value: Value,
        stage: AugmentationStage,
    ) -> Result<bool, SchemaError> {
        let field: Field = field.parse()?;
        let incoming_blank = Self::json_is_blank(field, &value)?;
        if !self.may_write(field, incoming_blank, stage) {
            return Ok(false);
        }
        self.assign_json(field, value)?;
        self.provenance.insert(field.name().to_string(), stage);
        Ok(true)
    }

    /// Typed variant of [`set_field`](Self::set_field) for term-list fields.
    pub fn set_terms(&mut self, field: Field, terms: Vec<TermRef>, stage: AugmentationStage) -> bool {
        assert!(field.is_term_list(), "{field} is not a term-list field");
        if !self.may_write(field, terms.is_blank(), stage) {
            return false;
        }
        match field {
            Field::MeasurementTechnique => self.measurement_technique = terms,
            Field::HealthCondition => self.health_condition = terms,
            Field::InfectiousAgent => self.infectious_agent = terms,
            Field::Species => self.species = terms,
            Field::TopicCategory => self.topic_category = terms,
            _ => unreachable!(),
        }
        self.provenance.insert(field.name().to_string(), stage);
        true
    }

    pub fn terms(&self, field: Field) -> &[TermRef] {
        match field {
            Field::MeasurementTechnique => &self.measurement_technique,
            Field::HealthCondition => &self.health_condition,
            Field::InfectiousAgent => &self.infectious_agent,
            Field::Species => &self.species,
            Field::TopicCategory => &self.topic_category,
            other => panic!("{other} is not a term-list field"),
        }
    }

    /// Stage that wrote the field; non-empty fields without an entry are
    /// treated as ingested.
    pub fn field_stage(&self, field: Field) -> Option<AugmentationStage> {
        if self.is_field_empty(field) {
            return None;
        }
        Some(self.provenance.get(field.name()).copied().unwrap_or(AugmentationStage::Ingest))
    }

    fn may_write(&self, field: Field, incoming_blank: bool, stage: AugmentationStage) -> bool {
        if incoming_blank {
            // Nothing to add; never erase.
            return false;
        }
        match self.field_stage(field) {
            None => true,
            Some(AugmentationStage::Ingest) => stage == AugmentationStage::Standardization,
            Some(_) => false,
        }
    }

    /// Marks every populated field as ingested.
    pub fn stamp_ingest(&mut self) {
        for &field in Field::ALL {
            if !self.is_field_empty(field) {
                self.provenance
                    .entry(field.name().to_string())
                    .or_insert(AugmentationStage::Ingest);
            } else {
                self.provenance.remove(field.name());
            }
        }
    }
}

/// Value shape of a flattened path, which decides which query operators
/// apply to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Text,
    Date,
}

type Extract = fn(&HarmonizedDataset, &mut Vec<String>);

/// A dotted path into the record (`funding.identifier`, `species.label`).
pub struct FieldPath {
    pub path: &'static str,
    pub kind: PathKind,
    extract: Extract,
}

impl FieldPath {
    /// Non-empty string values at this path, in record order.
    pub fn values(&self, record: &HarmonizedDataset) -> Vec<String> {
        let mut out = Vec::new();
        (self.extract)(record, &mut out);
        out.retain(|v| !v.trim().is_empty());
        out
    }
}

impl fmt::Debug for FieldPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldPath").field("path", &self.path).field("kind", &self.kind).finish()
    }
}

fn push_opt(out: &mut Vec<String>, v: &Option<String>) {
    if let Some(v) = v {
        out.push(v.clone());
    }
}

fn push_term_text(out: &mut Vec<String>, terms: &[TermRef]) {
    for t in terms {
        out.push(t.raw_text.clone());
        push_opt(out, &t.label);
        out.extend(t.synonyms.iter().cloned());
    }
}

fn push_term_label(out: &mut Vec<String>, terms: &[TermRef]) {
    out.extend(terms.iter().map(|t| t.display().to_string()));
}

fn push_term_curie(out: &mut Vec<String>, terms: &[TermRef]) {
    for t in terms {
        push_opt(out, &t.curie);
    }
}

macro_rules! paths {
    ($( $path:literal, $kind:ident, |$r:ident, $o:ident| $body:expr; )*) => {
        &[ $( FieldPath {
            path: $path,
            kind: PathKind::$kind,
            extract: { fn f($r: &HarmonizedDataset, $o: &mut Vec<String>) { $body; } f },
        }, )* ]
    };
}

/// The flattened field namespace.
///
/// Parent paths of term lists (`species`) cover raw text, label and
/// synonyms; `.label` falls back to raw text for unstandardized terms; link
/// lists (`isBasedOn`) expose their identifiers.
pub static FIELD_PATHS: &[FieldPath] = paths! {
    "_id", Text, |r, o| o.push(r.id.clone());
    "name", Text, |r, o| push_opt(o, &r.name);
    "description", Text, |r, o| push_opt(o, &r.description);
    "identifier", Text, |r, o| push_opt(o, &r.identifier);
    "url", Text, |r, o| push_opt(o, &r.url);
    "author", Text, |r, o| for a in &r.author { o.push(a.name.clone()); push_opt(o, &a.affiliation); };
    "author.name", Text, |r, o| o.extend(r.author.iter().map(|a| a.name.clone()));
    "author.affiliation", Text, |r, o| for a in &r.author { push_opt(o, &a.affiliation); };
    "funding", Text, |r, o| for f in &r.funding {
        push_opt(o, &f.identifier);
        if let Some(funder) = &f.funder { o.push(funder.name.clone()); }
    };
    "funding.identifier", Text, |r, o| for f in &r.funding { push_opt(o, &f.identifier); };
    "funding.funder.name", Text, |r, o| for f in &r.funding {
        if let Some(funder) = &f.funder { o.push(funder.name.clone()); }
    };
    "measurementTechnique", Text, |r, o| push_term_text(o, &r.measurement_technique);
    "measurementTechnique.label", Text, |r, o| push_term_label(o, &r.measurement_technique);
    "measurementTechnique.curie", Text, |r, o| push_term_curie(o, &r.measurement_technique);
    "includedInDataCatalog", Text, |r, o| if let Some(c) = &r.included_in_data_catalog {
        o.push(c.name.clone()); push_opt(o, &c.url);
    };
    "includedInDataCatalog.name", Text, |r, o| if let Some(c) = &r.included_in_data_catalog { o.push(c.name.clone()); };
    "includedInDataCatalog.url", Text, |r, o| if let Some(c) = &r.included_in_data_catalog { push_opt(o, &c.url); };
    "distribution", Text, |r, o| for d in &r.distribution {
        push_opt(o, &d.content_url); push_opt(o, &d.encoding_format); push_opt(o, &d.date_modified);
    };
    "distribution.contentUrl", Text, |r, o| for d in &r.distribution { push_opt(o, &d.content_url); };
    "distribution.encodingFormat", Text, |r, o| for d in &r.distribution { push_opt(o, &d.encoding_format); };
    "distribution.dateModified", Date, |r, o| for d in &r.distribution { push_opt(o, &d.date_modified); };
    "healthCondition", Text, |r, o| push_term_text(o, &r.health_condition);
    "healthCondition.label", Text, |r, o| push_term_label(o, &r.health_condition);
    "healthCondition.curie", Text, |r, o| push_term_curie(o, &r.health_condition);
    "infectiousAgent", Text, |r, o| push_term_text(o, &r.infectious_agent);
    "infectiousAgent.label", Text, |r, o| push_term_label(o, &r.infectious_agent);
    "infectiousAgent.curie", Text, |r, o| push_term_curie(o, &r.infectious_agent);
    "species", Text, |r, o| push_term_text(o, &r.species);
    "species.label", Text, |r, o| push_term_label(o, &r.species);
    "species.curie", Text, |r, o| push_term_curie(o, &r.species);
    "variableMeasured", Text, |r, o| o.extend(r.variable_measured.iter().cloned());
    "keywords", Text, |r, o| o.extend(r.keywords.iter().cloned());
    "doi", Text, |r, o| push_opt(o, &r.doi);
    "temporalCoverage", Date, |r, o| if let Some(t) = &r.temporal_coverage { push_opt(o, &t.start); push_opt(o, &t.end); };
    "temporalCoverage.start", Date, |r, o| if let Some(t) = &r.temporal_coverage { push_opt(o, &t.start); };
    "temporalCoverage.end", Date, |r, o| if let Some(t) = &r.temporal_coverage { push_opt(o, &t.end); };
    "spatialCoverage", Text, |r, o| o.extend(r.spatial_coverage.iter().map(|p| p.name.clone()));
    "spatialCoverage.name", Text, |r, o| o.extend(r.spatial_coverage.iter().map(|p| p.name.clone()));
    "conditionsOfAccess", Text, |r, o| o.push(r.conditions_of_access.as_str().to_string());
    "license", Text, |r, o| push_opt(o, &r.license);
    "usageInfo", Text, |r, o| push_opt(o, &r.usage_info);
    "sdPublisher", Text, |r, o| if let Some(p) = &r.sd_publisher { o.push(p.name.clone()); };
    "sdPublisher.name", Text, |r, o| if let Some(p) = &r.sd_publisher { o.push(p.name.clone()); };
    "dateCreated", Date, |r, o| push_opt(o, &r.date_created);
    "dateModified", Date, |r, o| push_opt(o, &r.date_modified);
    "datePublished", Date, |r, o| push_opt(o, &r.date_published);
    "citation", Text, |r, o| for c in &r.citation { push_opt(o, &c.pmid); push_opt(o, &c.doi); push_opt(o, &c.name); };
    "citation.pmid", Text, |r, o| for c in &r.citation { push_opt(o, &c.pmid); };
    "citation.doi", Text, |r, o| for c in &r.citation { push_opt(o, &c.doi); };
    "citation.name", Text, |r, o| for c in &r.citation { push_opt(o, &c.name); };
    "isBasedOn", Text, |r, o| o.extend(r.is_based_on.iter().map(|l| l.identifier.clone()));
    "citedBy", Text, |r, o| o.extend(r.cited_by.iter().map(|l| l.identifier.clone()));
    "hasPart", Text, |r, o| o.extend(r.has_part.iter().map(|l| l.identifier.clone()));
    "isPartOf", Text, |r, o| o.extend(r.is_part_of.iter().map(|l| l.identifier.clone()));
    "isRelatedTo", Text, |r, o| o.extend(r.is_related_to.iter().map(|l| l.identifier.clone()));
    "isSimilarTo", Text, |r, o| o.extend(r.is_similar_to.iter().map(|l| l.identifier.clone()));
    "sameAs", Text, |r, o| o.extend(r.same_as.iter().map(|l| l.identifier.clone()));
    "isBasisFor", Text, |r, o| o.extend(r.is_basis_for.iter().map(|l| l.identifier.clone()));
    "nctid", Text, |r, o| push_opt(o, &r.nctid);
    "version", Text, |r, o| push_opt(o, &r.version);
    "abstract", Text, |r, o| push_opt(o, &r.abstract_text);
    "isAccessibleForFree", Text, |r, o| if let Some(b) = r.is_accessible_for_free { o.push(b.to_string()); };
    "sourceOrganization", Text, |r, o| o.extend(r.source_organization.iter().map(|s| s.name.clone()));
    "sourceOrganization.name", Text, |r, o| o.extend(r.source_organization.iter().map(|s| s.name.clone()));
    "topicCategory", Text, |r, o| push_term_text(o, &r.topic_category);
    "topicCategory.label", Text, |r, o| push_term_label(o, &r.topic_category);
    "topicCategory.curie", Text, |r, o| push_term_curie(o, &r.topic_category);
};

pub fn field_path(path: &str) -> Option<&'static FieldPath> {
    FIELD_PATHS.iter().find(|p| p.path == path)
}
