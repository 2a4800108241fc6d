//! Data-driven mapping rules for structured sources.
//!
//! A rules file holds one rule per line, `source_path → target_field [Transform]`
//! (`->` also accepted), plus `@` directives:
//!
//! ```text
//! @native_id study.accession
//! @url_template https://example.org/study/{native_id}
//! study.title → name
//! study.conditions? → healthCondition [SplitList]
//! ```
//!
//! A trailing `?` marks a source path optional. JSON payloads are addressed
//! by dotted paths (arrays are flattened); line-oriented `!Key = value`
//! payloads by key.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    Author, Citation, DataCatalog, Distribution, Funding, HarmonizedDataset, Link, Organization, TemporalCoverage,
    TermRef,
};
use crate::schema::Field;
use crate::validate::normalize_date;

use super::{HarvestError, RawSourceDocument, SourceFormat};

#[derive(Debug, Error)]
#[error("rules {origin}:{line}: {message}")]
pub struct RulesError {
    pub origin: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    SplitList,
    DateNormalize,
    TermWrap,
}

impl FromStr for Transform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "identity" => Ok(Transform::Identity),
            "splitlist" | "split" => Ok(Transform::SplitList),
            "datenormalize" | "date" => Ok(Transform::DateNormalize),
            "termwrap" | "term" => Ok(Transform::TermWrap),
            _ => Err(format!("unknown transform '{}'", s.trim())),
        }
    }
}

/// Where a rule writes inside the record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Text(Field),
    Strings(Field),
    Terms(Field),
    Links(Field),
    Access,
    AccessibleForFree,
    AuthorName,
    AuthorAffiliation,
    FundingIdentifier,
    FunderName,
    CitationPmid,
    CitationDoi,
    CitationName,
    ContentUrl,
    EncodingFormat,
    DistributionDate,
    TemporalStart,
    TemporalEnd,
    SpatialCoverage,
    Publisher,
    SourceOrganization,
    CatalogName,
}

impl Target {
    pub fn parse(path: &str) -> Option<Target> {
        use Target::*;
        let t = match path {
            "author" | "author.name" => AuthorName,
            "author.affiliation" => AuthorAffiliation,
            "funding" | "funding.identifier" => FundingIdentifier,
            "funding.funder" | "funding.funder.name" => FunderName,
            "citation.pmid" => CitationPmid,
            "citation.doi" => CitationDoi,
            "citation.name" => CitationName,
            "distribution.contentUrl" => ContentUrl,
            "distribution.encodingFormat" => EncodingFormat,
            "distribution.dateModified" => DistributionDate,
            "temporalCoverage.start" => TemporalStart,
            "temporalCoverage.end" => TemporalEnd,
            "spatialCoverage" | "spatialCoverage.name" => SpatialCoverage,
            "sdPublisher" | "sdPublisher.name" => Publisher,
            "sourceOrganization" | "sourceOrganization.name" => SourceOrganization,
            "includedInDataCatalog" | "includedInDataCatalog.name" => CatalogName,
            "conditionsOfAccess" => Access,
            "isAccessibleForFree" => AccessibleForFree,
            other => {
                let base = other.strip_suffix(".identifier").unwrap_or(other);
                let field: Field = base.parse().ok()?;
                match field {
                    Field::Name
                    | Field::Description
                    | Field::Identifier
                    | Field::Url
                    | Field::Doi
                    | Field::License
                    | Field::UsageInfo
                    | Field::Nctid
                    | Field::Version
                    | Field::Abstract
                    | Field::DateCreated
                    | Field::DateModified
                    | Field::DatePublished
                        if base == other =>
                    {
                        Text(field)
                    }
                    Field::Keywords | Field::VariableMeasured if base == other => Strings(field),
                    f if f.is_term_list() && base == other => Terms(f),
                    Field::IsBasedOn
                    | Field::CitedBy
                    | Field::HasPart
                    | Field::IsPartOf
                    | Field::IsRelatedTo
                    | Field::IsSimilarTo
                    | Field::SameAs
                    | Field::IsBasisFor => Links(field),
                    _ => return None,
                }
            }
        };
        Some(t)
    }

    fn is_date(self) -> bool {
        matches!(
            self,
            Target::Text(Field::DateCreated | Field::DateModified | Field::DatePublished)
                | Target::DistributionDate
                | Target::TemporalStart
                | Target::TemporalEnd
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingRule {
    pub source_path: String,
    pub optional: bool,
    pub target_field: String,
    pub target: Target,
    pub transform: Transform,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub native_id_path: String,
    pub url_template: Option<String>,
    pub catalog: Option<String>,
    pub rules: Vec<MappingRule>,
}

impl fmt::Display for MappingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = if self.optional { "?" } else { "" };
        write!(f, "{}{opt} → {} [{:?}]", self.source_path, self.target_field, self.transform)
    }
}

impl RuleSet {
    pub fn load(path: &Path) -> Result<RuleSet, RulesError> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| RulesError { origin: origin.clone(), line: 0, message: e.to_string() })?;
        Self::parse(&origin, &text)
    }

    /// Parses and checks a rules file; any bad line fails the whole set.
    pub fn parse(origin: &str, text: &str) -> Result<RuleSet, RulesError> {
        let err = |line: usize, message: String| RulesError { origin: origin.to_string(), line, message };
        let mut native_id_path = None;
        let mut url_template = None;
        let mut catalog = None;
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            if let Some(directive) = l.strip_prefix('@') {
                let (key, value) = directive.split_once(char::is_whitespace).unwrap_or((directive, ""));
                let value = value.trim().to_string();
                if value.is_empty() {
                    return Err(err(line, format!("directive @{key} needs a value")));
                }
                match key {
                    "native_id" => native_id_path = Some(value),
                    "url_template" => url_template = Some(value),
                    "catalog" => catalog = Some(value),
                    other => return Err(err(line, format!("unknown directive @{other}"))),
                }
                continue;
            }
            let (source, rest) = l
                .split_once('→')
                .or_else(|| l.split_once("->"))
                .ok_or_else(|| err(line, "expected 'source_path → target_field [transform]'".into()))?;
            let mut parts = rest.split_whitespace();
            let target_field = parts.next().ok_or_else(|| err(line, "missing target field".into()))?.to_string();
            let transform_text: String = parts.collect::<Vec<_>>().join(" ");
            let transform_text = transform_text.trim().trim_start_matches('[').trim_end_matches(']');
            let transform = if transform_text.is_empty() {
                Transform::Identity
            } else {
                transform_text.parse().map_err(|e| err(line, e))?
            };
            let target = Target::parse(&target_field)
                .ok_or_else(|| err(line, format!("unknown target field '{target_field}'")))?;
            if transform == Transform::TermWrap && !matches!(target, Target::Terms(_)) {
                return Err(err(line, format!("TermWrap needs a term-list target, not {target_field}")));
            }
            if transform == Transform::DateNormalize && !target.is_date() {
                return Err(err(line, format!("DateNormalize needs a date target, not {target_field}")));
            }
            let source = source.trim();
            let (source_path, optional) = match source.strip_suffix('?') {
                Some(s) => (s.trim().to_string(), true),
                None => (source.to_string(), false),
            };
            if source_path.is_empty() {
                return Err(err(line, "empty source path".into()));
            }
            rules.push(MappingRule { source_path, optional, target_field, target, transform });
        }
        let native_id_path = native_id_path.ok_or_else(|| err(0, "missing @native_id directive".into()))?;
        Ok(RuleSet { native_id_path, url_template, catalog, rules })
    }
}

/// Field access into a structured payload.
enum Payload {
    Json(Value),
    Lines(Vec<(String, String)>),
}

fn json_leaves(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::String(s) => out.push(s.clone()),
        Value::Number(n) => out.push(n.to_string()),
        Value::Bool(b) => out.push(b.to_string()),
        Value::Array(items) => items.iter().for_each(|i| json_leaves(i, out)),
        Value::Null | Value::Object(_) => {}
    }
}

fn json_path<'a>(v: &'a Value, segments: &[&str], out: &mut Vec<&'a Value>) {
    match (v, segments.split_first()) {
        (Value::Array(items), _) => items.iter().for_each(|i| json_path(i, segments, out)),
        (_, None) => out.push(v),
        (Value::Object(map), Some((head, rest))) => {
            if let Some(child) = map.get(*head) {
                json_path(child, rest, out);
            }
        }
        _ => {}
    }
}

impl Payload {
    fn parse(doc: &RawSourceDocument) -> Result<Payload, HarvestError> {
        match doc.format {
            SourceFormat::StructuredRecord => serde_json::from_slice(&doc.payload)
                .map(Payload::Json)
                .map_err(|e| HarvestError::Json(e.to_string())),
            SourceFormat::StructuredText => {
                let text = std::str::from_utf8(&doc.payload).map_err(|e| HarvestError::Invalid(e.to_string()))?;
                let mut pairs = Vec::new();
                for (i, line) in text.lines().enumerate() {
                    let l = line.trim();
                    if l.is_empty() || l.starts_with('#') {
                        continue;
                    }
                    let (key, value) = l
                        .split_once('=')
                        .ok_or_else(|| HarvestError::Invalid(format!("line {}: expected 'key = value'", i + 1)))?;
                    pairs.push((key.trim().trim_start_matches(['!', '^']).to_string(), value.trim().to_string()));
                }
                Ok(Payload::Lines(pairs))
            }
            SourceFormat::Xml => Err(HarvestError::Format { expected: SourceFormat::StructuredRecord, found: doc.format }),
        }
    }

    fn values(&self, path: &str) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Payload::Json(root) => {
                let segments: Vec<&str> = path.split('.').collect();
                let mut nodes = Vec::new();
                json_path(root, &segments, &mut nodes);
                nodes.into_iter().for_each(|n| json_leaves(n, &mut out));
            }
            Payload::Lines(pairs) => {
                let key = path.trim_start_matches(['!', '^']);
                out.extend(pairs.iter().filter(|(k, _)| k == key).map(|(_, v)| v.clone()));
            }
        }
        out.retain(|v| !v.trim().is_empty());
        out
    }
}

/// Splits on `;` when present, otherwise on `,`.
pub fn split_list(value: &str) -> Vec<String> {
    let sep = if value.contains(';') { ';' } else { ',' };
    value.split(sep).map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

/// ISO dates plus the spellings repositories commonly export.
pub fn coerce_date(value: &str) -> Option<String> {
    let v = value.trim();
    if let Some(iso) = normalize_date(v) {
        return Some(iso);
    }
    const FORMATS: [&str; 8] =
        ["%Y/%m/%d", "%b %d %Y", "%b %d, %Y", "%B %d %Y", "%B %d, %Y", "%d-%b-%Y", "%d %b %Y", "%d %B %Y"];
    FORMATS
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(v, f).ok())
        .map(|d| d.format("%Y-%m-%d").to_string())
}

fn apply_transform(values: Vec<String>, transform: Transform) -> Vec<String> {
    match transform {
        Transform::Identity | Transform::TermWrap => values,
        Transform::SplitList => values.iter().flat_map(|v| split_list(v)).collect(),
        Transform::DateNormalize => values.into_iter().map(|v| coerce_date(&v).unwrap_or(v)).collect(),
    }
}

fn text_slot(r: &mut HarmonizedDataset, field: Field) -> &mut Option<String> {
    match field {
        Field::Name => &mut r.name,
        Field::Description => &mut r.description,
        Field::Identifier => &mut r.identifier,
        Field::Url => &mut r.url,
        Field::Doi => &mut r.doi,
        Field::License => &mut r.license,
        Field::UsageInfo => &mut r.usage_info,
        Field::Nctid => &mut r.nctid,
        Field::Version => &mut r.version,
        Field::Abstract => &mut r.abstract_text,
        Field::DateCreated => &mut r.date_created,
        Field::DateModified => &mut r.date_modified,
        Field::DatePublished => &mut r.date_published,
        other => unreachable!("{other} is not a text target"),
    }
}

fn links_slot(r: &mut HarmonizedDataset, field: Field) -> &mut Vec<Link> {
    match field {
        Field::IsBasedOn => &mut r.is_based_on,
        Field::CitedBy => &mut r.cited_by,
        Field::HasPart => &mut r.has_part,
        Field::IsPartOf => &mut r.is_part_of,
        Field::IsRelatedTo => &mut r.is_related_to,
        Field::IsSimilarTo => &mut r.is_similar_to,
        Field::SameAs => &mut r.same_as,
        Field::IsBasisFor => &mut r.is_basis_for,
        other => unreachable!("{other} is not a link target"),
    }
}

/// Writes `values[i]` into the i-th element, growing the list as needed.
fn fill<T: Default>(items: &mut Vec<T>, values: Vec<String>, mut set: impl FnMut(&mut T, String)) {
    for (i, v) in values.into_iter().enumerate() {
        if items.len() <= i {
            items.push(T::default());
        }
        set(&mut items[i], v);
    }
}

fn push_unique_str(items: &mut Vec<String>, values: Vec<String>) {
    for v in values {
        if !items.contains(&v) {
            items.push(v);
        }
    }
}

fn apply_target(r: &mut HarmonizedDataset, target: Target, values: Vec<String>) -> Result<(), HarvestError> {
    match target {
        Target::Text(field) => {
            let joined = matches!(field, Field::Description | Field::Abstract | Field::UsageInfo);
            let slot = text_slot(r, field);
            if slot.as_deref().is_none_or(|s| s.trim().is_empty()) {
                *slot = if joined { Some(values.join(" ")) } else { values.into_iter().next() };
            }
        }
        Target::Strings(Field::Keywords) => push_unique_str(&mut r.keywords, values),
        Target::Strings(_) => push_unique_str(&mut r.variable_measured, values),
        Target::Terms(field) => {
            let terms = match field {
                Field::MeasurementTechnique => &mut r.measurement_technique,
                Field::HealthCondition => &mut r.health_condition,
                Field::InfectiousAgent => &mut r.infectious_agent,
                Field::Species => &mut r.species,
                _ => &mut r.topic_category,
            };
            for v in values {
                if !terms.iter().any(|t| t.raw_text == v) {
                    terms.push(TermRef::raw(v));
                }
            }
        }
        Target::Links(field) => {
            let links = links_slot(r, field);
            for v in values {
                if !links.iter().any(|l| l.identifier == v) {
                    links.push(Link { identifier: v });
                }
            }
        }
        Target::Access => {
            if let Some(v) = values.first() {
                r.conditions_of_access = v.parse().map_err(HarvestError::Invalid)?;
            }
        }
        Target::AccessibleForFree => {
            if let Some(v) = values.first() {
                r.is_accessible_for_free = Some(match v.trim().to_ascii_lowercase().as_str() {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    other => return Err(HarvestError::Invalid(format!("'{other}' is not a boolean"))),
                });
            }
        }
        Target::AuthorName => {
            r.author.extend(values.into_iter().map(|name| Author { name, affiliation: None }));
        }
        Target::AuthorAffiliation => fill(&mut r.author, values, |a, v| a.affiliation = Some(v)),
        Target::FundingIdentifier => {
            for v in values {
                if !r.funding.iter().any(|f| f.identifier.as_deref() == Some(v.as_str())) {
                    r.funding.push(Funding::grant(v));
                }
            }
        }
        Target::FunderName => fill(&mut r.funding, values, |f, v| f.funder = Some(Organization { name: v })),
        Target::CitationPmid => {
            for v in values {
                if !r.citation.iter().any(|c| c.pmid.as_deref() == Some(v.as_str())) {
                    r.citation.push(Citation { pmid: Some(v), ..Default::default() });
                }
            }
        }
        Target::CitationDoi => fill(&mut r.citation, values, |c, v| c.doi = Some(v)),
        Target::CitationName => fill(&mut r.citation, values, |c, v| c.name = Some(v)),
        Target::ContentUrl => {
            r.distribution.extend(values.into_iter().map(|v| Distribution { content_url: Some(v), ..Default::default() }))
        }
        Target::EncodingFormat => fill(&mut r.distribution, values, |d, v| d.encoding_format = Some(v)),
        Target::DistributionDate => fill(&mut r.distribution, values, |d, v| d.date_modified = Some(v)),
        Target::TemporalStart | Target::TemporalEnd => {
            if let Some(v) = values.into_iter().next() {
                let tc = r.temporal_coverage.get_or_insert_with(TemporalCoverage::default);
                let slot = if target == Target::TemporalStart { &mut tc.start } else { &mut tc.end };
                slot.get_or_insert(v);
            }
        }
        Target::SpatialCoverage => r.spatial_coverage.extend(values.into_iter().map(|name| Organization { name })),
        Target::Publisher => {
            if let Some(name) = values.into_iter().next() {
                r.sd_publisher.get_or_insert(Organization { name });
            }
        }
        Target::SourceOrganization => {
            r.source_organization.extend(values.into_iter().map(|name| Organization { name }))
        }
        Target::CatalogName => {
            if let Some(name) = values.into_iter().next() {
                r.included_in_data_catalog.get_or_insert(DataCatalog { name, url: None });
            }
        }
    }
    Ok(())
}

/// Applies every rule in order. Returns the native id with the record.
pub fn parse_structured_source(
    doc: &RawSourceDocument,
    rules: &RuleSet,
) -> Result<(String, HarmonizedDataset), HarvestError> {
    let payload = Payload::parse(doc)?;
    let native = payload
        .values(&rules.native_id_path)
        .into_iter()
        .next()
        .ok_or_else(|| HarvestError::MissingId(rules.native_id_path.clone()))?;
    let mut record = HarmonizedDataset::default();
    for rule in &rules.rules {
        let values = payload.values(&rule.source_path);
        if values.is_empty() {
            if rule.optional {
                continue;
            }
            return Err(HarvestError::MissingPath(rule.source_path.clone()));
        }
        apply_target(&mut record, rule.target, apply_transform(values, rule.transform))?;
    }
    if record.url.is_none() {
        if let Some(template) = &rules.url_template {
            let identifier = record.identifier.clone().unwrap_or_else(|| native.clone());
            record.url = Some(template.replace("{native_id}", &native).replace("{identifier}", &identifier));
        }
    }
    if let Some(name) = &rules.catalog {
        record.included_in_data_catalog.get_or_insert(DataCatalog { name: name.clone(), url: None });
    }
    Ok((native, record))
}
