//! Record validation and canonical form.

use std::fmt;
use std::sync::OnceLock;

use chrono::NaiveDate;
use regex::Regex;
use serde::Serialize;
use serde_json::Value;

use crate::model::{Blank, HarmonizedDataset, Ontology, TermRef};
use crate::schema::{Field, Tier};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IssueKind {
    RequiredEmpty,
    InvalidDate,
    DateOrder,
    InvalidUrl,
    InvalidCurie { curie: String },
    LabelMissing,
    OntologyMismatch,
    Missing,
    GrantShape { value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub field: String,
    #[serde(flatten)]
    pub kind: IssueKind,
}

impl Issue {
    fn new(field: impl Into<String>, kind: IssueKind) -> Self {
        Issue { field: field.into(), kind }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = &self.field;
        match &self.kind {
            IssueKind::RequiredEmpty => write!(f, "{field}: required, empty"),
            IssueKind::InvalidDate => write!(f, "{field}: invalid ISO-8601"),
            IssueKind::DateOrder => write!(f, "{field}: start is after end"),
            IssueKind::InvalidUrl => write!(f, "{field}: not an absolute URL"),
            IssueKind::InvalidCurie { curie } => write!(f, "{field}: malformed CURIE '{curie}'"),
            IssueKind::LabelMissing => write!(f, "{field}: label required when curie is present"),
            IssueKind::OntologyMismatch => {
                write!(f, "{field}: ontology must be present exactly when curie is")
            }
            IssueKind::Missing => write!(f, "{field} missing"),
            IssueKind::GrantShape { value } => {
                write!(f, "{field}: '{value}' does not look like an NIH grant number")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn error_strings(&self) -> Vec<String> {
        self.errors.iter().map(ToString::to_string).collect()
    }

    pub fn warning_strings(&self) -> Vec<String> {
        self.warnings.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.errors.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

fn curie_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z]+:[A-Za-z0-9._-]+$").unwrap())
}

fn grant_patterns() -> &'static [Regex; 2] {
    static RE: OnceLock<[Regex; 2]> = OnceLock::new();
    RE.get_or_init(|| {
        [
            // Full form: activity code, institute code, serial (R01AI123456, 1U19AI135995-01).
            Regex::new(r"^[0-9]?[A-Z0-9]{3}[A-Z]{2}[0-9]{6}").unwrap(),
            // Institute code and serial only (AI123456).
            Regex::new(r"^[A-Z]{2}[0-9]{6}$").unwrap(),
        ]
    })
}

/// Parses an ISO-8601 calendar date, full or partial, into `YYYY-MM-DD`.
/// Partial dates are padded to the first day; a trailing time part is
/// dropped.
pub fn normalize_date(text: &str) -> Option<String> {
    let text = text.trim();
    let date_part = match text.find(['T', ' ']) {
        Some(10) => &text[..10],
        Some(_) => return None,
        None => text,
    };
    let padded = match date_part.len() {
        4 if date_part.bytes().all(|b| b.is_ascii_digit()) => format!("{date_part}-01-01"),
        7 => format!("{date_part}-01"),
        10 => date_part.to_string(),
        _ => return None,
    };
    NaiveDate::parse_from_str(&padded, "%Y-%m-%d")
        .ok()
        .map(|d| d.format("%Y-%m-%d").to_string())
        .filter(|s| *s == padded)
}

fn check_terms(field: Field, terms: &[TermRef], errors: &mut Vec<Issue>) {
    for (i, term) in terms.iter().enumerate() {
        let at = format!("{}[{i}]", field.name());
        match &term.curie {
            Some(curie) => {
                if !curie_pattern().is_match(curie) {
                    errors.push(Issue::new(
                        format!("{at}.curie"),
                        IssueKind::InvalidCurie { curie: curie.clone() },
                    ));
                }
                if term.label.is_blank() {
                    errors.push(Issue::new(format!("{at}.label"), IssueKind::LabelMissing));
                }
                let consistent = matches!(
                    (term.ontology, Ontology::from_curie(curie)),
                    (Some(declared), Some(prefix)) if declared == prefix
                );
                if !consistent {
                    errors.push(Issue::new(format!("{at}.ontology"), IssueKind::OntologyMismatch));
                }
            }
            None => {
                if term.ontology.is_some() {
                    errors.push(Issue::new(format!("{at}.ontology"), IssueKind::OntologyMismatch));
                }
            }
        }
    }
}

fn check_date(field: &str, value: &Option<String>, errors: &mut Vec<Issue>) -> Option<String> {
    let text = value.as_deref()?;
    let parsed = normalize_date(text);
    if parsed.is_none() {
        errors.push(Issue::new(field, IssueKind::InvalidDate));
    }
    parsed
}

/// Checks a record against the schema tiers and value invariants.
/// Problems are collected, never raised.
pub fn validate_record(record: &HarmonizedDataset) -> ValidationReport {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    if record.id.is_blank() {
        errors.push(Issue::new("_id", IssueKind::RequiredEmpty));
    }
    for field in Field::HARD_REQUIRED {
        if record.is_field_empty(field) {
            errors.push(Issue::new(field.name(), IssueKind::RequiredEmpty));
        }
    }

    if let Some(url) = record.url.as_deref().filter(|u| !u.trim().is_empty()) {
        let absolute = url::Url::parse(url.trim()).map(|u| u.has_host()).unwrap_or(false);
        if !absolute {
            errors.push(Issue::new("url", IssueKind::InvalidUrl));
        }
    }

    check_date("dateCreated", &record.date_created, &mut errors);
    check_date("dateModified", &record.date_modified, &mut errors);
    check_date("datePublished", &record.date_published, &mut errors);
    for (i, dist) in record.distribution.iter().enumerate() {
        check_date(&format!("distribution[{i}].dateModified"), &dist.date_modified, &mut errors);
    }
    if let Some(tc) = &record.temporal_coverage {
        let start = check_date("temporalCoverage.start", &tc.start, &mut errors);
        let end = check_date("temporalCoverage.end", &tc.end, &mut errors);
        if let (Some(start), Some(end)) = (start, end) {
            if start > end {
                errors.push(Issue::new("temporalCoverage", IssueKind::DateOrder));
            }
        }
    }

    for &field in Field::ALL.iter().filter(|f| f.is_term_list()) {
        check_terms(field, record.terms(field), &mut errors);
    }

    for &field in Field::ALL {
        let tier = field.tier();
        let soft_required = tier == Tier::Required && !Field::HARD_REQUIRED.contains(&field);
        if (soft_required || tier == Tier::Recommended) && record.is_field_empty(field) {
            warnings.push(Issue::new(field.name(), IssueKind::Missing));
        }
    }
    for grant in record.funding.iter().filter_map(|f| f.identifier.as_deref()) {
        let grant = grant.trim();
        if !grant.is_empty() && !grant_patterns().iter().any(|re| re.is_match(grant)) {
            warnings.push(Issue::new(
                "funding.identifier",
                IssueKind::GrantShape { value: grant.to_string() },
            ));
        }
    }

    ValidationReport { errors, warnings }
}

/// Trims and collapses internal whitespace.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Collapses whitespace in every string, then drops empty strings, empty
/// arrays and empty objects so that absent and blank values share one form.
fn canonical_value(value: Value) -> Option<Value> {
    match value {
        Value::String(s) => {
            let s = collapse_whitespace(&s);
            (!s.is_empty()).then_some(Value::String(s))
        }
        Value::Array(items) => {
            let items: Vec<Value> = items.into_iter().filter_map(canonical_value).collect();
            (!items.is_empty()).then_some(Value::Array(items))
        }
        Value::Object(map) => {
            let map: serde_json::Map<String, Value> = map
                .into_iter()
                .filter_map(|(k, v)| canonical_value(v).map(|v| (k, v)))
                .collect();
            (!map.is_empty()).then_some(Value::Object(map))
        }
        other => Some(other),
    }
}

fn dedup_case_insensitive(items: &mut Vec<String>) {
    let mut seen = std::collections::HashSet::new();
    items.retain(|item| seen.insert(item.to_lowercase()));
}

fn normalize_date_field(value: &mut Option<String>) {
    if let Some(date) = value.as_deref().and_then(normalize_date) {
        *value = Some(date);
    }
}

/// Produces the canonical form of a valid record. Records with validation
/// errors are rejected with their report.
pub fn canonicalize_record(record: &HarmonizedDataset) -> Result<HarmonizedDataset, ValidationReport> {
    let report = validate_record(record);
    if !report.is_valid() {
        return Err(report);
    }
    let value = serde_json::to_value(record).expect("records always serialize");
    let value = canonical_value(value).unwrap_or(Value::Object(Default::default()));
    let mut out: HarmonizedDataset =
        serde_json::from_value(value).expect("canonical form keeps the record shape");

    dedup_case_insensitive(&mut out.keywords);
    normalize_date_field(&mut out.date_created);
    normalize_date_field(&mut out.date_modified);
    normalize_date_field(&mut out.date_published);
    for dist in &mut out.distribution {
        normalize_date_field(&mut dist.date_modified);
    }
    if let Some(tc) = &mut out.temporal_coverage {
        normalize_date_field(&mut tc.start);
        normalize_date_field(&mut tc.end);
    }
    let stale: Vec<String> = out
        .provenance
        .keys()
        .filter(|name| name.parse::<Field>().map_or(true, |f| out.is_field_empty(f)))
        .cloned()
        .collect();
    for name in stale {
        out.provenance.remove(&name);
    }
    Ok(out)
}
