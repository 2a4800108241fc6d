//! Generalist deposit records (Zenodo-style JSON).

use serde_json::Value;

use crate::model::{Author, ConditionsOfAccess, DataCatalog, HarmonizedDataset};

use super::{HarvestError, RawSourceDocument, SourceFormat};

fn text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) if !s.trim().is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Looks a key up at the top level first, then under `metadata`.
fn get<'a>(root: &'a Value, key: &str) -> Option<&'a Value> {
    root.get(key).filter(|v| !v.is_null()).or_else(|| root.get("metadata")?.get(key).filter(|v| !v.is_null()))
}

fn license(v: &Value) -> Option<String> {
    text(v).or_else(|| v.get("id").and_then(text)).or_else(|| v.get("title").and_then(text))
}

fn access(v: &str) -> ConditionsOfAccess {
    match v.trim().to_ascii_lowercase().as_str() {
        "open" => ConditionsOfAccess::Open,
        "restricted" | "closed" | "embargoed" => ConditionsOfAccess::Controlled,
        _ => ConditionsOfAccess::Unknown,
    }
}

/// Maps the commonly present deposit fields; everything else is left for
/// augmentation. Returns the native id with the record.
pub fn parse_generalist(doc: &RawSourceDocument, catalog_name: &str) -> Result<(String, HarmonizedDataset), HarvestError> {
    if doc.format != SourceFormat::StructuredRecord {
        return Err(HarvestError::Format { expected: SourceFormat::StructuredRecord, found: doc.format });
    }
    let root: Value = serde_json::from_slice(&doc.payload).map_err(|e| HarvestError::Json(e.to_string()))?;
    let native = get(&root, "id")
        .and_then(text)
        .or_else(|| get(&root, "recid").and_then(text))
        .ok_or_else(|| HarvestError::MissingId("id".into()))?;

    let mut record = HarmonizedDataset {
        name: get(&root, "title").and_then(text),
        description: get(&root, "description").and_then(text),
        doi: get(&root, "doi").and_then(text),
        license: get(&root, "license").and_then(license),
        date_published: get(&root, "publication_date").and_then(text),
        ..Default::default()
    };
    record.identifier = record.doi.clone();
    if let Some(Value::Array(creators)) = get(&root, "creators") {
        for c in creators {
            let name = c.get("name").and_then(text).or_else(|| text(c));
            if let Some(name) = name {
                record.author.push(Author { name, affiliation: c.get("affiliation").and_then(text) });
            }
        }
    }
    if let Some(Value::Array(kws)) = get(&root, "keywords") {
        record.keywords = kws.iter().filter_map(text).collect();
    }
    if let Some(a) = get(&root, "access_right").and_then(text) {
        record.conditions_of_access = access(&a);
    }
    record.url = root
        .pointer("/links/html")
        .and_then(text)
        .or_else(|| record.doi.as_ref().map(|doi| format!("https://doi.org/{doi}")));
    record.included_in_data_catalog = Some(DataCatalog { name: catalog_name.to_string(), url: None });
    Ok((native, record))
}
