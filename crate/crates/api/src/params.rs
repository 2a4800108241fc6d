//! `/v1/query` parameter decoding. The raw query string is split by hand so
//! a literal comma separates filters while `%2C` stays inside a value.

use axum::http::StatusCode;
use harmonize_search::{Filter, FACET_FIELDS, MAX_PAGE_SIZE};
use percent_encoding::percent_decode_str;

use crate::error::ApiError;

pub const DEFAULT_SIZE: usize = 10;
pub const DEFAULT_FACET_SIZE: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryText {
    Basic(String),
    Advanced(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryParams {
    pub query: QueryText,
    pub filters: Vec<Filter>,
    pub facets: Vec<String>,
    pub facet_size: usize,
    pub from: usize,
    pub size: usize,
}

fn decode(raw: &str) -> Result<String, ApiError> {
    percent_decode_str(&raw.replace('+', " "))
        .decode_utf8()
        .map(|s| s.into_owned())
        .map_err(|_| ApiError::bad_parameter(format!("'{raw}' is not valid percent-encoded UTF-8")))
}

fn number(name: &str, raw: &str, lo: usize, hi: usize) -> Result<usize, ApiError> {
    let text = decode(raw)?;
    match text.trim().parse::<usize>() {
        Ok(n) if (lo..=hi).contains(&n) => Ok(n),
        _ => Err(ApiError::bad_parameter(format!("{name} must be an integer in {lo}..={hi}, got '{text}'"))),
    }
}

fn once(slot: &mut Option<String>, name: &str, value: String) -> Result<(), ApiError> {
    if slot.replace(value).is_some() {
        return Err(ApiError::bad_parameter(format!("{name} given more than once")));
    }
    Ok(())
}

impl QueryParams {
    pub fn parse(raw: &str) -> Result<QueryParams, ApiError> {
        let (mut q, mut advanced) = (None, None);
        let mut filters = Vec::new();
        let mut facets: Option<Vec<String>> = None;
        let (mut facet_size, mut from, mut size) = (DEFAULT_FACET_SIZE, 0, DEFAULT_SIZE);
        for pair in raw.split('&').filter(|p| !p.is_empty()) {
            let (key, value) = pair.split_once('=').unwrap_or((pair, ""));
            match decode(key)?.as_str() {
                "q" => once(&mut q, "q", decode(value)?)?,
                "advanced_query" => once(&mut advanced, "advanced_query", decode(value)?)?,
                "filters" => {
                    for piece in value.split(',').filter(|p| !p.is_empty()) {
                        let text = decode(piece)?;
                        let filter = Filter::parse(&text)
                            .ok_or_else(|| ApiError::bad_parameter(format!("filter '{text}' is not field:value")))?;
                        filters.push(filter);
                    }
                }
                "facets" => {
                    let list = facets.get_or_insert_with(Vec::new);
                    for piece in value.split(',').filter(|p| !p.is_empty()) {
                        list.push(decode(piece)?.trim().to_string());
                    }
                }
                "facet_size" => facet_size = number("facet_size", value, 1, 1000)?,
                "from" => from = number("from", value, 0, usize::MAX)?,
                "size" => size = number("size", value, 1, MAX_PAGE_SIZE)?,
                other => return Err(ApiError::bad_parameter(format!("unknown parameter '{other}'"))),
            }
        }
        let query = match (q, advanced) {
            (Some(_), Some(_)) => {
                return Err(ApiError::new(StatusCode::BAD_REQUEST, "conflicting_query", "give q or advanced_query, not both"))
            }
            (_, Some(a)) => QueryText::Advanced(a),
            (q, None) => QueryText::Basic(q.unwrap_or_default()),
        };
        let facets = facets.unwrap_or_else(|| FACET_FIELDS.iter().map(|f| f.to_string()).collect());
        Ok(QueryParams { query, filters, facets, facet_size, from, size })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let p = QueryParams::parse("").unwrap();
        assert_eq!(p.query, QueryText::Basic(String::new()));
        assert_eq!((p.from, p.size, p.facet_size), (0, 10, 10));
        assert_eq!(p.facets.len(), FACET_FIELDS.len());
    }

    #[test]
    fn filters_split_on_literal_commas_only() {
        let p = QueryParams::parse("filters=species.label:Homo%20sapiens,funding.identifier:A%2CB&filters=conditionsOfAccess:Open")
            .unwrap();
        assert_eq!(
            p.filters,
            [
                Filter::new("species.label", "Homo sapiens"),
                Filter::new("funding.identifier", "A,B"),
                Filter::new("conditionsOfAccess", "Open"),
            ]
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(QueryParams::parse("q=a&advanced_query=b").unwrap_err().code, "conflicting_query");
        assert_eq!(QueryParams::parse("size=0").unwrap_err().code, "invalid_parameter");
        assert_eq!(QueryParams::parse("size=1001").unwrap_err().code, "invalid_parameter");
        assert_eq!(QueryParams::parse("from=-1").unwrap_err().code, "invalid_parameter");
        assert_eq!(QueryParams::parse("filters=nocolon").unwrap_err().code, "invalid_parameter");
        assert_eq!(QueryParams::parse("filter=a:b").unwrap_err().code, "invalid_parameter");
    }

    #[test]
    fn empty_facets_parameter_requests_none() {
        assert!(QueryParams::parse("facets=").unwrap().facets.is_empty());
        assert_eq!(QueryParams::parse("facets=species.label").unwrap().facets, ["species.label"]);
    }
}
