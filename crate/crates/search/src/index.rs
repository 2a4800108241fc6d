//! Immutable inverted index: per-path positional postings, BM25 ranking and
//! disjunctive facet counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use harmonize_core::schema::{PathKind, FIELD_PATHS};
use harmonize_core::validate::normalize_date;
use harmonize_core::HarmonizedDataset;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::query::{to_canonical, QueryAst};
use crate::tokenize::{analyze, tokenize, words};

/// Paths searched by fieldless terms and phrases. Term-list parents carry
/// raw text, label and synonyms.
pub const FULL_TEXT_FIELDS: [&str; 10] = [
    "name",
    "description",
    "abstract",
    "keywords",
    "variableMeasured",
    "species",
    "infectiousAgent",
    "healthCondition",
    "measurementTechnique",
    "topicCategory",
];

pub const FACET_FIELDS: [&str; 8] = [
    "species.label",
    "infectiousAgent.label",
    "healthCondition.label",
    "measurementTechnique.label",
    "includedInDataCatalog.name",
    "conditionsOfAccess",
    "topicCategory.label",
    "funding.identifier",
];

pub const MAX_PAGE_SIZE: usize = 1000;

/// Positions skipped between the values of a multi-valued path, so phrases
/// never match across two values.
const VALUE_GAP: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub k1: f64,
    pub b: f64,
    /// Per-path score multipliers; paths not listed weigh 1.
    pub boosts: BTreeMap<String, f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            k1: 1.2,
            b: 0.75,
            boosts: BTreeMap::from([("name".to_string(), 3.0), ("keywords".to_string(), 2.0)]),
        }
    }
}

impl SearchConfig {
    fn boost(&self, path: &str) -> f64 {
        self.boosts.get(path).copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("duplicate _id '{0}'")]
    DuplicateId(String),
    #[error("unknown field '{0}'")]
    UnknownField(String),
    #[error("'{0}' is not a facet field")]
    NotFacetField(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("{0}")]
    OutOfRange(String),
}

/// An exact-value restriction on a facet field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Filter {
    pub field: String,
    pub value: String,
}

impl Filter {
    pub fn new(field: &str, value: &str) -> Filter {
        Filter { field: field.into(), value: value.into() }
    }

    /// `field:value`, split at the first colon.
    pub fn parse(text: &str) -> Option<Filter> {
        let (field, value) = text.split_once(':')?;
        let (field, value) = (field.trim(), value.trim());
        (!field.is_empty() && !value.is_empty()).then(|| Filter::new(field, value))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit {
    #[serde(rename = "_id")]
    pub id: String,
    pub record: HarmonizedDataset,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FacetCount {
    pub count: usize,
    pub field: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FacetResult {
    pub field: String,
    pub values: Vec<FacetCount>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRequest {
    pub query: QueryAst,
    pub filters: Vec<Filter>,
    pub facets: Vec<String>,
    pub from: usize,
    pub size: usize,
}

impl SearchRequest {
    pub fn new(query: QueryAst) -> Self {
        SearchRequest { query, filters: Vec::new(), facets: Vec::new(), from: 0, size: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResponse {
    pub facets: Vec<FacetResult>,
    pub hits: Vec<Hit>,
    pub query_echo: String,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Posting {
    doc: u32,
    positions: Vec<u32>,
}

struct PathIndex {
    postings: HashMap<String, Vec<Posting>>,
    lengths: Vec<u32>,
    avg_len: f64,
    present: FixedBitSet,
    /// Normalized dates per document, for date paths only.
    dates: Vec<Vec<String>>,
}

struct FacetIndex {
    values: Vec<String>,
    docs: Vec<Vec<u32>>,
    doc_values: Vec<Vec<u32>>,
    lookup: HashMap<String, u32>,
}

/// One path of one document after analysis.
#[derive(Default)]
struct AnalyzedPath {
    tokens: Vec<(String, Vec<u32>)>,
    length: u32,
    present: bool,
    dates: Vec<String>,
}

fn analyze_record(record: &HarmonizedDataset) -> Vec<AnalyzedPath> {
    FIELD_PATHS
        .iter()
        .map(|path| {
            let values = path.values(record);
            let mut tokens: BTreeMap<String, Vec<u32>> = BTreeMap::new();
            let mut next = 0u32;
            let mut length = 0u32;
            for v in &values {
                let analyzed = analyze(v, next);
                length += analyzed.len() as u32;
                for p in analyzed {
                    next = next.max(p.position + 1);
                    tokens.entry(p.token).or_default().push(p.position);
                }
                next += VALUE_GAP;
            }
            for positions in tokens.values_mut() {
                positions.sort_unstable();
            }
            let dates = if path.kind == PathKind::Date {
                values.iter().filter_map(|v| normalize_date(v)).collect()
            } else {
                Vec::new()
            };
            AnalyzedPath { tokens: tokens.into_iter().collect(), length, present: !values.is_empty(), dates }
        })
        .collect()
}

fn path_index(name: &str) -> Option<usize> {
    FIELD_PATHS.iter().position(|p| p.path == name)
}

pub fn build_index(corpus: &[HarmonizedDataset]) -> Result<SearchIndex, SearchError> {
    SearchIndex::build(corpus.to_vec(), SearchConfig::default())
}

pub struct SearchIndex {
    docs: Vec<HarmonizedDataset>,
    by_id: HashMap<String, u32>,
    paths: Vec<PathIndex>,
    facets: BTreeMap<&'static str, FacetIndex>,
    full_text: Vec<usize>,
    config: SearchConfig,
}

impl std::fmt::Debug for SearchIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SearchIndex").field("docs", &self.docs.len()).finish_non_exhaustive()
    }
}

impl SearchIndex {
    /// Ordinals follow `_id` order, so the result does not depend on input
    /// order or thread count.
    pub fn build(mut docs: Vec<HarmonizedDataset>, config: SearchConfig) -> Result<SearchIndex, SearchError> {
        docs.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = docs.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(SearchError::DuplicateId(w[0].id.clone()));
        }
        let n = docs.len();
        let analyzed: Vec<Vec<AnalyzedPath>> = docs.par_iter().map(analyze_record).collect();
        let paths: Vec<PathIndex> = (0..FIELD_PATHS.len())
            .into_par_iter()
            .map(|i| {
                let mut postings: HashMap<String, Vec<Posting>> = HashMap::new();
                let mut lengths = Vec::with_capacity(n);
                let mut present = FixedBitSet::with_capacity(n);
                let mut dates = Vec::new();
                let is_date = FIELD_PATHS[i].kind == PathKind::Date;
                for (doc, record) in analyzed.iter().enumerate() {
                    let a = &record[i];
                    lengths.push(a.length);
                    present.set(doc, a.present);
                    if is_date {
                        dates.push(a.dates.clone());
                    }
                    for (token, positions) in &a.tokens {
                        postings
                            .entry(token.clone())
                            .or_default()
                            .push(Posting { doc: doc as u32, positions: positions.clone() });
                    }
                }
                let total: u64 = lengths.iter().map(|&l| l as u64).sum();
                let avg_len = if n == 0 { 0.0 } else { total as f64 / n as f64 };
                PathIndex { postings, lengths, avg_len, present, dates }
            })
            .collect();
        drop(analyzed);
        let facets = FACET_FIELDS
            .iter()
            .map(|&name| {
                let path = harmonize_core::schema::field_path(name).expect("facet fields are schema paths");
                let per_doc: Vec<BTreeSet<String>> =
                    docs.par_iter().map(|d| path.values(d).into_iter().collect()).collect();
                let values: Vec<String> =
                    per_doc.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
                let lookup: HashMap<String, u32> =
                    values.iter().enumerate().map(|(i, v)| (v.clone(), i as u32)).collect();
                let mut value_docs = vec![Vec::new(); values.len()];
                let doc_values: Vec<Vec<u32>> = per_doc
                    .iter()
                    .enumerate()
                    .map(|(doc, vs)| {
                        vs.iter()
                            .map(|v| {
                                let id = lookup[v];
                                value_docs[id as usize].push(doc as u32);
                                id
                            })
                            .collect()
                    })
                    .collect();
                (name, FacetIndex { values, docs: value_docs, doc_values, lookup })
            })
            .collect();
        let by_id = docs.iter().enumerate().map(|(i, d)| (d.id.clone(), i as u32)).collect();
        let full_text = FULL_TEXT_FIELDS.iter().map(|f| path_index(f).expect("full-text fields are schema paths")).collect();
        Ok(SearchIndex { docs, by_id, paths, facets, full_text, config })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    /// Stored records in ordinal order.
    pub fn docs(&self) -> &[HarmonizedDataset] {
        &self.docs
    }

    pub fn get(&self, id: &str) -> Option<&HarmonizedDataset> {
        self.by_id.get(id).map(|&i| &self.docs[i as usize])
    }

    /// Documents posted for `token` under `path`, in ordinal order.
    pub fn posting_docs(&self, path: &str, token: &str) -> Vec<u32> {
        path_index(path)
            .and_then(|i| self.paths[i].postings.get(token))
            .map(|ps| ps.iter().map(|p| p.doc).collect())
            .unwrap_or_default()
    }

    fn empty_set(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.docs.len())
    }

    fn full_set(&self) -> FixedBitSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    fn docs_with_all(&self, path: usize, tokens: &[String]) -> FixedBitSet {
        let mut lists: Vec<&Vec<Posting>> = Vec::with_capacity(tokens.len());
        for t in tokens {
            match self.paths[path].postings.get(t) {
                Some(list) => lists.push(list),
                None => return self.empty_set(),
            }
        }
        lists.sort_by_key(|l| l.len());
        let mut out = self.empty_set();
        let Some((first, rest)) = lists.split_first() else { return out };
        for p in first.iter() {
            if rest.iter().all(|l| l.binary_search_by_key(&p.doc, |q| q.doc).is_ok()) {
                out.insert(p.doc as usize);
            }
        }
        out
    }

    fn docs_with_phrase(&self, path: usize, seq: &[String]) -> FixedBitSet {
        let mut out = self.empty_set();
        let mut lists = Vec::with_capacity(seq.len());
        for w in seq {
            match self.paths[path].postings.get(w) {
                Some(list) => lists.push(list),
                None => return out,
            }
        }
        'docs: for p in lists[0].iter() {
            let mut rest = Vec::with_capacity(lists.len() - 1);
            for l in &lists[1..] {
                match l.binary_search_by_key(&p.doc, |q| q.doc) {
                    Ok(i) => rest.push(&l[i].positions),
                    Err(_) => continue 'docs,
                }
            }
            let hit = p.positions.iter().any(|&start| {
                rest.iter().enumerate().all(|(k, ps)| ps.binary_search(&(start + k as u32 + 1)).is_ok())
            });
            if hit {
                out.insert(p.doc as usize);
            }
        }
        out
    }

    fn target_paths(&self, field: &Option<String>) -> Vec<usize> {
        match field {
            Some(f) => vec![path_index(f).expect("validated field")],
            None => self.full_text.clone(),
        }
    }

    fn eval(&self, ast: &QueryAst) -> FixedBitSet {
        match ast {
            QueryAst::MatchAll => self.full_set(),
            QueryAst::Term { field, text } => {
                let mut tokens = tokenize(text);
                tokens.sort();
                tokens.dedup();
                let mut out = self.empty_set();
                if tokens.is_empty() {
                    return out;
                }
                for p in self.target_paths(field) {
                    out.union_with(&self.docs_with_all(p, &tokens));
                }
                out
            }
            QueryAst::Phrase { field, text } => {
                let seq = words(text);
                let mut out = self.empty_set();
                if seq.is_empty() {
                    return out;
                }
                for p in self.target_paths(field) {
                    out.union_with(&self.docs_with_phrase(p, &seq));
                }
                out
            }
            QueryAst::Exists { field } => self.paths[path_index(field).expect("validated field")].present.clone(),
            QueryAst::Range { field, lo, hi } => {
                let path = &self.paths[path_index(field).expect("validated field")];
                let mut out = self.empty_set();
                for (doc, dates) in path.dates.iter().enumerate() {
                    let inside = dates.iter().any(|d| {
                        lo.as_deref().is_none_or(|l| d.as_str() >= l) && hi.as_deref().is_none_or(|h| d.as_str() <= h)
                    });
                    out.set(doc, inside);
                }
                out
            }
            QueryAst::And { children } => {
                let mut out = self.full_set();
                for c in children {
                    out.intersect_with(&self.eval(c));
                }
                out
            }
            QueryAst::Or { children } => {
                let mut out = self.empty_set();
                for c in children {
                    out.union_with(&self.eval(c));
                }
                out
            }
            QueryAst::Not { child } => {
                let mut out = self.eval(child);
                out.toggle_range(..);
                out
            }
        }
    }

    fn check_query(ast: &QueryAst) -> Result<(), SearchError> {
        fn fields<'a>(ast: &'a QueryAst, out: &mut Vec<&'a str>) {
            match ast {
                QueryAst::Term { field, .. } | QueryAst::Phrase { field, .. } => out.extend(field.as_deref()),
                QueryAst::Exists { field } | QueryAst::Range { field, .. } => out.push(field),
                QueryAst::And { children } | QueryAst::Or { children } => children.iter().for_each(|c| fields(c, out)),
                QueryAst::Not { child } => fields(child, out),
                QueryAst::MatchAll => {}
            }
        }
        let mut names = Vec::new();
        fields(ast, &mut names);
        if let Some(bad) = names.iter().find(|f| path_index(f).is_none()) {
            return Err(SearchError::UnknownField(bad.to_string()));
        }
        ast.validate().map_err(SearchError::InvalidQuery)
    }

    fn check_facet_field(name: &str) -> Result<&'static str, SearchError> {
        if let Some(f) = FACET_FIELDS.iter().find(|f| **f == name) {
            return Ok(f);
        }
        if path_index(name).is_none() {
            return Err(SearchError::UnknownField(name.into()));
        }
        Err(SearchError::NotFacetField(name.into()))
    }

    /// Per-field disjunction of the filter values.
    fn filter_sets(&self, filters: &[Filter]) -> Result<BTreeMap<&'static str, FixedBitSet>, SearchError> {
        let mut out: BTreeMap<&'static str, FixedBitSet> = BTreeMap::new();
        for f in filters {
            let field = Self::check_facet_field(&f.field)?;
            let set = out.entry(field).or_insert_with(|| self.empty_set());
            let facet = &self.facets[field];
            if let Some(&v) = facet.lookup.get(&f.value) {
                set.extend(facet.docs[v as usize].iter().map(|&d| d as usize));
            }
        }
        Ok(out)
    }

    fn scoring_terms(&self, ast: &QueryAst, out: &mut BTreeSet<(usize, String)>) {
        match ast {
            QueryAst::Term { field, text } => {
                for p in self.target_paths(field) {
                    out.extend(tokenize(text).into_iter().map(|t| (p, t)));
                }
            }
            QueryAst::Phrase { field, text } => {
                for p in self.target_paths(field) {
                    out.extend(words(text).into_iter().map(|t| (p, t)));
                }
            }
            QueryAst::And { children } | QueryAst::Or { children } => {
                children.iter().for_each(|c| self.scoring_terms(c, out))
            }
            QueryAst::Not { .. } | QueryAst::Exists { .. } | QueryAst::Range { .. } | QueryAst::MatchAll => {}
        }
    }

    /// BM25 over the non-negated terms, summed across their paths.
    fn scores(&self, ast: &QueryAst, candidates: &FixedBitSet) -> Vec<f64> {
        let mut scores = vec![0.0; self.docs.len()];
        let mut terms = BTreeSet::new();
        self.scoring_terms(ast, &mut terms);
        let n = self.docs.len() as f64;
        let SearchConfig { k1, b, .. } = self.config;
        for (p, token) in &terms {
            let path = &self.paths[*p];
            let Some(list) = path.postings.get(token) else { continue };
            let df = list.len() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            let weight = self.config.boost(FIELD_PATHS[*p].path) * idf;
            for posting in list {
                let doc = posting.doc as usize;
                if !candidates.contains(doc) {
                    continue;
                }
                let tf = posting.positions.len() as f64;
                let rel_len = if path.avg_len > 0.0 { path.lengths[doc] as f64 / path.avg_len } else { 0.0 };
                let norm = k1 * (1.0 - b + b * rel_len);
                scores[doc] += weight * tf * (k1 + 1.0) / (tf + norm);
            }
        }
        scores
    }

    fn count_facet(&self, field: &'static str, set: &FixedBitSet) -> FacetResult {
        let facet = &self.facets[field];
        let mut counts = vec![0usize; facet.values.len()];
        for doc in set.ones() {
            for &v in &facet.doc_values[doc] {
                counts[v as usize] += 1;
            }
        }
        let mut values: Vec<FacetCount> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, &count)| FacetCount { count, field: field.into(), value: facet.values[v].clone() })
            .collect();
        values.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.value.cmp(&b.value)));
        FacetResult { field: field.into(), values }
    }

    pub fn search(&self, req: &SearchRequest) -> Result<SearchResponse, SearchError> {
        Self::check_query(&req.query)?;
        if !(1..=MAX_PAGE_SIZE).contains(&req.size) {
            return Err(SearchError::OutOfRange(format!("size must be between 1 and {MAX_PAGE_SIZE}")));
        }
        let filter_sets = self.filter_sets(&req.filters)?;
        let facet_fields = req.facets.iter().map(|f| Self::check_facet_field(f)).collect::<Result<Vec<_>, _>>()?;

        let base = self.eval(&req.query);
        let mut candidates = base.clone();
        for set in filter_sets.values() {
            candidates.intersect_with(set);
        }
        let total = candidates.count_ones(..);

        let scores = self.scores(&req.query, &candidates);
        let mut ranked: Vec<u32> = candidates.ones().map(|d| d as u32).collect();
        let order = |a: &u32, b: &u32| scores[*b as usize].total_cmp(&scores[*a as usize]).then(a.cmp(b));
        let end = req.from.saturating_add(req.size).min(ranked.len());
        if end < ranked.len() && end > 0 {
            ranked.select_nth_unstable_by(end - 1, order);
            ranked.truncate(end);
        }
        ranked.sort_unstable_by(order);
        let hits = ranked
            .iter()
            .skip(req.from)
            .take(req.size)
            .map(|&d| {
                let record = self.docs[d as usize].clone();
                Hit { id: record.id.clone(), record, score: scores[d as usize] }
            })
            .collect();

        let facets = facet_fields
            .into_iter()
            .map(|field| {
                let mut set = base.clone();
                for (other, filter) in &filter_sets {
                    if *other != field {
                        set.intersect_with(filter);
                    }
                }
                self.count_facet(field, &set)
            })
            .collect();

        Ok(SearchResponse { facets, hits, query_echo: to_canonical(&req.query), total })
    }

    /// Ranked hits without facets.
    pub fn execute(
        &self,
        ast: &QueryAst,
        filters: &[Filter],
        from: usize,
        size: usize,
    ) -> Result<SearchResponse, SearchError> {
        self.search(&SearchRequest { query: ast.clone(), filters: filters.to_vec(), facets: Vec::new(), from, size })
    }

    /// Disjunctive counts: each field ignores its own filters.
    pub fn facet_counts(&self, ast: &QueryAst, filters: &[Filter], fields: &[&str]) -> Result<Vec<FacetResult>, SearchError> {
        let req = SearchRequest {
            query: ast.clone(),
            filters: filters.to_vec(),
            facets: fields.iter().map(|f| f.to_string()).collect(),
            from: 0,
            size: 1,
        };
        self.search(&req).map(|r| r.facets)
    }

    /// Recounts every stored document's tokens and facet values and checks
    /// them against the postings, plus the structural invariants. Returns
    /// the number of postings checked.
    pub fn verify(&self) -> Result<usize, String> {
        let n = self.docs.len();
        for (i, d) in self.docs.iter().enumerate() {
            if self.by_id.get(&d.id) != Some(&(i as u32)) {
                return Err(format!("store lookup for '{}' is not ordinal {i}", d.id));
            }
            if i > 0 && self.docs[i - 1].id >= d.id {
                return Err(format!("ordinals out of _id order at {i}"));
            }
        }
        let mut expected_postings = 0usize;
        for (i, path) in FIELD_PATHS.iter().enumerate() {
            let index = &self.paths[i];
            for list in index.postings.values() {
                if list.windows(2).any(|w| w[0].doc >= w[1].doc) || list.iter().any(|p| p.doc as usize >= n) {
                    return Err(format!("{}: postings not strictly ascending in range", path.path));
                }
            }
            for (doc, record) in self.docs.iter().enumerate() {
                let mut tf: BTreeMap<String, usize> = BTreeMap::new();
                let values = path.values(record);
                for v in &values {
                    for t in tokenize(v) {
                        *tf.entry(t).or_default() += 1;
                    }
                }
                if index.present.contains(doc) == values.is_empty() {
                    return Err(format!("{}: presence of doc {doc} wrong", path.path));
                }
                expected_postings += tf.len();
                for (token, count) in tf {
                    let found = index
                        .postings
                        .get(&token)
                        .and_then(|l| l.binary_search_by_key(&(doc as u32), |p| p.doc).ok().map(|k| l[k].positions.len()));
                    if found != Some(count) {
                        return Err(format!("{}: token '{token}' of doc {doc} posted {found:?}, counted {count}", path.path));
                    }
                }
            }
        }
        let actual: usize = self.paths.iter().flat_map(|p| p.postings.values()).map(Vec::len).sum();
        if actual != expected_postings {
            return Err(format!("{actual} postings stored, {expected_postings} counted"));
        }
        for (name, facet) in &self.facets {
            let path = harmonize_core::schema::field_path(name).expect("facet path");
            for (doc, record) in self.docs.iter().enumerate() {
                let want: BTreeSet<String> = path.values(record).into_iter().collect();
                let have: BTreeSet<String> =
                    facet.doc_values[doc].iter().map(|&v| facet.values[v as usize].clone()).collect();
                if want != have {
                    return Err(format!("{name}: facet values of doc {doc} differ"));
                }
            }
            if facet.docs.iter().flatten().any(|&d| d as usize >= n) {
                return Err(format!("{name}: facet set outside ordinal range"));
            }
        }
        Ok(actual)
    }
}
