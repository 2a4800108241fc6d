//! Test support: synthetic records, random queries and a per-document
//! evaluator that shares nothing with the index beyond the tokenizer.

use std::collections::{BTreeMap, BTreeSet};

use harmonize_core::model::{Author, DataCatalog, Funding, TemporalCoverage};
use harmonize_core::schema::{field_path, PathKind};
use harmonize_core::validate::normalize_date;
use harmonize_core::{ConditionsOfAccess, HarmonizedDataset, TermRef};
use harmonize_search::{tokenize, words, Filter, QueryAst, FULL_TEXT_FIELDS};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const WORDS: &[&str] = &[
    "zika", "virus", "influenza", "host", "response", "rna", "seq", "proteomics", "human", "mouse", "cell",
    "immune", "malaria", "cohort", "gut", "microbiome", "tick", "dengue", "serum", "assay", "homo", "sapiens",
];

pub const SPECIES: &[&str] = &["Homo sapiens", "Mus musculus", "Macaca mulatta", "Aedes aegypti"];
pub const AGENTS: &[&str] = &["Zika virus", "Plasmodium falciparum", "Influenza A virus", "Dengue virus"];
pub const CONDITIONS: &[&str] = &["Zika fever", "malaria", "influenza", "dengue disease"];
pub const TECHNIQUES: &[&str] = &["Proteomics", "RNA-seq", "Flow cytometry", "ELISA"];
pub const CATALOGS: &[&str] = &["NCBI SRA", "ImmPort", "Zenodo", "VEuPathDB"];
pub const GRANTS: &[&str] = &["AI123456", "U19AI090023", "R01AI000001"];
pub const TOPICS: &[&str] = &["Proteomics", "Virology", "Immunology"];

/// Paths the generators put in fielded atoms.
pub const QUERY_FIELDS: &[&str] = &[
    "name", "description", "keywords", "species", "species.label", "infectiousAgent.label", "healthCondition",
    "measurementTechnique.label", "funding.identifier", "includedInDataCatalog.name", "conditionsOfAccess",
    "author.name", "topicCategory",
];

pub const DATE_FIELDS: &[&str] = &["datePublished", "dateCreated", "temporalCoverage.start", "temporalCoverage"];

fn phrase(rng: &mut impl Rng, min: usize, max: usize) -> String {
    let n = rng.random_range(min..=max);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let w = *WORDS.choose(rng).unwrap();
        let w = if rng.random_bool(0.15) { format!("{w}-{}", WORDS.choose(rng).unwrap()) } else { w.to_string() };
        out.push(if rng.random_bool(0.2) { capitalize(&w) } else { w });
    }
    out.join(" ")
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

fn date(rng: &mut impl Rng) -> String {
    format!("{}-{:02}-{:02}", rng.random_range(2015..=2023), rng.random_range(1..=12), rng.random_range(1..=28))
}

fn terms(rng: &mut impl Rng, pool: &[&str], max: usize) -> Vec<TermRef> {
    let n = rng.random_range(0..=max);
    (0..n)
        .map(|_| {
            let text = *pool.choose(rng).unwrap();
            let mut t = TermRef::raw(if rng.random_bool(0.3) { text.to_lowercase() } else { text.to_string() });
            if rng.random_bool(0.5) {
                t.label = Some(text.to_string());
            }
            if rng.random_bool(0.2) {
                t.synonyms = vec![phrase(rng, 1, 2)];
            }
            t
        })
        .collect()
}

/// A record shaped like harvested data, drawing from small pools so random
/// queries and filters hit often.
pub fn random_record(rng: &mut impl Rng, n: usize) -> HarmonizedDataset {
    let id = format!("syn_{n:07}");
    let mut r = HarmonizedDataset {
        id: id.clone(),
        name: Some(phrase(rng, 2, 6)),
        description: Some(phrase(rng, 5, 24)),
        identifier: Some(id.clone()),
        url: Some(format!("https://example.org/{id}")),
        included_in_data_catalog: Some(DataCatalog { name: CATALOGS.choose(rng).unwrap().to_string(), url: None }),
        ..Default::default()
    };
    r.keywords = (0..rng.random_range(0..=3)).map(|_| phrase(rng, 1, 2)).collect();
    r.species = terms(rng, SPECIES, 2);
    r.infectious_agent = terms(rng, AGENTS, 2);
    r.health_condition = terms(rng, CONDITIONS, 1);
    r.measurement_technique = terms(rng, TECHNIQUES, 2);
    r.topic_category = terms(rng, TOPICS, 1);
    if rng.random_bool(0.4) {
        r.funding = vec![Funding::grant(*GRANTS.choose(rng).unwrap())];
    }
    if rng.random_bool(0.5) {
        r.author = vec![Author { name: phrase(rng, 2, 2), affiliation: None }];
    }
    if rng.random_bool(0.6) {
        r.date_published = Some(date(rng));
    }
    if rng.random_bool(0.3) {
        r.date_created = Some(date(rng));
    }
    if rng.random_bool(0.3) {
        let (a, b) = (date(rng), date(rng));
        let (start, end) = if a <= b { (a, b) } else { (b, a) };
        r.temporal_coverage = Some(TemporalCoverage { start: Some(start), end: Some(end) });
    }
    r.conditions_of_access = *[
        ConditionsOfAccess::Open,
        ConditionsOfAccess::Registered,
        ConditionsOfAccess::Controlled,
        ConditionsOfAccess::Unknown,
    ]
    .choose(rng)
    .unwrap();
    r
}

pub fn random_corpus(rng: &mut impl Rng, n: usize) -> Vec<HarmonizedDataset> {
    (0..n).map(|i| random_record(rng, i)).collect()
}

/// Text shape of generated atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomText {
    /// Words from the corpus vocabulary.
    Searchable,
    /// Arbitrary characters, including syntax and reserved words.
    Adversarial,
}

const AWKWARD: &[&str] = &["AND", "OR", "NOT", "*", "TO", "_exists_", "a b", "x:y", "(", ")", "[1]", "\"", "\\", "é", "and", "-"];

fn adversarial_text(rng: &mut impl Rng) -> String {
    if rng.random_bool(0.3) {
        return AWKWARD.choose(rng).unwrap().to_string();
    }
    let alphabet: Vec<char> = "abcXYZ09 ():[]\"\\*-_é\t".chars().collect();
    let n = rng.random_range(1..=8);
    (0..n).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

fn atom_text(rng: &mut impl Rng, style: AtomText, phrase_words: bool) -> String {
    match style {
        AtomText::Searchable if phrase_words => phrase(rng, 1, 3),
        AtomText::Searchable => {
            let w = phrase(rng, 1, 1);
            if rng.random_bool(0.1) { format!("{w} {}", phrase(rng, 1, 1)) } else { w }
        }
        AtomText::Adversarial => adversarial_text(rng),
    }
}

fn field(rng: &mut impl Rng) -> Option<String> {
    if rng.random_bool(0.5) { None } else { Some(QUERY_FIELDS.choose(rng).unwrap().to_string()) }
}

fn random_leaf(rng: &mut impl Rng, style: AtomText) -> QueryAst {
    match rng.random_range(0..10) {
        0..=3 => QueryAst::Term { field: field(rng), text: atom_text(rng, style, false) },
        4..=5 => QueryAst::Phrase { field: field(rng), text: atom_text(rng, style, true) },
        6 => QueryAst::exists(QUERY_FIELDS.choose(rng).unwrap()),
        7 | 8 => {
            let field = DATE_FIELDS.choose(rng).unwrap().to_string();
            let (a, b) = (date(rng), date(rng));
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            let lo = rng.random_bool(0.8).then_some(a);
            let hi = rng.random_bool(0.8).then_some(b);
            QueryAst::Range { field, lo, hi }
        }
        _ => QueryAst::MatchAll,
    }
}

/// A valid AST of at most `depth` levels.
pub fn random_ast(rng: &mut impl Rng, depth: usize, style: AtomText) -> QueryAst {
    if depth <= 1 || rng.random_bool(0.3) {
        return random_leaf(rng, style);
    }
    match rng.random_range(0..3) {
        0 => QueryAst::and((0..rng.random_range(2..=3)).map(|_| random_ast(rng, depth - 1, style)).collect()),
        1 => QueryAst::or((0..rng.random_range(2..=3)).map(|_| random_ast(rng, depth - 1, style)).collect()),
        _ => QueryAst::not(random_ast(rng, depth - 1, style)),
    }
}

/// Filters on facet values present in the corpus, occasionally one that is
/// not.
pub fn random_filters(rng: &mut impl Rng, corpus: &[HarmonizedDataset]) -> Vec<Filter> {
    let pools: [(&str, &[&str]); 5] = [
        ("species.label", SPECIES),
        ("infectiousAgent.label", AGENTS),
        ("measurementTechnique.label", TECHNIQUES),
        ("includedInDataCatalog.name", CATALOGS),
        ("funding.identifier", GRANTS),
    ];
    let mut out = Vec::new();
    for _ in 0..rng.random_range(0..=3) {
        let (field, pool) = *pools.choose(rng).unwrap();
        let value = if rng.random_bool(0.1) {
            "no such value".to_string()
        } else if rng.random_bool(0.5) && !corpus.is_empty() {
            let r = corpus.choose(rng).unwrap();
            field_path(field).unwrap().values(r).first().cloned().unwrap_or_else(|| pool[0].to_string())
        } else {
            pool.choose(rng).unwrap().to_string()
        };
        out.push(Filter::new(field, &value));
    }
    out
}

fn values(record: &HarmonizedDataset, field: &str) -> Vec<String> {
    field_path(field).unwrap_or_else(|| panic!("unknown path {field}")).values(record)
}

fn searched(field: &Option<String>) -> Vec<&str> {
    match field {
        Some(f) => vec![f.as_str()],
        None => FULL_TEXT_FIELDS.to_vec(),
    }
}

/// Brute-force boolean evaluation of one record.
pub fn naive_matches(record: &HarmonizedDataset, ast: &QueryAst) -> bool {
    match ast {
        QueryAst::MatchAll => true,
        QueryAst::Term { field, text } => {
            let wanted: BTreeSet<String> = tokenize(text).into_iter().collect();
            !wanted.is_empty()
                && searched(field).iter().any(|f| {
                    let have: BTreeSet<String> = values(record, f).iter().flat_map(|v| tokenize(v)).collect();
                    wanted.is_subset(&have)
                })
        }
        QueryAst::Phrase { field, text } => {
            let wanted = words(text);
            !wanted.is_empty()
                && searched(field).iter().any(|f| {
                    values(record, f).iter().any(|v| words(v).windows(wanted.len()).any(|w| w == wanted.as_slice()))
                })
        }
        QueryAst::Exists { field } => !values(record, field).is_empty(),
        QueryAst::Range { field, lo, hi } => {
            assert_eq!(field_path(field).unwrap().kind, PathKind::Date);
            values(record, field).iter().filter_map(|v| normalize_date(v)).any(|d| {
                lo.as_ref().is_none_or(|l| &d >= l) && hi.as_ref().is_none_or(|h| &d <= h)
            })
        }
        QueryAst::And { children } => children.iter().all(|c| naive_matches(record, c)),
        QueryAst::Or { children } => children.iter().any(|c| naive_matches(record, c)),
        QueryAst::Not { child } => !naive_matches(record, child),
    }
}

/// Filters grouped by field, OR within a field, AND across; `skip` drops
/// one field's filters.
pub fn naive_filters(record: &HarmonizedDataset, filters: &[Filter], skip: Option<&str>) -> bool {
    let mut by_field: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for f in filters {
        by_field.entry(f.field.as_str()).or_default().push(f.value.as_str());
    }
    by_field
        .iter()
        .filter(|(field, _)| Some(**field) != skip)
        .all(|(field, wanted)| values(record, field).iter().any(|v| wanted.contains(&v.as_str())))
}

/// `_id`s of the matching records, sorted.
pub fn naive_hits(corpus: &[HarmonizedDataset], ast: &QueryAst, filters: &[Filter]) -> Vec<String> {
    let mut ids: Vec<String> = corpus
        .iter()
        .filter(|r| naive_matches(r, ast) && naive_filters(r, filters, None))
        .map(|r| r.id.clone())
        .collect();
    ids.sort();
    ids
}

/// Disjunctive facet recount as (value, count), ordered by count desc then
/// value.
pub fn naive_facet(corpus: &[HarmonizedDataset], ast: &QueryAst, filters: &[Filter], field: &str) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for r in corpus.iter().filter(|r| naive_matches(r, ast) && naive_filters(r, filters, Some(field))) {
        for v in values(r, field).into_iter().collect::<BTreeSet<_>>() {
            *counts.entry(v).or_default() += 1;
        }
    }
    let mut out: Vec<_> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}
