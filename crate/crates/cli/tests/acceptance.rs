//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS or FAIL line, and the process exits non-zero if
//! any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use harmonize_api::{router, AppState, Snapshot};
use harmonize_core::augment::{
    audit_citation_soundness, delineate_host_pathogen, hierarchical_agreement, map_health_condition, run_pipeline,
    standardize_organism, AnnotationStore, CoverageReport, KeywordClassifier, PipelineInputs, PublicationAnnotations,
};
use harmonize_core::corpus::{read_corpus, to_ndjson, write_corpus};
use harmonize_core::lexicon::{CorrectionsList, Lexicons, OntologyLexicon, OntologyTerm};
use harmonize_core::model::{Citation, DataCatalog, Funding};
use harmonize_core::registry::Registry;
use harmonize_core::{AugmentationStage, Classification, HarmonizedDataset, Ontology, TermRef};
use harmonize_search::{
    build_index, parse_advanced, parse_basic, to_canonical, Filter, QueryAst, SearchConfig, SearchRequest, FACET_FIELDS,
};
use harmonize_testkit::{naive_facet, naive_hits, random_ast, random_corpus, random_filters, AtomText};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tower::ServiceExt;

// Pinned thresholds.
const ZIKA_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_TRIALS: usize = 200;
const ORACLE_MAX_RECORDS: usize = 1_000;
const ORACLE_MAX_DEPTH: usize = 4;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const ROUND_TRIPS: usize = 1_000;
const MONOTONE_CORPORA: usize = 50;
const AGREEMENT_TOLERANCE: f64 = 1e-12;
const JACCARD_PAIRS: usize = 100;
const PERF_RECORDS: usize = 100_000;
const PERF_BUILD_BUDGET: Duration = Duration::from_secs(60);
const PERF_QUERIES: usize = 1_000;
const PERF_P95_BUDGET: Duration = Duration::from_millis(50);
const SERVICE_QUERIES: usize = 1_000;
const SERVICE_RELOADS: usize = 5;

type Outcome = Result<String, String>;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture_corpus() -> Vec<HarmonizedDataset> {
    read_corpus(&fixtures().join("corpus/fixture25.ndjson")).expect("fixture corpus")
}

struct Inputs {
    lexicons: Lexicons,
    annotations: AnnotationStore,
    corrections: CorrectionsList,
    classifier: KeywordClassifier,
}

impl Inputs {
    fn load() -> Inputs {
        let lexicons = Lexicons::load_dir(&fixtures().join("lexicons")).expect("lexicons");
        let classifier = KeywordClassifier::new(lexicons.topic_rules.clone(), lexicons.ontologies.clone());
        Inputs {
            annotations: AnnotationStore::load_dir(&fixtures().join("annotations")).expect("annotations"),
            corrections: CorrectionsList::load(&fixtures().join("corrections.tsv")).expect("corrections"),
            lexicons,
            classifier,
        }
    }

    fn with_store<'a>(&'a self, store: &'a AnnotationStore) -> PipelineInputs<'a> {
        PipelineInputs {
            lexicons: Some(&self.lexicons),
            annotations: Some(store),
            corrections: Some(&self.corrections),
            classifier: Some(&self.classifier),
        }
    }

    fn pipeline(&self) -> PipelineInputs<'_> {
        self.with_store(&self.annotations)
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

// ---- Zika scenario ----

fn zika_scenario() -> Outcome {
    let start = Instant::now();
    let index = build_index(&fixture_corpus()).map_err(|e| e.to_string())?;
    let req = SearchRequest {
        query: parse_basic("Zika virus").map_err(|e| e.to_string())?,
        filters: vec![
            Filter::new("species.label", "Homo sapiens"),
            Filter::new("measurementTechnique.label", "Proteomics"),
        ],
        ..SearchRequest::new(QueryAst::MatchAll)
    };
    let resp = index.search(&req).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let ids: Vec<&str> = resp.hits.iter().map(|h| h.id.as_str()).collect();
    ensure(resp.total == 1 && ids == ["massive_MSV000090001"], || format!("got total {} hits {ids:?}", resp.total))?;
    ensure(elapsed < ZIKA_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("1 hit massive_MSV000090001 in {elapsed:?}"))
}

// ---- search oracle ----

fn search_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EA2C4);
    let mut compared = 0usize;
    for trial in 0..ORACLE_TRIALS {
        let n = rng.random_range(0..=ORACLE_MAX_RECORDS);
        let corpus = random_corpus(&mut rng, n);
        let index = build_index(&corpus).map_err(|e| e.to_string())?;
        let ast = random_ast(&mut rng, ORACLE_MAX_DEPTH, AtomText::Searchable);
        let filters = random_filters(&mut rng, &corpus);
        let req = SearchRequest {
            query: ast.clone(),
            filters: filters.clone(),
            facets: FACET_FIELDS.iter().map(|f| f.to_string()).collect(),
            size: 1000,
            ..SearchRequest::new(QueryAst::MatchAll)
        };
        let resp = index.search(&req).map_err(|e| format!("trial {trial}: {e}"))?;
        let mut got: Vec<String> = resp.hits.iter().map(|h| h.id.clone()).collect();
        got.sort();
        let want = naive_hits(&corpus, &ast, &filters);
        ensure(resp.total == want.len() && (want.len() > 1000 || got == want), || {
            format!("trial {trial}: hits differ for {} (got {}, want {})", resp.query_echo, resp.total, want.len())
        })?;
        for facet in &resp.facets {
            let got: Vec<(String, usize)> = facet.values.iter().map(|c| (c.value.clone(), c.count)).collect();
            ensure(got == naive_facet(&corpus, &ast, &filters, &facet.field), || {
                format!("trial {trial}: facet {} differs for {}", facet.field, resp.query_echo)
            })?;
            compared += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{ORACLE_TRIALS} trials, {compared} facet tables, 0 discrepancies in {elapsed:?}"))
}

// ---- query round trip ----

fn query_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0A57);
    for i in 0..ROUND_TRIPS {
        let style = if i % 2 == 0 { AtomText::Adversarial } else { AtomText::Searchable };
        let ast = random_ast(&mut rng, 5, style);
        let text = to_canonical(&ast);
        match parse_advanced(&text) {
            Ok(back) if back == ast => {}
            Ok(back) => return Err(format!("{text} reparsed as {}", to_canonical(&back))),
            Err(e) => return Err(format!("{text}: {e}")),
        }
    }
    Ok(format!("{ROUND_TRIPS} ASTs, 0 failures"))
}

// ---- synthetic pipeline corpora ----

/// Surface-form pairs that name the same taxon.
const SYNONYM_PAIRS: &[(&str, &str)] = &[
    ("Homo sapiens", "human"),
    ("Mus musculus", "house mouse"),
    ("Zika virus", "ZIKV"),
    ("Human immunodeficiency virus 1", "HIV-1"),
    ("Severe acute respiratory syndrome coronavirus 2", "SARS-CoV-2"),
    ("Aedes aegypti", "Stegomyia aegypti"),
    ("Escherichia coli", "E. coli"),
    ("Danio rerio", "zebrafish"),
];
const OTHER_ORGANISMS: &[&str] =
    &["Plasmodium falciparum", "Aspergillus fumigatus", "Methanobrevibacter smithii", "unidentified critter"];
const CONDITIONS: &[&str] = &["asthma", "flu", "influenza", "tuberculosis", "TB", "Zika fever", "sepsis", "odd malaise"];
const PHRASES: &[&str] = &[
    "patients with asthma", "Zika virus", "human immunodeficiency virus", "Homo sapiens", "a cat", "all samples",
    "influenza", "cerebrospinal fluid", "tuberculosis", "mouse model", "RNA-Seq", "dengue", "nothing", "E. coli",
    "pneumonia", "proteomics of serum",
];
const KEYWORDS: &[&str] = &["proteomics", "RNA-Seq", "microarray", "ELISA", "misc"];
const GRANTS: &[&str] = &["AI123456", "R01AI000001", "U19AI000002"];
const PMIDS: &[&str] = &["401", "402", "403", "404", "999"];

fn sample<'a, T>(rng: &mut impl Rng, pool: &'a [T], count: std::ops::RangeInclusive<usize>) -> impl Iterator<Item = &'a T> {
    let n = rng.random_range(count);
    pool.choose_multiple(rng, n)
}

fn synthetic_store(rng: &mut impl Rng) -> AnnotationStore {
    let diseases = ["asthma", "influenza", "tuberculosis", "dengue", "flu", "pneumonia", "Zika virus infection"];
    let organisms = ["Homo sapiens", "human", "mouse", "Zika virus", "cat", "E. coli", "human immunodeficiency virus"];
    PMIDS[..4]
        .iter()
        .map(|pmid| PublicationAnnotations {
            pmid: pmid.to_string(),
            diseases: sample(rng, &diseases, 0..=3).map(|s| s.to_string()).collect(),
            organisms: sample(rng, &organisms, 0..=3).map(|s| s.to_string()).collect(),
            grants: sample(rng, GRANTS, 0..=2).map(|s| s.to_string()).collect(),
        })
        .collect()
}

/// A raw, ingest-stage corpus in which both members of some synonym pairs
/// appear on different records.
fn synthetic_pipeline_corpus(rng: &mut impl Rng) -> (Vec<HarmonizedDataset>, usize) {
    let planted: Vec<(&str, &str)> = sample(rng, SYNONYM_PAIRS, 1..=4).copied().collect();
    let n = rng.random_range(20..=60);
    let corpus = (0..n)
        .map(|i| {
            let id = format!("mono_{i:04}");
            let words: Vec<&str> = (0..rng.random_range(2..6)).map(|_| *PHRASES.choose(rng).unwrap()).collect();
            let mut r = HarmonizedDataset {
                id: id.clone(),
                name: Some(words[0].to_string()),
                description: Some(words[1..].join(". ")),
                identifier: Some(id.clone()),
                url: Some(format!("https://example.org/{id}")),
                included_in_data_catalog: Some(DataCatalog { name: "Synthetic".into(), url: None }),
                ..Default::default()
            };
            let (a, b) = planted[i % planted.len()];
            if i < 2 * planted.len() {
                r.species.push(TermRef::raw(if i < planted.len() { a } else { b }));
            }
            for _ in 0..rng.random_range(0..3) {
                let org = if rng.random_bool(0.6) {
                    let (x, y) = *SYNONYM_PAIRS.choose(rng).unwrap();
                    if rng.random_bool(0.5) { x } else { y }
                } else {
                    *OTHER_ORGANISMS.choose(rng).unwrap()
                };
                r.species.push(TermRef::raw(org));
            }
            r.health_condition = sample(rng, CONDITIONS, 0..=2).map(|c| TermRef::raw(*c)).collect();
            r.keywords = sample(rng, KEYWORDS, 0..=2).map(|k| k.to_string()).collect();
            r.funding = sample(rng, GRANTS, 0..=1).map(|g| Funding::grant(*g)).collect();
            if rng.random_bool(0.5) {
                r.citation.push(Citation { pmid: Some(PMIDS.choose(rng).unwrap().to_string()), ..Default::default() });
            }
            r.stamp_ingest();
            harmonize_core::canonicalize_record(&r).expect("synthetic record is valid")
        })
        .collect();
    (corpus, planted.len())
}

const ALL_STAGES: [AugmentationStage; 4] = [
    AugmentationStage::Standardization,
    AugmentationStage::CitationAugmentation,
    AugmentationStage::TextMiningAugmentation,
    AugmentationStage::TopicClassification,
];
const MONOTONE_FIELDS: [&str; 4] = ["species", "infectiousAgent", "healthCondition", "funding.identifier"];

fn pipeline_monotonicity(inputs: &Inputs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3070);
    let mut merged = 0;
    for trial in 0..MONOTONE_CORPORA {
        let (corpus, _) = synthetic_pipeline_corpus(&mut rng);
        let store = synthetic_store(&mut rng);
        let (_, report): (_, CoverageReport) =
            run_pipeline(&corpus, &ALL_STAGES, &inputs.with_store(&store)).map_err(|e| e.to_string())?;
        ensure(report.columns.len() == 5, || format!("trial {trial}: {} columns", report.columns.len()))?;
        for w in report.columns.windows(2) {
            for f in MONOTONE_FIELDS {
                let (before, after) = (w[0].records_with_field[f], w[1].records_with_field[f]);
                ensure(before <= after, || format!("trial {trial}: {f} fell {before} -> {after} at {:?}", w[1].stage))?;
            }
        }
        let (raw, standard) = (report.columns[0].distinct_values["species"], report.columns[1].distinct_values["species"]);
        ensure(standard <= raw, || format!("trial {trial}: distinct species rose {raw} -> {standard}"))?;
        if standard < raw {
            merged += 1;
        }
    }
    ensure(merged > 0, || "planted synonyms never merged".to_string())?;
    Ok(format!("{MONOTONE_CORPORA} corpora, 0 violations, distinct species shrank in {merged}"))
}

// ---- cascade ----

const CASCADE: [(Ontology, &str); 4] = [
    (Ontology::Mondo, "MONDO:9100001"),
    (Ontology::Hpo, "HP:9100001"),
    (Ontology::Doid, "DOID:9100001"),
    (Ontology::Ncit, "NCIT:C9100001"),
];

fn cascade_conformance(inputs: &Inputs) -> Outcome {
    let label = "quixotic fever";
    for mask in 1u8..16 {
        let mut terms: Vec<OntologyTerm> = inputs.lexicons.ontologies.terms().cloned().collect();
        terms.extend(CASCADE.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, (o, c))| OntologyTerm {
            curie: c.to_string(),
            label: label.to_string(),
            synonyms: vec![],
            ontology: *o,
            parents: vec![],
        }));
        let onto = OntologyLexicon::from_terms(terms).map_err(|e| e.to_string())?;
        let winner = CASCADE[(0..4).find(|i| mask & (1 << i) != 0).unwrap()];

        let direct = map_health_condition(&TermRef::raw("Quixotic Fever"), &onto);
        ensure(direct.curie.as_deref() == Some(winner.1), || format!("mask {mask:04b}: mapped to {:?}", direct.curie))?;

        let lexicons = Lexicons { ontologies: onto, ..inputs.lexicons.clone() };
        let mut r = HarmonizedDataset {
            id: "cascade_1".into(),
            name: Some("n".into()),
            description: Some("d".into()),
            identifier: Some("cascade_1".into()),
            url: Some("https://example.org/c".into()),
            included_in_data_catalog: Some(DataCatalog { name: "Test".into(), url: None }),
            health_condition: vec![TermRef::raw("quixotic  FEVER")],
            ..Default::default()
        };
        r.stamp_ingest();
        let inp = PipelineInputs { lexicons: Some(&lexicons), ..Default::default() };
        let (out, _) = run_pipeline(&[r], &[AugmentationStage::Standardization], &inp).map_err(|e| e.to_string())?;
        let got = out[0].health_condition.first().and_then(|t| t.curie.clone());
        ensure(got.as_deref() == Some(winner.1), || format!("mask {mask:04b}: pipeline produced {got:?}"))?;
    }
    Ok("15 presence subsets, 0 violations".into())
}

// ---- delineation ----

fn delineation_table(inputs: &Inputs) -> Outcome {
    let lex = &inputs.lexicons;
    let text = std::fs::read_to_string(fixtures().join("golden/delineation.tsv")).map_err(|e| e.to_string())?;
    let mut rows = 0;
    let mut wrong = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split('\t').collect();
        let expected: Classification = cells[2].parse().map_err(|_| format!("bad label {}", cells[2]))?;
        let by_id = TermRef { curie: Some(format!("NCBITaxon:{}", cells[0])), ..TermRef::raw(cells[1]) };
        let by_name = standardize_organism(&TermRef::raw(cells[1]), &lex.taxonomy);
        for term in [by_id, by_name] {
            match delineate_host_pathogen(&term, &lex.taxonomy, &lex.overrides) {
                Ok(got) if got == expected => {}
                other => wrong.push(format!("{} -> {other:?}", cells[1])),
            }
        }
        rows += 1;
    }
    ensure(wrong.is_empty(), || format!("disagreements: {wrong:?}"))?;
    ensure(rows >= 30, || format!("only {rows} rows"))?;
    for (name, want) in [("Homo sapiens", Classification::Host), ("SARS-CoV-2", Classification::Pathogen)] {
        let term = standardize_organism(&TermRef::raw(name), &lex.taxonomy);
        let got = delineate_host_pathogen(&term, &lex.taxonomy, &lex.overrides);
        ensure(got == Ok(want), || format!("anchor {name}: {got:?}"))?;
    }
    Ok(format!("{rows} taxa, 100% agreement, anchors hold"))
}

// ---- citation soundness ----

fn plain_words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(String::from)
        .collect()
}

fn mentioned(haystack: &[String], needle: &str) -> bool {
    let needle = plain_words(needle);
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle.as_slice())
}

fn citation_violations(corpus: &[HarmonizedDataset]) -> Vec<String> {
    let mut bad = Vec::new();
    for r in corpus {
        let text = plain_words(&format!("{} {}", r.name.as_deref().unwrap_or(""), r.description.as_deref().unwrap_or("")));
        for (field, terms) in
            [("species", &r.species), ("infectiousAgent", &r.infectious_agent), ("healthCondition", &r.health_condition)]
        {
            if r.provenance.get(field) == Some(&AugmentationStage::CitationAugmentation) {
                bad.extend(terms.iter().filter(|t| !mentioned(&text, &t.raw_text)).map(|t| format!("{} {field} {}", r.id, t.raw_text)));
            }
        }
    }
    bad
}

fn citation_soundness(inputs: &Inputs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC17E);
    let mut outputs = vec![run_pipeline(&fixture_corpus(), &ALL_STAGES, &inputs.pipeline()).map_err(|e| e.to_string())?.0];
    for _ in 0..MONOTONE_CORPORA {
        let (corpus, _) = synthetic_pipeline_corpus(&mut rng);
        let store = synthetic_store(&mut rng);
        outputs.push(run_pipeline(&corpus, &ALL_STAGES, &inputs.with_store(&store)).map_err(|e| e.to_string())?.0);
    }
    let mut citation_values = 0;
    for out in &outputs {
        let own = citation_violations(out);
        let audit = audit_citation_soundness(out);
        ensure(own.is_empty() && audit.is_empty(), || format!("violations: {own:?} audit: {audit:?}"))?;
        citation_values += out
            .iter()
            .flat_map(|r| {
                [("species", r.species.len()), ("infectiousAgent", r.infectious_agent.len()), ("healthCondition", r.health_condition.len())]
                    .into_iter()
                    .filter(|(f, _)| r.provenance.get(*f) == Some(&AugmentationStage::CitationAugmentation))
                    .map(|(_, n)| n)
            })
            .sum::<usize>();
    }
    ensure(citation_values > 0, || "no citation-derived values to audit".into())?;
    Ok(format!("{} corpora, {citation_values} citation-derived values, 0 violations", outputs.len()))
}

// ---- idempotence ----

fn idempotence(inputs: &Inputs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1D3);
    let mut corpora = vec![(fixture_corpus(), None)];
    for _ in 0..20 {
        let (corpus, _) = synthetic_pipeline_corpus(&mut rng);
        corpora.push((corpus, Some(synthetic_store(&mut rng))));
    }
    for (i, (corpus, store)) in corpora.iter().enumerate() {
        let inp = match store {
            Some(s) => inputs.with_store(s),
            None => inputs.pipeline(),
        };
        let (once, _) = run_pipeline(corpus, &ALL_STAGES, &inp).map_err(|e| e.to_string())?;
        let (twice, _) = run_pipeline(&once, &ALL_STAGES, &inp).map_err(|e| e.to_string())?;
        ensure(to_ndjson(&once) == to_ndjson(&twice), || format!("corpus {i} changed on second pass"))?;
    }
    Ok(format!("{} corpora byte-identical after a second pass", corpora.len()))
}

// ---- hierarchical agreement ----

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn agreement(inputs: &Inputs) -> Outcome {
    let edam = &inputs.lexicons.ontologies;
    let score = |p: &BTreeSet<String>, g: &BTreeSet<String>, o: &OntologyLexicon| {
        hierarchical_agreement(p, g, o).map_err(|e| e.to_string())
    };
    for s in [set(&["EDAM:topic_3170"]), set(&["EDAM:topic_3170", "EDAM:topic_0121"]), set(&[])] {
        let v = score(&s, &s, edam)?;
        ensure(v == 1.0, || format!("identity {s:?} gave {v}"))?;
    }
    let v = score(&set(&["EDAM:topic_0121"]), &set(&["EDAM:topic_0804"]), edam)?;
    ensure(v == 0.0, || format!("unrelated singletons gave {v}"))?;
    let v = score(&set(&["EDAM:topic_3308"]), &set(&["EDAM:topic_3170"]), edam)?;
    ensure((v - 0.5).abs() <= AGREEMENT_TOLERANCE, || format!("parent/child gave {v}"))?;

    let terms = (0..12)
        .map(|i| OntologyTerm {
            curie: format!("EDAM:topic_{:04}", 9000 + i),
            label: format!("flat {i}"),
            synonyms: vec![],
            ontology: Ontology::Edam,
            parents: vec![],
        })
        .collect();
    let flat = OntologyLexicon::from_terms(terms).map_err(|e| e.to_string())?;
    let pool: Vec<String> = flat.terms().map(|t| t.curie.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ACC);
    for _ in 0..JACCARD_PAIRS {
        let mut pick = || -> BTreeSet<String> { pool.iter().filter(|_| rng.random_bool(0.4)).cloned().collect() };
        let (p, g) = (pick(), pick());
        let union = p.union(&g).count();
        let jaccard = if union == 0 { 1.0 } else { p.intersection(&g).count() as f64 / union as f64 };
        let v = score(&p, &g, &flat)?;
        ensure((v - jaccard).abs() <= AGREEMENT_TOLERANCE, || format!("{p:?} vs {g:?}: {v} != {jaccard}"))?;
    }
    Ok(format!("identity 1.0, disjoint 0.0, parent/child 0.5, {JACCARD_PAIRS} flat pairs equal Jaccard"))
}

// ---- performance ----

fn percentile(sorted: &[Duration], p: f64) -> Duration {
    sorted[((sorted.len() as f64 * p).ceil() as usize).saturating_sub(1).min(sorted.len() - 1)]
}

fn performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9E4F);
    let corpus = random_corpus(&mut rng, PERF_RECORDS);
    let start = Instant::now();
    let index = build_index(&corpus).map_err(|e| e.to_string())?;
    let build = start.elapsed();
    ensure(build < PERF_BUILD_BUDGET, || format!("build took {build:?}"))?;

    let mut latencies = Vec::with_capacity(PERF_QUERIES);
    for i in 0..PERF_QUERIES {
        let query = match i % 4 {
            0 => parse_basic(&harmonize_testkit::WORDS.choose_multiple(&mut rng, 2).cloned().collect::<Vec<_>>().join(" "))
                .map_err(|e| e.to_string())?,
            _ => random_ast(&mut rng, 3, AtomText::Searchable),
        };
        let req = SearchRequest {
            query,
            filters: random_filters(&mut rng, &[]),
            facets: FACET_FIELDS.iter().map(|f| f.to_string()).collect(),
            from: if i % 10 == 0 { 20 } else { 0 },
            ..SearchRequest::new(QueryAst::MatchAll)
        };
        let t = Instant::now();
        index.search(&req).map_err(|e| e.to_string())?;
        latencies.push(t.elapsed());
    }
    latencies.sort();
    let p95 = percentile(&latencies, 0.95);
    ensure(p95 < PERF_P95_BUDGET, || format!("p95 {p95:?}"))?;
    Ok(format!("{PERF_RECORDS} records built in {build:?}; p50 {:?}, p95 {p95:?}", percentile(&latencies, 0.5)))
}

// ---- service determinism and atomicity ----

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn strip(mut v: Value, keys: &[&str]) -> Value {
    if let Some(o) = v.as_object_mut() {
        for k in keys {
            o.remove(*k);
        }
    }
    v
}

const SERVICE_URIS: &[&str] = &[
    "/v1/query?q=",
    "/v1/query?q=virus&size=5",
    "/v1/query?q=Zika%20virus&filters=species.label:Homo%20sapiens",
    "/v1/query?advanced_query=_exists_:funding.identifier%20OR%20name:cohort&facets=funding.identifier",
    "/v1/query?q=proteomics&from=3&size=2&facet_size=3",
];

fn loaded(corpus: &Path) -> Arc<AppState> {
    let state = AppState::new(Registry::bundled(), SearchConfig::default(), true);
    state.install(Snapshot::load(state.next_generation(), corpus, None, state.search_config()).expect("snapshot"));
    state
}

async fn service(dir: &Path) -> Outcome {
    let fixture = fixtures().join("corpus/fixture25.ndjson");
    let other = dir.join("synthetic.ndjson");
    write_corpus(&other, &random_corpus(&mut ChaCha8Rng::seed_from_u64(0x5E4), 3_000)).map_err(|e| e.to_string())?;

    // Reference bodies per corpus, computed on quiet snapshots.
    let mut expected: BTreeMap<usize, Vec<Value>> = BTreeMap::new();
    for (records, path) in [(25usize, &fixture), (3_000, &other)] {
        let app = router(loaded(path), None);
        let mut bodies = Vec::new();
        for uri in SERVICE_URIS {
            let (status, first) = get(&app, uri).await;
            ensure(status == StatusCode::OK, || format!("{uri}: {status} {first}"))?;
            for _ in 0..3 {
                let again = get(&app, uri).await.1;
                ensure(strip(again, &["took_ms"]) == strip(first.clone(), &["took_ms"]), || format!("{uri} not deterministic"))?;
            }
            bodies.push(strip(first, &["took_ms", "snapshot"]));
        }
        expected.insert(records, bodies);
    }

    let state = loaded(&fixture);
    let app = router(state.clone(), None);
    let done = Arc::new(AtomicUsize::new(0));
    let reloads = {
        let (state, done, other, fixture) = (state.clone(), done.clone(), other.clone(), fixture.clone());
        tokio::spawn(async move {
            let mut sizes = BTreeMap::from([(1u64, 25usize)]);
            for i in 0..SERVICE_RELOADS {
                let path = if i % 2 == 0 { other.clone() } else { fixture.clone() };
                let (generation, records) = state.reload(path, None).await.map_err(|e| e.to_string())?;
                sizes.insert(generation, records);
                done.fetch_add(1, Ordering::SeqCst);
            }
            Ok::<_, String>(sizes)
        })
    };
    // Batches are paced against reload progress so that responses straddle
    // every swap while earlier batches are still in flight.
    let batches = 50;
    let mut queries = Vec::with_capacity(SERVICE_QUERIES);
    for b in 0..batches {
        while done.load(Ordering::SeqCst) < b * SERVICE_RELOADS / batches {
            tokio::time::sleep(Duration::from_millis(1)).await;
        }
        for i in b * SERVICE_QUERIES / batches..(b + 1) * SERVICE_QUERIES / batches {
            let app = app.clone();
            let slot = i % SERVICE_URIS.len();
            queries.push(tokio::spawn(async move { (slot, get(&app, SERVICE_URIS[slot]).await) }));
        }
    }
    let sizes = reloads.await.map_err(|e| e.to_string())??;
    let (mut failed, mut mixed) = (0, 0);
    let mut seen = BTreeSet::new();
    for q in queries {
        let (slot, (status, body)) = q.await.map_err(|e| e.to_string())?;
        if status != StatusCode::OK {
            failed += 1;
            continue;
        }
        let generation = body["snapshot"].as_u64().unwrap_or(0);
        seen.insert(generation);
        match sizes.get(&generation) {
            Some(n) if expected[n][slot] == strip(body, &["took_ms", "snapshot"]) => {}
            _ => mixed += 1,
        }
    }
    ensure(failed == 0 && mixed == 0, || format!("{failed} failed, {mixed} mixed-snapshot responses"))?;
    ensure(seen.len() >= 3, || format!("queries only observed generations {seen:?}"))?;
    Ok(format!(
        "determinism on {} endpoints; {SERVICE_QUERIES} queries across {} generations with {SERVICE_RELOADS} reloads, 0 failed, 0 mixed",
        SERVICE_URIS.len(),
        seen.len()
    ))
}

fn service_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runtime =
        tokio::runtime::Builder::new_multi_thread().worker_threads(4).enable_all().build().map_err(|e| e.to_string())?;
    runtime.block_on(service(dir.path()))
}

fn run(name: &str, check: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    match outcome {
        Ok(detail) => {
            println!("PASS {name}: {detail}");
            true
        }
        Err(why) => {
            println!("FAIL {name}: {why}");
            false
        }
    }
}

fn main() {
    let inputs = Inputs::load();
    let results = [
        run("zika-scenario", zika_scenario),
        run("search-oracle-equivalence", search_oracle),
        run("query-round-trip", query_round_trip),
        run("pipeline-monotonicity", || pipeline_monotonicity(&inputs)),
        run("cascade-conformance", || cascade_conformance(&inputs)),
        run("delineation-golden-table", || delineation_table(&inputs)),
        run("citation-soundness", || citation_soundness(&inputs)),
        run("idempotence", || idempotence(&inputs)),
        run("hierarchical-agreement", || agreement(&inputs)),
        run("performance", performance),
        run("service-determinism-atomicity", service_determinism),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
