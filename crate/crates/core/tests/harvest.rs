use std::path::{Path, PathBuf};

use harmonize_core::corpus::to_ndjson;
use harmonize_core::harvest::{harvest_batch, parse_generalist, parse_structured_source, BatchError, Parser, RawSourceDocument, RuleSet, SourceFormat};
use harmonize_core::registry::Registry;
use harmonize_core::{validate_record, ConditionsOfAccess, HarmonizedDataset};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn registry() -> Registry {
    Registry::load(&fixtures().join("registry.tsv")).unwrap()
}

/// Per-source fixture directories, with the rules file each needs.
const SOURCES: [(&str, Option<&str>, usize); 7] = [
    ("sra", None, 5),
    ("geo", Some("geo.rules"), 4),
    ("immport", Some("immport.rules"), 4),
    ("accessclinicaldata", Some("accessclinicaldata.rules"), 3),
    ("veupathdb", Some("veupathdb.rules"), 3),
    ("zenodo", None, 4),
    ("massive", Some("massive.rules"), 2),
];

fn harvest(slug: &str, rules: Option<&str>) -> (Vec<HarmonizedDataset>, harmonize_core::harvest::HarvestStats) {
    let rules = rules.map(|r| RuleSet::load(&fixtures().join("rules").join(r)).unwrap());
    let parser = rules.as_ref().map_or(Parser::ByFormat, Parser::Rules);
    harvest_batch(&fixtures().join(slug), slug, &registry(), parser).unwrap()
}

fn file_count(dir: &Path) -> usize {
    std::fs::read_dir(dir).unwrap().count()
}

#[test]
fn every_fixture_source_harvests_cleanly() {
    let mut total = 0;
    for (slug, rules, expected) in SOURCES {
        let (records, stats) = harvest(slug, rules);
        assert_eq!(stats.parsed, expected, "{slug}: {:?}", stats.reject_reasons);
        assert_eq!(stats.rejected, 0, "{slug}: {:?}", stats.reject_reasons);
        assert_eq!(stats.parsed + stats.rejected, file_count(&fixtures().join(slug)));
        for r in &records {
            let report = validate_record(r);
            assert!(report.is_valid(), "{}: {report}", r.id);
            assert!(r.id.starts_with(&format!("{slug}_")));
        }
        let ids: Vec<_> = records.iter().map(|r| r.id.clone()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        total += records.len();
    }
    assert_eq!(total, 25);
}

#[test]
fn harvest_is_byte_deterministic() {
    for (slug, rules, _) in SOURCES {
        let a = to_ndjson(&harvest(slug, rules).0);
        let b = to_ndjson(&harvest(slug, rules).0);
        assert_eq!(a, b, "{slug}");
    }
}

#[test]
fn sra_fields_map_from_xml() {
    let (records, _) = harvest("sra", None);
    let r = records.iter().find(|r| r.id == "sra_SRP100001").unwrap();
    assert_eq!(r.name.as_deref(), Some("Influenza host response in human airway epithelium"));
    assert_eq!(r.species[0].raw_text, "Homo sapiens");
    assert_eq!(r.measurement_technique[0].raw_text, "RNA-Seq");
    assert_eq!(r.identifier.as_deref(), Some("SRP100001"));
    assert_eq!(r.included_in_data_catalog.as_ref().unwrap().name, "NCBI SRA");
    assert_eq!(r.citation[0].pmid.as_deref(), Some("30000001"));
    // Entity in the abstract is decoded.
    let malaria = records.iter().find(|r| r.id == "sra_SRP100003").unwrap();
    assert!(malaria.description.as_deref().unwrap().contains("falciparum & malaria"));
    // No library strategy: the instrument stands in.
    let macaque = records.iter().find(|r| r.id == "sra_SRP100005").unwrap();
    assert_eq!(macaque.measurement_technique[0].raw_text, "MinION");
}

#[test]
fn sra_name_is_canonical_title_text() {
    use harmonize_core::harvest::xml::parse_xml;
    let dir = fixtures().join("sra");
    let (records, _) = harvest("sra", None);
    for r in records {
        let native = r.id.strip_prefix("sra_").unwrap();
        let xml = std::fs::read(dir.join(format!("{native}.xml"))).unwrap();
        let root = parse_xml(&xml).unwrap();
        let title = root.find("STUDY_TITLE").and_then(|t| t.text()).unwrap();
        assert_eq!(r.name.unwrap(), title.split_whitespace().collect::<Vec<_>>().join(" "));
    }
}

#[test]
fn truncated_xml_is_counted_as_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["SRP100001.xml", "SRP100002.xml"] {
        std::fs::copy(fixtures().join("sra").join(f), dir.path().join(f)).unwrap();
    }
    std::fs::copy(fixtures().join("malformed/SRP199999.xml"), dir.path().join("SRP199999.xml")).unwrap();
    let (records, stats) = harvest_batch(dir.path(), "sra", &registry(), Parser::ByFormat).unwrap();
    assert_eq!((stats.parsed, stats.rejected), (2, 1));
    assert_eq!(records.len(), 2);
    let reason = &stats.reject_reasons[0];
    assert!(reason.contains("parse error"), "{reason}");
    assert!(reason.contains("STUDY_TITLE"), "{reason}");
}

#[test]
fn empty_directory_yields_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let (records, stats) = harvest_batch(dir.path(), "sra", &registry(), Parser::ByFormat).unwrap();
    assert!(records.is_empty());
    assert_eq!((stats.parsed, stats.rejected), (0, 0));
}

#[test]
fn unknown_source_and_missing_dir_fail_batch() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        harvest_batch(dir.path(), "nosuchsource", &registry(), Parser::ByFormat),
        Err(BatchError::UnknownSource(_))
    ));
    assert!(matches!(
        harvest_batch(&dir.path().join("absent"), "sra", &registry(), Parser::ByFormat),
        Err(BatchError::Io { .. })
    ));
}

#[test]
fn generalist_missing_id_is_reported_and_batch_continues() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixtures().join("zenodo/1000001.json"), dir.path().join("1000001.json")).unwrap();
    std::fs::write(dir.path().join("broken.json"), r#"{"metadata": {"title": "No id"}}"#).unwrap();
    let (records, stats) = harvest_batch(dir.path(), "zenodo", &registry(), Parser::ByFormat).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(stats.rejected, 1);
    assert!(stats.reject_reasons[0].starts_with("broken.json"));
}

#[test]
fn invalid_record_is_rejected_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("1.json"), r#"{"id": 1, "metadata": {"title": "T", "description": "D"}}"#).unwrap();
    let (_, stats) = harvest_batch(dir.path(), "zenodo", &registry(), Parser::ByFormat).unwrap();
    assert_eq!(stats.rejected, 1);
    assert!(stats.reject_reasons[0].contains("url"), "{:?}", stats.reject_reasons);
}

#[test]
fn immport_rules_map_condition_species_assay() {
    let (records, _) = harvest("immport", Some("immport.rules"));
    let r = records.iter().find(|r| r.id == "immport_SDY3001").unwrap();
    assert_eq!(r.health_condition[0].raw_text, "Influenza");
    assert_eq!(r.species[0].raw_text, "Homo sapiens");
    let assays: Vec<_> = r.measurement_technique.iter().map(|t| t.raw_text.as_str()).collect();
    assert_eq!(assays, ["HAI assay", "ELISA"]);
    assert_eq!(r.funding[0].identifier.as_deref(), Some("U19AI090023"));
    assert_eq!(r.temporal_coverage.as_ref().unwrap().start.as_deref(), Some("2015-09-01"));
    assert_eq!(r.conditions_of_access, ConditionsOfAccess::Registered);
    let malaria = records.iter().find(|r| r.id == "immport_SDY3004").unwrap();
    assert_eq!(malaria.species.len(), 2);
}

#[test]
fn accessclinicaldata_sets_nctid_and_identifier() {
    let (records, _) = harvest("accessclinicaldata", Some("accessclinicaldata.rules"));
    let r = records.iter().find(|r| r.id == "accessclinicaldata_ACD0001").unwrap();
    assert_eq!(r.nctid.as_deref(), Some("NCT04280705"));
    assert_eq!(r.identifier.as_deref(), Some("NCT04280705"));
    assert_eq!(r.conditions_of_access, ConditionsOfAccess::Controlled);
    assert!(r.url.as_deref().unwrap().ends_with("/NCT04280705"));
}

#[test]
fn geo_soft_dates_and_lists() {
    let (records, _) = harvest("geo", Some("geo.rules"));
    let r = records.iter().find(|r| r.id == "geo_GSE200001").unwrap();
    assert_eq!(r.date_created.as_deref(), Some("2021-01-15"));
    assert_eq!(r.variable_measured, ["disease state", "time point"]);
    assert_eq!(r.author.len(), 2);
    assert_eq!(r.citation[0].pmid.as_deref(), Some("30000011"));
    let mouse = records.iter().find(|r| r.id == "geo_GSE200004").unwrap();
    let orgs: Vec<_> = mouse.species.iter().map(|t| t.raw_text.as_str()).collect();
    assert_eq!(orgs, ["Mus musculus", "Influenza A virus"]);
}

#[test]
fn native_ids_with_underscores_round_trip() {
    let (records, _) = harvest("veupathdb", Some("veupathdb.rules"));
    for r in &records {
        let (slug, native) = harmonize_core::ids::split_id(&r.id).unwrap();
        assert_eq!(slug, "veupathdb");
        assert_eq!(Some(native.as_str()), r.identifier.as_deref());
    }
}

#[test]
fn generalist_keeps_creator_order_and_access() {
    let doc = RawSourceDocument::new(
        "zenodo",
        "1000003",
        std::fs::read(fixtures().join("zenodo/1000003.json")).unwrap(),
        SourceFormat::StructuredRecord,
    );
    let (_, r) = parse_generalist(&doc, "Zenodo").unwrap();
    let names: Vec<_> = r.author.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["Lima, Pedro", "Costa, Rita"]);
    assert_eq!(r.conditions_of_access, ConditionsOfAccess::Controlled);
}

#[test]
fn rules_with_typo_fail_before_any_record() {
    let err = RuleSet::parse("bad", "@native_id id\nid → identifier\norganism → specie [SplitList]\n").unwrap_err();
    assert_eq!(err.line, 3);
    let err = RuleSet::parse("bad", "id → identifier\n").unwrap_err();
    assert!(err.message.contains("@native_id"));
    let err = RuleSet::parse("bad", "@native_id id\ntitle → name [TermWrap]\n").unwrap_err();
    assert!(err.message.contains("TermWrap"));
}

#[test]
fn required_rule_path_missing_is_per_record_error() {
    let rules = RuleSet::load(&fixtures().join("rules/massive.rules")).unwrap();
    let doc = RawSourceDocument::new(
        "massive",
        "x",
        br#"{"dataset_id": "MSV1", "title": "T", "description": "D"}"#.to_vec(),
        SourceFormat::StructuredRecord,
    );
    let err = parse_structured_source(&doc, &rules).unwrap_err();
    assert!(err.to_string().contains("species"), "{err}");
}

#[test]
fn registry_table_rows() {
    use harmonize_core::model::ResearchDomain;
    let bundled = Registry::bundled();
    assert_eq!(bundled.len(), registry().len());
    let immport = bundled.get("immport").unwrap();
    assert_eq!(
        (immport.name.as_str(), immport.research_domain, immport.access),
        ("ImmPort", ResearchDomain::Iid, ConditionsOfAccess::Registered)
    );
    let zenodo = bundled.get("zenodo").unwrap();
    assert_eq!((zenodo.research_domain, zenodo.access), (ResearchDomain::Generalist, ConditionsOfAccess::Varied));
    let names: Vec<_> = bundled.sorted_by_name().iter().map(|e| e.name.clone()).collect();
    assert!(names.windows(2).all(|w| w[0] <= w[1]));
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.tsv"), "").unwrap();
    assert!(Registry::load(&dir.path().join("empty.tsv")).unwrap().is_empty());
}
