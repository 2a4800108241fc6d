use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harmonize_core::augment::{
    coverage_report, run_pipeline, AnnotationStore, CoverageReport, KeywordClassifier, PipelineError, PipelineInputs,
};
use harmonize_core::corpus::{read_corpus, to_ndjson};
use harmonize_core::harvest::{harvest_batch, Parser as DocParser, RuleSet};
use harmonize_core::lexicon::{CorrectionsList, Lexicons};
use harmonize_core::registry::Registry;
use harmonize_core::{validate_record, AugmentationStage, HarmonizedDataset};
use harmonize_search::{parse_advanced, parse_basic, Filter, SearchConfig, SearchIndex, MAX_PAGE_SIZE};

#[derive(Parser)]
#[command(name = "harmonize", version, about = "Harvest, augment, index and serve harmonized dataset metadata")]
struct Cli {
    /// Worker threads for parallel stages (default: available cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    /// More log output on stderr; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map one source's documents to harmonized records.
    Harvest {
        /// Registry slug of the source.
        #[arg(long)]
        source: String,
        /// Directory of raw documents, one per dataset.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Mapping rules for structured sources.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Source registry table (default: the bundled one).
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Run augmentation stages over a corpus.
    Augment {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated, in pipeline order: standardize,citation,textmine,topics.
        #[arg(long, value_delimiter = ',', default_value = "standardize,citation,textmine,topics")]
        stages: Vec<String>,
        #[arg(long)]
        lexicons: Option<PathBuf>,
        /// Directory of per-publication annotation files.
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        corrections: Option<PathBuf>,
        /// Where to write the coverage report TSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build the search index; with --check, verify it against a recount.
    Index {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        check: bool,
    },
    /// One-shot query; hits go to stdout as NDJSON.
    Search {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Basic free-text query.
        #[arg(long, conflicts_with = "advanced")]
        q: Option<String>,
        /// Advanced fielded boolean query.
        #[arg(long)]
        advanced: Option<String>,
        /// field:value, repeatable.
        #[arg(long = "filter")]
        filters: Vec<String>,
        #[arg(long, default_value_t = 0)]
        from: usize,
        #[arg(long, default_value_t = 10)]
        size: usize,
    },
    /// Run the HTTP API.
    Serve {
        /// TOML config (default: $PORTAL_CONFIG).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print a corpus's coverage table.
    Report {
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Validate a corpus; exits 1 on any error.
    Validate {
        #[command(flatten)]
        corpus: CorpusArgs,
    },
}

#[derive(Args)]
struct CorpusArgs {
    /// NDJSON corpus; repeat to concatenate several.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
}

type Outcome = Result<(), Failure>;

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

fn read_all(args: &CorpusArgs) -> Result<Vec<HarmonizedDataset>, Failure> {
    let mut out = Vec::new();
    for path in &args.inputs {
        let records = read_corpus(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        out.extend(records);
    }
    Ok(out)
}

fn write_file(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))
}

fn harvest(source: &str, input: &Path, out: &Path, rules: Option<&Path>, registry: Option<&Path>) -> Outcome {
    let registry = match registry {
        Some(p) => Registry::load(p).map_err(data)?,
        None => Registry::bundled(),
    };
    if registry.get(source).is_none() {
        return Err(Failure::Usage(format!("unknown source '{source}'")));
    }
    let rules = rules.map(RuleSet::load).transpose().map_err(data)?;
    let parser = rules.as_ref().map_or(DocParser::ByFormat, DocParser::Rules);
    let (records, stats) = harvest_batch(input, source, &registry, parser).map_err(data)?;
    for reason in &stats.reject_reasons {
        log::warn!("rejected {reason}");
    }
    write_file(out, &to_ndjson(&records))?;
    eprintln!("{source}: {} parsed, {} rejected", stats.parsed, stats.rejected);
    Ok(())
}

fn parse_stages(names: &[String]) -> Result<Vec<AugmentationStage>, Failure> {
    names
        .iter()
        .filter(|n| !n.trim().is_empty())
        .map(|n| n.parse().map_err(Failure::Usage))
        .collect()
}

struct AugmentArgs<'a> {
    corpus: &'a CorpusArgs,
    out: &'a Path,
    stages: &'a [String],
    lexicons: Option<&'a Path>,
    annotations: Option<&'a Path>,
    corrections: Option<&'a Path>,
    report: Option<&'a Path>,
}

fn augment(a: AugmentArgs<'_>) -> Outcome {
    let stages = parse_stages(a.stages)?;
    harmonize_core::augment::check_stage_order(&stages).map_err(|e| Failure::Usage(e.to_string()))?;
    let needs = |s: AugmentationStage| stages.contains(&s);
    use AugmentationStage::*;
    let require = |flag: Option<&Path>, name: &str, users: &[AugmentationStage]| -> Outcome {
        match users.iter().find(|s| needs(**s)) {
            Some(s) if flag.is_none() => Err(Failure::Usage(format!("stage {} needs --{name}", s.cli_name()))),
            _ => Ok(()),
        }
    };
    require(a.lexicons, "lexicons", &[Standardization, CitationAugmentation, TextMiningAugmentation, TopicClassification])?;
    require(a.annotations, "annotations", &[CitationAugmentation])?;
    require(a.corrections, "corrections", &[TextMiningAugmentation])?;

    let lexicons = a.lexicons.map(Lexicons::load_dir).transpose().map_err(data)?;
    for w in lexicons.iter().flat_map(|l| l.warnings()) {
        log::warn!("{w}");
    }
    let annotations = a.annotations.map(AnnotationStore::load_dir).transpose().map_err(data)?;
    let corrections = a.corrections.map(CorrectionsList::load).transpose().map_err(data)?;
    let classifier = lexicons.as_ref().map(|l| KeywordClassifier::new(l.topic_rules.clone(), l.ontologies.clone()));
    let inputs = PipelineInputs {
        lexicons: lexicons.as_ref(),
        annotations: annotations.as_ref(),
        corrections: corrections.as_ref(),
        classifier: classifier.as_ref().map(|c| c as &dyn harmonize_core::augment::TopicClassifier),
    };
    let corpus = read_all(a.corpus)?;
    let (records, report) = run_pipeline(&corpus, &stages, &inputs).map_err(|e| match e {
        PipelineError::StageOrder(_) | PipelineError::MissingInput { .. } => Failure::Usage(e.to_string()),
        _ => data(e),
    })?;
    write_file(a.out, &to_ndjson(&records))?;
    if let Some(path) = a.report {
        write_file(path, &report.to_tsv())?;
    }
    eprintln!("augmented {} records through {} stage(s)", records.len(), stages.len());
    Ok(())
}

fn index(corpus: &CorpusArgs, check: bool) -> Outcome {
    let records = read_all(corpus)?;
    let started = std::time::Instant::now();
    let index = SearchIndex::build(records, SearchConfig::default()).map_err(data)?;
    log::info!("built index over {} records in {:?}", index.len(), started.elapsed());
    if check {
        let postings = index.verify().map_err(|e| Failure::Data(format!("index check failed: {e}")))?;
        eprintln!("index check passed: {} records, {postings} postings", index.len());
    } else {
        eprintln!("indexed {} records", index.len());
    }
    Ok(())
}

fn search(corpus: &CorpusArgs, q: Option<&str>, advanced: Option<&str>, filters: &[String], from: usize, size: usize) -> Outcome {
    if !(1..=MAX_PAGE_SIZE).contains(&size) {
        return Err(Failure::Usage(format!("--size must be between 1 and {MAX_PAGE_SIZE}")));
    }
    let ast = match advanced {
        Some(a) => parse_advanced(a),
        None => parse_basic(q.unwrap_or("")),
    }
    .map_err(|e| Failure::Usage(format!("query: {e}")))?;
    let filters = filters
        .iter()
        .map(|f| Filter::parse(f).ok_or_else(|| Failure::Usage(format!("filter '{f}' is not field:value"))))
        .collect::<Result<Vec<_>, _>>()?;
    let index = SearchIndex::build(read_all(corpus)?, SearchConfig::default()).map_err(data)?;
    let response = index.execute(&ast, &filters, from, size).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut out = String::new();
    for hit in &response.hits {
        let line = serde_json::json!({ "_id": hit.id, "_score": hit.score, "record": hit.record });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    print!("{out}");
    eprintln!("{} total hits for {}", response.total, response.query_echo);
    Ok(())
}

fn serve(config: Option<&Path>) -> Outcome {
    let config = harmonize_api::ServiceConfig::resolve(config).map_err(|e| Failure::Usage(e.to_string()))?;
    let runtime = tokio::runtime::Runtime::new().map_err(data)?;
    runtime.block_on(harmonize_api::serve(config)).map_err(data)
}

/// One column for the corpus as it stands, labelled with the latest stage
/// recorded in any provenance map.
fn report(corpus: &CorpusArgs) -> Outcome {
    let records = read_all(corpus)?;
    let stage = records
        .iter()
        .flat_map(|r| r.provenance.values().copied())
        .max()
        .unwrap_or(AugmentationStage::Ingest);
    let report = CoverageReport { columns: vec![coverage_report(&records, stage)] };
    print!("{}", report.to_tsv());
    Ok(())
}

fn validate(corpus: &CorpusArgs) -> Outcome {
    let records = read_all(corpus)?;
    let mut errors = 0;
    let mut seen = std::collections::BTreeSet::new();
    for r in &records {
        let label = if r.id.is_empty() { "<missing _id>" } else { r.id.as_str() };
        if !r.id.is_empty() && !seen.insert(r.id.as_str()) {
            eprintln!("{label}: duplicate _id");
            errors += 1;
        }
        let report = validate_record(r);
        for e in report.error_strings() {
            eprintln!("{label}: error: {e}");
            errors += 1;
        }
        for w in report.warning_strings() {
            log::info!("{label}: warning: {w}");
        }
    }
    if errors > 0 {
        return Err(Failure::Data(format!("{errors} error(s) in {} records", records.len())));
    }
    eprintln!("{} records valid", records.len());
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Harvest { source, input, out, rules, registry } => {
            harvest(source, input, out, rules.as_deref(), registry.as_deref())
        }
        Command::Augment { corpus, out, stages, lexicons, annotations, corrections, report } => augment(AugmentArgs {
            corpus,
            out,
            stages,
            lexicons: lexicons.as_deref(),
            annotations: annotations.as_deref(),
            corrections: corrections.as_deref(),
            report: report.as_deref(),
        }),
        Command::Index { corpus, check } => index(corpus, *check),
        Command::Search { corpus, q, advanced, filters, from, size } => {
            search(corpus, q.as_deref(), advanced.as_deref(), filters, *from, *size)
        }
        Command::Serve { config } => serve(config.as_deref()),
        Command::Report { corpus } => report(corpus),
        Command::Validate { corpus } => validate(corpus),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
