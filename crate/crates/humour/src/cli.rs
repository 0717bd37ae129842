//! The `humour` command line.
//!
//! Exit codes: 0 success, 2 invalid input (files, specs, configs, missing
//! bundles, misaligned reports), 3 training or evaluation failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use humour_styles_core::annotation::{agreement_census, fleiss_kappa, resolve_with_auxiliary, AgreementClass, RaterFilter, ResolutionMode, ResolutionPhase};
use humour_styles_core::cascade::{PipelineSpec, Stage2Training, StageSpec};
use humour_styles_core::corpus::{class_term_frequencies, train_test_split, HumourLabel};
use humour_styles_core::eval::{compare_approaches, cross_validate, evaluate};

use crate::annotations::read_annotations;
use crate::config::{parse_provider, RunConfig, EMBED_URL_ENV};
use crate::dataset::{read_corpus, Census, DataFormat};
use crate::embeddings::{fetch_embeddings, save_embeddings, EmbedClient, EmbeddingProvider};
use crate::error::Error;
use crate::persist::PipelineBundle;
use crate::report::{comparison_csv, comparison_markdown, load_report_dir, ModelReport};

pub const BUNDLE_FILE: &str = "model.json";
pub const RUN_FILE: &str = "run.json";

#[derive(Debug, Parser)]
#[command(name = "humour", version, about = "Humour-style recognition toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a dataset and print its class census.
    Ingest {
        path: PathBuf,
        #[arg(long, value_enum)]
        format: Option<DataFormat>,
    },
    /// Agreement statistics and label resolution for an annotation file.
    Annotate {
        path: PathBuf,
        /// Fail when an item stays tied after the auxiliary votes.
        #[arg(long)]
        strict: bool,
        /// Write resolved labels as JSONL.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Most frequent non-stop-word tokens of one humour style.
    Terms {
        dataset: PathBuf,
        /// Label code (0-4) or name, e.g. `aggressive`.
        #[arg(long)]
        label: String,
        #[arg(long, default_value_t = 20)]
        top: usize,
        #[arg(long, value_enum)]
        format: Option<DataFormat>,
    },
    /// Fetch sentence embeddings for a dataset from an embedding service.
    Embed {
        dataset: PathBuf,
        #[arg(long)]
        model: String,
        #[arg(long, env = EMBED_URL_ENV)]
        url: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 64)]
        batch: usize,
        #[arg(long, value_enum)]
        format: Option<DataFormat>,
    },
    /// Train a pipeline on the training split and save the bundle.
    Train(TrainArgs),
    /// Cross-validate a configuration or evaluate its bundle on the test split.
    Eval {
        #[arg(value_enum)]
        scope: EvalScope,
        #[arg(long)]
        config: PathBuf,
        /// Model name in the report; defaults to the config's name.
        #[arg(long)]
        name: Option<String>,
        /// Report directory; defaults to `<output_dir>/reports`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bundle for `test`; defaults to `<output_dir>/model.json`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Wilcoxon comparison of single-model and two-model report directories.
    Compare {
        #[arg(long)]
        single: PathBuf,
        #[arg(long)]
        two: PathBuf,
        /// Also write comparison.md / .csv / .json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalScope {
    Cv,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Single,
    Cascade,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoutingArg {
    Gold,
    Predicted,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Run configuration; the flags below are ignored when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<DataFormat>,
    #[arg(long, value_enum, default_value = "single")]
    pub mode: Mode,
    /// Single-model spec such as `nb` or `mul:gbt`.
    #[arg(long)]
    pub spec: Option<StageSpec>,
    #[arg(long)]
    pub stage1: Option<StageSpec>,
    #[arg(long)]
    pub stage2: Option<StageSpec>,
    #[arg(long, value_enum, default_value = "gold")]
    pub stage2_training: RoutingArg,
    /// Embedding source, `MODEL=PATH` or `MODEL=URL`; repeatable.
    #[arg(long = "embeddings", value_parser = parse_provider)]
    pub embeddings: Vec<(String, EmbeddingProvider)>,
    #[arg(long, default_value_t = 100)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub name: Option<String>,
}

/// A failed command: exit code plus message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn invalid(e: impl std::fmt::Display) -> Self {
        Self { code: 2, message: e.to_string() }
    }

    fn training(e: impl std::fmt::Display) -> Self {
        Self { code: 3, message: e.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::invalid(e)
    }
}

type CmdResult = Result<(), Failure>;

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(cli.command, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

pub fn run(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Ingest { path, format } => ingest(&path, format, out),
        Command::Annotate { path, strict, out: dest } => annotate(&path, strict, dest.as_deref(), out),
        Command::Terms { dataset, label, top, format } => terms(&dataset, &label, top, format, out),
        Command::Embed {
            dataset,
            model,
            url,
            out: dest,
            batch,
            format,
        } => embed(&dataset, format, &model, &url, &dest, batch, out),
        Command::Train(args) => train(args, out),
        Command::Eval {
            scope,
            config,
            name,
            out: dest,
            model,
        } => eval(scope, &config, name, dest, model, out),
        Command::Compare { single, two, out: dest } => compare(&single, &two, dest.as_deref(), out),
    }
}

fn say(out: &mut dyn Write, text: &str) -> CmdResult {
    out.write_all(text.as_bytes()).map_err(Failure::invalid)
}

fn ingest(path: &Path, format: Option<DataFormat>, out: &mut dyn Write) -> CmdResult {
    let start = Instant::now();
    let corpus = read_corpus(path, format)?;
    let census = Census::of(&corpus);
    say(out, &census.render())?;
    say(out, &format!("validated in {:.3} s\n", start.elapsed().as_secs_f64()))
}

fn annotate(path: &Path, strict: bool, dest: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let set = read_annotations(path)?;
    let mut text = format!("items: {}, raters: {}\n", set.items().len(), set.raters().len());
    for (label, filter) in [("human raters", RaterFilter::HumanOnly), ("all raters", RaterFilter::All)] {
        match agreement_census(&set, filter) {
            Ok(r) => {
                text += &format!(
                    "{label}: kappa {:.4}, unanimous {}, majority {}, full disagreement {}\n",
                    r.kappa,
                    r.count(AgreementClass::Unanimous),
                    r.count(AgreementClass::Majority),
                    r.count(AgreementClass::FullDisagreement)
                );
            }
            Err(e) => {
                let kappa = fleiss_kappa(&set, filter).map(|k| format!("{k:.4}"));
                text += &format!("{label}: not computable ({})\n", kappa.err().map_or(e.to_string(), |k| k.to_string()));
            }
        }
    }
    let mode = if strict { ResolutionMode::Strict } else { ResolutionMode::Lenient };
    let resolution = resolve_with_auxiliary(&set, mode).map_err(Failure::invalid)?;
    let phase_count = |p: ResolutionPhase| resolution.ledger.iter().filter(|e| e.phase == p).count();
    text += &format!(
        "resolved by humans {}, by auxiliary votes {}, unresolved {}\n",
        phase_count(ResolutionPhase::Human),
        phase_count(ResolutionPhase::Auxiliary),
        phase_count(ResolutionPhase::Unresolved)
    );
    for id in &resolution.unresolved {
        text += &format!("unresolved: {id}\n");
    }
    if let Some(dest) = dest {
        let mut body = String::new();
        for entry in &resolution.ledger {
            body += &serde_json::to_string(&serde_json::json!({
                "item_id": entry.item_id,
                "label": entry.label.map(HumourLabel::code),
                "phase": entry.phase,
            }))
            .map_err(Failure::invalid)?;
            body.push('\n');
        }
        fs::write(dest, body).map_err(|e| Failure::invalid(Error::io(dest, e)))?;
    }
    say(out, &text)
}

fn parse_label(s: &str) -> Result<HumourLabel, Failure> {
    let by_code = s.parse::<i64>().ok().and_then(|c| HumourLabel::from_code(c).ok());
    by_code
        .or_else(|| HumourLabel::from_name(&s.to_lowercase().replace('_', "-")))
        .ok_or_else(|| Failure::invalid(format!("unknown label {s:?}")))
}

fn terms(dataset: &Path, label: &str, top: usize, format: Option<DataFormat>, out: &mut dyn Write) -> CmdResult {
    let label = parse_label(label)?;
    let corpus = read_corpus(dataset, format)?;
    let ranked = class_term_frequencies(&corpus, label, top).map_err(Failure::invalid)?;
    let mut text = format!("| rank | token | count |\n|---|---|---|\n");
    for (i, (token, count)) in ranked.iter().enumerate() {
        text += &format!("| {} | {token} | {count} |\n", i + 1);
    }
    say(out, &text)
}

fn embed(
    dataset: &Path,
    format: Option<DataFormat>,
    model: &str,
    url: &str,
    dest: &Path,
    batch: usize,
    out: &mut dyn Write,
) -> CmdResult {
    let corpus = read_corpus(dataset, format)?;
    let mut client = EmbedClient::new(url);
    client.batch_size = batch.max(1);
    let items: Vec<(String, String)> = corpus.instances().iter().map(|i| (i.id.clone(), i.text.clone())).collect();
    let matrix = fetch_embeddings(&client, model, &items)?;
    save_embeddings(&matrix, dest)?;
    say(out, &format!("wrote {} vectors of dim {} to {}\n", matrix.len(), matrix.dim(), dest.display()))
}

fn config_from_flags(args: TrainArgs) -> Result<RunConfig, Failure> {
    let dataset = args.dataset.ok_or_else(|| Failure::invalid("--dataset or --config is required"))?;
    let pipeline = match args.mode {
        Mode::Single => {
            if args.stage1.is_some() || args.stage2.is_some() {
                return Err(Failure::invalid("--stage1/--stage2 need --mode cascade"));
            }
            PipelineSpec::Single {
                spec: args.spec.ok_or_else(|| Failure::invalid("--mode single needs --spec"))?,
            }
        }
        Mode::Cascade => {
            if args.spec.is_some() {
                return Err(Failure::invalid("--spec is for --mode single; use --stage1/--stage2"));
            }
            PipelineSpec::Cascade {
                stage1: args.stage1.ok_or_else(|| Failure::invalid("--mode cascade needs --stage1"))?,
                stage2: args.stage2.ok_or_else(|| Failure::invalid("--mode cascade needs --stage2"))?,
                stage2_training: match args.stage2_training {
                    RoutingArg::Gold => Stage2Training::Gold,
                    RoutingArg::Predicted => Stage2Training::Predicted,
                },
            }
        }
    };
    let mut config = RunConfig::new(dataset, pipeline);
    config.format = args.format;
    config.split.seed = args.seed;
    config.embeddings = args.embeddings.into_iter().collect();
    config.output_dir = args.out;
    config.name = args.name;
    Ok(config)
}

fn train(args: TrainArgs, out: &mut dyn Write) -> CmdResult {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => config_from_flags(args)?,
    };
    config.absolutize()?;
    let corpus = config.load_corpus()?;
    let store = config.load_store(&corpus)?;
    let (train_part, _) = train_test_split(&corpus, &config.split).map_err(Failure::invalid)?;
    config.pipeline = config.seeded_pipeline();
    let fitted = config.pipeline.train(&train_part, &store).map_err(Failure::training)?;
    let routing = match &config.pipeline {
        PipelineSpec::Cascade { stage2_training, .. } => *stage2_training,
        PipelineSpec::Single { .. } => Stage2Training::Gold,
    };
    let bundle = PipelineBundle::new(config.name(), &fitted, routing)?;
    fs::create_dir_all(&config.output_dir).map_err(|e| Failure::invalid(Error::io(&config.output_dir, e)))?;
    let bundle_path = config.output_dir.join(BUNDLE_FILE);
    bundle.save(&bundle_path)?;
    config.save(&config.output_dir.join(RUN_FILE))?;
    say(
        out,
        &format!(
            "trained {} on {} instances; bundle {}\n",
            config.name(),
            train_part.len(),
            bundle_path.display()
        ),
    )
}

fn eval(
    scope: EvalScope,
    config_path: &Path,
    name: Option<String>,
    dest: Option<PathBuf>,
    model: Option<PathBuf>,
    out: &mut dyn Write,
) -> CmdResult {
    let config = RunConfig::load(config_path)?;
    let name = name.unwrap_or_else(|| config.name());
    let dest = dest.unwrap_or_else(|| config.output_dir.join("reports"));
    let pipeline = config.seeded_pipeline();
    let report = match scope {
        EvalScope::Cv => {
            let corpus = config.load_corpus()?;
            let store = config.load_store(&corpus)?;
            let cv = cross_validate(&corpus, &pipeline, &config.split, &store).map_err(Failure::training)?;
            ModelReport::from_cv(&name, &pipeline, &config.split, &cv)
        }
        EvalScope::Test => {
            let bundle_path = model.unwrap_or_else(|| config.output_dir.join(BUNDLE_FILE));
            if !bundle_path.is_file() {
                return Err(Failure::invalid(format!("model bundle {} not found; run `humour train` first", bundle_path.display())));
            }
            let fitted = PipelineBundle::load(&bundle_path)?.into_pipeline()?;
            let corpus = config.load_corpus()?;
            let store = config.load_store(&corpus)?;
            let (_, test_part) = train_test_split(&corpus, &config.split).map_err(Failure::invalid)?;
            let result = evaluate(&fitted, &test_part, &store).map_err(Failure::training)?;
            ModelReport::from_test(&name, &pipeline, &config.split, &result)
        }
    };
    let path = report.write(&dest)?;
    say(out, &report.to_markdown())?;
    say(out, &format!("\nreport written to {}\n", path.display()))
}

fn compare(single: &Path, two: &Path, dest: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let a = load_report_dir(single)?;
    let b = load_report_dir(two)?;
    let pairs = |reports: Vec<ModelReport>| -> Vec<(String, _)> { reports.into_iter().map(|r| (r.name, r.summary)).collect() };
    let (a, b) = (pairs(a), pairs(b));
    let names = |v: &[(String, _)]| v.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
    if names(&a) != names(&b) {
        return Err(Failure::invalid(format!(
            "model sets differ: single {:?} vs two-model {:?}",
            names(&a),
            names(&b)
        )));
    }
    if a.len() < humour_styles_core::eval::wilcoxon::MIN_DIFFERENCES {
        return Err(Failure::invalid(format!(
            "{} aligned model pair(s); at least {} are needed",
            a.len(),
            humour_styles_core::eval::wilcoxon::MIN_DIFFERENCES
        )));
    }
    let rows = compare_approaches(&a, &b).map_err(Failure::invalid)?;
    let md = comparison_markdown(&rows);
    if let Some(dest) = dest {
        fs::create_dir_all(dest).map_err(|e| Failure::invalid(Error::io(dest, e)))?;
        let write = |file: &str, body: String| {
            let p = dest.join(file);
            fs::write(&p, body).map_err(|e| Failure::invalid(Error::io(&p, e)))
        };
        write("comparison.md", md.clone())?;
        write("comparison.csv", comparison_csv(&rows)?)?;
        write("comparison.json", serde_json::to_string_pretty(&rows).map_err(Failure::invalid)? + "\n")?;
    }
    say(out, &md)
}
