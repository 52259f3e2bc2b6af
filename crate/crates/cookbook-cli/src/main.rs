//! `cookbook`: generate pattern-based instruction data over random tokens,
//! compute template mixing proportions, estimate voter accuracies without
//! labels, and measure template-rule adherence of natural-language samples.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cookbook_core::alignment::{
    align_examples, read_examples, AlignmentOptions, EmbeddingTable, MatchConfig, TaskKind,
    WordDistance,
};
use cookbook_core::autogen::{build_prompt, request_template, AutogenRequest};
use cookbook_core::dataset::{
    generate_dataset, Allocation, DatasetError, GenerationPlan, PlanTemplate, VocabSource,
    SEED_ENV_VAR,
};
use cookbook_core::mixer::{optimal_proportions, AccuracyMatrix, AccuracyScale};
use cookbook_core::templates::{GeneratorId, ParamsPatch, RhymeDictionary, TemplateId};
use cookbook_core::weak_supervision::{
    estimate_accuracy_matrix, EstimatorConfig, SignMap, TaskVotes, VotesDataset,
};

#[derive(Parser)]
#[command(name = "cookbook", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a JSONL dataset (plus manifest) from a plan or inline flags.
    Generate(GenerateArgs),
    /// Compute mixture proportions from an accuracy CSV.
    Mix(MixArgs),
    /// Estimate per-voter accuracies from unlabeled votes CSVs.
    EstimateAccs(EstimateArgs),
    /// Score template-rule adherence and compute the alignment statistic.
    Align(AlignArgs),
    /// Assemble (and optionally submit) the template-drafting prompt.
    AutogenPrompt(AutogenArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Plan file (JSON). Inline flags below override its fields.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Template to generate from (repeatable), e.g. `matching` or
    /// `matching_norule`.
    #[arg(long = "template")]
    templates: Vec<String>,
    /// Comma-separated proportions matching the template list.
    #[arg(long, conflicts_with = "counts")]
    proportions: Option<String>,
    /// Comma-separated per-template counts matching the template list.
    #[arg(long)]
    counts: Option<String>,
    /// Total number of samples.
    #[arg(long)]
    n: Option<u64>,
    /// Master seed; defaults to $COOKBOOK_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Vocabulary file (one token per line). Defaults to the built-in
    /// synthetic vocabulary.
    #[arg(long)]
    vocab_file: Option<PathBuf>,
    /// Synthetic vocabulary size when no file is given.
    #[arg(long, default_value_t = 10_000)]
    vocab_size: usize,
    /// Rhyme dictionary for poetry templates: one group per line, words
    /// space-separated. Defaults to the built-in groups.
    #[arg(long)]
    rhyme_dict: Option<PathBuf>,
    /// Output JSONL path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MixArgs {
    /// Accuracy CSV: header `template,<task1>,...`, one row per template.
    #[arg(long)]
    accuracies: PathBuf,
    /// Entropy weight; strictly positive.
    #[arg(long)]
    eta: f64,
    /// Input scale of the accuracy entries.
    #[arg(long, value_enum, default_value_t = ScaleArg::Fraction)]
    scale: ScaleArg,
    /// Output path for the proportions JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Fraction,
    Percent,
}

#[derive(Args)]
struct EstimateArgs {
    /// Votes CSV per task (repeatable): header `example_id,<voter>...`.
    #[arg(long = "votes", required = true)]
    votes: Vec<PathBuf>,
    /// Label sign map JSON, e.g. `{"yes": 1, "no": -1}`. When omitted, a
    /// sidecar `<votes>.labels.json` is used per votes file.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Prior on the positive class, strictly inside (0, 1).
    #[arg(long, default_value_t = 0.5)]
    class_balance: f64,
    /// Gradient-descent step size for the moment refinement.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Gradient-descent iteration count.
    #[arg(long, default_value_t = 5000)]
    iterations: usize,
    /// Output path for the accuracy CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AlignArgs {
    /// Examples JSONL with task fields plus gold/pred_base/pred_tuned.
    #[arg(long)]
    examples: PathBuf,
    /// Task kind to score.
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Proximity window for the document-QA scorer.
    #[arg(long, default_value_t = 10)]
    window: usize,
    /// Embedding table (word then coordinates per line); switches the
    /// commonsense distance from hamming-identity to cosine.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Output path for the report JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    DocumentQa,
    CommonsenseSelect,
    Matching,
}

impl From<TaskArg> for TaskKind {
    fn from(value: TaskArg) -> Self {
        match value {
            TaskArg::DocumentQa => TaskKind::DocumentQa,
            TaskArg::CommonsenseSelect => TaskKind::CommonsenseSelect,
            TaskArg::Matching => TaskKind::Matching,
        }
    }
}

#[derive(Args)]
struct AutogenArgs {
    #[arg(long)]
    task_name: String,
    #[arg(long)]
    task_description: String,
    /// Write the prompt here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Submit the prompt to a chat-completions endpoint and print the
    /// assistant content.
    #[arg(long, requires = "endpoint", requires = "model")]
    submit: bool,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the bearer token.
    #[arg(long, default_value = "OPENAI_API_KEY")]
    token_env: String,
    /// Directory for timestamped request/response logs.
    #[arg(long, default_value = "autogen-logs")]
    log_dir: PathBuf,
    /// Write the raw assistant content here instead of stdout.
    #[arg(long)]
    response_out: Option<PathBuf>,
}

/// Errors carry the exit code: 2 for validation problems (bad arguments,
/// unreadable or malformed inputs), 1 for output I/O failures.
enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    fn report(self) -> ExitCode {
        match self {
            CliError::Validation(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            CliError::Io(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        }
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_output(path, contents),
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

fn validation<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Validation(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Mix(args) => cmd_mix(args),
        Command::EstimateAccs(args) => cmd_estimate(args),
        Command::Align(args) => cmd_align(args),
        Command::AutogenPrompt(args) => cmd_autogen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| CliError::Validation(format!("bad {what} entry {s:?}: {e}")))
        })
        .collect()
}

fn env_seed() -> Result<u64, CliError> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(v) => v.parse().map_err(|e| {
            CliError::Validation(format!("{SEED_ENV_VAR}={v:?} is not a valid seed: {e}"))
        }),
        Err(_) => Ok(0),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let mut plan = match &args.plan {
        Some(path) => GenerationPlan::from_json(&read_input(path)?).map_err(validation)?,
        None => {
            if args.templates.is_empty() {
                return Err(CliError::Validation(
                    "either --plan or at least one --template is required".into(),
                ));
            }
            let templates: Result<Vec<PlanTemplate>, CliError> = args
                .templates
                .iter()
                .map(|name| {
                    Ok(PlanTemplate {
                        generator: name.parse::<GeneratorId>().map_err(validation)?,
                        params: ParamsPatch::default(),
                    })
                })
                .collect();
            let templates = templates?;
            let allocation = match (&args.proportions, &args.counts) {
                (Some(p), None) => Allocation::Proportions(parse_list(p, "proportion")?),
                (None, Some(c)) => Allocation::Counts(parse_list(c, "count")?),
                (None, None) if templates.len() == 1 => Allocation::Proportions(vec![1.0]),
                (None, None) => {
                    return Err(CliError::Validation(
                        "--proportions or --counts is required with multiple templates".into(),
                    ))
                }
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            GenerationPlan {
                n: 0,
                master_seed: 0,
                vocab: VocabSource::Synthetic(args.vocab_size),
                templates,
                allocation,
                output: PathBuf::new(),
            }
        }
    };

    if let Some(n) = args.n {
        plan.n = n;
    }
    plan.master_seed = match args.seed {
        Some(s) => s,
        None if args.plan.is_some() => plan.master_seed,
        None => env_seed()?,
    };
    if let Some(path) = args.vocab_file {
        plan.vocab = VocabSource::File(path);
    }
    if let Some(path) = &args.rhyme_dict {
        let dict = RhymeDictionary::from_text(&read_input(path)?).map_err(validation)?;
        for template in &mut plan.templates {
            if template.generator.layout() == TemplateId::Poetry {
                template.params.rhyme_dict = Some(dict.clone());
            }
        }
    }
    if let Some(out) = args.out {
        plan.output = out;
    }
    if plan.output.as_os_str().is_empty() {
        return Err(CliError::Validation("--out is required".into()));
    }
    if let VocabSource::File(path) = &plan.vocab {
        if !path.exists() {
            return Err(CliError::Validation(format!(
                "vocabulary file {} does not exist",
                path.display()
            )));
        }
    }

    let manifest = generate_dataset(&plan).map_err(|e| match e {
        DatasetError::Io { path, source } => {
            CliError::Io(format!("cannot write {}: {source}", path.display()))
        }
        other => CliError::Validation(other.to_string()),
    })?;
    eprintln!(
        "wrote {} samples to {} (sha256 {})",
        manifest.total,
        plan.output.display(),
        manifest.sha256
    );
    Ok(())
}

fn cmd_mix(args: MixArgs) -> Result<(), CliError> {
    let scale = match args.scale {
        ScaleArg::Fraction => AccuracyScale::Fraction,
        ScaleArg::Percent => AccuracyScale::Percent,
    };
    let matrix =
        AccuracyMatrix::from_csv(&read_input(&args.accuracies)?, scale).map_err(validation)?;
    let proportions = optimal_proportions(&matrix, args.eta).map_err(validation)?;
    let payload = serde_json::json!({
        "eta": proportions.eta(),
        "templates": matrix.template_names(),
        "proportions": proportions.proportions(),
    });
    emit(&args.out, &serde_json::to_string_pretty(&payload).expect("json"))
}

fn sidecar_labels(votes_path: &Path) -> PathBuf {
    let mut name = votes_path.file_stem().unwrap_or_default().to_os_string();
    name.push(".labels.json");
    votes_path.with_file_name(name)
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let mut tasks = Vec::new();
    for votes_path in &args.votes {
        let votes = VotesDataset::from_csv(&read_input(votes_path)?).map_err(validation)?;
        let labels_path = args
            .labels
            .clone()
            .unwrap_or_else(|| sidecar_labels(votes_path));
        let signs = SignMap::from_json(&read_input(&labels_path)?).map_err(validation)?;
        let task_name = votes_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "task".to_string());
        tasks.push(TaskVotes {
            task_name,
            votes,
            signs,
        });
    }
    let config = EstimatorConfig {
        step_size: args.step,
        iterations: args.iterations,
    };
    let matrix =
        estimate_accuracy_matrix(&tasks, args.class_balance, &config).map_err(validation)?;
    emit(&args.out, matrix.to_csv().trim_end())
}

fn cmd_align(args: AlignArgs) -> Result<(), CliError> {
    let task: TaskKind = args.task.into();
    let examples = read_examples(&read_input(&args.examples)?, task).map_err(validation)?;
    let distance = match &args.embeddings {
        Some(path) => {
            let table = EmbeddingTable::from_text(&read_input(path)?).map_err(validation)?;
            WordDistance::EmbeddingCosine(table)
        }
        None => WordDistance::HammingIdentity,
    };
    let options = AlignmentOptions {
        window: args.window,
        distance,
        matcher: MatchConfig::default(),
    };
    let report = align_examples(&examples, task, &options).map_err(validation)?;
    emit(&args.out, &serde_json::to_string_pretty(&report).expect("json"))
}

fn cmd_autogen(args: AutogenArgs) -> Result<(), CliError> {
    let prompt = build_prompt(&args.task_name, &args.task_description).map_err(validation)?;
    emit(&args.out, &prompt)?;
    if args.submit {
        let req = AutogenRequest {
            task_name: args.task_name,
            task_description: args.task_description,
            endpoint: args.endpoint.expect("clap requires"),
            model: args.model.expect("clap requires"),
            token_env: args.token_env,
            log_dir: Some(args.log_dir),
        };
        let content = request_template(&req, &prompt).map_err(validation)?;
        emit(&args.response_out, &content)?;
    }
    Ok(())
}
