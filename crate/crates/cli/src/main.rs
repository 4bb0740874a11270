mod config;
mod manifest;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{pick, FileConfig};
use manifest::{digest, BackendInfo, Manifest};
use nerperturb_backend::{run_stub, Client, StubConfig, StubService};
use nerperturb_core::attack::{DEFAULT_BUDGET, DEFAULT_MLM_TOP_K, DEFAULT_OVERSHOOT};
use nerperturb_core::evaluation::DEFAULT_BATCH_SIZE;
use nerperturb_core::{
    attack_corpus, corpus_stats, evaluate_attack, find_wordnet_dir, load_wordnet, read_conll, render_curve_tsv,
    replacement_log, run_sweep, serialize_conll, AttackConfig, AttackResources, EvalOptions, ReplacerKind,
    SelectionMethod, SweepPlan, WordNetStore,
};
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "nerperturb",
    version,
    about = "Context-aware adversarial perturbation of NER data"
)]
struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// More logging (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Perturb a corpus with one selection and one replacement method.
    Attack(AttackArgs),
    /// Score a perturbed corpus against the original.
    Evaluate(EvaluateArgs),
    /// Attack and evaluate over several methods and budgets.
    Sweep(SweepArgs),
    /// Print sentence, token and entity counts.
    Stats {
        #[arg(long)]
        input: PathBuf,
    },
    /// Serve the deterministic stub backend over HTTP.
    StubServe(StubServeArgs),
}

#[derive(Args, Clone)]
struct BackendArgs {
    /// Model backend URL, or `stub` for the built-in deterministic stub.
    #[arg(long, env = "NERPERTURB_BACKEND")]
    backend: Option<String>,

    /// NER lexicon for the built-in stub (`form<TAB>tag` lines).
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Candidate selection: rdm, pst, dep, chk or gdt.
    #[arg(long)]
    select: Option<SelectionMethod>,
    /// Replacement: synonym or mlm.
    #[arg(long)]
    replace: Option<ReplacerKind>,
    /// Words to replace per sentence.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// WordNet 3.0 dict directory (default: $WNSEARCHDIR or a system path).
    #[arg(long)]
    wordnet: Option<PathBuf>,
    #[arg(long)]
    mlm_top_k: Option<usize>,
    /// Ranking depth multiplier used to back-fill rejected candidates.
    #[arg(long)]
    overshoot: Option<usize>,
    /// Worker threads (0: one per CPU). Output does not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Replacement log (default: <output>.replacements.jsonl).
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    adversarial: PathBuf,
    /// Gold labels (default: the NER column of --original).
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Full JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    /// Curve table (TSV); printed to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Selection methods, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    select: Vec<SelectionMethod>,
    /// Replacement methods, comma separated (default: both).
    #[arg(long, value_delimiter = ',')]
    replace: Vec<ReplacerKind>,
    /// Budgets as `1..9` (inclusive) or `1,3,5` (default: 1..9).
    #[arg(long, value_parser = parse_budgets)]
    budgets: Option<Budgets>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    wordnet: Option<PathBuf>,
    #[arg(long)]
    mlm_top_k: Option<usize>,
    #[arg(long)]
    overshoot: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Args)]
struct StubServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8765)]
    port: u16,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Sentences containing this token are tagged all O.
    #[arg(long)]
    poison: Option<String>,
    #[arg(long)]
    embed_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Budgets(Vec<usize>);

fn parse_budgets(s: &str) -> Result<Budgets, String> {
    let budgets: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| format!("bad budget range `{s}`"))?;
        let b: usize = b.trim().parse().map_err(|_| format!("bad budget range `{s}`"))?;
        if a > b {
            return Err(format!("empty budget range `{s}`"));
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| format!("bad budget `{p}`")))
            .collect::<Result<_, _>>()?
    };
    if budgets.is_empty() {
        return Err("no budgets given".into());
    }
    Ok(Budgets(budgets))
}

fn parse_list<T>(flag: Vec<T>, file: Option<Vec<String>>, all: &[T]) -> Result<Vec<T>>
where
    T: std::str::FromStr<Err = String> + Clone,
{
    if !flag.is_empty() {
        return Ok(flag);
    }
    match file {
        Some(names) => names.iter().map(|n| n.parse().map_err(anyhow::Error::msg)).collect(),
        None => Ok(all.to_vec()),
    }
}

fn stub_config(lexicon: Option<&Path>) -> Result<StubConfig> {
    let mut config = StubConfig::default();
    if let Some(path) = lexicon {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read lexicon {}", path.display()))?;
        config.lexicon = StubConfig::parse_lexicon(&text).with_context(|| format!("in {}", path.display()))?;
    }
    Ok(config)
}

/// Connects to the configured backend, or `None` when none is configured.
fn connect(args: &BackendArgs, file: &FileConfig) -> Result<Option<Client>> {
    let Some(spec) = args.backend.clone().or_else(|| file.backend.clone()) else {
        return Ok(None);
    };
    let lexicon = args.lexicon.clone().or_else(|| file.lexicon.clone());
    if spec == "stub" {
        let service = StubService::new(stub_config(lexicon.as_deref())?)?;
        return Ok(Some(Client::in_process(Arc::new(service))?));
    }
    if lexicon.is_some() {
        log::warn!("--lexicon only applies to the built-in stub; ignored for {spec}");
    }
    Ok(Some(
        Client::connect(&spec).with_context(|| format!("cannot reach backend {spec}"))?,
    ))
}

fn require_backend(client: Option<Client>, why: &str) -> Result<Client> {
    client.with_context(|| format!("{why} needs a model backend: pass --backend URL (or `stub`)"))
}

fn open_wordnet(flag: Option<PathBuf>, file: &FileConfig) -> Result<(PathBuf, WordNetStore)> {
    let dir = flag
        .or_else(|| file.wordnet.clone())
        .or_else(find_wordnet_dir)
        .context("no WordNet 3.0 dict directory found: pass --wordnet DIR or set WNSEARCHDIR")?;
    let store = load_wordnet(&dir)?;
    log::info!("loaded {} WordNet synsets from {}", store.synset_count(), dir.display());
    Ok((dir, store))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn attack(args: AttackArgs, file: &FileConfig) -> Result<()> {
    let method = match args.select {
        Some(m) => m,
        None => match file.select.as_deref() {
            Some([one]) => one.parse().map_err(anyhow::Error::msg)?,
            Some(_) => bail!("config `select` must name exactly one method for attack"),
            None => SelectionMethod::Rdm,
        },
    };
    let replacer = match args.replace {
        Some(r) => r,
        None => match file.replace.as_deref() {
            Some([one]) => one.parse().map_err(anyhow::Error::msg)?,
            Some(_) => bail!("config `replace` must name exactly one method for attack"),
            None => ReplacerKind::Synonym,
        },
    };
    let config = AttackConfig {
        method,
        replacer,
        budget: pick(args.budget, file.budget, DEFAULT_BUDGET),
        seed: pick(args.seed, file.seed, 0),
        mlm_top_k: pick(args.mlm_top_k, file.mlm_top_k, DEFAULT_MLM_TOP_K),
        overshoot: pick(args.overshoot, file.overshoot, DEFAULT_OVERSHOOT),
    };
    config.validate()?;
    let jobs = pick(args.jobs, file.jobs, 0);
    let corpus = read_conll(&args.input)?;

    let wordnet = match replacer {
        ReplacerKind::Synonym => Some(open_wordnet(args.wordnet, file)?),
        ReplacerKind::Mlm => None,
    };
    let backend = if config.required_capabilities().is_empty() {
        None
    } else {
        Some(require_backend(
            connect(&args.backend, file)?,
            &format!("{method}+{replacer}"),
        )?)
    };
    let resources = AttackResources::new(wordnet.as_ref().map(|(_, s)| s), backend.as_ref());
    let output = attack_corpus(&corpus, &config, resources, jobs)?;

    write_file(&args.output, &serialize_conll(&output.corpus))?;
    let log_path = args
        .log
        .unwrap_or_else(|| with_suffix(&args.output, ".replacements.jsonl"));
    write_file(&log_path, &replacement_log(&output.examples))?;

    let replaced: usize = output.examples.iter().map(|e| e.replacements.len()).sum();
    let touched = output.examples.iter().filter(|e| !e.replacements.is_empty()).count();
    let mut manifest = Manifest::new("attack", json!({ "attack": config, "jobs": jobs }));
    manifest.backend = backend.as_ref().map(BackendInfo::of);
    manifest.wordnet = wordnet.as_ref().map(|(d, _)| d.display().to_string());
    manifest.inputs.push(digest(&args.input)?);
    manifest.outputs.push(digest(&args.output)?);
    manifest.outputs.push(digest(&log_path)?);
    manifest.write_next_to(&args.output)?;
    eprintln!(
        "{method}+{replacer} k={}: {replaced} replacements in {touched} of {} sentences -> {}",
        config.budget,
        corpus.len(),
        args.output.display()
    );
    Ok(())
}

fn evaluate(args: EvaluateArgs, file: &FileConfig) -> Result<()> {
    let original = read_conll(&args.original)?;
    let adversarial = read_conll(&args.adversarial)?;
    let gold = args.gold.as_deref().map(read_conll).transpose()?;
    let backend = require_backend(connect(&args.backend, file)?, "evaluation")?;
    let options = EvalOptions {
        batch_size: pick(args.batch_size, file.batch_size, DEFAULT_BATCH_SIZE),
        jobs: pick(args.jobs, file.jobs, 1),
    };
    let report = evaluate_attack(&original, &adversarial, gold.as_ref(), &backend, options)?;
    emit(&format!("{}\n", report.summary_line()))?;
    if let Some(path) = &args.report {
        write_file(path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
        let mut manifest = Manifest::new(
            "evaluate",
            json!({ "batch_size": options.batch_size, "jobs": options.jobs }),
        );
        manifest.backend = Some(BackendInfo::of(&backend));
        manifest.inputs.push(digest(&args.original)?);
        manifest.inputs.push(digest(&args.adversarial)?);
        if let Some(g) = &args.gold {
            manifest.inputs.push(digest(g)?);
        }
        manifest.outputs.push(digest(path)?);
        manifest.write_next_to(path)?;
    }
    Ok(())
}

fn sweep(args: SweepArgs, file: &FileConfig) -> Result<()> {
    let methods = parse_list(args.select, file.select.clone(), &SelectionMethod::ALL)?;
    let replacers = parse_list(args.replace, file.replace.clone(), &ReplacerKind::ALL)?;
    let budgets = pick(args.budgets.map(|b| b.0), file.budgets.clone(), (1..=9).collect());
    let base = AttackConfig {
        seed: pick(args.seed, file.seed, 0),
        mlm_top_k: pick(args.mlm_top_k, file.mlm_top_k, DEFAULT_MLM_TOP_K),
        overshoot: pick(args.overshoot, file.overshoot, DEFAULT_OVERSHOOT),
        ..AttackConfig::default()
    };
    base.validate()?;
    let plan = SweepPlan {
        methods,
        replacers,
        budgets,
        base,
        jobs: pick(args.jobs, file.jobs, 0),
    };
    let options = EvalOptions {
        batch_size: pick(args.batch_size, file.batch_size, DEFAULT_BATCH_SIZE),
        jobs: 1,
    };
    let corpus = read_conll(&args.input)?;
    let gold = args.gold.as_deref().map(read_conll).transpose()?;
    let wordnet = if plan.replacers.contains(&ReplacerKind::Synonym) {
        Some(open_wordnet(args.wordnet, file)?)
    } else {
        None
    };
    let backend = require_backend(connect(&args.backend, file)?, "a sweep")?;
    let resources = AttackResources::new(wordnet.as_ref().map(|(_, s)| s), Some(&backend));
    let rows = run_sweep(&corpus, gold.as_ref(), &plan, resources, &backend, options)?;
    let table = render_curve_tsv(&rows);
    match &args.output {
        Some(path) => {
            write_file(path, &table)?;
            let mut manifest = Manifest::new(
                "sweep",
                json!({
                    "methods": plan.methods,
                    "replacers": plan.replacers,
                    "budgets": plan.budgets,
                    "base": plan.base,
                    "jobs": plan.jobs,
                    "batch_size": options.batch_size,
                }),
            );
            manifest.backend = Some(BackendInfo::of(&backend));
            manifest.wordnet = wordnet.as_ref().map(|(d, _)| d.display().to_string());
            manifest.inputs.push(digest(&args.input)?);
            if let Some(g) = &args.gold {
                manifest.inputs.push(digest(g)?);
            }
            manifest.outputs.push(digest(path)?);
            manifest.write_next_to(path)?;
            eprintln!("{} rows -> {}", rows.len(), path.display());
        }
        None => emit(&table)?,
    }
    Ok(())
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn stats(input: &Path) -> Result<()> {
    let corpus = read_conll(input)?;
    emit(&(serde_json::to_string_pretty(&corpus_stats(&corpus))? + "\n"))
}

fn stub_serve(args: StubServeArgs) -> Result<()> {
    let mut config = stub_config(args.lexicon.as_deref())?;
    config.poison_token = args.poison;
    if let Some(dim) = args.embed_dim {
        config.embed_dim = dim;
    }
    let addr = format!("{}:{}", args.host, args.port);
    run_stub(config, &addr, |bound| {
        println!("listening on http://{bound}");
        let _ = std::io::stdout().flush();
    })?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Attack(args) => attack(args, &file),
        Command::Evaluate(args) => evaluate(args, &file),
        Command::Sweep(args) => sweep(args, &file),
        Command::Stats { input } => stats(&input),
        Command::StubServe(args) => stub_serve(args),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
