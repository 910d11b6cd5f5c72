use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dekg::eval::{evaluate, EvalReport, ModelScorer, Pattern, TieMode};
use dekg::gsm::{labeled_subgraph, ExtractOptions, LabelMode};
use dekg::kg::synthetic::SyntheticConfig;
use dekg::kg::{build_eval_set, write_triples, write_vocab_files, Dataset, DatasetPaths, LinkClass, MixRatio, Triple};
use dekg::model::{Architecture, Context, Model};
use dekg::numeric::ParameterStore;
use dekg::training::{train, write_loss_csv, Ablation, EpochLoss, TrainConfig, TrainOptions, Validation};
use dekg::{Error, Result};

#[derive(Parser)]
#[command(
    name = "dekg",
    version,
    about = "Link prediction across disconnected knowledge graphs"
)]
struct Cli {
    /// Base seed for every random stream; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mix enclosing and bridging test links at a fixed ratio.
    BuildDataset(BuildDataset),
    /// Train a model and write its checkpoint and loss log.
    Train(Train),
    /// Rank test links with a trained checkpoint.
    Evaluate(Evaluate),
    /// Train and evaluate the full model and its three ablations.
    Ablate(Ablate),
    /// Print the labeled subgraph around one link.
    InspectSubgraph(Inspect),
    /// Dump semantic and topological embeddings of chosen links as CSV.
    ExportEmbeddings(Export),
}

#[derive(Args)]
struct ConfigArgs {
    /// `key = value` file; missing keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct GraphArgs {
    /// Original graph.
    #[arg(long)]
    train: PathBuf,
    /// Observed emerging graph.
    #[arg(long)]
    dekg: Option<PathBuf>,
    /// Extra known triples, used for filtering.
    #[arg(long)]
    valid: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    enclosing: PathBuf,
    #[arg(long)]
    bridging: PathBuf,
    /// Enclosing:bridging mix (EQ, MB, ME).
    #[arg(long, default_value = "EQ")]
    ratio: MixRatio,
    /// Number of resampled evaluation sets.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Tie handling (average, pessimistic, optimistic).
    #[arg(long, default_value = "average")]
    tie: TieMode,
}

#[derive(Args)]
struct BuildDataset {
    /// Generate the synthetic two-component benchmark into `--out` first.
    #[arg(long)]
    synthetic: bool,
    #[arg(long, required_unless_present = "synthetic")]
    train: Option<PathBuf>,
    #[arg(long)]
    dekg: Option<PathBuf>,
    #[arg(long, required_unless_present = "synthetic")]
    enclosing: Option<PathBuf>,
    #[arg(long, required_unless_present = "synthetic")]
    bridging: Option<PathBuf>,
    #[arg(long, default_value = "EQ")]
    ratio: MixRatio,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Train {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    graph: GraphArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Evaluate {
    /// Checkpoint written by `train`.
    #[arg(long)]
    ckpt: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    test: TestArgs,
    /// Report CSV (default: next to the checkpoint).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Ablate {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    test: TestArgs,
    /// Output directory; one sub-directory per variant.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Inspect {
    #[command(flatten)]
    graph: GraphArgs,
    /// Take hops, node cap and labeling from this checkpoint's config.
    #[arg(long)]
    ckpt: Option<PathBuf>,
    #[arg(long)]
    head: String,
    #[arg(long)]
    relation: String,
    #[arg(long)]
    tail: String,
    #[arg(long)]
    hops: Option<usize>,
    /// Drop nodes beyond the hop budget instead of labeling them -1.
    #[arg(long)]
    pruned: bool,
}

#[derive(Args)]
struct Export {
    #[arg(long)]
    ckpt: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    /// TSV of `head relation tail` links to export.
    #[arg(long)]
    links: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        Error::Config(_) => 4,
        Error::MalformedLine { .. }
        | Error::UnknownRelation { .. }
        | Error::DuplicateTriple { .. }
        | Error::UnknownEntity(_)
        | Error::UnknownRelationId(_)
        | Error::InsufficientLinks { .. }
        | Error::InvalidData(_)
        | Error::Empty(_)
        | Error::SameEndpoints(_) => 5,
        Error::Checkpoint(_) | Error::UnknownSlot(_) | Error::DuplicateSlot(_) => 6,
        Error::NonFinite(_) => 7,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(4);
        }
    }
    let res = match &cli.command {
        Command::BuildDataset(a) => build_dataset(&cli, a),
        Command::Train(a) => train_cmd(&cli, a),
        Command::Evaluate(a) => evaluate_cmd(&cli, a),
        Command::Ablate(a) => ablate_cmd(&cli, a),
        Command::InspectSubgraph(a) => inspect_cmd(&cli, a),
        Command::ExportEmbeddings(a) => export_cmd(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_owned(),
        source,
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(io_err(path))
}

fn print_settings(title: &str, pairs: &[(&str, String)]) {
    println!("# {title}");
    for (k, v) in pairs {
        println!("{k} = {v}");
    }
}

fn workers() -> String {
    rayon::current_num_threads().to_string()
}

/// Defaults, then the config file, then `DEKG_*` variables, then `--set`,
/// then `--seed`.
fn resolve_config(cli: &Cli, args: &ConfigArgs) -> Result<TrainConfig> {
    let mut c = match &args.config {
        Some(p) => TrainConfig::load(p)?,
        None => TrainConfig::default(),
    };
    c.apply_env(|k| std::env::var(k).ok())?;
    for kv in &args.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got `{kv}`")))?;
        c.set(k.trim(), v)?;
    }
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    c.validate()?;
    Ok(c)
}

fn print_config(c: &TrainConfig) {
    println!("# resolved configuration");
    print!("{c}");
    println!("workers = {}", workers());
}

fn dataset(graph: &GraphArgs, test: Option<&TestArgs>, relations: Option<&[String]>) -> Result<Dataset> {
    let paths = DatasetPaths {
        train: graph.train.clone(),
        valid: graph.valid.clone(),
        dekg: graph.dekg.clone(),
        test_enclosing: test.map(|t| t.enclosing.clone()),
        test_bridging: test.map(|t| t.bridging.clone()),
    };
    Dataset::load(&paths, relations)
}

fn build_dataset(cli: &Cli, a: &BuildDataset) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    print_settings(
        "resolved configuration",
        &[
            ("synthetic", a.synthetic.to_string()),
            ("ratio", a.ratio.to_string()),
            ("seed", seed.to_string()),
            ("out", a.out.display().to_string()),
        ],
    );
    create_dir(&a.out)?;
    let paths = if a.synthetic {
        SyntheticConfig {
            seed,
            ..Default::default()
        }
        .generate()?
        .write_to(&a.out)?
    } else {
        DatasetPaths {
            train: a.train.clone().expect("required by clap"),
            valid: None,
            dekg: a.dekg.clone(),
            test_enclosing: a.enclosing.clone(),
            test_bridging: a.bridging.clone(),
        }
    };
    let ds = Dataset::load(&paths, None)?;
    let set = build_eval_set(&ds.test_enclosing, &ds.test_bridging, a.ratio, seed)?;
    write_triples(a.out.join("eval_enclosing.tsv"), &set.enclosing, &ds.vocab)?;
    write_triples(a.out.join("eval_bridging.tsv"), &set.bridging, &ds.vocab)?;
    set.write_manifest(a.out.join("manifest.txt"))?;
    print!("{}", set.manifest());
    Ok(())
}

const RELATION_KEY: &str = "relation.";

fn checkpoint_meta(config: &TrainConfig, ds: &Dataset) -> Vec<(String, String)> {
    let mut meta = config.pairs();
    for (i, r) in ds.vocab.relations().iter().enumerate() {
        meta.push((format!("{RELATION_KEY}{i}"), r.clone()));
    }
    meta
}

struct Loaded {
    model: Model,
    config: TrainConfig,
    relations: Vec<String>,
}

fn load_model(path: &Path) -> Result<Loaded> {
    let (store, meta) = ParameterStore::load_checkpoint(path)?;
    let keys = TrainConfig::keys();
    let config = TrainConfig::from_pairs(
        meta.iter()
            .filter(|(k, _)| keys.contains(&k.as_str()))
            .map(|(k, v)| (k.as_str(), v.as_str())),
    )?;
    let mut relations: Vec<(usize, String)> = meta
        .iter()
        .filter_map(|(k, v)| Some((k.strip_prefix(RELATION_KEY)?.parse().ok()?, v.clone())))
        .collect();
    relations.sort();
    if relations.iter().enumerate().any(|(i, (j, _))| i != *j) {
        return Err(Error::Checkpoint("relation list is not contiguous".into()));
    }
    let mc = config.model_config(relations.len());
    let arch = Architecture::bind(&store, mc.labeling, mc.semantic, mc.node_cap)?;
    if arch.config.n_relations != relations.len() {
        return Err(Error::Checkpoint(format!(
            "{} relations in the metadata, {} in the parameters",
            relations.len(),
            arch.config.n_relations
        )));
    }
    Ok(Loaded {
        model: Model { arch, store },
        config,
        relations: relations.into_iter().map(|(_, r)| r).collect(),
    })
}

fn train_cmd(cli: &Cli, a: &Train) -> Result<()> {
    let config = resolve_config(cli, &a.config)?;
    print_config(&config);
    let ds = dataset(&a.graph, None, None)?;
    create_dir(&a.out)?;
    let outcome = run_training(&ds, &config, &a.out)?;
    println!(
        "trained {} epochs on {} triples; checkpoint {}",
        outcome.losses.len(),
        ds.train.len(),
        a.out.join("checkpoint.bin").display()
    );
    Ok(())
}

fn run_training(ds: &Dataset, config: &TrainConfig, out: &Path) -> Result<dekg::training::TrainOutcome> {
    let known = ds.known_triples();
    let valid: Vec<Triple> = ds
        .valid
        .iter()
        .copied()
        .filter(|t| ds.vocab.classify_link(t).ok() == Some(LinkClass::Transductive))
        .collect();
    let ctx = Context::new(ds.train.clone());
    let progress = |l: &EpochLoss| {
        if l.epoch == 1 || l.epoch.is_multiple_of(10) || l.epoch == config.epochs {
            eprintln!(
                "epoch {:>4}  loss {:.4}  rank {:.4}  contrastive {:.4}",
                l.epoch, l.total, l.rank, l.contrastive
            );
        }
    };
    let opts = TrainOptions {
        validation: (config.patience > 0 && !valid.is_empty()).then(|| Validation {
            context: ctx.view(),
            triples: &valid,
            known: &known,
        }),
        dump_dir: Some(out),
        progress: Some(&progress),
    };
    let outcome = train(&ds.train, config, &opts)?;
    if let Some(e) = outcome.best_epoch {
        eprintln!("kept parameters from epoch {e}");
    }
    outcome
        .model
        .store
        .save_checkpoint(out.join("checkpoint.bin"), &checkpoint_meta(config, ds))?;
    write_loss_csv(out.join("loss.csv"), &outcome.losses)?;
    write_file(&out.join("config.txt"), &config.to_string())?;
    write_vocab_files(out, &ds.vocab)?;
    Ok(outcome)
}

fn eval_report(model: &Model, ds: &Dataset, test: &TestArgs, base_seed: u64) -> Result<EvalReport> {
    let sets = (0..test.seeds)
        .map(|i| build_eval_set(&ds.test_enclosing, &ds.test_bridging, test.ratio, base_seed + i))
        .collect::<Result<Vec<_>>>()?;
    let ctx = Context::new(ds.context.clone());
    let scorer = ModelScorer {
        model,
        context: ctx.view(),
    };
    evaluate(&scorer, &sets, &ds.known_triples(), &Pattern::ALL, test.tie)
}

fn evaluate_cmd(cli: &Cli, a: &Evaluate) -> Result<()> {
    let loaded = load_model(&a.ckpt)?;
    let seed = cli.seed.unwrap_or(loaded.config.seed);
    print_config(&loaded.config);
    print_settings(
        "evaluation",
        &[
            ("ratio", a.test.ratio.to_string()),
            ("seeds", a.test.seeds.to_string()),
            ("base_seed", seed.to_string()),
            ("tie", a.test.tie.to_string()),
        ],
    );
    let ds = dataset(&a.graph, Some(&a.test), Some(&loaded.relations))?;
    let report = eval_report(&loaded.model, &ds, &a.test, seed)?;
    let out = a.out.clone().unwrap_or_else(|| a.ckpt.with_file_name("report.csv"));
    write_file(&out, &report.to_csv())?;
    print!("{}", report.to_table());
    println!("report written to {}", out.display());
    Ok(())
}

fn ablate_cmd(cli: &Cli, a: &Ablate) -> Result<()> {
    let base = resolve_config(cli, &a.config)?;
    print_config(&base);
    let ds = dataset(&a.graph, Some(&a.test), None)?;
    create_dir(&a.out)?;
    let mut csv = String::from("variant,split,MRR,Hits@1,Hits@5,Hits@10\n");
    let mut rows = Vec::new();
    for ab in Ablation::ALL {
        let config = ab.apply(&base);
        eprintln!("== {}", ab.label());
        let dir = a.out.join(ab.label());
        create_dir(&dir)?;
        let outcome = run_training(&ds, &config, &dir)?;
        let report = eval_report(&outcome.model, &ds, &a.test, base.seed)?;
        write_file(&dir.join("report.csv"), &report.to_csv())?;
        let mut cells = Vec::new();
        for split in ["overall", "enclosing", "bridging"] {
            match report.get(split, "all") {
                Some(r) => {
                    let m = &r.metrics;
                    let _ = writeln!(
                        csv,
                        "{},{split},{},{},{},{}",
                        ab.label(),
                        m.mrr,
                        m.hits1,
                        m.hits5,
                        m.hits10
                    );
                    cells.push(format!("{:>8.4} {:>8.4}", m.mrr, m.hits10));
                }
                None => cells.push(format!("{:>8} {:>8}", "-", "-")),
            }
        }
        rows.push(format!("{:<8}{}", ab.label(), cells.join("  ")));
    }
    write_file(&a.out.join("ablation.csv"), &csv)?;
    println!(
        "{:<8}{:>17}  {:>17}  {:>17}",
        "variant", "overall MRR H@10", "enclosing MRR H@10", "bridging MRR H@10"
    );
    for r in rows {
        println!("{r}");
    }
    Ok(())
}

fn inspect_cmd(cli: &Cli, a: &Inspect) -> Result<()> {
    let (relations, defaults) = match &a.ckpt {
        Some(p) => {
            let l = load_model(p)?;
            let o = l.config.model_config(l.relations.len()).extract_options();
            (Some(l.relations), o)
        }
        None => (None, ExtractOptions::default()),
    };
    let opts = ExtractOptions {
        hops: a.hops.unwrap_or(defaults.hops),
        mode: if a.pruned { LabelMode::Pruned } else { defaults.mode },
        node_cap: defaults.node_cap,
    };
    print_settings(
        "resolved configuration",
        &[
            ("hops", opts.hops.to_string()),
            ("labeling", format!("{:?}", opts.mode).to_lowercase()),
            ("node_cap", opts.node_cap.to_string()),
            ("seed", cli.seed.unwrap_or(0).to_string()),
        ],
    );
    let ds = dataset(&a.graph, None, relations.as_deref())?;
    let t = named_triple(&ds, &a.head, &a.relation, &a.tail)?;
    let sg = labeled_subgraph(&ds.context, &t, &opts)?;
    print!("{}", sg.to_edge_list(&ds.vocab));
    Ok(())
}

fn named_triple(ds: &Dataset, h: &str, r: &str, t: &str) -> Result<Triple> {
    let ent = |n: &str| {
        ds.vocab
            .entity_id(n)
            .ok_or_else(|| Error::InvalidData(format!("unknown entity `{n}`")))
    };
    let rel = ds
        .vocab
        .relation_id(r)
        .ok_or_else(|| Error::InvalidData(format!("unknown relation `{r}`")))?;
    Ok(Triple {
        head: ent(h)?,
        rel,
        tail: ent(t)?,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn export_cmd(a: &Export) -> Result<()> {
    let loaded = load_model(&a.ckpt)?;
    print_config(&loaded.config);
    let ds = dataset(&a.graph, None, Some(&loaded.relations))?;
    let text = fs::read_to_string(&a.links).map_err(io_err(&a.links))?;
    let mut links = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(Error::MalformedLine {
                path: a.links.clone(),
                line: n + 1,
                found: f.len(),
            });
        }
        let t = named_triple(&ds, f[0], f[1], f[2])?;
        links.push((f, t));
    }
    let ctx = Context::new(ds.context.clone());
    let d = loaded.config.d;
    let mut csv = String::from("head,relation,tail,vector");
    for i in 0..d {
        let _ = write!(csv, ",x{i}");
    }
    csv.push('\n');
    for (names, t) in &links {
        let e = loaded.model.embeddings(&ctx.view(), t)?;
        for (kind, v) in [
            ("head_semantic", &e.head_semantic),
            ("tail_semantic", &e.tail_semantic),
            ("head_topological", &e.head_topological),
            ("tail_topological", &e.tail_topological),
            ("graph", &e.graph),
        ] {
            let _ = write!(
                csv,
                "{},{},{},{kind}",
                csv_field(names[0]),
                csv_field(names[1]),
                csv_field(names[2])
            );
            for x in v {
                let _ = write!(csv, ",{x}");
            }
            csv.push('\n');
        }
    }
    write_file(&a.out, &csv)?;
    println!("{} links exported to {}", links.len(), a.out.display());
    Ok(())
}
