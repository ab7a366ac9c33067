use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use loalign::catalog::{parse_framework, ColumnMap, FrameworkCatalog};
use loalign::pipeline::{EmbedderKind, PipelineConfig};
use loalign::runstore::{self, Workdir};
use loalign::service::{self, SnapshotHandle};
use loalign::Error;

/// Learning-outcome alignment: embed, cluster and compare curriculum outcomes.
///
/// Stages can be run one at a time against a working directory
/// (ingest → embed → fit → analyze → validate → publish) or all at once
/// with `run`.
#[derive(Debug, Parser)]
#[command(name = "loalign", version)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the catalog CSV into a working directory.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Working directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Tokenize and embed every outcome.
    Embed {
        #[command(flatten)]
        embed: EmbedArgs,
        /// Seed for the hash embedder.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reduce, cluster and label topics.
    Fit {
        #[command(flatten)]
        topics: TopicArgs,
        /// Seed for k-means.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute matrices, distributions, cross-subject topics and spirality.
    Analyze {
        #[arg(long)]
        out: PathBuf,
    },
    /// Framework consistency, plus expert agreement with --labels.
    Validate {
        /// Expert pair labels: code_a,code_b,label[,rater].
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Publish a fully staged working directory as an immutable run.
    Publish {
        /// Working directory holding the staged results.
        #[arg(long)]
        work: PathBuf,
        /// Directory receiving `<run_id>/`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the static dashboard bundle of a published run.
    Export {
        /// Run directory or its manifest.json.
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve a published run over HTTP until interrupted.
    Serve {
        /// Run directory or its manifest.json.
        run: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Origin allowed to call the API from a browser.
        #[arg(long)]
        cors_origin: Option<String>,
    },
    /// Every stage plus publish in one go.
    Run {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        embed: EmbedArgs,
        #[command(flatten)]
        topics: TopicArgs,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Seed for both the hash embedder and k-means.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory receiving `<run_id>/`.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Catalog CSV.
    #[arg(long)]
    input: PathBuf,
    /// Program definitions (TOML, `[programs.NAME] SUBJ = "lo-hi"`).
    #[arg(long)]
    programs: Option<PathBuf>,
    /// Column-name mapping (TOML, e.g. `code = "LO Code"`).
    #[arg(long)]
    columns: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Embedder {
    Hash,
    File,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[arg(long, value_enum)]
    embedder: Option<Embedder>,
    /// Precomputed vector cache for `--embedder file`.
    #[arg(long)]
    embeddings_path: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Debug, Args)]
struct TopicArgs {
    /// Reduced dimension before clustering.
    #[arg(long)]
    reduced_dim: Option<usize>,
    /// Number of clusters (default: one per 18 outcomes).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    min_topic_size: Option<usize>,
}

impl EmbedArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(e) = self.embedder {
            cfg.embedder = match e {
                Embedder::Hash => EmbedderKind::Hash,
                Embedder::File => EmbedderKind::File,
            };
        }
        if let Some(d) = self.dim {
            cfg.dim = d;
        }
    }
}

impl TopicArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(d) = self.reduced_dim {
            cfg.topics.reduced_dim = d;
        }
        if self.k.is_some() {
            cfg.topics.k = self.k;
        }
        if let Some(m) = self.min_topic_size {
            cfg.topics.min_topic_size = m;
        }
    }
}

/// Failures split by exit status.
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<loalign::runstore::RunStoreError> for Failure {
    fn from(e: loalign::runstore::RunStoreError) -> Self {
        Failure::Data(e.into())
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Error> {
    std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String, Error> {
    String::from_utf8(read_file(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn load_inputs(args: &InputArgs) -> Result<(FrameworkCatalog, String), Error> {
    let columns: ColumnMap = match &args.columns {
        Some(p) => toml::from_str(&read_text(p)?).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => ColumnMap::default(),
    };
    let catalog = parse_framework(read_file(&args.input)?.as_slice(), &columns)?;
    let programs = args.programs.as_deref().map(read_text).transpose()?.unwrap_or_default();
    log::info!("ingested {} outcomes from {}", catalog.len(), args.input.display());
    Ok((catalog, programs))
}

fn check_embedder(cfg: &PipelineConfig, path: Option<&Path>) -> Result<(), Failure> {
    if cfg.embedder == EmbedderKind::File && path.is_none() {
        return Err(Failure::Usage("--embedder file requires --embeddings-path".into()));
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Ingest { input, out } => {
            let (catalog, programs) = load_inputs(&input)?;
            Workdir::new(&out).ingest(&catalog, &programs)?;
            println!("ingested {} outcomes into {}", catalog.len(), out.display());
        }
        Command::Embed { embed, seed, out } => {
            let wd = Workdir::new(&out);
            let mut cfg = wd.config()?;
            embed.apply(&mut cfg);
            if let Some(s) = seed {
                cfg.embed_seed = s;
            }
            check_embedder(&cfg, embed.embeddings_path.as_deref())?;
            let emb = wd.embed(&cfg, embed.embeddings_path.as_deref())?;
            println!("embedded {} outcomes ({}, dim {})", emb.len(), emb.provider_tag(), emb.dim());
        }
        Command::Fit { topics, seed, out } => {
            let wd = Workdir::new(&out);
            let mut cfg = wd.config()?;
            topics.apply(&mut cfg);
            if let Some(s) = seed {
                cfg.topics.kmeans.seed = s;
            }
            let model = wd.fit(&cfg)?;
            println!(
                "fitted {} topics ({} outliers; d={}, k={})",
                model.assignment.k(),
                model.assignment.outlier_count(),
                model.effective_reduced_dim,
                model.effective_k
            );
        }
        Command::Analyze { out } => {
            let wd = Workdir::new(&out);
            let cfg = wd.config()?;
            let a = wd.analyze(&cfg)?;
            println!(
                "analyzed {} subjects; {} cross-subject topics",
                a.subject_matrix.row_labels.len(),
                a.cross_topics.len()
            );
        }
        Command::Validate { labels, out } => {
            let labels = labels.as_deref().map(read_file).transpose()?;
            let r = Workdir::new(&out).validate(labels.as_deref())?;
            println!(
                "standard consistency {:.4} ({}/{})",
                r.standard.accuracy, r.standard.n_consistent, r.standard.n_eligible
            );
            if let Some(s) = &r.strand {
                println!("strand consistency {:.4} ({}/{})", s.accuracy, s.n_consistent, s.n_eligible);
            }
            if let Some(e) = &r.expert {
                println!("expert agreement {:.4} ({}/{})", e.accuracy, e.n_correct, e.n_pairs);
            }
        }
        Command::Publish { work, out } => {
            let m = runstore::publish_run(&Workdir::new(work), &out)?;
            println!("{}", out.join(&m.run_id).display());
        }
        Command::Export { run, out } => {
            let snap = runstore::load_run(&run)?;
            let files = runstore::export_dashboard_bundle(&snap, &out)?;
            println!("wrote {} files to {}", files.len(), out.display());
        }
        Command::Serve { run, addr, cors_origin } => {
            let snap = runstore::load_run(&run)?;
            let run_id = snap.run_id.clone();
            let handle = Arc::new(SnapshotHandle::new(snap));
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Data(io_error("runtime", e)))?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .map_err(|e| Failure::Data(io_error(&addr.to_string(), e)))?;
                let bound = listener.local_addr().map_err(|e| Failure::Data(io_error("socket", e)))?;
                println!("serving run {run_id} on http://{bound}/api/v1");
                let shutdown = async {
                    let _ = tokio::signal::ctrl_c().await;
                };
                service::serve(listener, handle, cors_origin.as_deref(), shutdown)
                    .await
                    .map_err(|e| Failure::Data(io_error(&bound.to_string(), e)))
            })?;
        }
        Command::Run {
            input,
            embed,
            topics,
            labels,
            seed,
            out,
        } => {
            let mut cfg = PipelineConfig::seeded(seed);
            embed.apply(&mut cfg);
            topics.apply(&mut cfg);
            check_embedder(&cfg, embed.embeddings_path.as_deref())?;
            let (catalog, programs) = load_inputs(&input)?;
            let labels = labels.as_deref().map(read_file).transpose()?;
            let m = runstore::publish_analysis(
                &out,
                &catalog,
                &programs,
                &cfg,
                embed.embeddings_path.as_deref(),
                labels.as_deref(),
            )?;
            println!("{}", out.join(&m.run_id).display());
        }
    }
    Ok(())
}

fn io_error(what: &str, source: std::io::Error) -> Error {
    Error::Io {
        path: what.to_string(),
        source,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
