use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use conceptmap::commands::{self, ClusterMethod, Overrides, WordSource};
use conceptmap::studies::{PosSelection, Study, StudyConfig};
use conceptmap::{Error, Result};

#[derive(Parser)]
#[command(name = "conceptmap", version, about = "Compare association and embedding semantic networks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Study configuration (TOML); also supplies defaults for the other commands.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replicate and cell parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Fixed cosine threshold for embedding networks.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[arg(long, global = true)]
    strength: Option<String>,
    /// noun, verb, adjective, adverb or all.
    #[arg(long, global = true)]
    pos: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Infomap,
    Agglomerative,
}

#[derive(Subcommand)]
enum Command {
    /// Norms file to a canonical association table.
    Ingest {
        #[arg(long)]
        norms: PathBuf,
        #[arg(long)]
        synonyms: Option<PathBuf>,
        /// Also drop edges whose words have no vector.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Association table to a WA graph, honoring --strength and --pos.
    BuildWa {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Cosine graph over a word list or another graph's nodes.
    BuildWe {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, conflicts_with = "nodes_of", required_unless_present = "nodes_of")]
        words: Option<PathBuf>,
        #[arg(long)]
        nodes_of: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Partition a graph.
    Cluster {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "infomap")]
        method: Method,
        /// Required for agglomerative clustering.
        #[arg(long, required_if_eq("method", "agglomerative"))]
        embeddings: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// IC and SC between a clustered WA graph and a clustered WE graph.
    Compare {
        #[arg(long)]
        wa_graph: PathBuf,
        #[arg(long)]
        wa_partition: PathBuf,
        #[arg(long)]
        we_graph: PathBuf,
        #[arg(long)]
        we_partition: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Modularity, average degree and sparsity of a clustered graph.
    Stats {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run a study: 1, 2, 3-sample or 3-noise. Requires --config.
    Run { study: String },
}

fn parse_flag<T: std::str::FromStr<Err = Error>>(flag: &str, value: &Option<String>) -> Result<Option<T>> {
    value
        .as_deref()
        .map(|v| v.parse().map_err(|e: Error| Error::Config(vec![format!("--{flag}: {e}")])))
        .transpose()
}

fn execute(cli: Cli, argv: Vec<String>) -> Result<()> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("--threads: {e}")))?;
    }
    let overrides = Overrides {
        seed: g.seed,
        threshold: g.threshold,
        strength: parse_flag("strength", &g.strength)?,
        pos: parse_flag::<PosSelection>("pos", &g.pos)?,
    };
    let cfg = match (&g.config, &cli.command) {
        (_, Command::Run { .. }) => StudyConfig::default(),
        (Some(path), _) => {
            let mut c = StudyConfig::load(path)?;
            overrides.apply(&mut c)?;
            c
        }
        (None, _) => {
            let mut c = StudyConfig::default();
            overrides.apply(&mut c)?;
            c
        }
    };
    let written = match cli.command {
        Command::Ingest {
            norms,
            synonyms,
            embeddings,
            out,
        } => commands::ingest(
            &commands::IngestArgs {
                norms,
                synonyms,
                embeddings,
                out,
                prescreen: cfg.prescreen_options(),
            },
            argv,
        )?,
        Command::BuildWa { table, out } => commands::build_wa(
            &commands::BuildWaArgs {
                table,
                strength: cfg.strength,
                rule: cfg.strength_rule,
                pos: cfg.pos,
                out,
            },
            argv,
        )?,
        Command::BuildWe {
            embeddings,
            words,
            nodes_of,
            out,
        } => {
            let words = match (words, nodes_of) {
                (Some(w), _) => WordSource::List(w),
                (None, Some(gph)) => WordSource::Graph(gph),
                (None, None) => unreachable!("clap requires one word source"),
            };
            commands::build_we(
                &commands::BuildWeArgs {
                    embeddings,
                    words,
                    threshold: g.threshold,
                    out,
                },
                argv,
            )?
        }
        Command::Cluster {
            graph,
            method,
            embeddings,
            out,
        } => {
            let method = match method {
                Method::Infomap => ClusterMethod::Infomap {
                    seed: cfg.seed,
                    options: cfg.infomap_options(),
                },
                Method::Agglomerative => ClusterMethod::Agglomerative {
                    embeddings: embeddings.expect("clap requires --embeddings"),
                    linkage: cfg.linkage,
                    cut: cfg.tree_cut(),
                },
            };
            commands::cluster(&commands::ClusterArgs { graph, method, out }, argv)?
        }
        Command::Compare {
            wa_graph,
            wa_partition,
            we_graph,
            we_partition,
            embeddings,
            out,
        } => {
            let (report, written) = commands::compare(
                &commands::CompareArgs {
                    wa_graph,
                    wa_partition,
                    we_graph,
                    we_partition,
                    embeddings,
                    options: cfg.convergence_options(),
                    seed: cfg.seed,
                    out,
                },
                argv,
            )?;
            println!("ic={:.4} sc={:.4} pairs={}", report.ic_percent, report.sc_percent, report.pairs.len());
            written
        }
        Command::Stats { graph, partition, out } => {
            let (s, written) = commands::stats(&commands::StatsArgs { graph, partition, out }, argv)?;
            println!("{}", serde_json::to_string_pretty(&s)?);
            written
        }
        Command::Run { study } => {
            let study: Study = study.parse().map_err(|e: Error| Error::Config(vec![e.to_string()]))?;
            let config = g
                .config
                .clone()
                .ok_or_else(|| Error::Config(vec!["run: --config is required".into()]))?;
            commands::run(
                &commands::RunArgs {
                    study,
                    config,
                    overrides,
                    out_dir: g.out_dir.clone(),
                },
                argv,
            )?
        }
    };
    for p in written {
        log::info!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
