mod commands;
mod config;
mod error;
mod output;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::RunConfig;
use error::CliError;
use output::{Header, CSV_VERSION};

#[derive(Debug, Parser)]
#[command(name = "gss4d", version, about = "4D geometric shell shaping over a simulated fiber link")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (`key = value` lines); defaults apply without it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[arg(long, global = true, value_enum)]
    metric: Option<MetricArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Mi,
    Rbmd,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rates and FEC BERs over the distance x launch-power grid.
    Evaluate,
    /// Pattern search over GSS or PS parameters; writes the constellation
    /// and `<out>.trace.csv`.
    Optimize,
    /// Post-FEC BER per distance at the operating launch power.
    FecBer,
    /// Writes the constellation file and prints a JSON summary.
    Export,
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let raw = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        })?,
        None => String::new(),
    };
    let mut cfg = RunConfig::parse(&raw)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
        cfg.search.seed = s;
    }
    if let Some(m) = cli.metric {
        cfg.metric = config::parse_metric(match m {
            MetricArg::Mi => "mi",
            MetricArg::Rbmd => "rbmd",
        })?;
    }
    cfg.search.objective = cfg.metric;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| CliError::config(format!("workers: {e}")))?;
    let name = match cli.command {
        Command::Evaluate => "evaluate",
        Command::Optimize => "optimize",
        Command::FecBer => "fec-ber",
        Command::Export => "export",
    };
    let header = Header {
        tool: "gss4d",
        version: env!("CARGO_PKG_VERSION"),
        csv_version: CSV_VERSION,
        command: name,
        seed: cfg.seed,
        metric: match cfg.metric {
            gss4d::optimizer::Metric::Mi => "mi",
            gss4d::optimizer::Metric::Rbmd => "rbmd",
        },
        workers: cli.workers,
        config: &raw,
    }
    .line();
    let out = cli.out.as_deref();

    pool.install(|| match cli.command {
        Command::Evaluate => emit(out, &(header.clone() + &commands::cmd_evaluate(&cfg)?)),
        Command::FecBer => emit(out, &(header.clone() + &commands::cmd_fec_ber(&cfg)?)),
        Command::Export => {
            let (text, summary) = commands::cmd_export(&cfg)?;
            let json = serde_json::to_string_pretty(&summary).expect("plain struct serializes");
            match out {
                Some(p) => {
                    write_file(p, &text)?;
                    println!("{json}");
                    Ok(())
                }
                None => {
                    print!("{text}");
                    eprintln!("{json}");
                    Ok(())
                }
            }
        }
        Command::Optimize => {
            let opt = commands::cmd_optimize(&cfg)?;
            let json = serde_json::to_string_pretty(&opt.summary).expect("plain struct serializes");
            match out {
                Some(p) => {
                    let mut trace = p.as_os_str().to_owned();
                    trace.push(".trace.csv");
                    write_file(p, &opt.constellation)?;
                    write_file(Path::new(&trace), &(header.clone() + &opt.trace_csv))?;
                    println!("{json}");
                }
                None => {
                    print!("{}", opt.constellation);
                    eprintln!("{json}");
                }
            }
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gss4d: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
