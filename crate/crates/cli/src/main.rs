use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subsel_core::opcount::{render_csv, render_text, CountMethod};
use subsel_core::search::DEFAULT_PAIR_LIMIT;
use subsel_core::Method;
use subsel_cli::commands::{self, BenchConfig, CountOpsConfig, DataSource, RunConfig};
use subsel_cli::{CliError, ColumnSpec, Format, HeaderMode};

/// Exact best-subset linear regression by exhaustive search.
#[derive(Debug, Parser)]
#[command(name = "subsel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find the best k-subset of predictors for each responder.
    Select(SelectArgs),
    /// Run every method and check that they agree.
    Verify(SelectArgs),
    /// Time each method on synthetic data and compare operation counts.
    Bench(BenchArgs),
    /// Measured vs predicted floating-point operation counts.
    CountOps(CountOpsArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV file, one observation per row. Without it, synthetic data is used.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Predictor columns (names or 0-based indices, `a-b` ranges, comma separated).
    #[arg(long)]
    predictors: Option<String>,
    /// Responder columns; required with --input.
    #[arg(long)]
    responders: Option<String>,
    #[arg(long, value_enum, default_value_t = HeaderMode::Auto)]
    header: HeaderMode,
    /// Synthetic observations.
    #[arg(long, default_value_t = 100)]
    d: usize,
    /// Synthetic predictors.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Synthetic responders.
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Subset size.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "cond-uncorrelation")]
    method: Method,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Refuse runs scoring more than this many (subset, responder) pairs.
    #[arg(long, default_value_t = DEFAULT_PAIR_LIMIT, conflicts_with = "no_limit")]
    limit: u64,
    #[arg(long)]
    no_limit: bool,
    /// Report the best subset for every size 1..=k.
    #[arg(long)]
    sweep: bool,
    /// Leave wall-clock times out of the report.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    d: usize,
    #[arg(long, default_value_t = 15)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Methods to time (comma separated); defaults to all.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct CountOpsArgs {
    #[arg(long, value_delimiter = ',', default_value = "alg1,alg2,hat-single,hat-a,hat-b")]
    methods: Vec<CountMethod>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "100")]
    d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    m: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

const HAT_NOTE: &str = "hat schedule: Gaussian elimination of X'X (k+1 reciprocals), forward and back \
substitution; hat-a forms X*beta then residuals, hat-b forms H = X(X'X)^-1 then H*X'y.";

impl InputArgs {
    fn source(self) -> Result<DataSource, CliError> {
        match self.input {
            Some(path) => {
                let responders = self
                    .responders
                    .ok_or_else(|| CliError::Config("--responders is required with --input".into()))?;
                Ok(DataSource::Csv {
                    path,
                    spec: ColumnSpec {
                        predictors: self.predictors,
                        responders,
                        header: self.header,
                    },
                })
            }
            None => Ok(DataSource::Synthetic {
                d: self.d,
                n: self.n,
                m: self.m,
                seed: self.seed,
            }),
        }
    }
}

impl SelectArgs {
    fn into_config(self) -> Result<(RunConfig, Format), CliError> {
        let format = self.format;
        let cfg = RunConfig {
            k: self.k,
            method: self.method,
            threads: self.threads,
            limit: (!self.no_limit).then_some(self.limit),
            sweep: self.sweep,
            timing: !self.no_timing,
            source: self.input.source()?,
        };
        Ok((cfg, format))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Select(args) => {
            let (cfg, format) = args.into_config()?;
            let report = commands::cmd_select(&cfg)?;
            print!("{}", report.render(format)?);
        }
        Command::Verify(args) => {
            let (cfg, format) = args.into_config()?;
            let report = commands::cmd_verify(&cfg)?;
            print!("{}", report.render(format)?);
            if let Some(err) = commands::verification_failure(&report) {
                return Err(err);
            }
        }
        Command::Bench(args) => {
            let cfg = BenchConfig {
                d: args.d,
                n: args.n,
                k: args.k,
                m: args.m,
                seed: args.seed,
                threads: args.threads,
                methods: if args.methods.is_empty() {
                    Method::ALL.to_vec()
                } else {
                    args.methods
                },
                limit: None,
                trials: args.trials,
            };
            let report = commands::cmd_bench(&cfg)?;
            print!("{}", report.render(args.format)?);
        }
        Command::CountOps(args) => {
            let rows = commands::cmd_count_ops(&CountOpsConfig {
                methods: args.methods,
                ks: args.k,
                ds: args.d,
                ms: args.m,
                trials: args.trials,
                seed: args.seed,
            })?;
            match args.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&rows)?),
                Format::Csv => print!("{}", render_csv(&rows)),
                Format::Text => print!("{}\n{HAT_NOTE}\n", render_text(&rows)),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
