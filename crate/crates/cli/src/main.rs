use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sandwich::equality::RecoverableKind;
use sandwich::linalg::MatrixJson;
use sandwich_cli::config::ChannelChoice;
use sandwich_cli::{run, CliError, ExperimentConfig, Format, Scenario};

#[derive(Parser)]
#[command(name = "sandwich", version, about = "Renyi divergence and DPI equality experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sandwiched, Petz and Umegaki divergences of given or random pairs.
    Divergence {
        #[command(flatten)]
        common: Common,
        /// JSON matrix file for ρ.
        #[arg(long, requires = "sigma")]
        rho: Option<PathBuf>,
        /// JSON matrix file for σ.
        #[arg(long, requires = "rho")]
        sigma: Option<PathBuf>,
    },
    /// Data-processing gaps on random triples.
    DpiScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        channel: Option<ChannelArg>,
    },
    /// Full residual reports on random triples.
    EqualityScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        channel: Option<ChannelArg>,
    },
    /// Residual reports on constructed recoverable triples.
    RecoveryTest {
        #[command(flatten)]
        common: Common,
        /// product, blocked or conjugated-product.
        #[arg(long)]
        kind: Option<String>,
    },
    /// Closed-form optimizer against the variational search.
    VariationalCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Quadrature matrix powers against the spectral ones.
    IntegralCheck {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON config; its keys override the other flags except --seed.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated α values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    alpha: Option<Vec<f64>>,
    /// d_A,d_B
    #[arg(long, value_delimiter = ',', num_args = 1)]
    dims: Option<Vec<usize>>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ChannelArg {
    PartialTrace,
    RandomKraus,
    Mixed,
}

impl From<ChannelArg> for ChannelChoice {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::PartialTrace => ChannelChoice::PartialTrace,
            ChannelArg::RandomKraus => ChannelChoice::RandomKraus,
            ChannelArg::Mixed => ChannelChoice::Mixed,
        }
    }
}

fn read_matrix(path: &PathBuf) -> Result<MatrixJson, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn build(command: &Command) -> Result<(ExperimentConfig, &Common), CliError> {
    let (scenario, common) = match command {
        Command::Divergence { common, .. } => (Scenario::Divergence, common),
        Command::DpiScan { common, .. } => (Scenario::DpiScan, common),
        Command::EqualityScan { common, .. } => (Scenario::EqualityScan, common),
        Command::RecoveryTest { common, .. } => (Scenario::RecoveryTest, common),
        Command::VariationalCheck { common } => (Scenario::VariationalCheck, common),
        Command::IntegralCheck { common } => (Scenario::IntegralCheck, common),
    };
    let mut cfg = ExperimentConfig { scenario, ..Default::default() };
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(a) = &common.alpha {
        cfg.alpha_grid = a.clone();
    }
    if let Some(d) = &common.dims {
        let [a, b] = d[..] else {
            return Err(CliError::Config("--dims takes two values, d_A,d_B".into()));
        };
        cfg.dims = (a, b);
    }
    match command {
        Command::Divergence { rho: Some(r), sigma: Some(s), .. } => {
            cfg.rho = Some(read_matrix(r)?);
            cfg.sigma = Some(read_matrix(s)?);
        }
        Command::DpiScan { channel: Some(c), .. } | Command::EqualityScan { channel: Some(c), .. } => {
            cfg.channel = (*c).into();
        }
        Command::RecoveryTest { kind: Some(k), .. } => {
            cfg.triple_kind = k.parse::<RecoverableKind>().map_err(|e| CliError::Config(e.to_string()))?;
        }
        _ => {}
    }
    if let Some(path) = &common.config {
        cfg = ExperimentConfig::overlay_file(&cfg, path)?;
        if cfg.scenario != scenario {
            return Err(CliError::Config(format!(
                "config scenario '{}' does not match subcommand '{scenario}'",
                cfg.scenario
            )));
        }
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok((cfg, common))
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let (cfg, common) = build(&cli.command)?;
    let format: Format = common.format.parse()?;
    let outcome = run(&cfg)?;
    sandwich_cli::output::emit(&outcome.rows, format, common.out.as_deref())?;
    let summary = serde_json::to_string_pretty(&outcome.summary).map_err(|e| CliError::Io(e.to_string()))?;
    eprintln!("{summary}");
    Ok(outcome.summary.pass)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("sandwich: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
