//! `mgsense`: sweeps over the mixture-gamma sensing model, written as CSV or
//! JSON.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 numerical non-convergence,
//! 4 Monte-Carlo z-score above 4, 1 anything else (I/O).

mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Table;

#[derive(Parser, Debug)]
#[command(
    name = "mgsense",
    version,
    about = "Energy detection and cooperative sensing over mixture-gamma fading"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the fitted MG presets.
    Channels {
        /// Only rows of this family.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Complementary ROC of a single node.
    Roc(RocArgs),
    /// TER against the threshold under the OR, AND and optimal rules.
    Ter(TerArgs),
    /// Optimal fusion threshold per threshold point.
    OptimalK(TerArgs),
    /// Antenna count minimizing TER.
    OptimalM(OptimalMArgs),
    /// Monte-Carlo check of the analytic probabilities.
    Mc(McArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ChannelArgs {
    /// Preset family, e.g. rayleigh, nakagami_lognormal.
    #[arg(long)]
    pub channel: String,
    /// Nakagami / Weibull shape.
    #[arg(long)]
    pub m: Option<f64>,
    /// Lognormal shadowing spread in dB.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Average SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma0_db: f64,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct ThresholdArgs {
    /// Single normalized threshold.
    #[arg(long)]
    pub lambda_n: Option<f64>,
    /// Threshold grid as start:stop:count.
    #[arg(long, value_parser = Grid::from_str)]
    pub lambda_grid: Option<Grid>,
}

impl ThresholdArgs {
    pub fn points(&self) -> Vec<f64> {
        match (&self.lambda_n, &self.lambda_grid) {
            (Some(l), _) => vec![*l],
            (None, Some(g)) => g.points(),
            (None, None) => unreachable!("clap enforces one threshold option"),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct NodeArgs {
    /// Antennas per node (square-law selection).
    #[arg(long, default_value_t = 1)]
    pub antennas: u32,
    /// Bit-flip probability of the reporting channel.
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
}

#[derive(Args, Debug, Clone)]
pub struct FusionArgs {
    #[arg(long, default_value_t = 10)]
    pub nodes: u32,
    /// Miss cost.
    #[arg(long)]
    pub wm: f64,
    /// False-alarm cost.
    #[arg(long)]
    pub wf: f64,
}

#[derive(Args, Debug)]
pub struct RocArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Time-bandwidth product.
    #[arg(long)]
    pub u: f64,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    /// Add a column with the quadrature reference value of p_d.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args, Debug)]
pub struct TerArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Time-bandwidth product.
    #[arg(long)]
    pub u: f64,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    #[command(flatten)]
    pub node: NodeArgs,
    #[command(flatten)]
    pub fusion: FusionArgs,
    /// Also report TER for this fixed k.
    #[arg(long)]
    pub k: Option<u32>,
}

#[derive(Args, Debug)]
pub struct OptimalMArgs {
    /// Preset family, e.g. rayleigh, nakagami_lognormal.
    #[arg(long)]
    pub channel: String,
    /// Nakagami / Weibull shape.
    #[arg(long)]
    pub m: Option<f64>,
    /// Lognormal shadowing spread in dB.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Average SNR in dB (single point or the --sweep-m point).
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "sweep_snr"
    )]
    pub gamma0_db: Option<f64>,
    /// Time-bandwidth product.
    #[arg(long)]
    pub u: f64,
    /// Normalized threshold.
    #[arg(long)]
    pub lambda_n: f64,
    /// Bit-flip probability of the reporting channel.
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    #[command(flatten)]
    pub fusion: FusionArgs,
    /// Fusion threshold k.
    #[arg(long)]
    pub k: u32,
    /// Largest antenna count considered.
    #[arg(long, default_value_t = 30)]
    pub m_max: u32,
    /// Emit TER for every M at the given SNR.
    #[arg(long, conflicts_with = "sweep_snr")]
    pub sweep_m: bool,
    /// Emit the optimal M over an SNR grid in dB, start:stop:count.
    #[arg(long, value_parser = Grid::from_str, allow_hyphen_values = true)]
    pub sweep_snr: Option<Grid>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    SemiAnalytic,
    FullStatistic,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Time-bandwidth product.
    #[arg(long)]
    pub u: f64,
    /// Normalized threshold.
    #[arg(long)]
    pub lambda_n: f64,
    #[command(flatten)]
    pub node: NodeArgs,
    /// Fusion threshold; adds network-level rows when given.
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, default_value_t = 10)]
    pub nodes: u32,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Base seed; each reported quantity uses its own offset from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::SemiAnalytic)]
    pub mode: Mode,
}

/// Evenly spaced grid `start:stop:count`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(format!("expected start:stop:count, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        let (start, stop) = (num(a)?, num(b)?);
        let count: usize = c.trim().parse().map_err(|e| format!("{c:?}: {e}"))?;
        if count == 0 {
            return Err("grid count must be at least 1".into());
        }
        if !(start.is_finite() && stop.is_finite()) || stop < start {
            return Err(format!(
                "grid needs finite start <= stop, got {start}:{stop}"
            ));
        }
        Ok(Self { start, stop, count })
    }
}

pub enum Failure {
    Usage(String),
    Numerical(String),
    Breach(Table),
    Io(io::Error),
}

impl From<mgsense::Error> for Failure {
    fn from(e: mgsense::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn emit(table: &Table, format: Format, out: Option<&PathBuf>) -> io::Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Csv => table.write_csv(sink),
        Format::Json => table.write_json(sink),
    }
}

fn run(cli: &Cli) -> Result<Table, Failure> {
    match &cli.command {
        Command::Channels { filter } => commands::channels(filter.as_deref()),
        Command::Roc(a) => commands::roc(a),
        Command::Ter(a) => commands::ter(a),
        Command::OptimalK(a) => commands::optimal_k(a),
        Command::OptimalM(a) => commands::optimal_m(a),
        Command::Mc(a) => commands::mc(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli);
    let (table, code) = match result {
        Ok(t) => (t, 0),
        Err(Failure::Breach(t)) => {
            eprintln!("error: Monte-Carlo estimate deviates from the analytic value by more than 4 standard errors");
            (t, 4)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&table, cli.format, cli.out.as_ref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
