mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use dicke_grover::cavity::HeraldMode;
use dicke_grover::experiments::SweepQuantity;
use dicke_grover::grover::{CatParity, GhzVariant};

use config::{Command, RunConfig, StateKind, SweepAxis};
use error::CliError;

/// Grover state preparation with cavity-mediated phase inversions.
///
/// Settings come from an optional JSON config; flags override it.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    #[arg(long)]
    config: Option<PathBuf>,

    /// Dicke target |M⟩ on N qubits.
    #[arg(long, num_args = 2, value_names = ["N", "M"], conflicts_with_all = ["ghz", "cat"])]
    dicke: Option<Vec<usize>>,
    /// GHZ target on N qubits.
    #[arg(long, value_name = "N", conflicts_with = "cat")]
    ghz: Option<usize>,
    #[arg(long, value_enum)]
    ghz_variant: Option<GhzVariantArg>,
    /// Cat target on N qubits; angle from --cat-phi.
    #[arg(long, value_name = "N")]
    cat: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    cat_phi: Option<f64>,
    #[arg(long, value_enum)]
    parity: Option<ParityArg>,

    #[arg(short = 'C', long)]
    cooperativity: Option<f64>,
    #[arg(short = 'd', long, allow_hyphen_values = true)]
    resolution: Option<f64>,
    #[arg(short = 'w', long)]
    width: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long)]
    heralded: bool,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    modified_phase: bool,

    #[arg(long, value_enum)]
    axis: Option<SweepAxis>,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    grid: Option<Vec<f64>>,
    #[arg(long)]
    points: Option<usize>,
    /// Sweep the single phase inversion instead of the full protocol.
    #[arg(long)]
    inversion_only: bool,
    #[arg(long)]
    trim: Option<usize>,

    /// Output prefix for `<prefix>.csv` and `<prefix>.json`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum GhzVariantArg {
    Hadamard,
    YBasis,
    Exact,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ParityArg {
    Plus,
    Minus,
}

impl Cli {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        c.command = self.command;
        if let Some(v) = self.dicke {
            (c.state, c.n, c.m) = (StateKind::Dicke, v[0], v[1]);
        }
        if let Some(n) = self.ghz {
            (c.state, c.n) = (StateKind::Ghz, n);
        }
        if let Some(n) = self.cat {
            (c.state, c.n) = (StateKind::Cat, n);
        }
        if let Some(v) = self.ghz_variant {
            c.ghz_variant = match v {
                GhzVariantArg::Hadamard => GhzVariant::Hadamard,
                GhzVariantArg::YBasis => GhzVariant::YBasis,
                GhzVariantArg::Exact => GhzVariant::Exact,
            };
        }
        if let Some(p) = self.parity {
            c.parity = match p {
                ParityArg::Plus => CatParity::Plus,
                ParityArg::Minus => CatParity::Minus,
            };
        }
        if let Some(x) = self.cat_phi {
            c.phi_cat = x;
        }
        if let Some(x) = self.cooperativity {
            c.cooperativity = x;
        }
        if self.resolution.is_some() {
            c.resolution = self.resolution;
        }
        if let Some(x) = self.width {
            c.width = x;
        }
        if self.g.is_some() {
            c.g = self.g;
        }
        if self.delta.is_some() {
            c.delta = self.delta;
        }
        if self.heralded {
            c.mode = HeraldMode::Heralded;
        }
        if let Some(x) = self.zeta {
            c.zeta = x;
        }
        if self.steps.is_some() {
            c.steps = self.steps;
        }
        if self.phi.is_some() {
            c.phi = self.phi;
        }
        c.modified_phase |= self.modified_phase;
        if let Some(a) = self.axis {
            c.axis = a;
        }
        if let Some(g) = self.grid {
            c.grid = g;
        }
        if let Some(p) = self.points {
            c.points = p;
        }
        if self.inversion_only {
            c.quantity = SweepQuantity::PhaseInversion;
        }
        if let Some(t) = self.trim {
            c.trim = t;
        }
        if self.out.is_some() {
            c.output = self.out;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        Ok(c)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.into_config()?;
    let report = commands::run(&cfg)?;
    if let Some(prefix) = &cfg.output {
        let (csv, json) = output::write_outputs(prefix, &report.table, &cfg, &report.results)?;
        eprintln!("wrote {} and {}", csv.display(), json.display());
    }
    let text = serde_json::to_string_pretty(&report.results).expect("results are plain data");
    match writeln!(std::io::stdout().lock(), "{text}") {
        // a closed downstream pipe is not an error of the run
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
