use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, ValueEnum};

use gibbsdim_cli::config::{ExperimentConfig, Settings};
use gibbsdim_cli::{execute, Subcommand, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "gibbsdim",
    version,
    about = "Orbit batches and dimension estimators for Gauss-like maps"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    OrbitStats,
    Dimension,
    ForcedExcursion,
    IneqCheck,
    SeriesCheck,
    Oracle,
    Report,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Subcommand {
        match c {
            Command::OrbitStats => Subcommand::OrbitStats,
            Command::Dimension => Subcommand::Dimension,
            Command::ForcedExcursion => Subcommand::ForcedExcursion,
            Command::IneqCheck => Subcommand::IneqCheck,
            Command::SeriesCheck => Subcommand::SeriesCheck,
            Command::Oracle => Subcommand::Oracle,
            Command::Report => Subcommand::Report,
        }
    }
}

/// One flag per config key; values are validated with the config file's rules.
#[derive(Args)]
struct Flags {
    /// gauss | powerlaw:<alpha> | table:<path>
    #[arg(long)]
    partition: Option<String>,
    /// geometric:<q> | logsquare | zeta:<beta> | table:<path> | markov1:<eps>:<base>
    #[arg(long)]
    measure: Option<String>,
    /// pl | gauss
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    orbits: Option<String>,
    #[arg(long)]
    length: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated, strictly increasing.
    #[arg(long)]
    checkpoints: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    /// Fixed k0 for case-split estimates.
    #[arg(long)]
    k0: Option<String>,
    #[arg(long)]
    k_lo: Option<String>,
    #[arg(long)]
    k_hi: Option<String>,
    #[arg(long)]
    n_lo: Option<String>,
    #[arg(long)]
    n_hi: Option<String>,
    /// First depth of the case-split maximum.
    #[arg(long)]
    window_start: Option<String>,
    /// Planting position for forced-excursion.
    #[arg(long)]
    position: Option<String>,
    /// Comma-separated planted log digits.
    #[arg(long)]
    log_digits: Option<String>,
    #[arg(long)]
    depth_cap: Option<String>,
    /// on | off
    #[arg(long)]
    checks: Option<String>,
    /// Comma-separated criterion numbers, or `all`.
    #[arg(long)]
    criteria: Option<String>,
}

impl Flags {
    fn pairs(&self) -> [(&'static str, Option<&str>); 22] {
        [
            ("partition", self.partition.as_deref()),
            ("measure", self.measure.as_deref()),
            ("model", self.model.as_deref()),
            ("orbits", self.orbits.as_deref()),
            ("length", self.length.as_deref()),
            ("seed", self.seed.as_deref()),
            ("checkpoints", self.checkpoints.as_deref()),
            ("threads", self.threads.as_deref()),
            ("output", self.output.as_deref()),
            ("alpha", self.alpha.as_deref()),
            ("delta", self.delta.as_deref()),
            ("eta", self.eta.as_deref()),
            ("k0", self.k0.as_deref()),
            ("k_lo", self.k_lo.as_deref()),
            ("k_hi", self.k_hi.as_deref()),
            ("n_lo", self.n_lo.as_deref()),
            ("n_hi", self.n_hi.as_deref()),
            ("window_start", self.window_start.as_deref()),
            ("position", self.position.as_deref()),
            ("log_digits", self.log_digits.as_deref()),
            ("depth_cap", self.depth_cap.as_deref()),
            ("checks", self.checks.as_deref()),
        ]
    }
}

fn settings(cli: &Cli) -> Result<Settings, String> {
    let mut s = Settings::new();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let base = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        s = s
            .with_file(&text, base)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    s = s.with_env(|name| std::env::var(name).ok());
    for (key, value) in cli.flags.pairs() {
        s = s.with_flag(key, value);
    }
    Ok(s.with_flag("criteria", cli.flags.criteria.as_deref()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match settings(&cli).and_then(|s| ExperimentConfig::resolve(&s).map_err(|e| e.to_string())) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Some(t) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start {t} worker threads: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let code = execute(cli.command.into(), &cfg, &mut std::io::stdout());
    ExitCode::from(code as u8)
}
