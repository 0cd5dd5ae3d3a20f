use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use crlab_cli::{criteria_listing, run_experiment, CliError, Command, ExperimentConfig};

/// Reproducible experiments on CR-singular graphs.
///
/// Settings are layered: defaults, then `--config`, then `--set`, then the
/// dedicated flags. The output directory is `--out`, else `$CRLAB_OUT`, else
/// the config's `out`, else `crlab-out`.
#[derive(Parser, Debug)]
#[command(name = "crlab", version)]
struct Cli {
    /// moments, bt, hull, sadh, approx or catalog.
    command: Option<String>,
    /// Print each subcommand with the acceptance criteria it reproduces.
    #[arg(long)]
    list: bool,
    /// Flat `key = value` config file, e.g. a stored `config.txt`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    surface: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Test function: one, z, zbar, z1, z2, zbar1, zbar2, z-abs2, z2w+3, z3,
    /// z1+w, chi-zbar:EPS, const:RE[:IM] or poly:RE:IM@E1,..;...
    #[arg(long = "f")]
    f: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "degree-z")]
    degree_z: Option<usize>,
    #[arg(long = "degree-s")]
    degree_s: Option<usize>,
    #[arg(long = "box")]
    box_radius: Option<f64>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

fn build(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let file = match &cli.config {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let command: Command = match (&cli.command, &file) {
        (Some(c), _) => c.parse()?,
        (None, Some(text)) => ExperimentConfig::from_kv(text)?.command,
        (None, None) => return Err(CliError::Usage("missing subcommand (see --list)".into())),
    };
    let mut cfg = ExperimentConfig::new(command);
    if let Some(text) = &file {
        cfg.apply_kv(text)?;
        cfg.command = command;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v)?;
    }
    if cli.surface.is_some() {
        cfg.surface = cli.surface.clone();
    }
    if cli.f.is_some() {
        cfg.f = cli.f.clone();
    }
    if cli.lambda.is_some() {
        cfg.lambda = cli.lambda;
    }
    if cli.epsilon.is_some() {
        cfg.epsilon = cli.epsilon;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.degree_z {
        cfg.degree_z = v;
    }
    if let Some(v) = cli.degree_s {
        cfg.degree_s = v;
    }
    if let Some(v) = cli.box_radius {
        cfg.box_radius = v;
    }
    if let Some(v) = cli.stages {
        cfg.stages = v;
    }
    if let Some(v) = cli.samples {
        cfg.samples = v;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    } else if let Some(o) = std::env::var_os("CRLAB_OUT") {
        cfg.out = Some(PathBuf::from(o));
    }
    if cfg.out.is_none() {
        cfg.out = Some(cfg.output_dir());
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        print!("{}", criteria_listing());
        return ExitCode::SUCCESS;
    }
    let result = build(&cli).and_then(|cfg| run_experiment(&cfg));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("crlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
