//! Command-line front end. Exit codes: 0 success, 1 invalid input,
//! 2 numerical failure or failed selftest.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::experiment::{self, ConfigFile, Experiment, ExperimentConfig};
use crate::selftest::selftest;
use crate::tol::Tolerances;

#[derive(Debug, Parser)]
#[command(name = "opstat", version, about = "Operator statistics laboratory")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    #[command(flatten)]
    Experiment(ExperimentCommand),
    /// Run an experiment by its config name (`run holevo-additivity ...`).
    Run {
        #[command(subcommand)]
        experiment: ExperimentCommand,
    },
    /// Fast invariant suite; prints JSON.
    Selftest {
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
enum ExperimentCommand {
    /// Cayley transform and spectral projectors of a Hermitian matrix.
    Spectral(SpectralArgs),
    /// Poisson semigroup checks and the sigma-additivity test.
    Poisson(PoissonArgs),
    /// Holevo capacity additivity on channel pairs.
    #[command(alias = "holevo-additivity")]
    Holevo(HolevoArgs),
    /// Euler-Maruyama convergence against the closed form.
    #[command(alias = "sde-convergence")]
    Sde(SdeArgs),
    /// Encode/decode fidelity study and stopping conditions.
    #[command(alias = "codec-study")]
    Codec(CodecArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Master seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out/<experiment>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long)]
    threads: Option<usize>,
    /// TOML or JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SpectralArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// JSON matrix file `{"dim", "re", "im"}`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    /// Number of equal arcs.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<usize>,
    /// Comma-separated cut points in [0, 2π).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    cuts: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
struct PoissonArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rate: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct HolevoArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// random, identity, depolarizing, dephasing, amplitude-damping or file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    channels: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kraus: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    channel_a: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    channel_b: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iters: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct SdeArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    x0: Option<f64>,
    #[arg(long = "drift")]
    #[serde(rename = "drift_coeff", skip_serializing_if = "Option::is_none")]
    drift_coeff: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    /// Comma-separated step counts; each must divide the largest.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    paths: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct CodecArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Object descriptor as a JSON file or inline JSON.
    #[arg(long)]
    #[serde(skip)]
    object: Option<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    intensities: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seeds: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rounds: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    round_intensity: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    run_resolution: Option<usize>,
    /// constant or ramp.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<String>,
    /// Decode on the mosaic of a fresh hit set.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    resample: Option<bool>,
}

impl ExperimentCommand {
    fn parts(&self) -> Result<(Experiment, &Common, Map<String, Value>)> {
        let (exp, common, mut value) = match self {
            ExperimentCommand::Spectral(a) => (Experiment::Spectral, &a.common, serde_json::to_value(a)),
            ExperimentCommand::Poisson(a) => (Experiment::Poisson, &a.common, serde_json::to_value(a)),
            ExperimentCommand::Holevo(a) => (Experiment::HolevoAdditivity, &a.common, serde_json::to_value(a)),
            ExperimentCommand::Sde(a) => (Experiment::SdeConvergence, &a.common, serde_json::to_value(a)),
            ExperimentCommand::Codec(a) => (Experiment::CodecStudy, &a.common, serde_json::to_value(a)),
        };
        let mut overrides = match value.as_mut().map(Value::take) {
            Ok(Value::Object(m)) => m,
            _ => Map::new(),
        };
        if let ExperimentCommand::Codec(CodecArgs { object: Some(obj), .. }) = self {
            overrides.insert("object".into(), read_object(obj)?);
        }
        Ok((exp, common, overrides))
    }
}

fn read_object(arg: &str) -> Result<Value> {
    let text = if arg.trim_start().starts_with('{') || arg.trim_start().starts_with('"') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|source| Error::Io {
            path: arg.to_string(),
            source,
        })?
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        context: "object".into(),
        message: e.to_string(),
    })
}

fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::validation("threads must be >= 1"));
        }
        // a second call in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run_experiment(cmd: &ExperimentCommand) -> Result<()> {
    let (exp, common, overrides) = cmd.parts()?;
    set_threads(common.threads)?;
    let file = match &common.config {
        Some(path) => ConfigFile::read(path)?,
        None => ConfigFile::default(),
    };
    let config = ExperimentConfig::resolve(file, Some(exp), common.seed, common.out.clone(), overrides)?;
    let manifest = experiment::run(&config)?;
    let _ = writeln!(
        std::io::stdout(),
        "{}: wrote {} to {}",
        exp.name(),
        manifest.outputs.join(", "),
        manifest.output_dir.display()
    );
    Ok(())
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    if err.is_validation() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Experiment(cmd) | Command::Run { experiment: cmd } => run_experiment(cmd),
        Command::Selftest { threads } => {
            if let Err(e) = set_threads(*threads) {
                return exit_for(&e);
            }
            let report = selftest(&Tolerances::default());
            let _ = writeln!(std::io::stdout(), "{}", report.to_json());
            return if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}

pub fn main() -> ExitCode {
    main_with(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_become_parameter_overrides() {
        let cli = Cli::try_parse_from(["opstat", "run", "holevo-additivity", "--channels", "random", "--pairs", "3"])
            .unwrap();
        let Command::Run { experiment } = cli.command else {
            panic!("expected run")
        };
        let (exp, _, over) = experiment.parts().unwrap();
        assert_eq!(exp, Experiment::HolevoAdditivity);
        assert_eq!(over["pairs"], Value::from(3));
        assert_eq!(over.len(), 2);
    }

    #[test]
    fn inline_object() {
        let cli = Cli::try_parse_from(["opstat", "codec", "--object", r#"{"disk":{"cx":0.5,"cy":0.5,"r":0.1}}"#])
            .unwrap();
        let Command::Experiment(cmd) = cli.command else {
            panic!("expected experiment")
        };
        let (_, _, over) = cmd.parts().unwrap();
        assert!(over["object"]["disk"].is_object());
    }
}
