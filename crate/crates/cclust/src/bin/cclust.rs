//! Thin command-line wrapper over the library harness.
//!
//! Subcommands: `train`, `eval`, `kmeans`, `sweep`. Exit codes: 0 success,
//! 2 config error, 3 numerical failure, 4 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cclust::harness::{
    eval_checkpoint, kmeans_eval, load_dataset, render_report, run_sweep, train_to_dir,
    DatasetSpec, HarnessError, RunConfig, SweepConfig, EXIT_CONFIG,
};

const USAGE: &str = "\
cclust — constrained clustering experiments

USAGE:
    cclust train  --config <path> --out <dir>
    cclust eval   --checkpoint <path> --data <spec>
    cclust kmeans --data <spec> --k <int> --seed <int>
    cclust sweep  --config <path> --out <dir> [--workers <n>]

<spec> is either a path to a JSON dataset description or the JSON itself,
e.g. '{\"kind\":\"blobs\",\"k\":4,\"per_cluster\":250,\"d\":2,\"separation\":8.0,\"seed\":1}'.

Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 I/O error.
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}\n\n{USAGE}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
        Err(CliError::Harness(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

enum CliError {
    Usage(String),
    Harness(HarnessError),
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::Harness(e)
    }
}

fn run(args: &[String]) -> Result<(), CliError> {
    let command = args.first().ok_or_else(|| CliError::Usage("missing subcommand".into()))?;
    let flags = parse_flags(&args[1..])?;
    match command.as_str() {
        "train" => cmd_train(&flags),
        "eval" => cmd_eval(&flags),
        "kmeans" => cmd_kmeans(&flags),
        "sweep" => cmd_sweep(&flags),
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::Usage(format!("unknown subcommand {other:?}"))),
    }
}

struct Flags(Vec<(String, String)>);

impl Flags {
    fn get(&self, name: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    fn require(&self, name: &str) -> Result<&str, CliError> {
        self.get(name).ok_or_else(|| CliError::Usage(format!("missing required flag --{name}")))
    }
}

fn parse_flags(args: &[String]) -> Result<Flags, CliError> {
    let mut flags = Vec::new();
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let name = arg
            .strip_prefix("--")
            .ok_or_else(|| CliError::Usage(format!("expected --flag, got {arg:?}")))?;
        let value = iter
            .next()
            .ok_or_else(|| CliError::Usage(format!("flag --{name} needs a value")))?;
        flags.push((name.to_string(), value.clone()));
    }
    Ok(Flags(flags))
}

/// A dataset argument: inline JSON, or a path to a JSON file.
fn parse_dataset_spec(arg: &str) -> Result<DatasetSpec, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| CliError::Harness(HarnessError::io(Path::new(arg), e)))?
    };
    serde_json::from_str(&text)
        .map_err(|e| CliError::Harness(HarnessError::Config(format!("dataset spec: {e}"))))
}

fn parse_number<T: std::str::FromStr>(flags: &Flags, name: &str) -> Result<T, CliError> {
    let raw = flags.require(name)?;
    raw.parse()
        .map_err(|_| CliError::Usage(format!("flag --{name} expects a number, got {raw:?}")))
}

fn cmd_train(flags: &Flags) -> Result<(), CliError> {
    let config = RunConfig::from_file(Path::new(flags.require("config")?))?;
    let out = PathBuf::from(flags.require("out")?);
    let (outcome, run_dir) = train_to_dir(&config, &out)?;
    print!("{}", render_report(&config, &outcome.result));
    eprintln!(
        "run {} finished in {:.1}s, artifacts in {}",
        outcome.result.fingerprint,
        outcome.result.duration_secs,
        run_dir.display()
    );
    Ok(())
}

fn cmd_eval(flags: &Flags) -> Result<(), CliError> {
    let checkpoint = PathBuf::from(flags.require("checkpoint")?);
    let spec = parse_dataset_spec(flags.require("data")?)?;
    let ds = load_dataset(&spec)?;
    let report = eval_checkpoint(&checkpoint, &ds)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn cmd_kmeans(flags: &Flags) -> Result<(), CliError> {
    let spec = parse_dataset_spec(flags.require("data")?)?;
    let k: usize = parse_number(flags, "k")?;
    let seed: u64 = parse_number(flags, "seed")?;
    let ds = load_dataset(&spec)?;
    let report = kmeans_eval(&ds, k, seed)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn cmd_sweep(flags: &Flags) -> Result<(), CliError> {
    let sweep = SweepConfig::from_file(Path::new(flags.require("config")?))?;
    let out = PathBuf::from(flags.require("out")?);
    let workers: usize = match flags.get("workers") {
        None => 1,
        Some(_) => parse_number(flags, "workers")?,
    };
    let rows = run_sweep(&sweep, &out, workers)?;
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!(
        "sweep complete: {} runs, {} failed, table in {}",
        rows.len(),
        failures,
        out.join("sweep.csv").display()
    );
    Ok(())
}
