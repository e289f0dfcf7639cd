//! The `perclab` command line: argument and config handling, run
//! manifests, and replay.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;

use args::{Cli, Command};
use commands::execute;
use error::CliError;
use manifest::{write_atomic, RunManifest, CODE_VERSION};

/// Default output directory when neither `--out` nor PERCLAB_OUT is set.
pub const DEFAULT_OUT: &str = "perclab-out";

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Parses `argv`, merging the config file if one is named.
pub fn parse(argv: &[OsString]) -> Result<Cli, CliError> {
    let cli = Cli::try_parse_from(argv)?;
    let Some(path) = &cli.config else {
        return Ok(cli);
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let entries = config::parse(&text)?;
    Ok(Cli::try_parse_from(config::splice(argv, cli.command.name(), &entries))?)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().or_else(|| std::env::var_os("PERCLAB_OUT").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Runs a command line and returns the process exit status.
pub fn run(argv: impl IntoIterator<Item = OsString>) -> i32 {
    let argv: Vec<OsString> = argv.into_iter().collect();
    match try_run(&argv) {
        Ok(()) => 0,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("perclab: {e}");
            e.exit_code()
        }
    }
}

fn try_run(argv: &[OsString]) -> Result<(), CliError> {
    let cli = parse(argv)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // Fails only if a pool already exists, which cannot change results.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Replay(a) => replay(&a.manifest),
        cmd => record(cmd, &out_dir(&cli), cli.threads),
    }
}

fn record(cmd: &Command, dir: &Path, threads: Option<usize>) -> Result<(), CliError> {
    let seed = cmd.seed().expect("experiments carry a seed");
    let started = now();
    let outcome = execute(cmd)?;
    fs::create_dir_all(dir)?;
    let stem = format!("{}-{seed}", cmd.name());
    let csv_name = PathBuf::from(format!("{stem}.csv"));
    write_atomic(&dir.join(&csv_name), outcome.csv.as_bytes())?;
    let manifest = RunManifest {
        command: cmd.name().to_string(),
        params: cmd.clone(),
        seed,
        version: CODE_VERSION.to_string(),
        threads,
        started,
        finished: now(),
        outputs: vec![csv_name],
        summary: outcome.summary.clone(),
    };
    let path = dir.join(format!("{stem}.json"));
    manifest.write(&path)?;
    println!("{} -> {}", outcome.line, path.display());
    if !outcome.passed {
        return Err(CliError::SelfTest(outcome.line));
    }
    Ok(())
}

/// Re-executes a manifest in memory and compares every summary value and
/// output byte.
pub fn replay(path: &Path) -> Result<(), CliError> {
    let m = RunManifest::read(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut recorded = Vec::with_capacity(m.outputs.len());
    for out in &m.outputs {
        let p = dir.join(out);
        recorded.push(fs::read(&p).map_err(|e| CliError::ManifestCorrupt(format!("output {}: {e}", p.display())))?);
    }
    let [csv] = recorded.as_slice() else {
        return Err(CliError::ManifestCorrupt(format!("expected one output file, found {}", recorded.len())));
    };
    let mut cmd = m.params.clone();
    cmd.set_seed(m.seed);
    let outcome = execute(&cmd)?;
    for (k, v) in &m.summary {
        match outcome.summary.get(k) {
            Some(w) if w == v => {}
            Some(w) => return Err(CliError::Mismatch(format!("{k}: recorded {v}, replayed {w}"))),
            None => return Err(CliError::Mismatch(format!("{k}: recorded {v}, missing on replay"))),
        }
    }
    if let Some(k) = outcome.summary.keys().find(|k| !m.summary.contains_key(*k)) {
        return Err(CliError::Mismatch(format!("{k}: not recorded")));
    }
    if outcome.csv.as_bytes() != csv.as_slice() {
        return Err(CliError::Mismatch(format!("{} differs from the replayed output", m.outputs[0].display())));
    }
    println!("replay {}: {} summary values and {} output bytes match", m.command, m.summary.len(), csv.len());
    Ok(())
}
