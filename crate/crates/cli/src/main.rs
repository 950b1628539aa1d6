//! `vord`: experiment runner for the variable-order fractional diffusion
//! solver. `vord run <config>` executes one suite into a content-addressed
//! run directory; `vord compare <dirA> <dirB>` diffs two runs numerically.
//!
//! Exit codes: 0 success, 1 suite failure (a check failed or the computation
//! errored; the manifest records the detail), 2 configuration/usage error.

mod compare;
mod config;
mod experiment;
mod manifest;
mod suites;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{snapshot_hash, Config};
use manifest::{now_unix_ms, CheckResult, RunManifest, MANIFEST_FILE};

#[derive(Parser)]
#[command(name = "vord", version, about = "variable-order fractional diffusion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a flat key=value config file.
    Run {
        /// Path to the configuration file.
        config: PathBuf,
        /// Output root (default: $VORD_OUT or ./runs).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Size of the worker pool (default: one worker per CPU).
        #[arg(long)]
        threads: Option<usize>,
        /// Override the `seed` key of the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Numerically compare the outputs of two runs.
    Compare {
        dir_a: PathBuf,
        dir_b: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, threads, seed } => run_command(&config, out, threads, seed),
        Command::Compare { dir_a, dir_b } => compare_command(&dir_a, &dir_b),
    }
}

fn output_root(cli_out: Option<PathBuf>) -> PathBuf {
    cli_out
        .or_else(|| std::env::var_os("VORD_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn run_command(
    config_path: &Path,
    out: Option<PathBuf>,
    threads: Option<usize>,
    seed: Option<u64>,
) -> ExitCode {
    if let Some(n) = threads {
        if n == 0 {
            eprintln!("configuration error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("failed to size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }

    // Validation phase: exit 2, no run directory on any failure here.
    let mut cfg = match Config::from_file(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = seed {
        cfg.override_key("seed", s.to_string());
    }
    let plan = match suites::resolve(&cfg) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };

    let hash = snapshot_hash(&plan.resolved.0);
    let root = output_root(out);
    let final_dir = root.join(&hash);

    // Content addressing dedupes reruns: an existing directory for this
    // exact resolved configuration is reported as-is.
    if final_dir.join(MANIFEST_FILE).exists() {
        match RunManifest::load(&final_dir) {
            Ok(existing) => {
                println!("run {hash} already exists: {}", final_dir.display());
                print_checks(&existing.checks);
                println!("status: {}", existing.status);
                return if existing.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(1) };
            }
            Err(e) => {
                eprintln!("existing run directory has an unreadable manifest: {e}");
                return ExitCode::from(1);
            }
        }
    }

    if let Err(e) = std::fs::create_dir_all(&root) {
        eprintln!("cannot create output root {}: {e}", root.display());
        return ExitCode::from(1);
    }
    let tmp_dir = root.join(format!(".tmp-{hash}-{}", std::process::id()));
    if let Err(e) = std::fs::create_dir_all(&tmp_dir) {
        eprintln!("cannot create run directory {}: {e}", tmp_dir.display());
        return ExitCode::from(1);
    }

    let started = now_unix_ms();
    let result = suites::execute(&plan, &tmp_dir);
    let finished = now_unix_ms();

    let (outputs, checks, summary) = match result {
        Ok(out) => (out.outputs, out.checks, out.summary),
        Err(e) => {
            // Suite failure: record the error as a failed check so the
            // manifest still explains what happened.
            let mut checks = BTreeMap::new();
            checks.insert(
                "suite_completed".to_string(),
                CheckResult { pass: false, detail: format!("{e:#}") },
            );
            (Vec::new(), checks, BTreeMap::new())
        }
    };

    let status = if checks.values().all(|c| c.pass) { "pass" } else { "fail" };
    let man = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        kind: plan.kind.clone(),
        seed: plan.seed,
        config: plan.resolved.0.clone(),
        config_hash: hash.clone(),
        started_unix_ms: started,
        finished_unix_ms: finished,
        outputs,
        checks,
        summary,
        status: status.to_string(),
    };
    if let Err(e) = man.write_into(&tmp_dir) {
        eprintln!("cannot write manifest: {e}");
        return ExitCode::from(1);
    }
    if let Err(e) = std::fs::rename(&tmp_dir, &final_dir) {
        // A concurrent process may have landed the same hash first; treat
        // its result as ours after cleaning up.
        if final_dir.join(MANIFEST_FILE).exists() {
            let _ = std::fs::remove_dir_all(&tmp_dir);
        } else {
            eprintln!("cannot finalize run directory: {e}");
            return ExitCode::from(1);
        }
    }

    println!("run {hash}: {}", final_dir.display());
    print_checks(&man.checks);
    println!("status: {status}");
    if status == "pass" { ExitCode::SUCCESS } else { ExitCode::from(1) }
}

fn print_checks(checks: &BTreeMap<String, CheckResult>) {
    for (name, check) in checks {
        println!(
            "check {name}: {} ({})",
            if check.pass { "pass" } else { "FAIL" },
            check.detail
        );
    }
}

fn compare_command(dir_a: &Path, dir_b: &Path) -> ExitCode {
    match compare::compare_runs(dir_a, dir_b) {
        Ok(report) => {
            for file in &report.files {
                if file.identical_bytes {
                    println!("{}: identical ({} values)", file.name, file.compared_values);
                } else {
                    println!(
                        "{}: max relative deviation {:e} over {} values",
                        file.name, file.max_rel_dev, file.compared_values
                    );
                }
            }
            println!("overall max relative deviation: {:e}", report.max_rel_dev);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("compare failed: {e:#}");
            ExitCode::from(2)
        }
    }
}
