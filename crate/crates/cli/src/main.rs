//! Batch CLI for the spectral-numerics library: spectra, perturbation series,
//! Feynman-Kac verification, zeta studies, fiber checks, sector and symmetry
//! reports. Results go to CSV or JSON files (or stdout).
//!
//! Exit codes: 0 success, 2 out-of-regime refusal, 1 any other error
//! (including bad flags and config-schema violations).

mod config;
mod exec;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, Command as ClapCommand};

use config::{Command, OutputFormat, RunConfig};

/// Environment variable holding the default output directory.
const OUT_DIR_ENV: &str = "RABI_NCHO_OUT";

fn model_args(cmd: ClapCommand) -> ClapCommand {
    let flags = [
        ("family", "model family: rabi2p, rabi1p, ncho, ncho1p, k_alpha_beta, rak, quad_ts"),
        ("delta", "detuning (Rabi families)"),
        ("g", "coupling (Rabi families)"),
        ("alpha", "first oscillator parameter"),
        ("beta", "second oscillator parameter"),
        ("t-coef", "t coefficient of (p+tq)^2 + s q^2"),
        ("s-coef", "s coefficient of (p+tq)^2 + s q^2"),
        ("k", "how many eigenvalues / grid steps"),
        ("n-max", "fixed truncation level"),
        ("tol", "convergence tolerance"),
        ("t", "semigroup horizon"),
        ("n-samples", "Monte Carlo sample count"),
        ("seed", "RNG seed"),
        ("nodes", "quadrature nodes per inter-jump interval"),
        ("s-grid", "comma-separated zeta arguments"),
        ("tau", "Hurwitz offset"),
        ("mode", "subcommand mode"),
        ("sequence", "comma-separated parameter sequence"),
        ("window-lo", "reconstruction window lower edge"),
        ("window-hi", "reconstruction window upper edge"),
        ("k-max", "levels for fiber checks"),
        ("left", "left test vector: const, up, down, x2, ground"),
        ("right", "right test vector: const, up, down, x2, ground"),
        ("output", "output file path (default: stdout)"),
        ("save-config", "also write the effective config section to this file"),
        ("format", "csv or json"),
    ];
    let mut cmd = cmd;
    for (name, help) in flags {
        cmd = cmd.arg(
            Arg::new(name)
                .long(name)
                .help(help)
                .action(ArgAction::Set)
                .value_name("VALUE"),
        );
    }
    cmd
}

fn cli() -> ClapCommand {
    let mut root = ClapCommand::new("rabi-ncho")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Spectral numerics for quantum Rabi models and non-commutative harmonic oscillators")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .disable_help_subcommand(true)
        .subcommand(
            ClapCommand::new("run")
                .about("execute the runs described by a config file")
                .arg(
                    Arg::new("config")
                        .long("config")
                        .required(true)
                        .value_name("FILE")
                        .help("config file: one [section] per run, key = value lines"),
                ),
        );
    for (name, about) in [
        ("spectrum", "converged eigenvalues of a model"),
        ("perturb", "lowest-eigenvalue series, xi evaluations, concavity scans"),
        ("fk", "Feynman-Kac estimates vs the spectral oracle"),
        ("zeta", "Hurwitz and spectral zeta values and limit tables"),
        ("fiber", "fiber verification, reconstruction and weighted Gram checks"),
        ("sector", "ground-state sector overlaps of the two-photon model"),
        ("symcheck", "spectral symmetry deviations"),
    ] {
        root = root.subcommand(model_args(ClapCommand::new(name).about(about)));
    }
    root
}

fn config_from_matches(
    command: Command,
    m: &clap::ArgMatches,
) -> Result<(RunConfig, Option<String>), rabi_ncho::Error> {
    let mut cfg = RunConfig::default();
    cfg.command = command;
    // flag names map to config keys with '-' -> '_'
    for key in [
        "family", "delta", "g", "alpha", "beta", "t-coef", "s-coef", "k", "n-max", "tol", "t",
        "n-samples", "seed", "nodes", "s-grid", "tau", "mode", "sequence", "window-lo",
        "window-hi", "k-max", "left", "right", "output", "format",
    ] {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(&key.replace('-', "_"), v)?;
        }
    }
    Ok((cfg, m.get_one::<String>("save-config").cloned()))
}

fn resolve_output_path(name: &str) -> PathBuf {
    let p = PathBuf::from(name);
    if p.is_absolute() {
        return p;
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(p),
        _ => p,
    }
}

fn run_one(cfg: &RunConfig) -> Result<(), rabi_ncho::Error> {
    let table = exec::execute(cfg)?;
    let rendered = match cfg.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    };
    match &cfg.output {
        Some(path) => {
            let full = resolve_output_path(path);
            if let Some(parent) = full.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent).map_err(|e| {
                        rabi_ncho::Error::InvalidArgument(format!(
                            "cannot create output directory {}: {e}",
                            parent.display()
                        ))
                    })?;
                }
            }
            std::fs::write(&full, rendered).map_err(|e| {
                rabi_ncho::Error::InvalidArgument(format!(
                    "cannot write {}: {e}",
                    full.display()
                ))
            })?;
        }
        None => {
            print!("{rendered}");
            std::io::stdout().flush().ok();
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            // help/version are successes; everything else is a usage error
            if e.kind() == clap::error::ErrorKind::DisplayHelp
                || e.kind() == clap::error::ErrorKind::DisplayVersion
            {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let runs: Result<Vec<RunConfig>, rabi_ncho::Error> = match matches.subcommand() {
        Some(("run", sub)) => {
            let path = sub.get_one::<String>("config").expect("required");
            std::fs::read_to_string(path)
                .map_err(|e| {
                    rabi_ncho::Error::InvalidArgument(format!("cannot read config {path}: {e}"))
                })
                .and_then(|text| RunConfig::parse_file(&text))
        }
        Some((name, sub)) => Command::parse(name)
            .and_then(|c| config_from_matches(c, sub))
            .and_then(|(cfg, save)| {
                if let Some(path) = save {
                    std::fs::write(resolve_output_path(&path), cfg.to_file_section()).map_err(
                        |e| rabi_ncho::Error::InvalidArgument(format!("cannot write {path}: {e}")),
                    )?;
                }
                Ok(vec![cfg])
            }),
        None => unreachable!("subcommand required"),
    };

    let runs = match runs {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    for cfg in &runs {
        if let Err(e) = run_one(cfg) {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_refusal() { 2 } else { 1 });
        }
    }
    ExitCode::SUCCESS
}
