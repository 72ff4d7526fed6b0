mod commands;
mod output;
mod parse;

use clap::{Parser, Subcommand, ValueEnum};
use commands::*;
use output::{Header, Report};
use std::io::Write;
use std::process::ExitCode;

pub const DEFAULT_SEED: u64 = 1729;

/// Numerical quantum mechanics experiments.
#[derive(Parser, Debug)]
#[command(name = "qmkit", version, about)]
struct Cli {
    /// Output format; each subcommand has its own default (see `qmkit list`).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Clebsch-Gordan table for j1 ⊗ j2.
    Cg(CgArgs),
    /// Spin-orbit plus Zeeman levels of a p electron.
    Zeeman(ZeemanArgs),
    /// Compose rotations in a spin-j representation.
    Rotate(RotateArgs),
    /// Two-level Rabi oscillation.
    Rabi(RabiArgs),
    /// Landau-Zener transition probability.
    Lz(LzArgs),
    /// Decay of a level into a quasi-continuum.
    FgrDecay(FgrDecayArgs),
    /// Resonance pole of a delta-shielded well.
    Gamow(GamowArgs),
    /// Levels of a ring with one delta scatterer.
    RingSpectrum(RingArgs),
    /// Clean-ring levels versus flux.
    AbFluxSweep(AbArgs),
    /// Levels of a quantum graph.
    Network(NetworkArgs),
    /// Transmission through two identical barriers.
    FabryPerot(FabryPerotArgs),
    /// Total cross section of a sphere versus ka.
    SphereXsec(SphereArgs),
    /// Partial-wave phase shifts at one energy.
    PhaseShifts(PhaseShiftArgs),
    /// Born phase shift against the exact one.
    Born(BornArgs),
    /// Wigner function of a chosen state.
    Wigner(WignerArgs),
    /// Bose-Hubbard dimer spectrum.
    Dimer(DimerArgs),
    /// Singlet correlations and the CHSH sum.
    Bell(BellArgs),
    /// Schmidt decomposition of a bipartite pure state.
    Schmidt(SchmidtArgs),
    /// Factor N by simulated period finding.
    Shor(ShorArgs),
    /// RSA round trip.
    Rsa(RsaArgs),
    /// QFT of a periodic comb.
    QftDemo(QftArgs),
    /// Subcommands and their topics.
    List,
}

pub enum Failure {
    Usage(String),
    Compute { message: String, report: Option<Report> },
}

fn threads() -> Result<usize, String> {
    match std::env::var("QMKIT_THREADS") {
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!("QMKIT_THREADS must be a positive integer, got '{s}'")),
        },
    }
}

fn name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Cg(_) => "cg",
        Cmd::Zeeman(_) => "zeeman",
        Cmd::Rotate(_) => "rotate",
        Cmd::Rabi(_) => "rabi",
        Cmd::Lz(_) => "lz",
        Cmd::FgrDecay(_) => "fgr-decay",
        Cmd::Gamow(_) => "gamow",
        Cmd::RingSpectrum(_) => "ring-spectrum",
        Cmd::AbFluxSweep(_) => "ab-flux-sweep",
        Cmd::Network(_) => "network",
        Cmd::FabryPerot(_) => "fabry-perot",
        Cmd::SphereXsec(_) => "sphere-xsec",
        Cmd::PhaseShifts(_) => "phase-shifts",
        Cmd::Born(_) => "born",
        Cmd::Wigner(_) => "wigner",
        Cmd::Dimer(_) => "dimer",
        Cmd::Bell(_) => "bell",
        Cmd::Schmidt(_) => "schmidt",
        Cmd::Shor(_) => "shor",
        Cmd::Rsa(_) => "rsa",
        Cmd::QftDemo(_) => "qft-demo",
        Cmd::List => "list",
    }
}

fn run(cli: &Cli, threads: usize) -> Result<Report, Failure> {
    match &cli.cmd {
        Cmd::Cg(a) => cg(a),
        Cmd::Zeeman(a) => zeeman(a),
        Cmd::Rotate(a) => rotate(a),
        Cmd::Rabi(a) => rabi(a),
        Cmd::Lz(a) => lz(a, threads),
        Cmd::FgrDecay(a) => fgr_decay(a),
        Cmd::Gamow(a) => gamow(a),
        Cmd::RingSpectrum(a) => ring_spectrum(a, threads),
        Cmd::AbFluxSweep(a) => ab_flux_sweep(a),
        Cmd::Network(a) => network(a),
        Cmd::FabryPerot(a) => fabry_perot(a),
        Cmd::SphereXsec(a) => sphere_xsec(a),
        Cmd::PhaseShifts(a) => phase_shifts(a),
        Cmd::Born(a) => born(a),
        Cmd::Wigner(a) => wigner(a),
        Cmd::Dimer(a) => dimer(a),
        Cmd::Bell(a) => bell(a),
        Cmd::Schmidt(a) => schmidt(a),
        Cmd::Shor(a) => shor(a, cli.seed),
        Cmd::Rsa(a) => rsa(a),
        Cmd::QftDemo(a) => qft_demo(a),
        Cmd::List => Ok(list()),
    }
}

fn emit(cli: &Cli, sub: &str, report: &Report) -> Result<(), String> {
    let default = EXPERIMENTS.iter().find(|e| e.0 == sub).map_or("json", |e| e.2);
    let format = cli.format.unwrap_or(if default == "csv" { Format::Csv } else { Format::Json });
    let header = Header { version: env!("CARGO_PKG_VERSION"), subcommand: sub, seed: cli.seed };
    let text = match format {
        Format::Csv => output::to_csv(&header, report),
        Format::Json => output::to_json(&header, report),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| format!("cannot write output: {e}")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("qmkit: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let threads = match threads() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("qmkit: {e}");
            return ExitCode::from(2);
        }
    };
    let sub = name(&cli.cmd);
    match run(&cli, threads) {
        Ok(report) => match emit(&cli, sub, &report) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("qmkit: {e}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("qmkit {sub}: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute { message, report }) => {
            if let Some(r) = report {
                let _ = emit(&cli, sub, &r);
            }
            eprintln!("qmkit {sub}: {message}");
            ExitCode::from(1)
        }
    }
}
