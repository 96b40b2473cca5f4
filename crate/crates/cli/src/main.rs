//! `dcplab`: command-line front end for the displacement-loop demonstrations.

mod commands;
mod complex_arg;
mod manifest;
mod svg;

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use dcplab::{InterferometerConfig, PolygonPath};
use num_complex::Complex64;

use crate::complex_arg::parse_complex;
use crate::manifest::{OutputFormat, Run, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "dcplab", version, about = "Closed displacement loops: quantum, wave, classical and fiber-optic")]
struct Cli {
    /// Output directory; created if missing. Defaults to `dcplab-out`, or to
    /// the recorded directory when replaying.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// RNG seed for random states, random waves and camera noise.
    /// For `interferometer` it overrides `rng_seed` from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Loop phase of D(-β)D(-α)D(β)D(α) on random Fock-space states.
    QuantumLoop(QuantumArgs),
    /// Position/frequency displacement loop on a sampled periodic wave.
    WaveLoop(WaveArgs),
    /// Classical action around a closed polygon in phase space.
    ActionLoop(ActionArgs),
    /// Simulated rf sweep of the fiber interferometer.
    Interferometer(InterferometerArgs),
    /// Re-run the inputs recorded in a manifest.json.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Args, Debug)]
struct QuantumArgs {
    /// Complex literal such as `1`, `i`, `0.5-2i`.
    #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
    alpha: Complex64,
    #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
    beta: Complex64,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
}

#[derive(Args, Debug)]
struct WaveArgs {
    /// Position shifts X (comma separated).
    #[arg(long = "x", required = true, value_delimiter = ',', allow_hyphen_values = true)]
    shifts: Vec<f64>,
    /// Wavenumbers K in rad per unit length (comma separated).
    #[arg(long = "k", value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "modes", required_unless_present = "modes")]
    wavenumbers: Vec<f64>,
    /// Wavenumbers as mode counts m, K = 2πm/L.
    #[arg(long = "k-mode", id = "modes", value_delimiter = ',', allow_hyphen_values = true)]
    modes: Vec<i64>,
    /// Period L.
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    #[arg(long, default_value_t = 256)]
    samples: usize,
    /// `const`, `plane:M`, `sine:M` or `random:B`.
    #[arg(long, default_value = "random:8")]
    wave: String,
}

#[derive(Args, Debug)]
struct ActionArgs {
    /// CSV of `x,p,duration` rows describing a closed polygon.
    path_file: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
}

#[derive(Args, Debug)]
struct InterferometerArgs {
    /// TOML apparatus description.
    config: PathBuf,
    /// Also write every camera frame as fringes_<i>.csv.
    #[arg(long)]
    dump_fringes: bool,
}

fn resolve(cli: &Cli) -> anyhow::Result<RunManifest> {
    let seed = cli.seed.unwrap_or(0);
    let (run, seed) = match &cli.command {
        Command::QuantumLoop(a) => (
            Run::QuantumLoop {
                alpha: [a.alpha.re, a.alpha.im],
                beta: [a.beta.re, a.beta.im],
                dim: a.dim,
                trials: a.trials,
            },
            seed,
        ),
        Command::WaveLoop(a) => {
            let wavenumbers = if a.modes.is_empty() {
                a.wavenumbers.clone()
            } else {
                a.modes.iter().map(|&m| std::f64::consts::TAU * m as f64 / a.length).collect()
            };
            (
                Run::WaveLoop {
                    shifts: a.shifts.clone(),
                    wavenumbers,
                    length: a.length,
                    samples: a.samples,
                    wave: a.wave.clone(),
                },
                seed,
            )
        }
        Command::ActionLoop(a) => {
            let file = File::open(&a.path_file).with_context(|| format!("opening {}", a.path_file.display()))?;
            let path = PolygonPath::read_csv(BufReader::new(file))
                .with_context(|| format!("reading {}", a.path_file.display()))?;
            let vertices = path
                .vertices()
                .iter()
                .zip(path.durations())
                .map(|(v, &d)| [v.x, v.p, d])
                .collect();
            (
                Run::ActionLoop {
                    source: a.path_file.display().to_string(),
                    vertices,
                    hbar: a.hbar,
                },
                seed,
            )
        }
        Command::Interferometer(a) => {
            let text =
                std::fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
            let mut config = InterferometerConfig::from_toml_str(&text)
                .with_context(|| format!("loading {}", a.config.display()))?;
            if let Some(s) = cli.seed {
                config.rng_seed = s;
            }
            let seed = config.rng_seed;
            (
                Run::Interferometer {
                    source: a.config.display().to_string(),
                    config,
                    dump_fringes: a.dump_fringes,
                },
                seed,
            )
        }
        Command::Replay { manifest } => {
            let mut m = RunManifest::read(manifest)?;
            if let Some(out) = &cli.out {
                m.out_dir = out.display().to_string();
            }
            return Ok(m);
        }
    };
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("dcplab-out"));
    Ok(RunManifest::new(run, &out, seed, cli.format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(&cli).and_then(|m| {
        let out = PathBuf::from(&m.out_dir);
        commands::execute(&m, &out).map(|o| (m, o))
    });
    match result {
        Ok((m, outcome)) => {
            if outcome.ok() {
                println!("{}: ok, outputs in {}", m.run.name(), m.out_dir);
                ExitCode::SUCCESS
            } else {
                for f in &outcome.failures {
                    eprintln!("contract violated: {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
