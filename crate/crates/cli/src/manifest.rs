//! Run manifests: everything needed to reproduce an output set.

use std::path::Path;

use anyhow::Context;
use dcplab::InterferometerConfig;
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum OutputFormat {
    #[serde(rename = "csv")]
    #[value(name = "csv")]
    Csv,
    #[serde(rename = "csv+svg")]
    #[value(name = "csv+svg")]
    CsvSvg,
}

impl OutputFormat {
    pub fn svg(self) -> bool {
        self == OutputFormat::CsvSvg
    }
}

/// Fully resolved inputs of one subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Run {
    QuantumLoop {
        /// `[re, im]`
        alpha: [f64; 2],
        beta: [f64; 2],
        dim: usize,
        trials: usize,
    },
    WaveLoop {
        shifts: Vec<f64>,
        wavenumbers: Vec<f64>,
        length: f64,
        samples: usize,
        wave: String,
    },
    ActionLoop {
        source: String,
        /// `[x, p, duration]` per vertex.
        vertices: Vec<[f64; 3]>,
        hbar: f64,
    },
    Interferometer {
        source: String,
        config: InterferometerConfig,
        dump_fringes: bool,
    },
}

impl Run {
    pub fn name(&self) -> &'static str {
        match self {
            Run::QuantumLoop { .. } => "quantum-loop",
            Run::WaveLoop { .. } => "wave-loop",
            Run::ActionLoop { .. } => "action-loop",
            Run::Interferometer { .. } => "interferometer",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub out_dir: String,
    pub rng_seed: u64,
    pub format: OutputFormat,
    #[serde(flatten)]
    pub run: Run,
}

impl RunManifest {
    pub fn new(run: Run, out_dir: &Path, rng_seed: u64, format: OutputFormat) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            out_dir: out_dir.display().to_string(),
            rng_seed,
            format,
            run,
        }
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(())
    }
}
