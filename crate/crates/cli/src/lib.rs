//! Command-line front end: configuration parsing, the five run commands,
//! CSV output and run manifests.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

pub use commands::{compute, run_command, Command, Outcome, RunReport};
pub use config::{parse_config, ConfigError, RunConfig};
pub use error::{CliError, Result};

/// Generator used for random states and collapse sampling.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64) with WeightedIndex (rand 0.9)";

/// Reads and parses a configuration file, then applies command-line overrides.
pub fn load_config(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(dir) = out {
        cfg.set_output_dir(dir);
    }
    if let Some(s) = seed {
        cfg.set_seed(s);
    }
    Ok(cfg)
}
