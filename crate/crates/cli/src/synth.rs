//! `qfeo synth`: planted-signal datasets as CSV.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{load_source, SyntheticSpec};
use crate::{create_dir, from_value, is_safe_name, sha256_hex, write_json, CliError, CliResult, ConfigSource};

pub const SYNTH_PRESETS: [(&str, &str); 1] = [("planted", include_str!("../../../configs/synth-planted.json"))];

fn default_name() -> String {
    "planted".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub d: usize,
    pub p: usize,
    pub k_informative: usize,
    #[serde(default)]
    pub noise_sd: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthMetadata {
    pub spec: SyntheticSpec,
    pub informative: Vec<usize>,
    pub csv: String,
    pub sha256: String,
}

pub fn cmd_synth(source: &ConfigSource, out: &Path, seed: Option<u64>) -> CliResult<PathBuf> {
    let (value, _, origin) = load_source(source, &SYNTH_PRESETS)?;
    let cfg: SynthConfig = from_value(value, &origin)?;
    if !is_safe_name(&cfg.name) {
        return Err(CliError::Config(format!("{origin}: name: {:?} is not a valid file name", cfg.name)));
    }
    let spec = SyntheticSpec {
        d: cfg.d,
        p: cfg.p,
        k_informative: cfg.k_informative,
        noise_sd: cfg.noise_sd.unwrap_or(0.5),
        seed: seed.unwrap_or(cfg.seed),
    };
    let ds = spec.generate().map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    let mut bytes = Vec::new();
    ds.write_csv(&mut bytes).map_err(|e| CliError::Runtime(e.to_string()))?;

    create_dir(out)?;
    let csv_path = out.join(format!("{}.csv", cfg.name));
    std::fs::write(&csv_path, &bytes).map_err(|e| crate::io_err(&csv_path, e))?;
    let meta = SynthMetadata {
        spec,
        informative: ds.informative.clone().unwrap_or_default(),
        csv: format!("{}.csv", cfg.name),
        sha256: sha256_hex(&bytes),
    };
    write_json(&out.join(format!("{}.json", cfg.name)), &meta)?;
    Ok(csv_path)
}
