//! The run configuration file, its materialization into concrete jobs and
//! the manifest written next to the results.

use std::path::{Path, PathBuf};

use qfeo_core::bayesopt::BoConfig;
use qfeo_core::data::{stratified_batches, synthetic_planted, Dataset, Split};
use qfeo_core::featuremaps::FeatureMapConfig;
use qfeo_core::learn::HyperparamGrid;
use qfeo_core::manipulate::{ManipulationKind, ManipulationSpec};
use qfeo_core::qfeo::{BatchSeeds, CvConfig, DataConfig, ExperimentConfig, RescaleConfig};
use serde::{Deserialize, Serialize};

use crate::{from_value, is_safe_name, parse_json, read_text, sha256_hex, CliError, CliResult, ConfigSource};

/// Configs shipped with the tool, selectable with `--preset`.
pub const RUN_PRESETS: [(&str, &str); 3] = [
    ("smoke", include_str!("../../../configs/smoke.json")),
    ("desk", include_str!("../../../configs/desk.json")),
    ("paper-scale", include_str!("../../../configs/paper-scale.json")),
];

pub const STUDY_PRESETS: [(&str, &str); 2] = [
    ("expressibility-hh4", include_str!("../../../configs/expressibility-hh4.json")),
    ("expressibility-smoke", include_str!("../../../configs/expressibility-smoke.json")),
];

pub(crate) fn preset_text(table: &[(&str, &'static str)], name: &str) -> CliResult<&'static str> {
    table.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or_else(|| {
        let names: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
        CliError::Config(format!("unknown preset {name:?}; available: {}", names.join(", ")))
    })
}

/// Reads a config from a file or a shipped preset. Relative dataset paths
/// resolve against the returned directory, which is always the current
/// working directory.
pub(crate) fn load_source(
    source: &ConfigSource,
    presets: &[(&str, &'static str)],
) -> CliResult<(serde_json::Value, PathBuf, String)> {
    match source {
        ConfigSource::File(path) => {
            let origin = path.display().to_string();
            let value = parse_json(&read_text(path)?, &origin)?;
            Ok((value, PathBuf::from("."), origin))
        }
        ConfigSource::Preset(name) => {
            let origin = format!("preset {name}");
            let value = parse_json(preset_text(presets, name)?, &origin)?;
            Ok((value, PathBuf::from("."), origin))
        }
    }
}

fn default_noise() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub d: usize,
    pub p: usize,
    pub k_informative: usize,
    #[serde(default = "default_noise")]
    pub noise_sd: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn generate(&self) -> qfeo_core::Result<Dataset> {
        synthetic_planted(self.d, self.p, self.k_informative, self.noise_sd, self.seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
    /// Subset size for FS and FSO; defaults to half the features.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fs_r: Option<usize>,
    /// Overrides `data.balance` for this dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureMapEntry {
    /// Name used in output paths; defaults to the preset name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<FeatureMapConfig>,
    /// Qubit counts to sweep; empty keeps the base config's count.
    #[serde(default)]
    pub n_qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reload: Option<bool>,
}

impl FeatureMapEntry {
    /// The feature map before the qubit sweep, with overrides applied.
    pub fn base(&self, at: &str) -> CliResult<FeatureMapConfig> {
        resolve_map(self.preset.as_deref(), self.config.as_ref(), self.alpha, self.reload, at)
    }

    pub fn name(&self, index: usize) -> String {
        self.label
            .clone()
            .or_else(|| self.preset.clone())
            .unwrap_or_else(|| format!("map{index}"))
    }
}

pub(crate) fn resolve_map(
    preset: Option<&str>,
    config: Option<&FeatureMapConfig>,
    alpha: Option<f64>,
    reload: Option<bool>,
    at: &str,
) -> CliResult<FeatureMapConfig> {
    let mut cfg = match (preset, config) {
        (Some(name), None) => FeatureMapConfig::preset(name).ok_or_else(|| {
            CliError::Config(format!(
                "{at}.preset: unknown feature map {name:?}; available: {}",
                FeatureMapConfig::PRESETS.join(", ")
            ))
        })?,
        (None, Some(c)) => c.clone(),
        _ => return Err(CliError::Config(format!("{at}: give exactly one of preset and config"))),
    };
    if let Some(a) = alpha {
        cfg.alpha = a;
    }
    if let Some(r) = reload {
        cfg.reload = r;
    }
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassifierEntry {
    Preset(String),
    Grid(HyperparamGrid),
}

impl ClassifierEntry {
    pub fn grid(&self) -> CliResult<HyperparamGrid> {
        match self {
            ClassifierEntry::Grid(g) => Ok(g.clone()),
            ClassifierEntry::Preset(name) => HyperparamGrid::preset(name).ok_or_else(|| {
                CliError::Config(format!(
                    "classifier: unknown grid preset {name:?}; available: {}",
                    HyperparamGrid::PRESETS.join(", ")
                ))
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub datasets: Vec<DatasetEntry>,
    pub feature_maps: Vec<FeatureMapEntry>,
    pub manipulations: Vec<ManipulationKind>,
    pub classifier: ClassifierEntry,
    pub bo: BoConfig,
    #[serde(default)]
    pub cv: CvConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub rescale: RescaleConfig,
}

/// One input dataset after loading.
#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub name: String,
    pub data: Dataset,
    pub source: String,
    pub sha256: String,
    pub splits: Vec<Split>,
}

/// One (dataset, feature map, qubit count, manipulation) combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: String,
    pub dataset: String,
    pub feature_map: String,
    pub n_qubits: usize,
    pub manipulation: ManipulationKind,
    pub experiment: ExperimentConfig,
}

#[derive(Clone, Debug)]
pub struct Plan {
    /// The config with every default filled in and paths made absolute.
    pub config: RunConfig,
    pub datasets: Vec<LoadedDataset>,
    pub jobs: Vec<Job>,
}

fn load_dataset(entry: &DatasetEntry, at: &str, base_dir: &Path) -> CliResult<(Dataset, String, String, Option<PathBuf>)> {
    match (&entry.csv, &entry.synthetic) {
        (Some(path), None) => {
            let full = base_dir.join(path);
            let bytes = std::fs::read(&full)
                .map_err(|e| CliError::Input(format!("{at}.csv: {}: {e}", full.display())))?;
            let data = qfeo_core::data::read_csv(bytes.as_slice())
                .map_err(|e| CliError::Input(format!("{at}.csv: {}: {e}", full.display())))?;
            let abs = std::path::absolute(&full).unwrap_or(full);
            Ok((data, abs.display().to_string(), sha256_hex(&bytes), Some(abs)))
        }
        (None, Some(spec)) => {
            let data = spec
                .generate()
                .map_err(|e| CliError::Config(format!("{at}.synthetic: {e}")))?;
            let mut bytes = Vec::new();
            data.write_csv(&mut bytes)
                .map_err(|e| CliError::Runtime(format!("{at}: {e}")))?;
            Ok((data, "synthetic".into(), sha256_hex(&bytes), None))
        }
        _ => Err(CliError::Config(format!("{at}: give exactly one of csv and synthetic"))),
    }
}

/// The FS subset size used when the config gives none.
pub fn default_fs_r(p: usize) -> usize {
    (p / 2).max(1)
}

impl RunConfig {
    /// Loads the datasets, fills defaults and expands the sweep into jobs.
    /// Every error here is a config or input error.
    pub fn plan(&self, base_dir: &Path) -> CliResult<Plan> {
        if self.datasets.is_empty() || self.feature_maps.is_empty() || self.manipulations.is_empty() {
            return Err(CliError::Config(
                "datasets, feature_maps and manipulations must each be non-empty".into(),
            ));
        }
        let grid = self.classifier.grid()?;
        let mut materialized = self.clone();
        materialized.classifier = ClassifierEntry::Grid(grid.clone());

        let mut datasets = Vec::new();
        for (j, entry) in self.datasets.iter().enumerate() {
            let at = format!("datasets[{j}]");
            if !is_safe_name(&entry.name) {
                return Err(CliError::Config(format!("{at}.name: {:?} is not a valid file name", entry.name)));
            }
            if self.datasets[..j].iter().any(|d| d.name == entry.name) {
                return Err(CliError::Config(format!("{at}.name: duplicate dataset {:?}", entry.name)));
            }
            let (data, source, sha256, abs) = load_dataset(entry, &at, base_dir)?;
            let balance = entry.balance.unwrap_or(self.data.balance);
            let splits = stratified_batches(&data.labels, self.data.n_batches, self.data.test_fraction, balance, self.seed)
                .map_err(|e| CliError::Config(format!("{at}: {e}")))?;
            let m = &mut materialized.datasets[j];
            m.csv = abs;
            m.balance = Some(balance);
            m.fs_r = Some(entry.fs_r.unwrap_or_else(|| default_fs_r(data.n_features())));
            datasets.push(LoadedDataset {
                name: entry.name.clone(),
                data,
                source,
                sha256,
                splits,
            });
        }

        let mut maps = Vec::new();
        for (i, entry) in self.feature_maps.iter().enumerate() {
            let at = format!("feature_maps[{i}]");
            let base = entry.base(&at)?;
            let label = entry.name(i);
            if !is_safe_name(&label) {
                return Err(CliError::Config(format!("{at}.label: {label:?} is not a valid file name")));
            }
            if maps.iter().any(|(l, _, _): &(String, _, _)| *l == label) {
                return Err(CliError::Config(format!("{at}: duplicate feature map label {label:?}")));
            }
            let qubits = if entry.n_qubits.is_empty() { vec![base.n_qubits] } else { entry.n_qubits.clone() };
            for &n in &qubits {
                let cfg = FeatureMapConfig { n_qubits: n, ..base.clone() };
                cfg.validate().map_err(|e| CliError::Config(format!("{at} with n_qubits {n}: {e}")))?;
            }
            materialized.feature_maps[i] = FeatureMapEntry {
                label: Some(label.clone()),
                preset: None,
                config: Some(base.clone()),
                n_qubits: qubits.clone(),
                alpha: None,
                reload: None,
            };
            maps.push((label, base, qubits));
        }

        let mut jobs = Vec::new();
        for (j, ds) in datasets.iter().enumerate() {
            let entry = &materialized.datasets[j];
            let data = DataConfig {
                balance: entry.balance.unwrap_or(self.data.balance),
                ..self.data.clone()
            };
            for (i, (label, base, qubits)) in maps.iter().enumerate() {
                for &n in qubits {
                    for &kind in &self.manipulations {
                        let r = if kind.selects() { entry.fs_r.unwrap_or(0) } else { 0 };
                        let experiment = ExperimentConfig {
                            feature_map: FeatureMapConfig { n_qubits: n, ..base.clone() },
                            manipulation: ManipulationSpec::with_r(kind, r),
                            classifier: grid.clone(),
                            bo: self.bo.clone(),
                            cv: self.cv.clone(),
                            data: data.clone(),
                            rescale: self.rescale.clone(),
                            seed: self.seed,
                        };
                        experiment.validate(Some(ds.data.n_features())).map_err(|e| {
                            CliError::Config(format!(
                                "datasets[{j}] ({}) with feature_maps[{i}] ({label}, n_qubits {n}) and {kind}: {e}",
                                ds.name
                            ))
                        })?;
                        jobs.push(Job {
                            id: format!("{}__{label}__q{n}__{kind}", ds.name),
                            dataset: ds.name.clone(),
                            feature_map: label.clone(),
                            n_qubits: n,
                            manipulation: kind,
                            experiment,
                        });
                    }
                }
            }
        }
        Ok(Plan {
            config: materialized,
            datasets,
            jobs,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub dataset: String,
    pub source: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: u64,
    /// Derived seeds per batch index; identical for every job.
    pub batches: Vec<BatchSeeds>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub summary: String,
    pub splits: Vec<String>,
    pub runs: Vec<String>,
}

/// Everything needed to repeat a run. Passing this file back as `--config`
/// re-runs it and refuses inputs whose digests changed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub seeds: SeedRecord,
    pub inputs: Vec<InputDigest>,
    pub jobs: Vec<Job>,
    pub outputs: OutputRecord,
}

pub const MANIFEST_VERSION: u32 = 1;

impl RunManifest {
    pub fn new(plan: &Plan) -> Self {
        Self {
            manifest_version: MANIFEST_VERSION,
            tool: "qfeo".into(),
            version: crate::VERSION.into(),
            config: plan.config.clone(),
            seeds: SeedRecord {
                master: plan.config.seed,
                batches: (0..plan.config.data.n_batches)
                    .map(|b| BatchSeeds::derive(plan.config.seed, b))
                    .collect(),
            },
            inputs: plan
                .datasets
                .iter()
                .map(|d| InputDigest {
                    dataset: d.name.clone(),
                    source: d.source.clone(),
                    sha256: d.sha256.clone(),
                })
                .collect(),
            jobs: plan.jobs.clone(),
            outputs: OutputRecord {
                summary: "summary.csv".into(),
                splits: plan.datasets.iter().map(|d| format!("splits/{}.json", d.name)).collect(),
                runs: plan.jobs.iter().map(|j| format!("runs/{}", j.id)).collect(),
            },
        }
    }

    /// Errors when a loaded input no longer matches its recorded digest.
    pub fn check_inputs(&self, plan: &Plan) -> CliResult<()> {
        for rec in &self.inputs {
            let found = plan.datasets.iter().find(|d| d.name == rec.dataset);
            match found {
                Some(d) if d.sha256 == rec.sha256 => {}
                Some(d) => {
                    return Err(CliError::Input(format!(
                        "dataset {} ({}) changed since the manifest was written: sha256 {} != {}",
                        rec.dataset, d.source, d.sha256, rec.sha256
                    )))
                }
                None => return Err(CliError::Input(format!("dataset {} missing from config", rec.dataset))),
            }
        }
        Ok(())
    }
}

/// A run config, either written by hand or recovered from a manifest.
pub struct LoadedRun {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub manifest: Option<RunManifest>,
}

pub fn load_run(source: &ConfigSource) -> CliResult<LoadedRun> {
    let (value, base_dir, origin) = load_source(source, &RUN_PRESETS)?;
    if value.get("manifest_version").is_some() {
        let manifest: RunManifest = from_value(value, &origin)?;
        if manifest.manifest_version != MANIFEST_VERSION {
            return Err(CliError::Config(format!(
                "{origin}: unsupported manifest version {}",
                manifest.manifest_version
            )));
        }
        return Ok(LoadedRun {
            config: manifest.config.clone(),
            base_dir,
            manifest: Some(manifest),
        });
    }
    Ok(LoadedRun {
        config: from_value(value, &origin)?,
        base_dir,
        manifest: None,
    })
}
