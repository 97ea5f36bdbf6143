//! `qfeo expressibility`: state-matrix SVD curves per manipulation kind.

use std::path::{Path, PathBuf};

use qfeo_core::expressibility::{expressibility_study, write_curve_csv, CurvePoint, StudyConfig, StudyResult};
use qfeo_core::featuremaps::FeatureMapConfig;
use qfeo_core::manipulate::ManipulationKind;
use serde::{Deserialize, Serialize};

use crate::config::{load_source, resolve_map, STUDY_PRESETS};
use crate::{create_dir, from_value, write_json, write_with, CliError, CliResult, ConfigSource};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyMap {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub config: Option<FeatureMapConfig>,
    #[serde(default)]
    pub n_qubits: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub reload: Option<bool>,
}

/// The study config file. Unset fields take the study defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyFile {
    pub feature_map: StudyMap,
    pub n_features: usize,
    #[serde(default)]
    pub kinds: Option<Vec<ManipulationKind>>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub repetitions: Option<usize>,
    #[serde(default)]
    pub fs_r: Option<usize>,
    #[serde(default)]
    pub fractions: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl StudyFile {
    pub fn resolve(&self) -> CliResult<StudyConfig> {
        let m = &self.feature_map;
        let mut fm = resolve_map(m.preset.as_deref(), m.config.as_ref(), m.alpha, m.reload, "feature_map")?;
        if let Some(n) = m.n_qubits {
            fm.n_qubits = n;
        }
        // Fill the remaining defaults through serde so they match the
        // library's.
        let mut value = serde_json::json!({ "feature_map": fm, "n_features": self.n_features });
        let obj = value.as_object_mut().expect("object literal");
        let mut put = |k: &str, v: serde_json::Value| {
            obj.insert(k.into(), v);
        };
        if let Some(v) = &self.kinds {
            put("kinds", serde_json::json!(v));
        }
        if let Some(v) = self.samples {
            put("samples", v.into());
        }
        if let Some(v) = self.repetitions {
            put("repetitions", v.into());
        }
        if let Some(v) = self.fs_r {
            put("fs_r", v.into());
        }
        if let Some(v) = &self.fractions {
            put("fractions", serde_json::json!(v));
        }
        if let Some(v) = self.seed {
            put("seed", v.into());
        }
        let mut cfg: StudyConfig = from_value(value, "study")?;
        cfg.fs_r = Some(cfg.fs_r());
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyManifest {
    pub manifest_version: u32,
    pub tool: String,
    pub version: String,
    pub study: StudyConfig,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct StudyOutcome {
    pub out_dir: PathBuf,
    pub config: StudyConfig,
    pub result: StudyResult,
}

fn load_study(source: &ConfigSource) -> CliResult<StudyConfig> {
    let (value, _, origin) = load_source(source, &STUDY_PRESETS)?;
    if value.get("manifest_version").is_some() {
        let m: StudyManifest = from_value(value, &origin)?;
        m.study.validate().map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        return Ok(m.study);
    }
    let file: StudyFile = from_value(value, &origin)?;
    file.resolve().map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{origin}: {m}")),
        other => other,
    })
}

fn curve_outputs(kinds: &[ManipulationKind]) -> Vec<String> {
    let mut out = vec!["reconstruction.csv".to_string(), "components.csv".to_string()];
    for k in kinds {
        out.push(format!("{k}_reconstruction.csv"));
        out.push(format!("{k}_components.csv"));
    }
    out.push("repetitions.json".into());
    out
}

fn write_curve(path: &Path, curve: &[CurvePoint]) -> CliResult<()> {
    write_with(path, |buf| write_curve_csv(curve, buf))
}

pub fn cmd_expressibility(source: &ConfigSource, out: &Path, seed: Option<u64>) -> CliResult<StudyOutcome> {
    let mut config = load_study(source)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    create_dir(out)?;
    let manifest = StudyManifest {
        manifest_version: crate::config::MANIFEST_VERSION,
        tool: "qfeo".into(),
        version: crate::VERSION.into(),
        study: config.clone(),
        outputs: curve_outputs(&config.kinds),
    };
    write_json(&out.join("manifest.json"), &manifest)?;

    let result = expressibility_study(&config).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_curve(&out.join("reconstruction.csv"), &result.reconstruction)?;
    write_curve(&out.join("components.csv"), &result.components)?;
    for &k in &config.kinds {
        let pick = |c: &[CurvePoint]| c.iter().filter(|p| p.kind == k).cloned().collect::<Vec<_>>();
        write_curve(&out.join(format!("{k}_reconstruction.csv")), &pick(&result.reconstruction))?;
        write_curve(&out.join(format!("{k}_components.csv")), &pick(&result.components))?;
    }
    write_json(&out.join("repetitions.json"), &result.repetitions)?;
    Ok(StudyOutcome {
        out_dir: out.to_path_buf(),
        config,
        result,
    })
}
