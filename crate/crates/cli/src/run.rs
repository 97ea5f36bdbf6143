//! `qfeo run`: every configured job, its per-batch results, traces and
//! importance tables, and the summary table.

use std::path::{Path, PathBuf};

use qfeo_core::data::Dataset;
use qfeo_core::qfeo::{run_batches, ImportanceTable, QfeoResult};

use crate::config::{load_run, Job, Plan, RunManifest};
use crate::{create_dir, io_err, write_json, write_with, CliError, CliResult, ConfigSource};

pub const SUMMARY_HEADER: [&str; 12] = [
    "run_id",
    "dataset",
    "feature_map",
    "n_qubits",
    "manipulation",
    "n_batches",
    "nfo_mean",
    "nfo_std",
    "qfeo_mean",
    "qfeo_std",
    "percent_change",
    "percent_std",
];

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
    pub results: Vec<(Job, QfeoResult)>,
}

pub fn summary_record(job: &Job, r: &QfeoResult) -> Vec<String> {
    let s = &r.summary;
    vec![
        job.id.clone(),
        job.dataset.clone(),
        job.feature_map.clone(),
        job.n_qubits.to_string(),
        job.manipulation.to_string(),
        s.n_batches.to_string(),
        s.nfo_mean.to_string(),
        s.nfo_std.to_string(),
        s.qfeo_mean.to_string(),
        s.qfeo_std.to_string(),
        s.percent_change.to_string(),
        s.percent_std.to_string(),
    ]
}

/// Feature-by-measure importance CSV. Writes nothing and returns false when
/// the manipulation has no weights to report.
pub fn write_importance_csv(path: &Path, table: &ImportanceTable, ds: &Dataset) -> CliResult<bool> {
    if table.columns.is_empty() {
        return Ok(false);
    }
    write_with(path, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        let mut header = vec!["feature".to_string()];
        header.extend(table.columns.iter().map(|c| c.name.clone()));
        w.write_record(&header)?;
        for (f, name) in ds.feature_names.iter().enumerate() {
            let mut row = vec![name.clone()];
            row.extend(table.columns.iter().map(|c| c.values[f].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(true)
}

fn write_job(dir: &Path, job: &Job, result: &QfeoResult, ds: &Dataset) -> CliResult<()> {
    create_dir(&dir.join("batches"))?;
    if result.batches.iter().any(|b| b.trace.is_some()) {
        create_dir(&dir.join("traces"))?;
    }
    write_json(&dir.join("result.json"), result)?;
    for b in &result.batches {
        write_json(&dir.join(format!("batches/batch_{:02}.json", b.batch)), b)?;
        if let Some(trace) = &b.trace {
            write_with(&dir.join(format!("traces/batch_{:02}.csv", b.batch)), |buf| trace.write_csv(buf))?;
            write_json(&dir.join(format!("traces/batch_{:02}.json", b.batch)), trace)?;
        }
    }
    write_importance_csv(&dir.join("importance.csv"), &result.importance, ds)?;
    log::info!(
        "{}: NFO {:.4} -> {} {:.4} ({:+.2}%)",
        job.id,
        result.summary.nfo_mean,
        job.manipulation,
        result.summary.qfeo_mean,
        result.summary.percent_change
    );
    Ok(())
}

/// Writes the splits and the manifest. Nothing has been computed yet when
/// this returns.
pub fn prepare(plan: &Plan, out: &Path) -> CliResult<RunManifest> {
    create_dir(&out.join("splits"))?;
    create_dir(&out.join("runs"))?;
    for ds in &plan.datasets {
        write_json(&out.join(format!("splits/{}.json", ds.name)), &ds.splits)?;
    }
    let manifest = RunManifest::new(plan);
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

pub fn execute(plan: &Plan, manifest: RunManifest, out: &Path) -> CliResult<RunOutcome> {
    let mut results = Vec::new();
    let summary_path = out.join("summary.csv");
    let mut summary = csv::Writer::from_path(&summary_path).map_err(|e| io_err(&summary_path, e))?;
    summary.write_record(SUMMARY_HEADER).map_err(|e| io_err(&summary_path, e))?;
    for job in &plan.jobs {
        let ds = plan
            .datasets
            .iter()
            .find(|d| d.name == job.dataset)
            .expect("jobs reference loaded datasets");
        log::info!("running {}", job.id);
        let result = run_batches(&ds.data, &ds.splits, &job.experiment)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", job.id)))?;
        write_job(&out.join("runs").join(&job.id), job, &result, &ds.data)?;
        summary
            .write_record(summary_record(job, &result))
            .map_err(|e| io_err(&summary_path, e))?;
        summary.flush().map_err(|e| io_err(&summary_path, e))?;
        results.push((job.clone(), result));
    }
    Ok(RunOutcome {
        out_dir: out.to_path_buf(),
        manifest,
        results,
    })
}

pub fn cmd_run(source: &ConfigSource, out: &Path, seed: Option<u64>) -> CliResult<RunOutcome> {
    let loaded = load_run(source)?;
    let mut config = loaded.config;
    if let Some(s) = seed {
        config.seed = s;
    }
    let plan = config.plan(&loaded.base_dir)?;
    if let Some(m) = &loaded.manifest {
        m.check_inputs(&plan)?;
    }
    log::info!("{} jobs over {} datasets", plan.jobs.len(), plan.datasets.len());
    let manifest = prepare(&plan, out)?;
    execute(&plan, manifest, out)
}
