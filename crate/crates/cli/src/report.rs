//! `qfeo report`: percent-change tables with an overall-average row and
//! feature-importance matrices, aggregated from finished run outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::{create_dir, io_err, CliError, CliResult};

pub const OVERALL: &str = "Overall Average";

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct SummaryRow {
    pub run_id: String,
    pub dataset: String,
    pub feature_map: String,
    pub n_qubits: usize,
    pub manipulation: String,
    pub n_batches: usize,
    pub nfo_mean: f64,
    pub nfo_std: f64,
    pub qfeo_mean: f64,
    pub qfeo_std: f64,
    pub percent_change: f64,
    pub percent_std: f64,
}

pub fn read_summary(results: &Path) -> CliResult<Vec<SummaryRow>> {
    let path = results.join("summary.csv");
    if !path.is_file() {
        return Err(CliError::Input(format!("{} not found", path.display())));
    }
    let mut r = csv::Reader::from_path(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let rows = r
        .deserialize()
        .collect::<Result<Vec<SummaryRow>, _>>()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        return Err(CliError::Input(format!("{} has no rows", path.display())));
    }
    Ok(rows)
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

/// Mean and std percent change per manipulation; `None` where a run is missing.
pub type Cells = Vec<Option<(f64, f64)>>;

/// Percent-change pivot for one dataset: one row per (feature map, qubit
/// count), a mean and std column per manipulation, and a final row
/// averaging each column over the rows above.
#[derive(Clone, Debug, PartialEq)]
pub struct PercentTable {
    pub dataset: String,
    pub manipulations: Vec<String>,
    pub rows: Vec<(String, String, Cells)>,
}

impl PercentTable {
    pub fn build(dataset: &str, rows: &[SummaryRow]) -> Self {
        let rows: Vec<&SummaryRow> = rows.iter().filter(|r| r.dataset == dataset && r.manipulation != "NFO").collect();
        let manipulations = first_seen(rows.iter().map(|r| r.manipulation.as_str()));
        let mut keys: Vec<(String, usize)> = Vec::new();
        for r in &rows {
            let k = (r.feature_map.clone(), r.n_qubits);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        let mut out = Vec::new();
        for (fm, n) in &keys {
            let cells: Vec<Option<(f64, f64)>> = manipulations
                .iter()
                .map(|m| {
                    rows.iter()
                        .find(|r| &r.feature_map == fm && r.n_qubits == *n && &r.manipulation == m)
                        .map(|r| (r.percent_change, r.percent_std))
                })
                .collect();
            out.push((fm.clone(), n.to_string(), cells));
        }
        let overall = (0..manipulations.len())
            .map(|c| {
                let vals: Vec<(f64, f64)> = out.iter().filter_map(|r| r.2[c]).collect();
                if vals.is_empty() {
                    None
                } else {
                    let n = vals.len() as f64;
                    Some((vals.iter().map(|v| v.0).sum::<f64>() / n, vals.iter().map(|v| v.1).sum::<f64>() / n))
                }
            })
            .collect();
        out.push((OVERALL.to_string(), String::new(), overall));
        Self {
            dataset: dataset.to_string(),
            manipulations,
            rows: out,
        }
    }

    pub fn write_csv(&self, path: &Path) -> CliResult<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
        let mut header = vec!["feature_map".to_string(), "n_qubits".to_string()];
        for m in &self.manipulations {
            header.push(format!("{m}_mean_pct"));
            header.push(format!("{m}_std_pct"));
        }
        w.write_record(&header).map_err(|e| io_err(path, e))?;
        for (fm, n, cells) in &self.rows {
            let mut rec = vec![fm.clone(), n.clone()];
            for c in cells {
                match c {
                    Some((m, s)) => {
                        rec.push(m.to_string());
                        rec.push(s.to_string());
                    }
                    None => rec.extend([String::new(), String::new()]),
                }
            }
            w.write_record(&rec).map_err(|e| io_err(path, e))?;
        }
        w.flush().map_err(|e| io_err(path, e))
    }

    pub fn markdown(&self) -> String {
        let mut s = format!("## {}\n\n| feature map | qubits |", self.dataset);
        for m in &self.manipulations {
            let _ = write!(s, " {m} |");
        }
        s.push_str("\n|---|---|");
        s.push_str(&"---|".repeat(self.manipulations.len()));
        s.push('\n');
        for (fm, n, cells) in &self.rows {
            let _ = write!(s, "| {fm} | {n} |");
            for c in cells {
                match c {
                    Some((m, sd)) => {
                        let _ = write!(s, " {m:+.2}% ({sd:.2}%) |");
                    }
                    None => s.push_str(" - |"),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Feature-by-manipulation importance for one dataset, averaged over its
/// runs. Each column uses the first measure of the run's importance table
/// (selection frequency or mean weight); ranks are 1 for the most
/// important feature.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceMatrix {
    pub dataset: String,
    pub features: Vec<String>,
    pub manipulations: Vec<String>,
    /// `values[f][m]`.
    pub values: Vec<Vec<f64>>,
}

fn read_importance(path: &Path) -> CliResult<(Vec<String>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut names = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let v: f64 = rec
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::Input(format!("{}: malformed row {rec:?}", path.display())))?;
        names.push(rec.get(0).unwrap_or_default().to_string());
        values.push(v);
    }
    Ok((names, values))
}

pub fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut rank = vec![0; values.len()];
    for (k, i) in idx.into_iter().enumerate() {
        rank[i] = k + 1;
    }
    rank
}

impl ImportanceMatrix {
    pub fn build(results: &Path, dataset: &str, rows: &[SummaryRow]) -> CliResult<Option<Self>> {
        let rows: Vec<&SummaryRow> = rows.iter().filter(|r| r.dataset == dataset && r.manipulation != "NFO").collect();
        let manipulations = first_seen(rows.iter().map(|r| r.manipulation.as_str()));
        let mut features: Option<Vec<String>> = None;
        let mut sums: BTreeMap<usize, (Vec<f64>, usize)> = BTreeMap::new();
        for r in &rows {
            let path = results.join("runs").join(&r.run_id).join("importance.csv");
            if !path.is_file() {
                return Err(CliError::Input(format!("{} not found", path.display())));
            }
            let (names, values) = read_importance(&path)?;
            match &features {
                None => features = Some(names),
                Some(f) if *f != names => {
                    return Err(CliError::Input(format!("{}: feature names differ between runs", path.display())))
                }
                _ => {}
            }
            let m = manipulations.iter().position(|m| *m == r.manipulation).expect("collected above");
            let e = sums.entry(m).or_insert_with(|| (vec![0.0; values.len()], 0));
            for (s, v) in e.0.iter_mut().zip(&values) {
                *s += v;
            }
            e.1 += 1;
        }
        let Some(features) = features else {
            return Ok(None);
        };
        let values = (0..features.len())
            .map(|f| (0..manipulations.len()).map(|m| sums[&m].0[f] / sums[&m].1 as f64).collect())
            .collect();
        Ok(Some(Self {
            dataset: dataset.to_string(),
            features,
            manipulations,
            values,
        }))
    }

    pub fn write_csv(&self, path: &Path) -> CliResult<()> {
        let ranks: Vec<Vec<usize>> = (0..self.manipulations.len())
            .map(|m| rank_descending(&self.values.iter().map(|row| row[m]).collect::<Vec<_>>()))
            .collect();
        let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
        let mut header = vec!["feature".to_string()];
        for m in &self.manipulations {
            header.push(m.clone());
            header.push(format!("{m}_rank"));
        }
        w.write_record(&header).map_err(|e| io_err(path, e))?;
        for (f, name) in self.features.iter().enumerate() {
            let mut rec = vec![name.clone()];
            for m in 0..self.manipulations.len() {
                rec.push(self.values[f][m].to_string());
                rec.push(ranks[m][f].to_string());
            }
            w.write_record(&rec).map_err(|e| io_err(path, e))?;
        }
        w.flush().map_err(|e| io_err(path, e))
    }
}

#[derive(Clone, Debug)]
pub struct ReportOutcome {
    pub out_dir: PathBuf,
    pub tables: Vec<PercentTable>,
    pub importance: Vec<ImportanceMatrix>,
}

pub fn cmd_report(results: &Path, out: Option<&Path>) -> CliResult<ReportOutcome> {
    let rows = read_summary(results)?;
    let out = out.map_or_else(|| results.join("report"), Path::to_path_buf);
    create_dir(&out)?;
    let datasets = first_seen(rows.iter().map(|r| r.dataset.as_str()));
    let mut tables = Vec::new();
    let mut importance = Vec::new();
    let mut md = String::from("# Percent change in test AUC against NFO\n\n");
    for ds in &datasets {
        let t = PercentTable::build(ds, &rows);
        t.write_csv(&out.join(format!("percent_change_{ds}.csv")))?;
        md.push_str(&t.markdown());
        md.push('\n');
        tables.push(t);
        if let Some(m) = ImportanceMatrix::build(results, ds, &rows)? {
            m.write_csv(&out.join(format!("importance_{ds}.csv")))?;
            importance.push(m);
        }
    }
    let md_path = out.join("report.md");
    std::fs::write(&md_path, md).map_err(|e| io_err(&md_path, e))?;
    Ok(ReportOutcome {
        out_dir: out,
        tables,
        importance,
    })
}
