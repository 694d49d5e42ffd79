//! Writes a simulation report as `trust_timeseries.csv`, `task_log.csv` and
//! `summary.json`. Both CSV files start with a `# seed=<n>` comment line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::ScenarioConfig;
use crate::error::{Error, Result};
use crate::sim::{SimulationReport, Summary};

pub const TRUST_FILE: &str = "trust_timeseries.csv";
pub const TASK_LOG_FILE: &str = "task_log.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// The summary with the configuration that produced it.
#[derive(Debug, Serialize)]
pub struct SummaryDocument<'a> {
    #[serde(flatten)]
    pub summary: &'a Summary,
    pub config: &'a ScenarioConfig,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Input(format!("{}: {e}", path.display()))
}

fn csv_writer(path: &Path, seed: u64) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# seed={seed}").map_err(|e| io_err(path, e))?;
    Ok(csv::Writer::from_writer(w))
}

pub fn write_bundle(dir: &Path, report: &SimulationReport, config: &ScenarioConfig) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    let path = dir.join(TRUST_FILE);
    let mut w = csv_writer(&path, report.seed)?;
    let rec =
        |w: &mut csv::Writer<_>, row: &[String]| w.write_record(row).map_err(|e| io_err(&path, e));
    rec(
        &mut w,
        &[
            "round",
            "node_id",
            "cluster_id",
            "rolling_average",
            "count",
            "is_coordinator",
        ]
        .map(String::from),
    )?;
    for r in &report.trust {
        rec(
            &mut w,
            &[
                r.round.to_string(),
                r.node.0.to_string(),
                r.cluster.0.to_string(),
                r.rolling_average.map(|v| v.to_string()).unwrap_or_default(),
                r.count.to_string(),
                r.is_coordinator.to_string(),
            ],
        )?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;

    let path = dir.join(TASK_LOG_FILE);
    let mut w = csv_writer(&path, report.seed)?;
    let rec =
        |w: &mut csv::Writer<_>, row: &[String]| w.write_record(row).map_err(|e| io_err(&path, e));
    rec(
        &mut w,
        &[
            "round",
            "task_id",
            "cluster_id",
            "coordinator",
            "bootstrap",
            "partner_cluster",
            "partner_coordinator",
            "status",
            "workers",
        ]
        .map(String::from),
    )?;
    let opt = |v: Option<u32>| v.map(|v| v.to_string()).unwrap_or_default();
    for t in &report.tasks {
        let workers: Vec<String> = t.workers.iter().map(|n| n.0.to_string()).collect();
        rec(
            &mut w,
            &[
                t.round.to_string(),
                t.task_id.to_string(),
                t.cluster.0.to_string(),
                opt(t.coordinator.map(|n| n.0)),
                t.bootstrap.to_string(),
                opt(t.partner.map(|c| c.0)),
                opt(t.partner_coordinator.map(|n| n.0)),
                t.status.as_str().to_string(),
                workers.join(";"),
            ],
        )?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;

    let path = dir.join(SUMMARY_FILE);
    let doc = SummaryDocument {
        summary: &report.summary,
        config,
    };
    let json = serde_json::to_string_pretty(&doc).map_err(|e| io_err(&path, e))?;
    std::fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))?;
    Ok(())
}
