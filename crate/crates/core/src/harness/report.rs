use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::concentration::ConcentrationReport;
use super::config::ExperimentConfig;
use super::convergence::ConvergenceReport;
use super::outlier::OutlierReport;
use super::synthetic::SyntheticReport;
use crate::error::{csv_err, Result};

pub const REPORT_FORMAT: &str = "cdsupport-run-report";

/// Result of one experiment run, with the config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub body: ReportBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReportBody {
    SyntheticSupport(SyntheticReport),
    Convergence(ConvergenceReport),
    Concentration(ConcentrationReport),
    Outlier(OutlierReport),
}

impl RunReport {
    pub fn new(config: ExperimentConfig, body: ReportBody) -> Self {
        RunReport { format: REPORT_FORMAT.into(), version: crate::VERSION.into(), config, body }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The report with every wall-clock field removed. Equal configs and
    /// seeds give byte-identical output.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        strip_timing(&mut v);
        Ok(serde_json::to_string_pretty(&v)?)
    }

    /// The main table of the report as CSV.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match &self.body {
            ReportBody::SyntheticSupport(r) => r.rows.iter().try_for_each(|row| w.serialize(row)),
            ReportBody::Convergence(r) => r.rows.iter().try_for_each(|row| w.serialize(row.flat())),
            ReportBody::Concentration(r) => r.rows.iter().try_for_each(|row| w.serialize(row.flat())),
            ReportBody::Outlier(r) => r.rows.iter().try_for_each(|row| w.serialize(row)),
        }
        .map_err(csv_err)?;
        w.flush()?;
        Ok(())
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`, creating it.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join(format!("{stem}.json"));
        std::fs::write(&json, self.to_json()?)?;
        let csv = dir.join(format!("{stem}.csv"));
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(&csv)?))?;
        Ok(vec![json, csv])
    }
}

pub(crate) const TIMING_KEY: &str = "wall_time_s";

fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.remove(TIMING_KEY);
            map.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}
