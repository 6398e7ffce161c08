//! File formats: cohort CSV input, JSON run reports, and CSV tables.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bhm::CohortEstimate;
use crate::data::{validate, CohortData, TrialDataset};
use crate::error::{Error, Result};
use crate::mfm::Partition;
use crate::pipeline::{Method, MethodSettings};
use crate::probe::ProbeRow;
use crate::sim::{PartitionProbability, StudySummary};
use crate::summary::{KHat, MembershipMatrix};

pub const VEMURAFENIB_CSV: &str = include_str!("../data/vemurafenib.csv");

/// Reads a `cohort,n,r[,p_t]` CSV file.
pub fn parse_dataset(path: impl AsRef<Path>) -> Result<TrialDataset> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_dataset_str(&text)
}

/// Parses cohort CSV text. Row numbers in errors count data rows from 1.
pub fn parse_dataset_str(text: &str) -> Result<TrialDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let has_pt = match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["cohort", "n", "r"] => false,
        ["cohort", "n", "r", "p_t"] => true,
        _ => {
            return Err(Error::Format(format!(
                "expected header `cohort,n,r[,p_t]`, found `{}`",
                headers.join(",")
            )))
        }
    };

    let mut cohorts = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let int = |idx: usize, what: &str| -> Result<u64> {
            record[idx].parse().map_err(|_| Error::Parse {
                row,
                message: format!("{what} must be a non-negative integer, got {:?}", &record[idx]),
            })
        };
        let mut cohort = CohortData::new(&record[0], int(1, "n")?, int(2, "r")?);
        if has_pt && !record[3].is_empty() {
            cohort.p_t = Some(record[3].parse().map_err(|_| Error::Parse {
                row,
                message: format!("p_t must be a number, got {:?}", &record[3]),
            })?);
        }
        let issues = validate(std::slice::from_ref(&cohort));
        if let Some(issue) = issues.into_iter().next() {
            let message = issue
                .split_once("): ")
                .map_or(issue.clone(), |(_, m)| m.to_string());
            return Err(Error::Parse { row, message });
        }
        cohorts.push(cohort);
    }
    if cohorts.is_empty() {
        return Err(Error::Format("empty dataset".into()));
    }
    TrialDataset::new(cohorts)
}

/// Machine-readable record of one `fit` run. Deterministic given its inputs:
/// it carries no timestamps or timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub seed: u64,
    pub dataset: TrialDataset,
    pub settings: MethodSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
    pub estimates: Vec<CohortEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_hat: Option<KHat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub co_clustering: Option<MembershipMatrix>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        File::create(path)?.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let mut text = String::new();
        File::open(path)?.read_to_string(&mut text)?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Serialize)]
struct EstimateRow<'a> {
    cohort: &'a str,
    cluster: Option<usize>,
    raw_rate: f64,
    post_mean: f64,
    ci_low: f64,
    ci_high: f64,
}

/// Plot-ready table: cohort, cluster, raw_rate, post_mean, ci_low, ci_high.
pub fn write_estimates_csv<W: Write>(report: &RunReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (est, cohort) in report.estimates.iter().zip(report.dataset.cohorts()) {
        w.serialize(EstimateRow {
            cohort: &est.cohort,
            cluster: est.cluster,
            raw_rate: cohort.raw_rate(),
            post_mean: est.mean,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Clustering table: scenario, n, replicates, k_hat_mean, k_hat_sd.
pub fn write_clustering_csv<W: Write>(summaries: &[StudySummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "n", "replicates", "k_hat_mean", "k_hat_sd"])?;
    for s in summaries {
        if let (Some(mean), Some(sd)) = (s.k_hat_mean, s.k_hat_sd) {
            w.write_record([
                s.scenario.to_string(),
                s.n.to_string(),
                s.replicates.to_string(),
                format!("{mean:.4}"),
                format!("{sd:.4}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Accuracy table: scenario, n, metric, then one column per method.
pub fn write_metrics_csv<W: Write>(summaries: &[StudySummary], methods: &[Method], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["scenario".to_string(), "n".into(), "metric".into()];
    header.extend(methods.iter().map(|m| m.to_string()));
    w.write_record(&header)?;
    for s in summaries {
        for metric in ["AAB", "AMSE"] {
            let mut row = vec![s.scenario.to_string(), s.n.to_string(), metric.to_string()];
            for &m in methods {
                row.push(s.metrics_for(m).map_or(String::new(), |mm| {
                    format!("{:.4}", if metric == "AAB" { mm.aab } else { mm.amse })
                }));
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_exact_csv<W: Write>(posterior: &[PartitionProbability], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["partition", "k", "probability"])?;
    for p in posterior {
        let labels: Vec<String> = p
            .partition
            .labels_one_based()
            .iter()
            .map(usize::to_string)
            .collect();
        w.write_record([
            labels.join(" "),
            p.partition.k().to_string(),
            format!("{:.17e}", p.probability),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_probe_csv<W: Write>(rows: &[ProbeRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cohorts", "prob_true_k"])?;
    for r in rows {
        w.write_record([r.cohorts.to_string(), format!("{:.4}", r.prob_true_k)])?;
    }
    w.flush()?;
    Ok(())
}
