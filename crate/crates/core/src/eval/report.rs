use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::drift::{DistanceHistograms, NeighborTrack, StabilityReport};
use crate::error::{Error, Result};

/// A metric value with the parameters that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    pub params: Map<String, Value>,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl MetricReport {
    pub fn new(metric: impl Into<String>, value: f64) -> Self {
        MetricReport {
            metric: metric.into(),
            params: Map::new(),
            value,
            details: Value::Null,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.to_owned(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    pub fn details(mut self, details: impl Serialize) -> Self {
        self.details = serde_json::to_value(details).expect("serializable details");
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

pub fn write_reports(reports: &[MetricReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(reports)? + "\n";
    fs::write(path, text).map_err(|e| Error::file(path, e))
}

pub fn read_reports(path: impl AsRef<Path>) -> Result<Vec<MetricReport>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// `cosine,cumulative_fraction` rows.
pub fn cdf_csv(report: &StabilityReport) -> String {
    let mut out = String::from("cosine,cumulative_fraction\n");
    for (x, f) in report.cdf() {
        writeln!(out, "{x},{f}").unwrap();
    }
    out
}

/// `slice,bin_start,bin_end,count` rows.
pub fn histogram_csv(h: &DistanceHistograms) -> String {
    let mut out = String::from("slice,bin_start,bin_end,count\n");
    for s in &h.slices {
        for (i, c) in s.counts.iter().enumerate() {
            writeln!(out, "{},{},{},{c}", s.slice, h.edges[i], h.edges[i + 1]).unwrap();
        }
    }
    out
}

/// `slice,rank,word,cosine` rows.
pub fn track_csv(t: &NeighborTrack) -> String {
    let mut out = String::from("slice,rank,word,cosine\n");
    for s in &t.slices {
        for (r, n) in s.neighbors.iter().enumerate() {
            writeln!(out, "{},{},{},{}", s.slice, r + 1, n.word, n.cosine).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let r = MetricReport::new("nmi", 0.5).param("k", 3).param("seed", 1u64);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["metric"], "nmi");
        assert_eq!(v["params"]["k"], 3);
        assert_eq!(v["value"], 0.5);
        assert!(v.get("details").is_none());
        let back: MetricReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
