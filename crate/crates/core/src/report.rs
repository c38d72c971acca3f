//! The JSON evaluation report written by the command-line tool.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::delta_recall::{AffectedDiagram, ClipPolicy, OverallEstimate, RecallPolicy};
use crate::error::Result;
use crate::impact::ImpactMetrics;
use crate::iq::IqResult;
use crate::model::RestrictionReport;
use crate::quality::{Estimate, QualityRates, RateErrors, Sampling};
use crate::simulation::LinearFit;
use crate::snapshot::SnapshotQuality;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

impl Default for Tool {
    fn default() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityMode {
    /// Venn enumeration against a known Ideal.
    Exact,
    /// Every pair of the universe judged.
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualitySection {
    pub mode: QualityMode,
    pub population: QualityRates,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affected: Option<QualityRates>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_errors: Option<RateErrors>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs_judged: Option<usize>,
    /// Exact, or estimated when the judge knows Ideal cluster weights.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_recall: Option<Estimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantEstimate {
    pub variant: u8,
    pub policy: RecallPolicy,
    pub clip: ClipPolicy,
    pub clipped: bool,
    pub diagram: AffectedDiagram,
    pub overall: OverallEstimate,
    pub jd_back_of_envelope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Unavailable {
    pub variant: u8,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRecallSection {
    pub estimates: Vec<VariantEstimate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unavailable: Vec<Unavailable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heatmap_path: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxIq {
    pub variant: u8,
    pub policy: RecallPolicy,
    pub diagram_clipped: bool,
    pub result: IqResult,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IqSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<IqResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approx: Option<ApproxIq>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSection {
    pub changes: usize,
    pub delta_recall: LinearFit,
    pub jaccard_distance: LinearFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iq: Option<LinearFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iq_sign_agreement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: u32,
    pub tool: Tool,
    pub command: String,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restriction: Option<RestrictionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub impact: Option<ImpactMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quality: Option<QualitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_recall: Option<DeltaRecallSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iq: Option<IqSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<SnapshotQuality>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn new(command: &str) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            tool: Tool::default(),
            command: command.to_string(),
            provenance: Provenance::default(),
            restriction: None,
            impact: None,
            quality: None,
            delta_recall: None,
            iq: None,
            snapshot: None,
            simulation: None,
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// The report flattened to `key,value` rows with dotted keys.
    pub fn to_csv(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let mut rows = Vec::new();
        flatten("", &value, &mut rows);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["key", "value"])?;
        for (k, v) in rows {
            w.write_record([k, v])?;
        }
        crate::delta_recall::finish_csv(w)
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_shape() {
        let r = EvalReport::new("impact");
        let v: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["tool"]["name"], "clusterdiff");
        assert!(v.get("impact").is_none());
        assert!(v.get("warnings").is_none());
    }

    #[test]
    fn csv_flattening() {
        let mut r = EvalReport::new("x");
        r.provenance.inputs.insert("base".into(), "a.tsv".into());
        r.warnings.push("w".into());
        let csv = r.to_csv().unwrap();
        assert!(csv.starts_with("key,value\n"));
        assert!(csv.contains("provenance.inputs.base,a.tsv\n"));
        assert!(csv.contains("warnings.0,w\n"));
    }
}
