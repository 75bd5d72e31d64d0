use std::collections::BTreeMap;
use std::io::Write;

use hyperlab_core::{HypIsometry, SparseVec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub inputs_digest: String,
    /// `None` when the construction itself failed.
    pub defect: Option<f64>,
    pub bound: f64,
    pub pass: bool,
    /// Excluded trials violate a hypothesis of the construction and do not
    /// count towards the aggregate.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub excluded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl TrialRecord {
    /// A trial passing iff `defect < bound`.
    pub fn measured(trial: u32, inputs_digest: String, defect: f64, bound: f64) -> Self {
        Self {
            trial,
            inputs_digest,
            defect: Some(defect),
            bound,
            pass: defect < bound,
            excluded: false,
            note: None,
            details: BTreeMap::new(),
        }
    }

    pub fn failed(trial: u32, inputs_digest: String, bound: f64, note: String) -> Self {
        Self {
            trial,
            inputs_digest,
            defect: None,
            bound,
            pass: false,
            excluded: false,
            note: Some(note),
            details: BTreeMap::new(),
        }
    }

    pub fn excluded(trial: u32, inputs_digest: String, bound: f64, note: String) -> Self {
        Self {
            excluded: true,
            pass: true,
            ..Self::failed(trial, inputs_digest, bound, note)
        }
    }

    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub max_defect: f64,
    pub pass: bool,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub config_digest: String,
    pub trials: Vec<TrialRecord>,
    pub aggregate: Aggregate,
}

impl Report {
    pub fn new(
        experiment: &str,
        config_digest: String,
        trials: Vec<TrialRecord>,
        wall_ms: u64,
    ) -> Self {
        let counted = trials.iter().filter(|t| !t.excluded);
        let max_defect = counted.clone().filter_map(|t| t.defect).fold(0.0, f64::max);
        let pass = counted.clone().count() > 0 && counted.clone().all(|t| t.pass);
        Self {
            experiment: experiment.to_string(),
            config_digest,
            trials,
            aggregate: Aggregate {
                max_defect,
                pass,
                wall_ms,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Hex SHA-256 of the report with the wall-clock time zeroed.
    pub fn content_digest(&self) -> String {
        let mut copy = self.clone();
        copy.aggregate.wall_ms = 0;
        hex::encode(Sha256::digest(
            serde_json::to_vec(&copy).expect("report serializes"),
        ))
    }

    /// One row per trial: `trial,defect,bound,pass`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trial", "defect", "bound", "pass"])?;
        for t in &self.trials {
            w.write_record([
                t.trial.to_string(),
                t.defect.map(|d| d.to_string()).unwrap_or_default(),
                t.bound.to_string(),
                t.pass.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Short hex digest of the sampled inputs of a trial.
#[derive(Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar(mut self, x: f64) -> Self {
        self.0.update(x.to_bits().to_le_bytes());
        self
    }

    pub fn vector(mut self, v: &SparseVec) -> Self {
        for (i, x) in v.iter() {
            self.0.update((i as u64).to_le_bytes());
            self.0.update(x.to_bits().to_le_bytes());
        }
        self.0.update(b";");
        self
    }

    pub fn block(mut self, active: &[usize], entries: &[f64]) -> Self {
        for &i in active {
            self.0.update((i as u64).to_le_bytes());
        }
        for x in entries {
            self.0.update(x.to_bits().to_le_bytes());
        }
        self.0.update(b";");
        self
    }

    pub fn isometry(self, g: &HypIsometry) -> Self {
        self.block(g.active(), g.block().as_slice())
    }

    pub fn finish(self) -> String {
        hex::encode(&self.0.finalize()[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_ignores_excluded_trials() {
        let trials = vec![
            TrialRecord::measured(0, "a".into(), 0.5, 1.0),
            TrialRecord::excluded(1, "b".into(), 1.0, "collinear".into()),
        ];
        let r = Report::new("x", "d".into(), trials, 3);
        assert!(r.aggregate.pass);
        assert_eq!(r.aggregate.max_defect, 0.5);
        let mut later = r.clone();
        later.aggregate.wall_ms = 99;
        assert_eq!(r.content_digest(), later.content_digest());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("trial,defect,bound,pass\n0,0.5,1,true\n1,,1,true"));
    }
}
