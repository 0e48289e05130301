use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::stats::{mean, t_interval};
use super::ExperimentConfig;
use crate::error::Result;
use crate::world::AgentId;

/// One evaluated (trustor, target) pair with every model's estimate, in
/// the order of the report's labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub repetition: usize,
    pub world_seed: u64,
    pub trustor: AgentId,
    pub target: AgentId,
    pub target_honest: Option<bool>,
    pub truth: f64,
    pub predictions: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: String,
    pub mae_all: Option<f64>,
    pub mae_honest: Option<f64>,
    pub mae_dishonest: Option<f64>,
    /// 95% Student-t interval over the per-repetition MAEs.
    pub ci_all: Option<(f64, f64)>,
    pub coverage: f64,
    pub covered: usize,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: String,
    pub rebuilds: u64,
    pub transactions: u64,
    /// Rebuilds relative to the most expensive strategy.
    pub normalized_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub labels: Vec<String>,
    pub models: Vec<ModelSummary>,
    pub strategies: Vec<StrategySummary>,
    /// Derived scalars such as relative improvements.
    pub extras: BTreeMap<String, f64>,
    pub pairs: Vec<PairRecord>,
}

fn summarise(label: &str, column: usize, pairs: &[PairRecord], repetitions: usize) -> ModelSummary {
    let (mut all, mut honest, mut dishonest) = (Vec::new(), Vec::new(), Vec::new());
    let mut per_rep = vec![Vec::new(); repetitions];
    for p in pairs {
        let Some(v) = p.predictions[column] else { continue };
        let e = (v - p.truth).abs();
        all.push(e);
        match p.target_honest {
            Some(true) => honest.push(e),
            Some(false) => dishonest.push(e),
            None => {}
        }
        if let Some(r) = per_rep.get_mut(p.repetition) {
            r.push(e);
        }
    }
    let rep_means: Vec<f64> = per_rep.iter().filter_map(|r| mean(r)).collect();
    ModelSummary {
        model: label.to_string(),
        mae_all: mean(&all),
        mae_honest: mean(&honest),
        mae_dishonest: mean(&dishonest),
        ci_all: t_interval(&rep_means, 0.95),
        coverage: if pairs.is_empty() {
            0.0
        } else {
            all.len() as f64 / pairs.len() as f64
        },
        covered: all.len(),
        pairs: pairs.len(),
    }
}

impl ExperimentReport {
    /// Summaries are independent of the order of `pairs`; the stored pairs
    /// are sorted by (repetition, trustor, target).
    pub fn from_pairs(
        experiment: &str,
        config: &ExperimentConfig,
        labels: Vec<String>,
        mut pairs: Vec<PairRecord>,
    ) -> ExperimentReport {
        pairs.sort_by_key(|p| (p.repetition, p.trustor, p.target));
        let models = labels
            .iter()
            .enumerate()
            .map(|(i, l)| summarise(l, i, &pairs, config.repetitions))
            .collect();
        ExperimentReport {
            experiment: experiment.to_string(),
            config: config.clone(),
            labels,
            models,
            strategies: Vec::new(),
            extras: BTreeMap::new(),
            pairs,
        }
    }

    pub fn model(&self, label: &str) -> Option<&ModelSummary> {
        self.models.iter().find(|m| m.model == label)
    }

    pub fn strategy(&self, label: &str) -> Option<&StrategySummary> {
        self.strategies.iter().find(|s| s.strategy == label)
    }

    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(crate::config::render(&self.config).as_bytes()))
    }

    fn header(&self) -> String {
        format!(
            "# stereotrust experiment={} config_sha256={} seed={}\n",
            self.experiment,
            self.config_hash(),
            self.config.seed
        )
    }

    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serialises");
        value["provenance"] = serde_json::json!({
            "config_sha256": self.config_hash(),
            "seed": self.config.seed,
        });
        serde_json::to_string_pretty(&value).expect("report serialises") + "\n"
    }

    /// One row per model and metric.
    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push_str("model,metric,value\n");
        let cell = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        for m in &self.models {
            for (metric, v) in [
                ("mae_all", m.mae_all),
                ("mae_honest", m.mae_honest),
                ("mae_dishonest", m.mae_dishonest),
                ("ci_low", m.ci_all.map(|c| c.0)),
                ("ci_high", m.ci_all.map(|c| c.1)),
                ("coverage", Some(m.coverage)),
            ] {
                writeln!(out, "{},{},{}", m.model, metric, cell(v)).unwrap();
            }
        }
        for s in &self.strategies {
            writeln!(out, "{},rebuilds,{}", s.strategy, s.rebuilds).unwrap();
            writeln!(out, "{},normalized_cost,{}", s.strategy, s.normalized_cost).unwrap();
        }
        for (k, v) in &self.extras {
            writeln!(out, "-,{k},{v}").unwrap();
        }
        out
    }

    /// Long format: one row per pair and model.
    pub fn to_long_csv(&self) -> String {
        let mut out = self.header();
        out.push_str("repetition,world_seed,trustor,target,target_honest,truth,model,prediction,abs_error\n");
        for p in &self.pairs {
            let honest = p.target_honest.map_or(String::new(), |h| h.to_string());
            for (label, v) in self.labels.iter().zip(&p.predictions) {
                let (pred, err) = match v {
                    Some(v) => (v.to_string(), (v - p.truth).abs().to_string()),
                    None => (String::new(), String::new()),
                };
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    p.repetition, p.world_seed, p.trustor, p.target, honest, p.truth, label, pred, err
                )
                .unwrap();
            }
        }
        out
    }

    /// Writes `<experiment>.json`, `<experiment>.csv` and
    /// `<experiment>_pairs.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let files = [
            (format!("{}.json", self.experiment), self.to_json()),
            (format!("{}.csv", self.experiment), self.to_csv()),
            (format!("{}_pairs.csv", self.experiment), self.to_long_csv()),
        ];
        let mut written = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }

    /// Fixed-width table for terminals.
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{:<22} {:>8} {:>19} {:>8} {:>8} {:>9}\n",
            "model", "MAE", "95% CI", "honest", "dishon.", "coverage"
        );
        let f = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        for m in &self.models {
            let ci = m.ci_all.map_or("-".to_string(), |(a, b)| format!("({a:.4},{b:.4})"));
            writeln!(
                out,
                "{:<22} {:>8} {:>19} {:>8} {:>8} {:>8.1}%",
                m.model,
                f(m.mae_all),
                ci,
                f(m.mae_honest),
                f(m.mae_dishonest),
                100.0 * m.coverage
            )
            .unwrap();
        }
        for s in &self.strategies {
            writeln!(
                out,
                "{:<22} rebuilds {:>8} cost {:.3}",
                s.strategy, s.rebuilds, s.normalized_cost
            )
            .unwrap();
        }
        for (k, v) in &self.extras {
            writeln!(out, "{k}: {v:.4}").unwrap();
        }
        out
    }
}
