//! Model-update strategies: how often a trustor folds new transactions
//! into its stereotypes while its history streams in.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, PairRecord, StrategySummary};
use super::{aux_rng, over_repetitions, pick_honest, ExperimentConfig};
use crate::error::{Error, Result};
use crate::stereotype::{Aggregation, StereoConfig, StereoModel};
use crate::world::{TransactionRecord, WorldConfig, WorldIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateStrategy {
    /// Rebuild after every transaction.
    Eager,
    /// Rebuild after a misprediction, or when no prediction was possible.
    OnError,
    /// Rebuild after every `tau` transactions.
    Periodic(usize),
}

impl fmt::Display for UpdateStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpdateStrategy::Eager => f.write_str("eager"),
            UpdateStrategy::OnError => f.write_str("u-a"),
            UpdateStrategy::Periodic(tau) => write!(f, "u-b({tau})"),
        }
    }
}

/// Per-transaction estimates and the number of rebuilds for one strategy
/// over one trustor's history.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamOutcome {
    pub predictions: Vec<Option<f64>>,
    pub rebuilds: u64,
}

/// Stream `history` in order. Before each transaction the current model
/// predicts the target; the strategy then decides whether the pending
/// transactions are folded in.
pub fn stream_history(
    index: &WorldIndex,
    trustor: u32,
    history: &[TransactionRecord],
    strategy: UpdateStrategy,
    config: &StereoConfig,
) -> Result<StreamOutcome> {
    if let UpdateStrategy::Periodic(0) = strategy {
        return Err(Error::Config("tau must be positive".into()));
    }
    let mut model = StereoModel::build(index, trustor, []);
    let mut applied = 0;
    let mut rebuilds = 0;
    let mut predictions = Vec::with_capacity(history.len());
    for (i, tx) in history.iter().enumerate() {
        let estimate = model.evaluate(index.profile(tx.target), config).map(|m| m.expected());
        predictions.push(estimate);
        let seen = i + 1;
        let rebuild = match strategy {
            UpdateStrategy::Eager => true,
            UpdateStrategy::OnError => estimate.is_none_or(|p| (p >= 0.5) != tx.outcome),
            UpdateStrategy::Periodic(tau) => seen % tau == 0,
        };
        if rebuild {
            for pending in &history[applied..seen] {
                model.record(index, pending);
            }
            applied = seen;
            rebuilds += 1;
        }
    }
    Ok(StreamOutcome { predictions, rebuilds })
}

/// Compare eager, U-A and U-B(tau) StereoTrust (SOF) maintenance on
/// worlds whose authors flip behaviour per review with probability
/// `update.behavior_flip`.
pub fn run_update_strategy_comparison(config: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentReport> {
    config.validate()?;
    let strategies = [
        UpdateStrategy::Eager,
        UpdateStrategy::OnError,
        UpdateStrategy::Periodic(config.update.tau),
    ];
    let stereo = config.stereo(Aggregation::Sof);
    let dataset = config.load_dataset()?;
    let per_rep = over_repetitions(config.repetitions, jobs, |rep| {
        let world = match &dataset {
            Some(w) => std::borrow::Cow::Borrowed(w),
            None => std::borrow::Cow::Owned(crate::world::World::generate(&WorldConfig {
                behavior_flip: config.update.behavior_flip,
                ..config.world_for(rep)
            })?),
        };
        let index = world.index().with_reports(config.reports);
        let truth = index.ground_truth();
        let mut rng = aux_rng(config.repetition_seed(rep), 2);
        let mut pairs = Vec::new();
        let mut rebuilds = vec![0u64; strategies.len()];
        let mut transactions = 0u64;
        for trustor in pick_honest(&index, &mut rng, config.update.trustors, 2) {
            let history = index.history(trustor);
            transactions += history.len() as u64;
            let streams = strategies
                .iter()
                .map(|&s| stream_history(&index, trustor, history, s, &stereo))
                .collect::<Result<Vec<_>>>()?;
            for (r, s) in rebuilds.iter_mut().zip(&streams) {
                *r += s.rebuilds;
            }
            for (i, tx) in history.iter().enumerate() {
                let Some(g) = truth.get(tx.target) else { continue };
                pairs.push(PairRecord {
                    repetition: rep,
                    world_seed: config.repetition_seed(rep),
                    trustor,
                    target: tx.target,
                    target_honest: index.is_honest(tx.target),
                    truth: g,
                    predictions: streams.iter().map(|s| s.predictions[i]).collect(),
                });
            }
        }
        Ok((pairs, rebuilds, transactions))
    })?;

    let mut pairs = Vec::new();
    let mut rebuilds = vec![0u64; strategies.len()];
    let mut transactions = 0;
    for (p, r, t) in per_rep {
        pairs.extend(p);
        rebuilds.iter_mut().zip(r).for_each(|(a, b)| *a += b);
        transactions += t;
    }
    let labels = strategies.iter().map(|s| s.to_string()).collect();
    let mut report = ExperimentReport::from_pairs("update_strategies", config, labels, pairs);
    let max = rebuilds.iter().copied().max().unwrap_or(0);
    report.strategies = strategies
        .iter()
        .zip(&rebuilds)
        .map(|(s, &r)| StrategySummary {
            strategy: s.to_string(),
            rebuilds: r,
            transactions,
            normalized_cost: if max == 0 { 0.0 } else { r as f64 / max as f64 },
        })
        .collect();
    Ok(report)
}
