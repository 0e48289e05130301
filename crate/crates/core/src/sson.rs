//! Stereotype sharing between agents.
//!
//! Agents share only stereotypes backed by enough transactions to be
//! confident. A requester keeps a scored list of stereotype providers, asks
//! the best-scored ones, weights their answers by score, and rescores each
//! provider once the real outcome is known.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, Selection};
use crate::stereotype::{Aggregation, StereoModel};
use crate::trust::{expected_trust, BetaMixture, OutcomeCounts};
use crate::world::AgentId;

/// Smallest `n` with `2 exp(-2 n eps^2) <= 1 - confidence`, at least one.
pub fn min_confident_transactions(epsilon: f64, confidence: f64) -> Result<u64> {
    let open = |x: f64| x > 0.0 && x < 1.0;
    if !open(epsilon) || !open(confidence) {
        return Err(Error::Domain(format!(
            "epsilon and confidence must lie in (0, 1), got {epsilon} and {confidence}"
        )));
    }
    let n = (-((1.0 - confidence) / 2.0).ln() / (2.0 * epsilon * epsilon)).ceil();
    Ok(n.max(1.0) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProviderScore {
    pub provider: AgentId,
    pub rec_successes: u64,
    pub rec_failures: u64,
    pub trust: f64,
}

impl ProviderScore {
    pub fn new(provider: AgentId) -> Self {
        ProviderScore {
            provider,
            rec_successes: 0,
            rec_failures: 0,
            trust: 0.5,
        }
    }

    fn refresh(&mut self) {
        self.trust = expected_trust(OutcomeCounts {
            successes: self.rec_successes as f64,
            failures: self.rec_failures as f64,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedStereotype {
    pub provider: AgentId,
    pub group: u32,
    pub predicate: FeatureVector,
    pub counts: OutcomeCounts,
    pub transaction_count: u64,
}

/// Scored stereotype providers, best first; ties by agent id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderList {
    pub owner: AgentId,
    entries: Vec<ProviderScore>,
}

impl ProviderList {
    /// Fresh list; duplicates and the owner itself are dropped.
    pub fn new(owner: AgentId, providers: impl IntoIterator<Item = AgentId>) -> Self {
        let mut ids: Vec<AgentId> = providers.into_iter().filter(|&p| p != owner).collect();
        ids.sort_unstable();
        ids.dedup();
        ProviderList {
            owner,
            entries: ids.into_iter().map(ProviderScore::new).collect(),
        }
    }

    pub fn entries(&self) -> &[ProviderScore] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, provider: AgentId) -> Option<&ProviderScore> {
        self.entries.iter().find(|e| e.provider == provider)
    }

    pub fn top(&self, k: usize) -> &[ProviderScore] {
        &self.entries[..k.min(self.entries.len())]
    }

    /// Score one recommendation: it succeeds when the provider's predicted
    /// outcome matches the observed one.
    pub fn record_recommendation_outcome(
        &mut self,
        provider: AgentId,
        predicted_success: bool,
        observed_success: bool,
    ) -> Result<ProviderScore> {
        let entry = self
            .entries
            .iter_mut()
            .find(|e| e.provider == provider)
            .ok_or(Error::UnknownProvider(provider))?;
        if predicted_success == observed_success {
            entry.rec_successes += 1;
        } else {
            entry.rec_failures += 1;
        }
        entry.refresh();
        let updated = *entry;
        self.entries
            .sort_by(|a, b| b.trust.total_cmp(&a.trust).then(a.provider.cmp(&b.provider)));
        Ok(updated)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StereotypeRequest {
    pub requester: AgentId,
    pub pattern: FeatureVector,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StereotypeResponse {
    pub provider: AgentId,
    pub stereotypes: Vec<SharedStereotype>,
}

impl StereotypeRequest {
    pub fn encode(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("request serialises")
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let req: StereotypeRequest = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if req.k == 0 {
            return Err(Error::Schema {
                line: 1,
                message: "k must be positive".into(),
            });
        }
        Ok(req)
    }
}

impl StereotypeResponse {
    pub fn encode(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("response serialises")
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let resp: StereotypeResponse = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        for s in &resp.stereotypes {
            s.counts.validate().map_err(|e| Error::Schema {
                line: 1,
                message: e.to_string(),
            })?;
            if s.provider != resp.provider {
                return Err(Error::Schema {
                    line: 1,
                    message: "stereotype attributed to another provider".into(),
                });
            }
        }
        Ok(resp)
    }
}

/// Stereotypes of a model confident enough to share.
pub fn exportable_stereotypes(model: &StereoModel, m_min: u64) -> Vec<SharedStereotype> {
    model
        .confident(m_min)
        .map(|(g, s)| SharedStereotype {
            provider: model.trustor,
            group: g.id,
            predicate: g.predicate.clone(),
            counts: s.counts,
            transaction_count: s.transactions,
        })
        .collect()
}

/// A provider's answer: its confident stereotypes matching the requested
/// pattern, capped like a local evaluation. Dishonest providers swap
/// successes and failures.
pub fn answer_request(
    request: &StereotypeRequest,
    model: &StereoModel,
    honest: bool,
    m_min: u64,
    selection: Selection,
) -> StereotypeResponse {
    let stereotypes = model
        .matched_with(&request.pattern, selection, m_min.max(1))
        .into_iter()
        .map(|id| {
            let (g, s) = model.group(id).expect("matched group exists");
            SharedStereotype {
                provider: model.trustor,
                group: id,
                predicate: g.predicate.clone(),
                counts: if honest { s.counts } else { s.counts.mirrored() },
                transaction_count: s.transactions,
            }
        })
        .collect();
    StereotypeResponse {
        provider: model.trustor,
        stereotypes,
    }
}

/// Transaction-count weights within one provider's answer.
fn within_provider(stereotypes: &[SharedStereotype]) -> Option<Vec<f64>> {
    let total: u64 = stereotypes.iter().map(|s| s.transaction_count).sum();
    (total > 0).then(|| {
        stereotypes
            .iter()
            .map(|s| s.transaction_count as f64 / total as f64)
            .collect()
    })
}

/// What a provider's answer predicts on its own.
pub fn provider_estimate(response: &StereotypeResponse) -> Option<f64> {
    let w = within_provider(&response.stereotypes)?;
    Some(
        w.iter()
            .zip(&response.stereotypes)
            .map(|(w, s)| w * expected_trust(s.counts))
            .sum(),
    )
}

/// Combine answers weighted by provider trust `t_i / sum t`. Within an
/// answer, stereotypes share the provider's weight by transaction count.
/// `None` when no answer carries a stereotype.
pub fn combine_external(
    responses: &[StereotypeResponse],
    trusts: &[f64],
    aggregation: Aggregation,
) -> Option<BetaMixture> {
    let useful: Vec<(f64, &StereotypeResponse, Vec<f64>)> = responses
        .iter()
        .zip(trusts)
        .filter_map(|(r, &t)| within_provider(&r.stereotypes).map(|w| (t, r, w)))
        .collect();
    let total: f64 = useful.iter().map(|(t, _, _)| t).sum();
    if useful.is_empty() || total <= 0.0 {
        return None;
    }
    let components: Vec<(f64, OutcomeCounts)> = useful
        .iter()
        .flat_map(|(t, r, w)| {
            let provider_weight = t / total;
            w.iter()
                .zip(&r.stereotypes)
                .map(move |(w, s)| (provider_weight * w, s.counts))
        })
        .collect();
    Some(match aggregation {
        Aggregation::Sof => BetaMixture { components },
        Aggregation::Sop => BetaMixture::single(components.iter().map(|&(w, c)| c.scaled(w)).sum()),
    })
}
