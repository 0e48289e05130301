//! Inexperienced trustors with and without the stereotype-sharing overlay.

use std::borrow::Cow;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;

use super::report::{ExperimentReport, PairRecord};
use super::{aux_rng, over_repetitions, pick_honest, ExperimentConfig};
use crate::error::Result;
use crate::features::Selection;
use crate::sson::{
    answer_request, combine_external, min_confident_transactions, provider_estimate, ProviderList, StereotypeRequest,
    StereotypeResponse,
};
use crate::stereotype::{Aggregation, StereoConfig, StereoModel};
use crate::world::{AgentId, DishonestReports, TransactionRecord, World, WorldIndex};

pub const LABELS: [&str; 3] = ["with-sson", "local-only", "random-providers"];

/// Every agent's own stereotypes as it would share them.
struct Providers<'a> {
    index: &'a WorldIndex,
    histories: Vec<Cow<'a, [TransactionRecord]>>,
    models: Vec<StereoModel>,
    mirror: Vec<bool>,
    m_min: u64,
    selection: Selection,
}

impl<'a> Providers<'a> {
    fn new(index: &'a WorldIndex, m_min: u64, selection: Selection) -> Self {
        let n = index.n_agents() as AgentId;
        let dishonest = |a: AgentId| index.is_honest(a) == Some(false);
        let histories: Vec<Cow<'a, [TransactionRecord]>> = (0..n)
            .map(|a| match index.reports {
                DishonestReports::MirrorPerceived if dishonest(a) => Cow::Owned(index.perceived_history(a)),
                _ => Cow::Borrowed(index.history(a)),
            })
            .collect();
        let models = (0..n)
            .map(|a| StereoModel::build(index, a, histories[a as usize].iter()))
            .collect();
        let mirror = (0..n)
            .map(|a| index.reports != DishonestReports::Published && dishonest(a))
            .collect();
        Providers {
            index,
            histories,
            models,
            mirror,
            m_min,
            selection,
        }
    }

    /// A provider's answer about `target`, ignoring its own dealings with
    /// the target.
    fn answer(&self, provider: AgentId, request: &StereotypeRequest, target: AgentId) -> StereotypeResponse {
        let p = provider as usize;
        let model = if self.models[p].partners().contains_key(&target) {
            Cow::Owned(StereoModel::build(
                self.index,
                provider,
                self.histories[p].iter().filter(|tx| tx.target != target),
            ))
        } else {
            Cow::Borrowed(&self.models[p])
        };
        answer_request(request, &model, !self.mirror[p], self.m_min, self.selection)
    }
}

fn ask(
    providers: &Providers,
    asked: &[AgentId],
    request: &StereotypeRequest,
    target: AgentId,
) -> Vec<StereotypeResponse> {
    asked.iter().map(|&p| providers.answer(p, request, target)).collect()
}

/// Observed outcome of one transaction with `target`: a random review of
/// the target judged by its designed quality.
fn observe<R: Rng>(world: &World, index: &WorldIndex, target: AgentId, rng: &mut R) -> Option<bool> {
    let reviews = index.reviews_by(target);
    if reviews.is_empty() {
        return None;
    }
    let review = &world.reviews[reviews[rng.random_range(0..reviews.len())] as usize];
    review.true_quality.map(|q| world.success.is_success(q))
}

fn run_repetition(config: &ExperimentConfig, dataset: Option<&World>, rep: usize) -> Result<Vec<PairRecord>> {
    let s = &config.sson;
    let world = config.repetition_world(rep, dataset)?;
    let index = world.index().with_reports(config.reports);
    let truth = index.ground_truth();
    let stereo: StereoConfig = config.stereo(Aggregation::Sof);
    let m_min = min_confident_transactions(s.epsilon, s.confidence)?;
    let providers = Providers::new(&index, m_min, stereo.selection);
    let mut rng = aux_rng(config.repetition_seed(rep), 3);
    let n = index.n_agents();

    let mut pairs = Vec::new();
    for trustor in pick_honest(&index, &mut rng, s.trustors, 1) {
        let history: Vec<TransactionRecord> = index.history(trustor).iter().take(s.history).copied().collect();
        let candidates: Vec<AgentId> = (0..n as AgentId).filter(|&a| a != trustor).collect();
        let initial: Vec<AgentId> = sample(&mut rng, candidates.len(), s.providers.min(candidates.len()))
            .into_iter()
            .map(|i| candidates[i])
            .collect();
        let mut list = ProviderList::new(trustor, initial.iter().copied());
        let mut targets: Vec<AgentId> = candidates.iter().copied().filter(|&y| truth.get(y).is_some()).collect();
        targets.shuffle(&mut rng);
        let full = StereoModel::build(&index, trustor, &history);

        for y in targets {
            let local = if full.partners().contains_key(&y) {
                Cow::Owned(StereoModel::build(
                    &index,
                    trustor,
                    history.iter().filter(|tx| tx.target != y),
                ))
            } else {
                Cow::Borrowed(&full)
            };
            let profile = index.profile(y);
            let local_estimate = local.evaluate(profile, &stereo).map(|m| m.expected());
            let confident_locally = !local.matched_with(profile, stereo.selection, m_min).is_empty();
            let request = StereotypeRequest {
                requester: trustor,
                pattern: profile.clone(),
                k: s.k,
            };

            let (with_sson, responses) = if confident_locally {
                (local_estimate, Vec::new())
            } else {
                let top: Vec<AgentId> = list.top(s.k).iter().map(|e| e.provider).collect();
                let trusts: Vec<f64> = list.top(s.k).iter().map(|e| e.trust).collect();
                let responses = ask(&providers, &top, &request, y);
                let external = combine_external(&responses, &trusts, stereo.aggregation).map(|m| m.expected());
                (external.or(local_estimate), responses)
            };

            let picked: Vec<AgentId> = sample(&mut rng, initial.len(), s.k.min(initial.len()))
                .into_iter()
                .map(|i| initial[i])
                .collect();
            let random_responses = ask(&providers, &picked, &request, y);
            let random = combine_external(&random_responses, &vec![1.0; picked.len()], stereo.aggregation)
                .map(|m| m.expected())
                .or(local_estimate);

            if let Some(outcome) = observe(&world, &index, y, &mut rng) {
                for r in &responses {
                    if let Some(p) = provider_estimate(r) {
                        list.record_recommendation_outcome(r.provider, p >= 0.5, outcome)?;
                    }
                }
            }

            pairs.push(PairRecord {
                repetition: rep,
                world_seed: config.repetition_seed(rep),
                trustor,
                target: y,
                target_honest: index.is_honest(y),
                truth: truth.get(y).expect("targets carry ground truth"),
                predictions: vec![with_sson, local_estimate, random],
            });
        }
    }
    Ok(pairs)
}

/// StereoTrust (SOF) for inexperienced trustors: stereotypes shared by
/// the best-scored providers, the trustor's own stereotypes alone, and
/// stereotypes from randomly picked providers.
pub fn run_sson_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentReport> {
    config.validate()?;
    let dataset = config.load_dataset()?;
    let pairs: Vec<PairRecord> = over_repetitions(config.repetitions, jobs, |rep| {
        run_repetition(config, dataset.as_ref(), rep)
    })?
    .into_iter()
    .flatten()
    .collect();
    let labels = LABELS.iter().map(|l| l.to_string()).collect();
    let mut report = ExperimentReport::from_pairs("sson", config, labels, pairs);
    let mae = |i: usize| report.models[i].mae_all;
    if let (Some(with), Some(local), Some(random)) = (mae(0), mae(1), mae(2)) {
        report
            .extras
            .insert("improvement_over_random".into(), (random - with) / random);
        report
            .extras
            .insert("improvement_over_local".into(), (local - with) / local);
    }
    Ok(report)
}
