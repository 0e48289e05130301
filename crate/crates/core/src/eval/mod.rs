//! Experiment driver: runs trust models over (trustor, target) pairs of
//! freshly generated worlds and compares their estimates with ground truth.

pub mod report;
pub mod sson;
pub mod stats;
pub mod update;

use std::borrow::Cow;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, EigenConfig, TrustGraph};
use crate::dichotomy::{self, DichotomyConfig, TieRule};
use crate::error::{Error, Result};
use crate::features::Selection;
use crate::stereotype::{Aggregation, StereoConfig, StereoModel};
use crate::world::{AgentId, DishonestReports, World, WorldConfig, WorldIndex};

pub use report::{ExperimentReport, ModelSummary, PairRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    DStereoTrust(Aggregation),
    StereoTrust(Aggregation),
    DichotomyOnly(Aggregation),
    Feedback,
    GroupFeedback,
    EigenTrust,
    TransitiveShortest,
    TransitiveReliable,
}

impl ModelKind {
    pub const ALL: [ModelKind; 11] = [
        ModelKind::DStereoTrust(Aggregation::Sof),
        ModelKind::DStereoTrust(Aggregation::Sop),
        ModelKind::StereoTrust(Aggregation::Sof),
        ModelKind::StereoTrust(Aggregation::Sop),
        ModelKind::DichotomyOnly(Aggregation::Sof),
        ModelKind::DichotomyOnly(Aggregation::Sop),
        ModelKind::Feedback,
        ModelKind::GroupFeedback,
        ModelKind::EigenTrust,
        ModelKind::TransitiveShortest,
        ModelKind::TransitiveReliable,
    ];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let agg = |a: &Aggregation| match a {
            Aggregation::Sof => "sof",
            Aggregation::Sop => "sop",
        };
        match self {
            ModelKind::DStereoTrust(a) => write!(f, "d-stereotrust-{}", agg(a)),
            ModelKind::StereoTrust(a) => write!(f, "stereotrust-{}", agg(a)),
            ModelKind::DichotomyOnly(a) => write!(f, "dichotomy-only-{}", agg(a)),
            ModelKind::Feedback => f.write_str("feedback"),
            ModelKind::GroupFeedback => f.write_str("group-feedback"),
            ModelKind::EigenTrust => f.write_str("eigentrust"),
            ModelKind::TransitiveShortest => f.write_str("transitive-sp"),
            ModelKind::TransitiveReliable => f.write_str("transitive-mrp"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.to_string() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsonSettings {
    pub trustors: usize,
    /// Records kept from each inexperienced trustor's history.
    pub history: usize,
    /// Size of each trustor's initial provider list.
    pub providers: usize,
    pub k: usize,
    pub epsilon: f64,
    pub confidence: f64,
}

impl Default for SsonSettings {
    fn default() -> Self {
        SsonSettings {
            trustors: 10,
            history: 4,
            providers: 20,
            k: 5,
            epsilon: 0.3,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateSettings {
    pub tau: usize,
    pub behavior_flip: f64,
    pub trustors: usize,
}

impl Default for UpdateSettings {
    fn default() -> Self {
        UpdateSettings {
            tau: 10,
            behavior_flip: 0.1,
            trustors: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub world: WorldConfig,
    /// World dump evaluated instead of generated worlds; repetitions then
    /// differ only in the trustors drawn.
    pub dataset: Option<PathBuf>,
    /// Repetition `i` uses world seed `seed + i`.
    pub seed: u64,
    pub repetitions: usize,
    /// Honest trustors drawn per repetition.
    pub trustors: usize,
    pub models: Vec<ModelKind>,
    pub top_k_features: usize,
    pub feature_threshold: Option<f64>,
    pub tie_rule: TieRule,
    pub max_reporters: Option<usize>,
    pub reports: DishonestReports,
    pub pretrusted: usize,
    pub eigen: EigenConfig,
    pub mrp_max_asked: usize,
    pub sson: SsonSettings,
    pub update: UpdateSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            world: WorldConfig::default(),
            dataset: None,
            seed: 1,
            repetitions: 10,
            trustors: 1,
            models: ModelKind::ALL.to_vec(),
            top_k_features: 3,
            feature_threshold: None,
            tie_rule: TieRule::Honest,
            max_reporters: None,
            reports: DishonestReports::default(),
            pretrusted: 5,
            eigen: EigenConfig::default(),
            mrp_max_asked: 6,
            sson: SsonSettings::default(),
            update: UpdateSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1");
        }
        if self.trustors == 0 || self.top_k_features == 0 || self.sson.k == 0 {
            return fail("trustors, top_k_features and sson_k must be positive");
        }
        if self.update.tau == 0 {
            return fail("tau must be positive");
        }
        if self.pretrusted == 0 || self.mrp_max_asked == 0 {
            return fail("pretrusted and mrp_max_asked must be positive");
        }
        if !(self.eigen.damping > 0.0 && self.eigen.damping <= 1.0) || self.eigen.epsilon <= 0.0 {
            return fail("eigen_damping must lie in (0, 1] and eigen_epsilon be positive");
        }
        crate::sson::min_confident_transactions(self.sson.epsilon, self.sson.confidence)
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.update.behavior_flip) {
            return fail("update_behavior_flip must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn stereo(&self, aggregation: Aggregation) -> StereoConfig {
        StereoConfig {
            selection: match self.feature_threshold {
                Some(delta) => Selection::Threshold(delta),
                None => Selection::TopK(self.top_k_features),
            },
            aggregation,
        }
    }

    pub fn dichotomy(&self) -> DichotomyConfig {
        DichotomyConfig {
            tie: self.tie_rule,
            max_reporters: self.max_reporters,
        }
    }

    pub fn world_for(&self, repetition: usize) -> WorldConfig {
        WorldConfig {
            rng_seed: self.repetition_seed(repetition),
            ..self.world.clone()
        }
    }

    pub fn repetition_seed(&self, repetition: usize) -> u64 {
        self.seed.wrapping_add(repetition as u64)
    }

    pub fn load_dataset(&self) -> Result<Option<World>> {
        self.dataset
            .as_ref()
            .map(|p| World::load(BufReader::new(File::open(p)?)))
            .transpose()
    }

    /// The world of one repetition: the loaded dataset or a fresh
    /// generated world.
    pub(crate) fn repetition_world<'a>(&self, repetition: usize, dataset: Option<&'a World>) -> Result<Cow<'a, World>> {
        match dataset {
            Some(w) => Ok(Cow::Borrowed(w)),
            None => World::generate(&self.world_for(repetition)).map(Cow::Owned),
        }
    }
}

/// Auxiliary randomness of a repetition (trustor draws, provider lists),
/// independent of the world generator's stream.
pub(crate) fn aux_rng(world_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(world_seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn pick_honest(index: &WorldIndex, rng: &mut ChaCha8Rng, count: usize, min_history: usize) -> Vec<AgentId> {
    let pool: Vec<AgentId> = (0..index.n_agents() as AgentId)
        .filter(|&a| index.is_honest(a) == Some(true) && index.history(a).len() >= min_history)
        .collect();
    let mut picked: Vec<AgentId> = sample(rng, pool.len(), count.min(pool.len()))
        .into_iter()
        .map(|i| pool[i])
        .collect();
    picked.sort_unstable();
    picked
}

/// Everything a model may consult about one world and one trustor.
pub struct TrustorView<'a> {
    pub world: &'a World,
    pub index: &'a WorldIndex,
    pub graph: &'a TrustGraph,
    pub global_trust: &'a [f64],
    pub trustor: AgentId,
    pub config: &'a ExperimentConfig,
}

/// The trustor's stereotypes with every transaction with `target` removed.
pub struct TargetView<'a> {
    pub target: AgentId,
    pub model: Cow<'a, StereoModel>,
}

pub trait Predictor: Sync {
    fn label(&self) -> String;
    fn predict(&self, view: &TrustorView, target: &TargetView) -> Option<f64>;
}

impl Predictor for ModelKind {
    fn label(&self) -> String {
        self.to_string()
    }

    fn predict(&self, v: &TrustorView, t: &TargetView) -> Option<f64> {
        let (index, trustor, target) = (v.index, v.trustor, t.target);
        let skip = Some((trustor, target));
        match *self {
            ModelKind::StereoTrust(a) => t
                .model
                .evaluate(index.profile(target), &v.config.stereo(a))
                .map(|m| m.expected()),
            ModelKind::DStereoTrust(a) => {
                dichotomy::evaluate_dstereo(index, &t.model, target, &v.config.stereo(a), &v.config.dichotomy())
                    .map(|m| m.expected())
            }
            ModelKind::DichotomyOnly(a) => {
                dichotomy::evaluate_dichotomy_only(index, &t.model, target, &v.config.stereo(a), &v.config.dichotomy())
                    .map(|m| m.expected())
            }
            ModelKind::Feedback => baselines::feedback_aggregation(index, trustor, target),
            ModelKind::GroupFeedback => baselines::mean_report(&dichotomy::group_reporters(
                index,
                &t.model,
                target,
                &v.config.stereo(Aggregation::Sof),
                &v.config.dichotomy(),
            )),
            ModelKind::EigenTrust => baselines::eigentrust_predict(index, v.global_trust, trustor, target),
            ModelKind::TransitiveShortest => baselines::shortest_path(v.graph, trustor, target, skip),
            ModelKind::TransitiveReliable => {
                baselines::most_reliable_path(v.graph, trustor, target, v.config.mrp_max_asked, skip)
            }
        }
    }
}

/// Leave-target-out evaluation of every predictor for one trustor.
pub fn evaluate_trustor(view: &TrustorView, predictors: &[&dyn Predictor], repetition: usize) -> Vec<PairRecord> {
    let index = view.index;
    let history = index.history(view.trustor);
    let full = StereoModel::build(index, view.trustor, history);
    let truth = index.ground_truth();
    (0..index.n_agents() as AgentId)
        .filter(|&y| y != view.trustor)
        .filter_map(|y| truth.get(y).map(|g| (y, g)))
        .map(|(y, g)| {
            let model = if full.partners().contains_key(&y) {
                Cow::Owned(StereoModel::build(
                    index,
                    view.trustor,
                    history.iter().filter(|tx| tx.target != y),
                ))
            } else {
                Cow::Borrowed(&full)
            };
            let target = TargetView { target: y, model };
            PairRecord {
                repetition,
                world_seed: view.config.repetition_seed(repetition),
                trustor: view.trustor,
                target: y,
                target_honest: index.is_honest(y),
                truth: g,
                predictions: predictors.iter().map(|p| p.predict(view, &target)).collect(),
            }
        })
        .collect()
}

fn run_repetition(
    config: &ExperimentConfig,
    predictors: &[&dyn Predictor],
    dataset: Option<&World>,
    repetition: usize,
) -> Result<Vec<PairRecord>> {
    let world = config.repetition_world(repetition, dataset)?;
    let index = world.index().with_reports(config.reports);
    let graph = TrustGraph::from_index(&index);
    let mut rng = aux_rng(config.repetition_seed(repetition), 1);
    let trustors = pick_honest(&index, &mut rng, config.trustors, 1);
    let pretrusted = pick_honest(&index, &mut rng, config.pretrusted, 0);
    let global = baselines::eigentrust(&graph, &pretrusted, &config.eigen)?;
    let mut out = Vec::new();
    for trustor in trustors {
        let view = TrustorView {
            world: &world,
            index: &index,
            graph: &graph,
            global_trust: &global,
            trustor,
            config,
        };
        out.extend(evaluate_trustor(&view, predictors, repetition));
    }
    Ok(out)
}

/// Run `f` over repetitions in parallel, keeping repetition order.
pub(crate) fn over_repetitions<T: Send>(
    repetitions: usize,
    jobs: Option<usize>,
    f: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let run = || (0..repetitions).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(run),
        None => run(),
    }
}

pub fn run_experiment_with(
    config: &ExperimentConfig,
    predictors: &[&dyn Predictor],
    jobs: Option<usize>,
) -> Result<ExperimentReport> {
    config.validate()?;
    let dataset = config.load_dataset()?;
    let pairs: Vec<PairRecord> = over_repetitions(config.repetitions, jobs, |r| {
        run_repetition(config, predictors, dataset.as_ref(), r)
    })?
    .into_iter()
    .flatten()
    .collect();
    let labels: Vec<String> = predictors.iter().map(|p| p.label()).collect();
    Ok(ExperimentReport::from_pairs("table2", config, labels, pairs))
}

pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentReport> {
    let predictors: Vec<&dyn Predictor> = config.models.iter().map(|m| m as &dyn Predictor).collect();
    run_experiment_with(config, &predictors, jobs)
}
