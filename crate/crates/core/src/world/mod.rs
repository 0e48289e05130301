//! Agent society: agents, reviews, rating events, and the read-only indexes
//! every trust model queries.
//!
//! A transaction happens when a rater rates a review; the rater is the
//! trustor side and the review's author is the target side.

mod dataset;
mod generate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::features::FeatureVector;
use crate::trust::OutcomeCounts;

pub use dataset::{DatasetRecord, IngestConfig, LabelOrValue, LabelTable, DUMP_FORMAT};
pub use generate::WorldConfig;

pub type AgentId = u32;
pub type ReviewId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub name: String,
    /// Behaviour class; unknown for ingested data.
    pub honest: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub name: String,
    pub author: AgentId,
    pub category: u32,
    pub product: u32,
    /// Designed quality of a synthetic review; unknown for ingested data.
    pub true_quality: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub rater: AgentId,
    pub review: ReviewId,
    /// Published rating in [0, 1].
    pub value: f64,
    pub seq: u64,
}

/// Maps a published rating to a binary transaction outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SuccessRule {
    Above(f64),
    AtLeast(f64),
}

impl SuccessRule {
    pub fn is_success(&self, value: f64) -> bool {
        match *self {
            SuccessRule::Above(t) => value > t,
            SuccessRule::AtLeast(t) => value >= t,
        }
    }
}

/// One rated interaction, seen from the rater.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransactionRecord {
    pub trustor: AgentId,
    pub target: AgentId,
    pub category: u32,
    pub outcome: bool,
    pub raw_rating: f64,
    pub sequence: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    /// Generator configuration for synthetic worlds.
    pub config: Option<WorldConfig>,
    pub categories: Vec<String>,
    pub agents: Vec<Agent>,
    pub reviews: Vec<Review>,
    /// Sorted by `seq`.
    pub ratings: Vec<Rating>,
    pub success: SuccessRule,
    /// Reviews with fewer ratings do not contribute to ground truth.
    pub min_ratings_for_truth: usize,
}

/// Per-agent reference trustworthiness; `None` for agents without any
/// qualifying rated review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth(pub Vec<Option<f64>>);

impl GroundTruth {
    pub fn get(&self, agent: AgentId) -> Option<f64> {
        self.0.get(agent as usize).copied().flatten()
    }
}

impl World {
    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn is_honest(&self, agent: AgentId) -> Option<bool> {
        self.agents[agent as usize].honest
    }

    pub fn transaction(&self, rating: &Rating) -> TransactionRecord {
        let review = &self.reviews[rating.review as usize];
        TransactionRecord {
            trustor: rating.rater,
            target: review.author,
            category: review.category,
            outcome: self.success.is_success(rating.value),
            raw_rating: rating.value,
            sequence: rating.seq,
        }
    }

    /// Per-agent mean over every rating event on the agent's reviews.
    ///
    /// Each event contributes the review's designed quality when the world
    /// carries one (synthetic data), else the published rating.
    pub fn ground_truth(&self) -> GroundTruth {
        let mut per_review = vec![0usize; self.reviews.len()];
        for r in &self.ratings {
            per_review[r.review as usize] += 1;
        }
        let mut sum = vec![0.0; self.agents.len()];
        let mut n = vec![0usize; self.agents.len()];
        for r in &self.ratings {
            let review = &self.reviews[r.review as usize];
            if per_review[r.review as usize] < self.min_ratings_for_truth.max(1) {
                continue;
            }
            let a = review.author as usize;
            sum[a] += review.true_quality.unwrap_or(r.value);
            n[a] += 1;
        }
        GroundTruth(
            sum.iter()
                .zip(&n)
                .map(|(&s, &k)| (k > 0).then(|| s / k as f64))
                .collect(),
        )
    }

    pub fn index(&self) -> WorldIndex {
        WorldIndex::build(self)
    }
}

/// How dishonest agents answer opinion queries and stereotype requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DishonestReports {
    /// Disclose the published rating log, which for a dishonest rater already
    /// carries its falsified ratings.
    Published,
    /// Mirror the published rating log.
    #[default]
    MirrorLog,
    /// Mirror the outcomes actually experienced (designed review quality).
    MirrorPerceived,
}

impl std::str::FromStr for DishonestReports {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "published" => Ok(DishonestReports::Published),
            "mirror_log" => Ok(DishonestReports::MirrorLog),
            "mirror_perceived" => Ok(DishonestReports::MirrorPerceived),
            _ => Err(crate::error::Error::Config(format!("unknown report mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PairStats {
    logged: OutcomeCounts,
    perceived: OutcomeCounts,
}

/// Read-only lookup structures over a [`World`].
#[derive(Debug, Clone)]
pub struct WorldIndex {
    n_categories: usize,
    honest: Vec<Option<bool>>,
    histories: Vec<Vec<TransactionRecord>>,
    /// Outcome each history entry would have had under the designed quality.
    perceived: Vec<Vec<bool>>,
    /// rater -> sorted (author, stats)
    outgoing: Vec<Vec<(AgentId, PairStats)>>,
    /// author -> sorted raters
    raters: Vec<Vec<AgentId>>,
    interests: Vec<Vec<bool>>,
    profiles: Vec<FeatureVector>,
    reviews_by_author: Vec<Vec<ReviewId>>,
    truth: GroundTruth,
    pub reports: DishonestReports,
}

impl WorldIndex {
    pub fn build(world: &World) -> WorldIndex {
        let n = world.n_agents();
        let nc = world.n_categories();
        let mut histories = vec![Vec::new(); n];
        let mut perceived_outcomes = vec![Vec::new(); n];
        let mut interests = vec![vec![false; nc]; n];
        let mut reviews_by_author = vec![Vec::new(); n];
        let mut pairs: Vec<std::collections::BTreeMap<AgentId, PairStats>> = vec![Default::default(); n];
        for (id, review) in world.reviews.iter().enumerate() {
            interests[review.author as usize][review.category as usize] = true;
            reviews_by_author[review.author as usize].push(id as ReviewId);
        }
        for r in &world.ratings {
            let tx = world.transaction(r);
            let review = &world.reviews[r.review as usize];
            interests[tx.trustor as usize][tx.category as usize] = true;
            histories[tx.trustor as usize].push(tx);
            let stats = pairs[tx.trustor as usize].entry(tx.target).or_default();
            stats.logged.record(tx.outcome);
            let perceived = world.success.is_success(review.true_quality.unwrap_or(r.value));
            stats.perceived.record(perceived);
            perceived_outcomes[tx.trustor as usize].push(perceived);
        }
        let mut raters = vec![Vec::new(); n];
        for (rater, m) in pairs.iter().enumerate() {
            for &author in m.keys() {
                raters[author as usize].push(rater as AgentId);
            }
        }
        let profiles = interests
            .iter()
            .map(|row| FeatureVector(row.iter().map(|&b| Some(b as u32)).collect()))
            .collect();
        WorldIndex {
            n_categories: nc,
            honest: world.agents.iter().map(|a| a.honest).collect(),
            histories,
            perceived: perceived_outcomes,
            outgoing: pairs.into_iter().map(|m| m.into_iter().collect()).collect(),
            raters,
            interests,
            profiles,
            reviews_by_author,
            truth: world.ground_truth(),
            reports: DishonestReports::default(),
        }
    }

    pub fn with_reports(mut self, reports: DishonestReports) -> Self {
        self.reports = reports;
        self
    }

    pub fn n_agents(&self) -> usize {
        self.histories.len()
    }

    pub fn n_categories(&self) -> usize {
        self.n_categories
    }

    pub fn is_honest(&self, agent: AgentId) -> Option<bool> {
        self.honest[agent as usize]
    }

    /// The agent's transactions as a rater, in sequence order.
    pub fn history(&self, agent: AgentId) -> &[TransactionRecord] {
        &self.histories[agent as usize]
    }

    /// The agent's history with outcomes judged by designed quality.
    pub fn perceived_history(&self, agent: AgentId) -> Vec<TransactionRecord> {
        self.histories[agent as usize]
            .iter()
            .zip(&self.perceived[agent as usize])
            .map(|(tx, &ok)| TransactionRecord { outcome: ok, ..*tx })
            .collect()
    }

    /// Indicator profile: position `c` is 1 iff the agent is interested in
    /// category `c` (authored or rated a review there).
    pub fn profile(&self, agent: AgentId) -> &FeatureVector {
        &self.profiles[agent as usize]
    }

    pub fn interested(&self, agent: AgentId, category: u32) -> bool {
        self.interests[agent as usize][category as usize]
    }

    /// Agents with at least one transaction with `author`.
    pub fn raters_of(&self, author: AgentId) -> &[AgentId] {
        &self.raters[author as usize]
    }

    pub fn reviews_by(&self, author: AgentId) -> &[ReviewId] {
        &self.reviews_by_author[author as usize]
    }

    fn pair(&self, rater: AgentId, author: AgentId) -> Option<&PairStats> {
        let row = &self.outgoing[rater as usize];
        row.binary_search_by_key(&author, |(a, _)| *a).ok().map(|i| &row[i].1)
    }

    /// Logged outcome counts of `rater` with `author`.
    pub fn counts(&self, rater: AgentId, author: AgentId) -> Option<OutcomeCounts> {
        self.pair(rater, author).map(|p| p.logged)
    }

    /// Every (author, logged counts) pair of a rater, sorted by author.
    pub fn partners(&self, rater: AgentId) -> impl Iterator<Item = (AgentId, OutcomeCounts)> + '_ {
        self.outgoing[rater as usize].iter().map(|(a, s)| (*a, s.logged))
    }

    /// The outcome counts `reporter` discloses about `about`: honest agents
    /// disclose their log, dishonest agents the mirror image of what they
    /// experienced. `None` without any transaction.
    pub fn reported_counts(&self, reporter: AgentId, about: AgentId) -> Option<OutcomeCounts> {
        let stats = self.pair(reporter, about)?;
        Some(match (self.honest[reporter as usize].unwrap_or(true), self.reports) {
            (true, _) | (false, DishonestReports::Published) => stats.logged,
            (false, DishonestReports::MirrorLog) => stats.logged.mirrored(),
            (false, DishonestReports::MirrorPerceived) => stats.perceived.mirrored(),
        })
    }

    /// Reported fraction of successful transactions.
    pub fn report(&self, reporter: AgentId, about: AgentId) -> Option<f64> {
        self.reported_counts(reporter, about)?.success_fraction()
    }

    pub fn ground_truth(&self) -> &GroundTruth {
        &self.truth
    }

    /// Distinct categories an agent is interested in.
    pub fn interest_set(&self, agent: AgentId) -> BTreeSet<u32> {
        self.interests[agent as usize]
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(c, _)| c as u32)
            .collect()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Tiny hand-built world: `ratings` are (rater, review, value) with
    /// sequence numbers assigned in order.
    pub fn world(
        honest: &[bool],
        n_categories: usize,
        reviews: &[(AgentId, u32, Option<f64>)],
        ratings: &[(AgentId, ReviewId, f64)],
    ) -> World {
        World {
            config: None,
            categories: (0..n_categories).map(|c| format!("c{c}")).collect(),
            agents: honest
                .iter()
                .enumerate()
                .map(|(i, &h)| Agent {
                    name: format!("a{i}"),
                    honest: Some(h),
                })
                .collect(),
            reviews: reviews
                .iter()
                .enumerate()
                .map(|(i, &(author, category, q))| Review {
                    name: format!("r{i}"),
                    author,
                    category,
                    product: 0,
                    true_quality: q,
                })
                .collect(),
            ratings: ratings
                .iter()
                .enumerate()
                .map(|(i, &(rater, review, value))| Rating {
                    rater,
                    review,
                    value,
                    seq: i as u64,
                })
                .collect(),
            success: SuccessRule::Above(0.5),
            min_ratings_for_truth: 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::world;
    use super::*;

    #[test]
    fn worked_example_ground_truth() {
        // Three reviews by agent 0: ratings {0.75, 1.0}, {0.75}, {0.5}.
        let w = world(
            &[true, true, true],
            1,
            &[(0, 0, None), (0, 0, None), (0, 0, None)],
            &[(1, 0, 0.75), (2, 0, 1.0), (1, 1, 0.75), (2, 2, 0.5)],
        );
        let gt = w.ground_truth();
        assert_eq!(gt.get(0), Some((0.75 + 1.0 + 0.75 + 0.5) / 4.0));
        assert_eq!(gt.get(0), Some(0.75));
        assert_eq!(gt.get(1), None);
    }

    #[test]
    fn single_and_identical_ratings() {
        let w = world(&[true, true], 1, &[(0, 0, None)], &[(1, 0, 0.2)]);
        assert_eq!(w.ground_truth().get(0), Some(0.2));
        let w = world(
            &[true, true, true],
            1,
            &[(0, 0, None), (0, 0, None)],
            &[(1, 0, 0.6), (2, 0, 0.6), (1, 1, 0.6)],
        );
        assert_eq!(w.ground_truth().get(0), Some(0.6));
    }

    #[test]
    fn designed_quality_takes_precedence() {
        let w = world(&[true, false], 1, &[(0, 0, Some(0.8))], &[(1, 0, 0.2)]);
        assert_eq!(w.ground_truth().get(0), Some(0.8));
    }

    #[test]
    fn sparse_reviews_excluded_from_truth() {
        let mut w = world(
            &[true, true, true],
            1,
            &[(0, 0, None), (0, 0, None)],
            &[(1, 0, 1.0), (2, 0, 1.0), (1, 1, 0.0)],
        );
        w.min_ratings_for_truth = 2;
        assert_eq!(w.ground_truth().get(0), Some(1.0));
    }

    #[test]
    fn reports_follow_behaviour() {
        // Agent 0 wrote three good reviews and one bad one. Honest agent 1
        // rates them truthfully; dishonest agent 2 inverts every rating.
        let reviews = [
            (0, 0, Some(0.8)),
            (0, 0, Some(1.0)),
            (0, 0, Some(0.6)),
            (0, 0, Some(0.2)),
        ];
        let ratings = [
            (1, 0, 0.8),
            (1, 1, 1.0),
            (1, 2, 0.6),
            (1, 3, 0.2),
            (2, 0, 0.2),
            (2, 1, 0.0),
            (2, 2, 0.4),
            (2, 3, 0.8),
        ];
        let w = world(&[true, true, false], 1, &reviews, &ratings);
        let idx = w.index().with_reports(DishonestReports::Published);
        assert_eq!(idx.report(1, 0), Some(0.75));
        assert_eq!(idx.report(2, 0), Some(0.25));
        assert_eq!(idx.report(0, 1), None);
        let idx = idx.with_reports(DishonestReports::MirrorPerceived);
        assert_eq!(idx.report(2, 0), Some(0.25));
        let idx = idx.with_reports(DishonestReports::MirrorLog);
        assert_eq!(idx.report(2, 0), Some(0.75));
        assert_eq!(idx.report(1, 0), Some(0.75));
        let perceived: Vec<bool> = idx.perceived_history(2).iter().map(|t| t.outcome).collect();
        assert_eq!(perceived, vec![true, true, true, false]);
    }

    #[test]
    fn index_profiles_and_raters() {
        let w = world(
            &[true, true, true],
            3,
            &[(0, 0, None), (1, 2, None)],
            &[(1, 0, 1.0), (2, 0, 0.0), (0, 1, 1.0)],
        );
        let idx = w.index();
        assert_eq!(idx.raters_of(0), &[1, 2]);
        assert!(idx.interested(1, 0) && idx.interested(1, 2) && !idx.interested(1, 1));
        assert_eq!(idx.profile(0).0, vec![Some(1), Some(0), Some(1)]);
        assert_eq!(idx.counts(2, 0), Some(OutcomeCounts::new(0.0, 1.0).unwrap()));
        assert_eq!(idx.history(1).len(), 1);
    }
}
