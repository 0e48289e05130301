//! Synthetic review community.
//!
//! Categories are split into three equal blocks: the honest agents' home
//! block, the dishonest agents' home block, and a shared block. Each agent
//! writes reviews biased towards its home block; reviews are rated by agents
//! interested in the same category, and every rating event becomes a
//! transaction between the rater and the author.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Agent, AgentId, Rating, Review, SuccessRule, World};
use crate::error::{Error, Result};

/// Quality levels are `k / 5` for `k` in `0..=5`; `3..=5` is the high class.
const LEVELS: u32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    pub n_agents: usize,
    pub dishonest_fraction: f64,
    /// Probability an agent acts according to its class (review quality and
    /// rating honesty).
    pub p_m: f64,
    pub n_categories: usize,
    pub products_per_category: usize,
    pub reviews_mu: f64,
    pub reviews_sigma: f64,
    pub ratings_mu: f64,
    pub ratings_sigma: f64,
    /// Probability mass on (home block, shared block, opposite home block);
    /// renormalised to sum to one.
    pub category_bias: [f64; 3],
    /// Per authored review, probability the author inverts its quality class.
    pub behavior_flip: f64,
    pub rng_seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            n_agents: 200,
            dishonest_fraction: 0.4,
            p_m: 0.9,
            n_categories: 12,
            products_per_category: 20,
            reviews_mu: 10.0,
            reviews_sigma: 4.0,
            ratings_mu: 10.0,
            ratings_sigma: 4.0,
            category_bias: [0.7, 0.21, 0.03],
            behavior_flip: 0.0,
            rng_seed: 1,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.n_agents < 2 {
            return fail("n_agents must be at least 2");
        }
        if self.n_categories == 0 || !self.n_categories.is_multiple_of(3) {
            return fail("n_categories must be a positive multiple of 3");
        }
        if self.products_per_category == 0 {
            return fail("products_per_category must be positive");
        }
        if !prob(self.dishonest_fraction) || !prob(self.p_m) || !prob(self.behavior_flip) {
            return fail("probabilities must lie in [0, 1]");
        }
        if !self.category_bias.iter().all(|&p| prob(p)) || self.category_bias.iter().sum::<f64>() <= 0.0 {
            return fail("category_bias entries must lie in [0, 1] with positive sum");
        }
        for (mu, sigma) in [
            (self.reviews_mu, self.reviews_sigma),
            (self.ratings_mu, self.ratings_sigma),
        ] {
            if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
                return fail("count distributions need finite mean and non-negative sigma");
            }
        }
        Ok(())
    }

    pub fn n_dishonest(&self) -> usize {
        (self.n_agents as f64 * self.dishonest_fraction).round() as usize
    }

    /// Renormalised block probabilities.
    pub fn block_probabilities(&self) -> [f64; 3] {
        let total: f64 = self.category_bias.iter().sum();
        self.category_bias.map(|p| p / total)
    }
}

fn draw_count(rng: &mut ChaCha8Rng, dist: &Normal<f64>) -> usize {
    dist.sample(rng).round().max(1.0) as usize
}

fn pick_block(rng: &mut ChaCha8Rng, probs: &[f64; 3]) -> usize {
    let x: f64 = rng.random();
    if x < probs[0] {
        0
    } else if x < probs[0] + probs[1] {
        1
    } else {
        2
    }
}

impl World {
    /// Deterministic under `config.rng_seed`.
    pub fn generate(config: &WorldConfig) -> Result<World> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let n = config.n_agents;
        let nc = config.n_categories;
        let block_len = nc / 3;

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut honest = vec![true; n];
        for &i in &order[..config.n_dishonest()] {
            honest[i] = false;
        }

        let probs = config.block_probabilities();
        let review_counts =
            Normal::new(config.reviews_mu, config.reviews_sigma).map_err(|e| Error::Config(e.to_string()))?;
        let rating_counts =
            Normal::new(config.ratings_mu, config.ratings_sigma).map_err(|e| Error::Config(e.to_string()))?;

        let mut reviews = Vec::new();
        let mut levels = Vec::new();
        for (author, &is_honest) in honest.iter().enumerate() {
            // Block order: home, shared, opposite home.
            let (home, opposite) = if is_honest { (0, 1) } else { (1, 0) };
            for _ in 0..draw_count(&mut rng, &review_counts) {
                let block = [home, 2, opposite][pick_block(&mut rng, &probs)];
                let category = (block * block_len + rng.random_range(0..block_len)) as u32;
                let product = rng.random_range(0..config.products_per_category) as u32;
                let mut high = rng.random::<f64>() < config.p_m;
                if !is_honest {
                    high = !high;
                }
                if config.behavior_flip > 0.0 && rng.random::<f64>() < config.behavior_flip {
                    high = !high;
                }
                let level = rng.random_range(0..3) + if high { 3 } else { 0 };
                levels.push(level);
                reviews.push(Review {
                    name: format!("r{}", reviews.len()),
                    author: author as AgentId,
                    category,
                    product: category * config.products_per_category as u32 + product,
                    true_quality: Some(level as f64 / LEVELS as f64),
                });
            }
        }

        let mut pools: Vec<Vec<AgentId>> = vec![Vec::new(); nc];
        for r in &reviews {
            let pool = &mut pools[r.category as usize];
            if !pool.contains(&r.author) {
                pool.push(r.author);
            }
        }
        for pool in &mut pools {
            pool.sort_unstable();
        }

        let mut ratings = Vec::new();
        for (id, review) in reviews.iter().enumerate() {
            let eligible: Vec<AgentId> = pools[review.category as usize]
                .iter()
                .copied()
                .filter(|&a| a != review.author)
                .collect();
            let wanted = draw_count(&mut rng, &rating_counts).min(eligible.len());
            for i in sample(&mut rng, eligible.len(), wanted).into_iter() {
                let rater = eligible[i];
                let truthful = rng.random::<f64>() < config.p_m;
                let truthful = if honest[rater as usize] { truthful } else { !truthful };
                let level = if truthful { levels[id] } else { LEVELS - levels[id] };
                ratings.push(Rating {
                    rater,
                    review: id as u32,
                    value: level as f64 / LEVELS as f64,
                    seq: 0,
                });
            }
        }
        ratings.shuffle(&mut rng);
        for (seq, r) in ratings.iter_mut().enumerate() {
            r.seq = seq as u64;
        }

        Ok(World {
            config: Some(config.clone()),
            categories: (1..=nc).map(|c| format!("category-{c}")).collect(),
            agents: honest
                .iter()
                .enumerate()
                .map(|(i, &h)| Agent {
                    name: format!("agent-{i}"),
                    honest: Some(h),
                })
                .collect(),
            reviews,
            ratings,
            success: SuccessRule::Above(0.5),
            min_ratings_for_truth: 1,
        })
    }
}
