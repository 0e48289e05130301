//! Basic stereotype model of one trustor.
//!
//! Every category seen in the trustor's history defines a group: the
//! trustor's partners interested in that category. A group's stereotype is
//! the sum of the trustor's outcome counts with its members. A target is
//! matched to the groups of the categories in its profile, and the matched
//! stereotypes are combined with weights proportional to their transaction
//! counts.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dichotomy::Closeness;
use crate::error::Error;
use crate::features::{self, FeatureVector, Label, LabeledPopulation, Selection};
use crate::trust::{BetaMixture, OutcomeCounts};
use crate::world::{AgentId, TransactionRecord, WorldIndex};

/// How weighted stereotypes become one trust function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Aggregation {
    /// Mixture of the weighted trust functions.
    #[default]
    Sof,
    /// One trust function over the weighted counts.
    Sop,
}

impl FromStr for Aggregation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "sof" => Ok(Aggregation::Sof),
            "sop" => Ok(Aggregation::Sop),
            _ => Err(Error::Config(format!("unknown aggregation {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    /// Groups are keyed by their category, so the id is the category code.
    pub id: u32,
    pub predicate: FeatureVector,
    pub members: BTreeSet<AgentId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stereotype {
    pub group: u32,
    pub counts: OutcomeCounts,
    pub transactions: u64,
}

impl Stereotype {
    fn from_counts(group: u32, counts: OutcomeCounts) -> Self {
        Stereotype {
            group,
            counts,
            transactions: counts.total().round() as u64,
        }
    }
}

/// Trustor's outcome counts per partner.
pub fn partner_counts<'a>(
    history: impl IntoIterator<Item = &'a TransactionRecord>,
) -> BTreeMap<AgentId, OutcomeCounts> {
    let mut out: BTreeMap<AgentId, OutcomeCounts> = BTreeMap::new();
    for tx in history {
        out.entry(tx.target).or_default().record(tx.outcome);
    }
    out
}

/// One group per category some partner in `history` is interested in,
/// restricted to `categories` when given. A partner joins every group whose
/// category is in its profile.
pub fn build_groups<'a>(
    history: impl IntoIterator<Item = &'a TransactionRecord>,
    categories: Option<&[u32]>,
    index: &WorldIndex,
) -> Vec<Group> {
    let partners: BTreeSet<AgentId> = history.into_iter().map(|tx| tx.target).collect();
    let seen: BTreeSet<u32> = partners
        .iter()
        .flat_map(|&p| index.interest_set(p))
        .filter(|c| categories.is_none_or(|keep| keep.contains(c)))
        .collect();
    seen.into_iter()
        .map(|c| Group {
            id: c,
            predicate: FeatureVector::single(index.n_categories(), c as usize, 1),
            members: partners.iter().copied().filter(|&p| index.interested(p, c)).collect(),
        })
        .collect()
}

pub fn form_stereotype(partners: &BTreeMap<AgentId, OutcomeCounts>, group: &Group) -> Stereotype {
    let counts = group.members.iter().filter_map(|m| partners.get(m)).copied().sum();
    Stereotype::from_counts(group.id, counts)
}

/// `theta_i / sum theta`; `None` when no matched stereotype has transactions.
pub fn group_weights(stereotypes: &[Stereotype]) -> Option<Vec<f64>> {
    let total: u64 = stereotypes.iter().map(|s| s.transactions).sum();
    (total > 0).then(|| {
        stereotypes
            .iter()
            .map(|s| s.transactions as f64 / total as f64)
            .collect()
    })
}

/// Per-group contribution to a combined trust function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupTerm {
    Whole(OutcomeCounts),
    Split {
        honest: OutcomeCounts,
        dishonest: OutcomeCounts,
        closeness: Closeness,
    },
}

/// Combine weighted group terms by SOF or SOP.
pub fn combine(terms: &[(f64, GroupTerm)], aggregation: Aggregation) -> BetaMixture {
    match aggregation {
        Aggregation::Sof => {
            let mut components = Vec::with_capacity(terms.len() * 2);
            for &(w, term) in terms {
                match term {
                    GroupTerm::Whole(c) => components.push((w, c)),
                    GroupTerm::Split {
                        honest,
                        dishonest,
                        closeness,
                    } => {
                        components.push((w * closeness.to_honest, honest));
                        components.push((w * closeness.to_dishonest, dishonest));
                    }
                }
            }
            BetaMixture { components }
        }
        Aggregation::Sop => {
            let counts = terms
                .iter()
                .map(|&(w, term)| match term {
                    GroupTerm::Whole(c) => c.scaled(w),
                    GroupTerm::Split {
                        honest,
                        dishonest,
                        closeness,
                    } => (honest.scaled(closeness.to_honest) + dishonest.scaled(closeness.to_dishonest)).scaled(w),
                })
                .sum();
            BetaMixture::single(counts)
        }
    }
}

pub fn stereotrust_sof(stereotypes: &[Stereotype], weights: &[f64]) -> BetaMixture {
    let terms: Vec<_> = weights
        .iter()
        .zip(stereotypes)
        .map(|(&w, s)| (w, GroupTerm::Whole(s.counts)))
        .collect();
    combine(&terms, Aggregation::Sof)
}

pub fn stereotrust_sop(stereotypes: &[Stereotype], weights: &[f64]) -> BetaMixture {
    let terms: Vec<_> = weights
        .iter()
        .zip(stereotypes)
        .map(|(&w, s)| (w, GroupTerm::Whole(s.counts)))
        .collect();
    combine(&terms, Aggregation::Sop)
}

/// Label used for feature statistics: honest iff strictly more successes.
pub fn partner_label(counts: &OutcomeCounts) -> Label {
    if counts.successes > counts.failures {
        Label::Honest
    } else {
        Label::Dishonest
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoConfig {
    /// Cap on the groups a target is matched to, ranked by information gain.
    pub selection: Selection,
    pub aggregation: Aggregation,
}

impl Default for StereoConfig {
    fn default() -> Self {
        StereoConfig {
            selection: Selection::TopK(3),
            aggregation: Aggregation::Sof,
        }
    }
}

/// A trustor's groups and stereotypes.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoModel {
    pub trustor: AgentId,
    n_categories: usize,
    partners: BTreeMap<AgentId, OutcomeCounts>,
    groups: BTreeMap<u32, (Group, Stereotype)>,
    /// Information gain of each category feature over the labelled partners.
    gains: Vec<f64>,
}

impl StereoModel {
    pub fn build<'a>(
        index: &WorldIndex,
        trustor: AgentId,
        history: impl IntoIterator<Item = &'a TransactionRecord>,
    ) -> StereoModel {
        let history: Vec<&TransactionRecord> = history.into_iter().collect();
        let partners = partner_counts(history.iter().copied());
        let groups = build_groups(history.iter().copied(), None, index)
            .into_iter()
            .map(|g| {
                let s = form_stereotype(&partners, &g);
                (g.id, (g, s))
            })
            .collect();
        let mut model = StereoModel {
            trustor,
            n_categories: index.n_categories(),
            partners,
            groups,
            gains: Vec::new(),
        };
        model.refresh_gains(index);
        model
    }

    /// Fold one more transaction into the model.
    pub fn record(&mut self, index: &WorldIndex, tx: &TransactionRecord) {
        let new_partner = !self.partners.contains_key(&tx.target);
        self.partners.entry(tx.target).or_default().record(tx.outcome);
        for (c, (group, s)) in self.groups.iter_mut() {
            if new_partner && index.interested(tx.target, *c) {
                group.members.insert(tx.target);
            }
            if group.members.contains(&tx.target) {
                let mut counts = s.counts;
                counts.record(tx.outcome);
                *s = Stereotype::from_counts(*c, counts);
            }
        }
        if !new_partner {
            self.refresh_gains(index);
            return;
        }
        for c in index.interest_set(tx.target) {
            if self.groups.contains_key(&c) {
                continue;
            }
            let group = Group {
                id: c,
                predicate: FeatureVector::single(self.n_categories, c as usize, 1),
                members: self
                    .partners
                    .keys()
                    .copied()
                    .filter(|&p| index.interested(p, c))
                    .collect(),
            };
            let s = form_stereotype(&self.partners, &group);
            self.groups.insert(c, (group, s));
        }
        self.refresh_gains(index);
    }

    fn refresh_gains(&mut self, index: &WorldIndex) {
        let pop = LabeledPopulation::new(
            self.partners
                .iter()
                .map(|(&p, c)| (index.profile(p).clone(), partner_label(c)))
                .collect(),
        );
        self.gains = if pop.is_empty() {
            vec![0.0; self.n_categories]
        } else {
            (0..self.n_categories)
                .map(|f| features::information_gain(&pop, f).unwrap_or(0.0))
                .collect()
        };
    }

    pub fn partners(&self) -> &BTreeMap<AgentId, OutcomeCounts> {
        &self.partners
    }

    pub fn groups(&self) -> impl Iterator<Item = &(Group, Stereotype)> {
        self.groups.values()
    }

    pub fn group(&self, id: u32) -> Option<&(Group, Stereotype)> {
        self.groups.get(&id)
    }

    pub fn gain(&self, category: u32) -> f64 {
        self.gains[category as usize]
    }

    pub fn is_empty(&self) -> bool {
        self.partners.is_empty()
    }

    /// Groups whose predicate the target's profile satisfies, ranked by
    /// information gain, then transaction count, then group id, and capped
    /// by the selection rule.
    pub fn matched(&self, profile: &FeatureVector, selection: Selection) -> Vec<u32> {
        self.matched_with(profile, selection, 0)
    }

    /// [`StereoModel::matched`] over stereotypes with at least
    /// `min_transactions` transactions.
    pub fn matched_with(&self, profile: &FeatureVector, selection: Selection, min_transactions: u64) -> Vec<u32> {
        let mut hits: Vec<(u32, f64, u64)> = self
            .groups
            .values()
            .filter(|(g, s)| s.transactions >= min_transactions && g.predicate.matches(profile))
            .map(|(g, s)| (g.id, self.gain(g.id), s.transactions))
            .collect();
        hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.2.cmp(&a.2)).then(a.0.cmp(&b.0)));
        match selection {
            Selection::TopK(k) => hits.truncate(k),
            Selection::Threshold(delta) => hits.retain(|h| h.1 > delta),
        }
        hits.into_iter().map(|h| h.0).collect()
    }

    /// Matched stereotypes with their weights; `None` without local knowledge.
    pub fn weighted(&self, profile: &FeatureVector, selection: Selection) -> Option<Vec<(f64, u32)>> {
        let ids = self.matched(profile, selection);
        let stereotypes: Vec<Stereotype> = ids.iter().map(|id| self.groups[id].1).collect();
        let weights = group_weights(&stereotypes)?;
        Some(weights.into_iter().zip(ids).collect())
    }

    pub fn evaluate(&self, profile: &FeatureVector, config: &StereoConfig) -> Option<BetaMixture> {
        let terms: Vec<(f64, GroupTerm)> = self
            .weighted(profile, config.selection)?
            .into_iter()
            .map(|(w, id)| (w, GroupTerm::Whole(self.groups[&id].1.counts)))
            .collect();
        Some(combine(&terms, config.aggregation))
    }

    /// Stereotypes backed by at least `min_transactions` transactions.
    pub fn confident(&self, min_transactions: u64) -> impl Iterator<Item = &(Group, Stereotype)> {
        self.groups
            .values()
            .filter(move |(_, s)| s.transactions >= min_transactions && s.transactions > 0)
    }
}
