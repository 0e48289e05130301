//! Dichotomy-enhanced stereotypes.
//!
//! Each matched group is split into the partners the trustor was mostly
//! satisfied with and the rest. Third-party opinions about the target locate
//! it between the two subgroups, and the subgroup stereotypes are blended by
//! that closeness.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::stereotype::{combine, GroupTerm, StereoConfig, StereoModel};
use crate::trust::{BetaMixture, OutcomeCounts};
use crate::world::{AgentId, WorldIndex};

/// Side taken by a partner with as many successes as failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieRule {
    #[default]
    Honest,
    Dishonest,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DichotomyConfig {
    pub tie: TieRule,
    /// Optional cap on reporters queried per group, lowest ids first.
    pub max_reporters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupPair {
    pub parent: u32,
    pub honest_members: BTreeSet<AgentId>,
    pub dishonest_members: BTreeSet<AgentId>,
    pub honest: OutcomeCounts,
    pub dishonest: OutcomeCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpinionSample {
    pub reporter: AgentId,
    pub about: AgentId,
    pub fraction_successful: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Closeness {
    pub to_honest: f64,
    pub to_dishonest: f64,
}

impl Closeness {
    pub const HONEST: Closeness = Closeness {
        to_honest: 1.0,
        to_dishonest: 0.0,
    };
    pub const DISHONEST: Closeness = Closeness {
        to_honest: 0.0,
        to_dishonest: 1.0,
    };
    pub const EVEN: Closeness = Closeness {
        to_honest: 0.5,
        to_dishonest: 0.5,
    };
}

/// Partition group members with at least one transaction by the trustor's
/// majority outcome with them.
pub fn split_group(
    parent: u32,
    partners: &BTreeMap<AgentId, OutcomeCounts>,
    members: impl IntoIterator<Item = AgentId>,
    tie: TieRule,
) -> SubgroupPair {
    let mut pair = SubgroupPair {
        parent,
        honest_members: BTreeSet::new(),
        dishonest_members: BTreeSet::new(),
        honest: OutcomeCounts::ZERO,
        dishonest: OutcomeCounts::ZERO,
    };
    for m in members {
        let Some(&c) = partners.get(&m) else { continue };
        if c.total() == 0.0 {
            continue;
        }
        let honest = c.successes > c.failures || (c.successes == c.failures && tie == TieRule::Honest);
        if honest {
            pair.honest_members.insert(m);
            pair.honest += c;
        } else {
            pair.dishonest_members.insert(m);
            pair.dishonest += c;
        }
    }
    pair
}

/// Opinions about `target` from the honest subgroup and from agents that
/// share the group's interest but never transacted with the trustor.
/// Reporters without a transaction with the target have nothing to say.
pub fn collect_opinions(
    index: &WorldIndex,
    model: &StereoModel,
    target: AgentId,
    pair: &SubgroupPair,
    interested: impl Fn(AgentId) -> bool,
    max_reporters: Option<usize>,
) -> Vec<OpinionSample> {
    let mut out: Vec<OpinionSample> = index
        .raters_of(target)
        .iter()
        .copied()
        .filter(|&k| k != model.trustor && k != target)
        .filter(|&k| pair.honest_members.contains(&k) || (!model.partners().contains_key(&k) && interested(k)))
        .filter_map(|k| {
            index.report(k, target).map(|m| OpinionSample {
                reporter: k,
                about: target,
                fraction_successful: m,
            })
        })
        .collect();
    if let Some(cap) = max_reporters {
        out.truncate(cap);
    }
    out
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Closeness from the opinion mean and the two subgroup means by inverse
/// distance. A missing subgroup mean sends all weight to the other side.
pub fn closeness_from_means(m_y: f64, m_h: Option<f64>, m_d: Option<f64>) -> Option<Closeness> {
    match (m_h, m_d) {
        (None, None) => None,
        (Some(_), None) => Some(Closeness::HONEST),
        (None, Some(_)) => Some(Closeness::DISHONEST),
        (Some(h), Some(d)) => {
            let (dh, dd) = ((m_y - h).abs(), (m_y - d).abs());
            Some(match (dh == 0.0, dd == 0.0) {
                (true, true) => Closeness::EVEN,
                (true, false) => Closeness::HONEST,
                (false, true) => Closeness::DISHONEST,
                (false, false) => {
                    let (ih, id) = (1.0 / dh, 1.0 / dd);
                    let to_honest = ih / (ih + id);
                    Closeness {
                        to_honest,
                        to_dishonest: 1.0 - to_honest,
                    }
                }
            })
        }
    }
}

/// `None` without opinions or without any subgroup member.
pub fn closeness(
    opinions: &[OpinionSample],
    pair: &SubgroupPair,
    partners: &BTreeMap<AgentId, OutcomeCounts>,
) -> Option<Closeness> {
    let m_y = mean(opinions.iter().map(|o| o.fraction_successful))?;
    let side = |members: &BTreeSet<AgentId>| {
        mean(
            members
                .iter()
                .filter_map(|m| partners.get(m).and_then(|c| c.success_fraction())),
        )
    };
    closeness_from_means(m_y, side(&pair.honest_members), side(&pair.dishonest_members))
}

/// The group's term: split by closeness when opinions exist, else the whole
/// group's counts.
#[allow(clippy::too_many_arguments)]
fn group_term(
    index: &WorldIndex,
    model: &StereoModel,
    target: AgentId,
    parent: u32,
    members: &BTreeSet<AgentId>,
    whole: OutcomeCounts,
    interested: impl Fn(AgentId) -> bool,
    config: &DichotomyConfig,
) -> GroupTerm {
    let pair = split_group(parent, model.partners(), members.iter().copied(), config.tie);
    let opinions = collect_opinions(index, model, target, &pair, interested, config.max_reporters);
    match closeness(&opinions, &pair, model.partners()) {
        Some(closeness) => GroupTerm::Split {
            honest: pair.honest,
            dishonest: pair.dishonest,
            closeness,
        },
        None => GroupTerm::Whole(whole),
    }
}

pub fn dstereotrust_sof(pairs: &[SubgroupPair], closenesses: &[Closeness], weights: &[f64]) -> BetaMixture {
    combine(
        &split_terms(pairs, closenesses, weights),
        crate::stereotype::Aggregation::Sof,
    )
}

pub fn dstereotrust_sop(pairs: &[SubgroupPair], closenesses: &[Closeness], weights: &[f64]) -> BetaMixture {
    combine(
        &split_terms(pairs, closenesses, weights),
        crate::stereotype::Aggregation::Sop,
    )
}

fn split_terms(pairs: &[SubgroupPair], closenesses: &[Closeness], weights: &[f64]) -> Vec<(f64, GroupTerm)> {
    pairs
        .iter()
        .zip(closenesses)
        .zip(weights)
        .map(|((p, &closeness), &w)| {
            (
                w,
                GroupTerm::Split {
                    honest: p.honest,
                    dishonest: p.dishonest,
                    closeness,
                },
            )
        })
        .collect()
}

/// d-StereoTrust: the basic model's matched groups and weights, each group
/// refined by its subgroups when opinions are available.
pub fn evaluate_dstereo(
    index: &WorldIndex,
    model: &StereoModel,
    target: AgentId,
    stereo: &StereoConfig,
    config: &DichotomyConfig,
) -> Option<BetaMixture> {
    let terms: Vec<(f64, GroupTerm)> = model
        .weighted(index.profile(target), stereo.selection)?
        .into_iter()
        .map(|(w, id)| {
            let (group, stereotype) = model.group(id).expect("matched group exists");
            let term = group_term(
                index,
                model,
                target,
                id,
                &group.members,
                stereotype.counts,
                |k| index.interested(k, id),
                config,
            );
            (w, term)
        })
        .collect();
    Some(combine(&terms, stereo.aggregation))
}

/// Dichotomy without stereotypes: the trustor's whole partner set as one
/// group of weight one, interest meaning any category of the trustor's
/// history.
pub fn evaluate_dichotomy_only(
    index: &WorldIndex,
    model: &StereoModel,
    target: AgentId,
    stereo: &StereoConfig,
    config: &DichotomyConfig,
) -> Option<BetaMixture> {
    let members: BTreeSet<AgentId> = model.partners().keys().copied().collect();
    let whole: OutcomeCounts = model.partners().values().copied().sum();
    if whole.total() == 0.0 {
        return None;
    }
    let categories: Vec<u32> = model.groups().map(|(g, _)| g.id).collect();
    let term = group_term(
        index,
        model,
        target,
        u32::MAX,
        &members,
        whole,
        |k| categories.iter().any(|&c| index.interested(k, c)),
        config,
    );
    Some(combine(&[(1.0, term)], stereo.aggregation))
}

/// Union of the d-StereoTrust reporter sets over the target's matched groups.
pub fn group_reporters(
    index: &WorldIndex,
    model: &StereoModel,
    target: AgentId,
    stereo: &StereoConfig,
    config: &DichotomyConfig,
) -> Vec<OpinionSample> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for id in model.matched(index.profile(target), stereo.selection) {
        let (group, _) = model.group(id).expect("matched group exists");
        let pair = split_group(id, model.partners(), group.members.iter().copied(), config.tie);
        for o in collect_opinions(
            index,
            model,
            target,
            &pair,
            |k| index.interested(k, id),
            config.max_reporters,
        ) {
            if seen.insert(o.reporter) {
                out.push(o);
            }
        }
    }
    out
}
