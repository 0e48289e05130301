//! Reference trust models: feedback aggregation, EigenTrust and transitive
//! trust over the graph of pairwise experiences.

mod eigentrust;
mod transitive;

pub use eigentrust::{eigentrust, eigentrust_predict, EigenConfig};
pub use transitive::{most_reliable_path, shortest_path};

use crate::dichotomy::OpinionSample;
use crate::trust::{expected_trust, OutcomeCounts};
use crate::world::{AgentId, WorldIndex};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub to: AgentId,
    pub counts: OutcomeCounts,
    /// Expected trust from the tail's own log.
    pub trust: f64,
}

/// Directed graph with an edge `i -> j` whenever `i` rated `j` at least once.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustGraph {
    out: Vec<Vec<Edge>>,
}

impl TrustGraph {
    pub fn from_index(index: &WorldIndex) -> TrustGraph {
        let out = (0..index.n_agents() as AgentId)
            .map(|i| {
                index
                    .partners(i)
                    .map(|(j, counts)| Edge {
                        to: j,
                        counts,
                        trust: expected_trust(counts),
                    })
                    .collect()
            })
            .collect();
        TrustGraph { out }
    }

    /// Graph from `(from, to, counts)` triples.
    pub fn from_counts(n: usize, edges: &[(AgentId, AgentId, OutcomeCounts)]) -> TrustGraph {
        let mut out = vec![Vec::new(); n];
        for &(i, j, counts) in edges {
            out[i as usize].push(Edge {
                to: j,
                counts,
                trust: expected_trust(counts),
            });
        }
        for row in &mut out {
            row.sort_by_key(|e| e.to);
        }
        TrustGraph { out }
    }

    pub fn n_nodes(&self) -> usize {
        self.out.len()
    }

    pub fn edges(&self, from: AgentId) -> &[Edge] {
        &self.out[from as usize]
    }

    pub fn edge(&self, from: AgentId, to: AgentId) -> Option<&Edge> {
        let row = &self.out[from as usize];
        row.binary_search_by_key(&to, |e| e.to).ok().map(|i| &row[i])
    }
}

pub fn mean_report(samples: &[OpinionSample]) -> Option<f64> {
    (!samples.is_empty()).then(|| samples.iter().map(|o| o.fraction_successful).sum::<f64>() / samples.len() as f64)
}

/// Every agent that transacted with the target, except the trustor.
pub fn feedback_reports(index: &WorldIndex, trustor: AgentId, target: AgentId) -> Vec<OpinionSample> {
    index
        .raters_of(target)
        .iter()
        .copied()
        .filter(|&k| k != trustor && k != target)
        .filter_map(|k| {
            index.report(k, target).map(|m| OpinionSample {
                reporter: k,
                about: target,
                fraction_successful: m,
            })
        })
        .collect()
}

/// Unfiltered mean of all reports about the target.
pub fn feedback_aggregation(index: &WorldIndex, trustor: AgentId, target: AgentId) -> Option<f64> {
    mean_report(&feedback_reports(index, trustor, target))
}
