use std::collections::VecDeque;

use super::TrustGraph;
use crate::world::AgentId;

type Skip = Option<(AgentId, AgentId)>;

fn usable(skip: Skip, from: AgentId, to: AgentId) -> bool {
    skip != Some((from, to))
}

/// Fewest-hop path from `source` to `target`; among equally short paths the
/// one whose weakest edge is strongest, then the lexicographically smallest.
/// Returns the last agent's own trust in the target.
/// `skip` removes one edge from consideration.
pub fn shortest_path(graph: &TrustGraph, source: AgentId, target: AgentId, skip: Skip) -> Option<f64> {
    if source == target {
        return None;
    }
    let n = graph.n_nodes();
    let mut dist = vec![usize::MAX; n];
    let mut order = Vec::new();
    dist[source as usize] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        if v == target {
            continue;
        }
        for e in graph.edges(v) {
            if usable(skip, v, e.to) && dist[e.to as usize] == usize::MAX {
                dist[e.to as usize] = dist[v as usize] + 1;
                queue.push_back(e.to);
            }
        }
    }
    if dist[target as usize] == usize::MAX {
        return None;
    }
    // Best (weakest-edge, path) per node over shortest-path DAG edges, in
    // BFS order so predecessors are final before their successors.
    let mut best: Vec<Option<(f64, Vec<AgentId>)>> = vec![None; n];
    best[source as usize] = Some((f64::INFINITY, vec![source]));
    for &v in &order {
        if v == target {
            continue;
        }
        let Some((bottleneck, path)) = best[v as usize].clone() else {
            continue;
        };
        for e in graph.edges(v) {
            if !usable(skip, v, e.to) || dist[e.to as usize] != dist[v as usize] + 1 {
                continue;
            }
            let cand_min = bottleneck.min(e.trust);
            let better = match &best[e.to as usize] {
                None => true,
                Some((m, p)) => cand_min > *m || (cand_min == *m && path_lt(&path, e.to, p)),
            };
            if better {
                let mut p = path.clone();
                p.push(e.to);
                best[e.to as usize] = Some((cand_min, p));
            }
        }
    }
    let (_, path) = best[target as usize].as_ref()?;
    let last = path[path.len() - 2];
    graph.edge(last, target).map(|e| e.trust)
}

/// Whether `prefix ++ [next]` sorts before `other`.
fn path_lt(prefix: &[AgentId], next: AgentId, other: &[AgentId]) -> bool {
    prefix.iter().copied().chain([next]).lt(other.iter().copied())
}

/// Greedy walk: each asked agent that knows the target answers; otherwise
/// the walk moves to its most trusted not-yet-visited neighbour. At most
/// `max_asked` agents are asked.
pub fn most_reliable_path(
    graph: &TrustGraph,
    source: AgentId,
    target: AgentId,
    max_asked: usize,
    skip: Skip,
) -> Option<f64> {
    if source == target {
        return None;
    }
    let mut visited = vec![false; graph.n_nodes()];
    visited[source as usize] = true;
    let mut current = source;
    let mut asked = 0;
    loop {
        if current != source {
            asked += 1;
            if let Some(e) = graph.edge(current, target) {
                return Some(e.trust);
            }
            if asked >= max_asked {
                return None;
            }
        } else if let Some(e) = graph.edge(current, target).filter(|_| usable(skip, source, target)) {
            return Some(e.trust);
        }
        let next = graph
            .edges(current)
            .iter()
            .filter(|e| e.to != target && !visited[e.to as usize])
            .max_by(|a, b| a.trust.total_cmp(&b.trust).then(b.to.cmp(&a.to)))?;
        visited[next.to as usize] = true;
        current = next.to;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trust::{expected_trust, OutcomeCounts};

    fn c(s: f64, u: f64) -> OutcomeCounts {
        OutcomeCounts::new(s, u).unwrap()
    }

    #[test]
    fn direct_edge_is_shortest() {
        let g = TrustGraph::from_counts(2, &[(0, 1, c(3.0, 1.0))]);
        assert_eq!(shortest_path(&g, 0, 1, None), Some(expected_trust(c(3.0, 1.0))));
        assert_eq!(shortest_path(&g, 0, 1, Some((0, 1))), None);
        assert_eq!(shortest_path(&g, 1, 0, None), None);
    }

    #[test]
    fn ties_prefer_the_most_reliable_path() {
        // 0 -> 1 -> 3 with weakest edge 0.4 vs 0 -> 2 -> 3 with weakest 0.9.
        let strong = c(8.0, 0.0); // 0.9
        let weak = c(1.0, 2.0); // 0.4
        let g = TrustGraph::from_counts(4, &[(0, 1, strong), (1, 3, weak), (0, 2, strong), (2, 3, c(16.0, 1.0))]);
        assert_eq!(shortest_path(&g, 0, 3, None), Some(expected_trust(c(16.0, 1.0))));
        // Equal bottlenecks fall back to the smaller path.
        let g = TrustGraph::from_counts(4, &[(0, 1, weak), (1, 3, strong), (0, 2, weak), (2, 3, c(16.0, 1.0))]);
        assert_eq!(shortest_path(&g, 0, 3, None), Some(expected_trust(strong)));
    }

    #[test]
    fn disconnected_target() {
        let g = TrustGraph::from_counts(3, &[(0, 1, c(1.0, 0.0))]);
        assert_eq!(shortest_path(&g, 0, 2, None), None);
        assert_eq!(most_reliable_path(&g, 0, 2, 6, None), None);
    }

    #[test]
    fn mrp_follows_best_neighbour() {
        let g = TrustGraph::from_counts(
            4,
            &[
                (0, 1, c(9.0, 0.0)),
                (0, 2, c(1.0, 0.0)),
                (1, 3, c(2.0, 2.0)),
                (2, 3, c(5.0, 0.0)),
            ],
        );
        assert_eq!(most_reliable_path(&g, 0, 3, 6, None), Some(0.5));
        let g = TrustGraph::from_counts(2, &[(0, 1, c(4.0, 0.0))]);
        assert_eq!(most_reliable_path(&g, 0, 1, 6, None), Some(expected_trust(c(4.0, 0.0))));
        assert_eq!(most_reliable_path(&g, 0, 1, 6, Some((0, 1))), None);
    }

    #[test]
    fn mrp_gives_up_after_hop_limit_or_detour() {
        // Chain 0 -> 1 -> ... -> 8 -> 9(target), reachable only at the end.
        let edges: Vec<_> = (0..9).map(|i| (i, i + 1, c(1.0, 0.0))).collect();
        let g = TrustGraph::from_counts(10, &edges);
        assert_eq!(most_reliable_path(&g, 0, 9, 6, None), None);
        assert!(shortest_path(&g, 0, 9, None).is_some());
        // Greedy detour into a dead end although 2 knows the target.
        let g = TrustGraph::from_counts(4, &[(0, 1, c(9.0, 0.0)), (0, 2, c(1.0, 0.0)), (2, 3, c(1.0, 0.0))]);
        assert_eq!(most_reliable_path(&g, 0, 3, 6, None), None);
        assert!(shortest_path(&g, 0, 3, None).is_some());
    }
}
