use serde::{Deserialize, Serialize};

use super::TrustGraph;
use crate::error::{Error, Result};
use crate::world::{AgentId, WorldIndex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenConfig {
    /// Weight of the pre-trust distribution in every step.
    pub damping: f64,
    /// Stop once successive vectors differ by less than this in L1.
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            damping: 0.5,
            epsilon: 1e-4,
            max_iterations: 10_000,
        }
    }
}

/// Row-normalised local trust `max(s - u, 0)`; `None` for rows without
/// positive trust.
fn normalised_rows(graph: &TrustGraph) -> Vec<Option<Vec<(usize, f64)>>> {
    (0..graph.n_nodes() as AgentId)
        .map(|i| {
            let row: Vec<(usize, f64)> = graph
                .edges(i)
                .iter()
                .map(|e| (e.to as usize, (e.counts.successes - e.counts.failures).max(0.0)))
                .filter(|&(_, v)| v > 0.0)
                .collect();
            let total: f64 = row.iter().map(|(_, v)| v).sum();
            (total > 0.0).then(|| row.into_iter().map(|(j, v)| (j, v / total)).collect())
        })
        .collect()
}

/// Global trust vector by power iteration of `t <- (1-a) C^T t + a p`,
/// starting from the pre-trust distribution `p`. Rows without positive
/// local trust hand their mass to `p`.
pub fn eigentrust(graph: &TrustGraph, pretrusted: &[AgentId], config: &EigenConfig) -> Result<Vec<f64>> {
    let n = graph.n_nodes();
    if n == 0 || pretrusted.is_empty() {
        return Err(Error::Domain("EigenTrust needs nodes and pre-trusted agents".into()));
    }
    if pretrusted.iter().any(|&a| a as usize >= n) {
        return Err(Error::Domain("pre-trusted agent outside the graph".into()));
    }
    let mut p = vec![0.0; n];
    for &a in pretrusted {
        p[a as usize] = 1.0;
    }
    let mass: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= mass);

    let rows = normalised_rows(graph);
    let a = config.damping;
    let mut t = p.clone();
    for _ in 0..config.max_iterations {
        let mut next = vec![0.0; n];
        let mut dangling = 0.0;
        for (i, row) in rows.iter().enumerate() {
            match row {
                Some(row) => {
                    for &(j, c) in row {
                        next[j] += c * t[i];
                    }
                }
                None => dangling += t[i],
            }
        }
        for j in 0..n {
            next[j] = (1.0 - a) * (next[j] + dangling * p[j]) + a * p[j];
        }
        let delta: f64 = next.iter().zip(&t).map(|(x, y)| (x - y).abs()).sum();
        t = next;
        if delta < config.epsilon {
            break;
        }
    }
    Ok(t)
}

/// Opinions of the target's raters weighted by their global trust.
pub fn eigentrust_predict(index: &WorldIndex, global: &[f64], trustor: AgentId, target: AgentId) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for &k in index.raters_of(target) {
        if k == trustor || k == target {
            continue;
        }
        if let Some(m) = index.report(k, target) {
            num += global[k as usize] * m;
            den += global[k as usize];
        }
    }
    (den > 0.0).then(|| num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trust::OutcomeCounts;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(s: f64, u: f64) -> OutcomeCounts {
        OutcomeCounts::new(s, u).unwrap()
    }

    // Independent oracle: dense matrix with dangling rows replaced by p,
    // fixed point solved by Gaussian elimination with partial pivoting.
    fn dense_fixed_point(n: usize, edges: &[(AgentId, AgentId, OutcomeCounts)], pre: &[AgentId], a: f64) -> Vec<f64> {
        let mut p = vec![0.0; n];
        for &x in pre {
            p[x as usize] = 1.0 / pre.len() as f64;
        }
        let mut m = vec![vec![0.0; n]; n];
        for &(i, j, k) in edges {
            m[i as usize][j as usize] += (k.successes - k.failures).max(0.0);
        }
        for row in m.iter_mut() {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            } else {
                row.clone_from(&p);
            }
        }
        // A = I - (1-a) M^T, b = a p.
        let mut aug = vec![vec![0.0; n + 1]; n];
        for r in 0..n {
            for col in 0..n {
                aug[r][col] = if r == col { 1.0 } else { 0.0 } - (1.0 - a) * m[col][r];
            }
            aug[r][n] = a * p[r];
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs()))
                .unwrap();
            aug.swap(col, piv);
            let pivot = aug[col].clone();
            for (r, row) in aug.iter_mut().enumerate() {
                if r != col {
                    let f = row[col] / pivot[col];
                    for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                        *x -= f * p;
                    }
                }
            }
        }
        (0..n).map(|r| aug[r][n] / aug[r][r]).collect()
    }

    // Independent oracle: dense power iteration with the same stopping rule.
    fn dense_power(
        n: usize,
        edges: &[(AgentId, AgentId, OutcomeCounts)],
        pre: &[AgentId],
        cfg: &EigenConfig,
    ) -> Vec<f64> {
        let mut p = vec![0.0; n];
        for &x in pre {
            p[x as usize] = 1.0 / pre.len() as f64;
        }
        let mut m = vec![vec![0.0; n]; n];
        for &(i, j, k) in edges {
            m[i as usize][j as usize] += (k.successes - k.failures).max(0.0);
        }
        for row in m.iter_mut() {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            } else {
                row.clone_from(&p);
            }
        }
        let mut t = p.clone();
        for _ in 0..cfg.max_iterations {
            let next: Vec<f64> = (0..n)
                .map(|j| (1.0 - cfg.damping) * (0..n).map(|i| m[i][j] * t[i]).sum::<f64>() + cfg.damping * p[j])
                .collect();
            let d: f64 = next.iter().zip(&t).map(|(x, y)| (x - y).abs()).sum();
            t = next;
            if d < cfg.epsilon {
                break;
            }
        }
        t
    }

    pub(crate) fn random_graph(rng: &mut ChaCha8Rng) -> (usize, Vec<(AgentId, AgentId, OutcomeCounts)>, Vec<AgentId>) {
        let n = rng.random_range(1..=10usize);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.random::<f64>() < 0.4 {
                    let s = rng.random_range(0..10) as f64;
                    let u = rng.random_range(0..10) as f64;
                    edges.push((i as AgentId, j as AgentId, c(s, u)));
                }
            }
        }
        let k = rng.random_range(1..=n.min(3));
        let pre: Vec<AgentId> = rand::seq::index::sample(rng, n, k)
            .into_iter()
            .map(|x| x as AgentId)
            .collect();
        (n, edges, pre)
    }

    #[test]
    fn symmetric_pair() {
        let g = TrustGraph::from_counts(2, &[(0, 1, c(5.0, 0.0)), (1, 0, c(5.0, 0.0))]);
        let t = eigentrust(&g, &[0, 1], &EigenConfig::default()).unwrap();
        assert!((t[0] - 0.5).abs() < 1e-12 && (t[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn line_graph_matches_dense_solution() {
        let edges = [(0, 1, c(3.0, 0.0)), (1, 2, c(4.0, 1.0))];
        let g = TrustGraph::from_counts(3, &edges);
        let cfg = EigenConfig {
            epsilon: 1e-13,
            ..EigenConfig::default()
        };
        let t = eigentrust(&g, &[0], &cfg).unwrap();
        let want = dense_fixed_point(3, &edges, &[0], 0.5);
        for (x, y) in t.iter().zip(&want) {
            assert!((x - y).abs() < 1e-6);
        }
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_graphs_match_dense_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let (n, edges, pre) = random_graph(&mut rng);
            let g = TrustGraph::from_counts(n, &edges);
            let cfg = EigenConfig::default();
            let t = eigentrust(&g, &pre, &cfg).unwrap();
            let power = dense_power(n, &edges, &pre, &cfg);
            for (x, y) in t.iter().zip(&power) {
                assert!((x - y).abs() < 1e-6);
            }
            assert!(t.iter().all(|&v| v >= 0.0));
            assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let tight = eigentrust(&g, &pre, &EigenConfig { epsilon: 1e-13, ..cfg }).unwrap();
            let exact = dense_fixed_point(n, &edges, &pre, cfg.damping);
            for (x, y) in tight.iter().zip(&exact) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn invalid_inputs() {
        let g = TrustGraph::from_counts(2, &[]);
        assert!(eigentrust(&g, &[], &EigenConfig::default()).is_err());
        assert!(eigentrust(&g, &[5], &EigenConfig::default()).is_err());
    }
}
