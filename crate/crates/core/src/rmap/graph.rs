use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("edge feasibility {min_phi} does not exceed the log offset {eps_w}")]
pub struct WeightError {
    pub min_phi: f64,
    pub eps_w: f64,
}

/// `-ln(min(phi_a, phi_b) - eps_w)`.
pub fn edge_weight(phi_a: f64, phi_b: f64, eps_w: f64) -> Result<f64, WeightError> {
    let m = phi_a.min(phi_b);
    if !(m > eps_w) {
        return Err(WeightError { min_phi: m, eps_w });
    }
    Ok(-(m - eps_w).ln())
}

/// Undirected edge as seen by the shortest-path routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub regrasp: bool,
}

/// Shortest distance from every node to the nearest goal node.
#[derive(Debug, Clone, PartialEq)]
pub struct DistTable {
    pub dist: Vec<f64>,
    /// Regrasp edges on the chosen path, the tie-breaker after distance.
    pub regrasps: Vec<u32>,
    /// Next node toward the goal (`None` at goals and unreachable nodes).
    pub next: Vec<Option<usize>>,
}

impl DistTable {
    pub fn reachable(&self, n: usize) -> bool {
        self.dist[n].is_finite()
    }

    /// Node sequence from `n` to its goal, or `None` if unreachable.
    pub fn path_from(&self, n: usize) -> Option<Vec<usize>> {
        if !self.reachable(n) {
            return None;
        }
        let mut path = vec![n];
        let mut cur = n;
        while let Some(m) = self.next[cur] {
            path.push(m);
            cur = m;
        }
        Some(path)
    }
}

#[derive(PartialEq)]
struct Entry(f64, u32, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        // Min-heap on (distance, regrasps, node).
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1)).then(o.2.cmp(&self.2))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Adjacency lists `(neighbor, edge index)` in edge order.
pub fn adjacency(n: usize, edges: &[GraphEdge]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        adj[e.a].push((e.b, i));
        adj[e.b].push((e.a, i));
    }
    adj
}

/// Distances closer than this are treated as equal when comparing labels;
/// edges between fully feasible states weigh about `1e-9`, so float noise
/// would otherwise decide between paths with different regrasp counts.
pub const DIST_TIE: f64 = 1e-6;

/// Orders (distance, regrasps) labels, distances within [`DIST_TIE`] tying.
pub fn cmp_label(a: (f64, u32), b: (f64, u32)) -> Ordering {
    if (a.0 - b.0).abs() <= DIST_TIE || (a.0.is_infinite() && b.0.is_infinite()) {
        a.1.cmp(&b.1)
    } else {
        a.0.total_cmp(&b.0)
    }
}

/// Multi-source Dijkstra from `goals`. Labels compare by (distance, regrasp
/// count); remaining ties pick the lower-numbered next node.
pub fn shortest_to_goals(n: usize, edges: &[GraphEdge], goals: &[usize]) -> DistTable {
    let adj = adjacency(n, edges);
    let mut dist = vec![f64::INFINITY; n];
    let mut regrasps = vec![u32::MAX; n];
    let mut next: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &g in goals {
        if dist[g] > 0.0 {
            dist[g] = 0.0;
            regrasps[g] = 0;
            heap.push(Entry(0.0, 0, g));
        }
    }
    while let Some(Entry(d, r, m)) = heap.pop() {
        if done[m] || d != dist[m] || r != regrasps[m] {
            continue;
        }
        done[m] = true;
        for &(nb, ei) in &adj[m] {
            let e = &edges[ei];
            let nd = d + e.weight;
            let nr = r + e.regrasp as u32;
            let better = match cmp_label((nd, nr), (dist[nb], regrasps[nb])) {
                Ordering::Less => true,
                Ordering::Equal => {
                    if !done[nb] && dist[nb] > 0.0 && next[nb].is_none_or(|h| m < h) {
                        next[nb] = Some(m);
                    }
                    false
                }
                Ordering::Greater => false,
            };
            if better && !done[nb] {
                dist[nb] = nd;
                regrasps[nb] = nr;
                next[nb] = Some(m);
                heap.push(Entry(nd, nr, nb));
            }
        }
    }
    DistTable { dist, regrasps, next }
}

/// Fewest regrasp edges from any of `starts` to any of `goals` (transport
/// edges are free), by 0-1 breadth-first search.
pub fn min_regrasps(n: usize, edges: &[GraphEdge], starts: &[usize], goals: &[usize]) -> Option<usize> {
    let adj = adjacency(n, edges);
    let mut best = vec![usize::MAX; n];
    let mut dq = VecDeque::new();
    for &s in starts {
        best[s] = 0;
        dq.push_front(s);
    }
    let mut is_goal = vec![false; n];
    for &g in goals {
        is_goal[g] = true;
    }
    let mut done = vec![false; n];
    while let Some(m) = dq.pop_front() {
        if done[m] {
            continue;
        }
        done[m] = true;
        if is_goal[m] {
            return Some(best[m]);
        }
        for &(nb, ei) in &adj[m] {
            let c = best[m] + edges[ei].regrasp as usize;
            if c < best[nb] {
                best[nb] = c;
                if edges[ei].regrasp {
                    dq.push_back(nb);
                } else {
                    dq.push_front(nb);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(a: usize, b: usize, weight: f64) -> GraphEdge {
        GraphEdge { a, b, weight, regrasp: false }
    }

    #[test]
    fn closed_form_weights() {
        assert!((edge_weight(1.0, 1.0, 1e-9).unwrap() - 1e-9).abs() < 1e-15);
        assert!((edge_weight(0.5, 1.0, 1e-9).unwrap() - 0.693147).abs() < 1e-6);
        assert!(edge_weight(1e-9, 1.0, 1e-9).is_err());
        let ws: Vec<f64> = (1..=20).map(|i| edge_weight(i as f64 / 20.0, 1.0, 1e-9).unwrap()).collect();
        assert!(ws.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn chain_distances_and_paths() {
        let edges = [e(0, 1, 1.0), e(1, 2, 2.0)];
        let t = shortest_to_goals(4, &edges, &[2]);
        assert_eq!(t.dist[..3], [3.0, 2.0, 0.0]);
        assert!(t.dist[3].is_infinite());
        assert_eq!(t.path_from(0), Some(vec![0, 1, 2]));
        assert_eq!(t.path_from(2), Some(vec![2]));
        assert_eq!(t.path_from(3), None);
    }

    #[test]
    fn ties_prefer_fewer_regrasps_then_lower_ids() {
        let mut edges = vec![e(0, 1, 1.0), e(1, 3, 1.0), e(0, 2, 1.0), e(2, 3, 1.0)];
        let t = shortest_to_goals(4, &edges, &[3]);
        assert_eq!(t.next[0], Some(1));
        edges[1].regrasp = true;
        let t = shortest_to_goals(4, &edges, &[3]);
        assert_eq!(t.next[0], Some(2));
        assert_eq!(t.regrasps[0], 0);
    }

    #[test]
    fn zero_one_bfs_counts_regrasps() {
        let mut edges = vec![e(0, 1, 5.0), e(1, 2, 5.0), e(0, 3, 0.1), e(3, 2, 0.1)];
        edges[2].regrasp = true;
        edges[3].regrasp = true;
        assert_eq!(min_regrasps(4, &edges, &[0], &[2]), Some(0));
        assert_eq!(min_regrasps(4, &edges, &[0], &[0]), Some(0));
        assert_eq!(min_regrasps(5, &edges, &[4], &[2]), None);
    }

    /// Oracle: cheapest simple path to any goal by exhaustive enumeration,
    /// summing weights from the goal end.
    fn enumerate(n: usize, edges: &[GraphEdge], goals: &[usize], from: usize) -> f64 {
        fn walk(cur: usize, n: usize, edges: &[GraphEdge], goals: &[usize], seen: &mut Vec<bool>, acc: &mut Vec<f64>, best: &mut f64) {
            if goals.contains(&cur) {
                let total = acc.iter().rev().fold(0.0, |s, w| s + w);
                if total < *best {
                    *best = total;
                }
            }
            for e in edges {
                let other = if e.a == cur { e.b } else if e.b == cur { e.a } else { continue };
                if seen[other] {
                    continue;
                }
                seen[other] = true;
                acc.push(e.weight);
                walk(other, n, edges, goals, seen, acc, best);
                acc.pop();
                seen[other] = false;
            }
        }
        let mut seen = vec![false; n];
        seen[from] = true;
        let mut best = f64::INFINITY;
        walk(from, n, edges, goals, &mut seen, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..=8);
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.4) {
                        edges.push(e(a, b, rng.gen_range(0.01..3.0)));
                    }
                }
            }
            let goals: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.25)).collect();
            let t = shortest_to_goals(n, &edges, &goals);
            for v in 0..n {
                assert_eq!(t.dist[v], enumerate(n, &edges, &goals, v), "node {v} of {edges:?}");
            }
        }
    }
}
