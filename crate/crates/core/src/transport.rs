//! Small balanced transportation problems (stacks of interchangeable points
//! shipped to clusters with fixed demands), solved exactly by successive
//! shortest paths on the residual network.

const EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Plan {
    pub value: f64,
    /// `flow[s][i]`: units shipped from supply row `s` to demand column `i`.
    pub flow: Vec<Vec<u32>>,
}

struct Edge {
    to: usize,
    cap: u32,
    cost: f64,
}

struct Network {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Self { edges: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    fn add(&mut self, from: usize, to: usize, cap: u32, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.adj[from].push(id);
        self.edges.push(Edge { to: from, cap: 0, cost: -cost });
        self.adj[to].push(id + 1);
        id
    }

    /// Push up to `want` units from `s` to `t` along cheapest paths.
    fn min_cost_flow(&mut self, s: usize, t: usize, want: u32) -> (u32, f64) {
        let n = self.adj.len();
        let mut flow = 0;
        let mut cost = 0.0;
        while flow < want {
            // Bellman-Ford: residual costs may be negative
            let mut dist = vec![f64::INFINITY; n];
            let mut prev = vec![usize::MAX; n];
            dist[s] = 0.0;
            for _ in 0..n {
                let mut changed = false;
                for u in 0..n {
                    if dist[u].is_infinite() {
                        continue;
                    }
                    for &e in &self.adj[u] {
                        let edge = &self.edges[e];
                        if edge.cap > 0 && dist[u] + edge.cost < dist[edge.to] - EPS {
                            dist[edge.to] = dist[u] + edge.cost;
                            prev[edge.to] = e;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if dist[t].is_infinite() {
                break;
            }
            let mut push = want - flow;
            let mut v = t;
            while v != s {
                let e = prev[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                cost += f64::from(push) * self.edges[e].cost;
                v = self.edges[e ^ 1].to;
            }
            flow += push;
        }
        (flow, cost)
    }
}

fn build(
    supplies: &[u32],
    demands: &[u32],
    cost: impl Fn(usize, usize) -> Option<f64>,
) -> (Network, Vec<Vec<Option<usize>>>, usize, usize) {
    let rows = supplies.len();
    let cols = demands.len();
    let src = rows + cols;
    let sink = src + 1;
    let mut net = Network::new(rows + cols + 2);
    for (r, &s) in supplies.iter().enumerate() {
        net.add(src, r, s, 0.0);
    }
    let mut ids = vec![vec![None; cols]; rows];
    for r in 0..rows {
        for c in 0..cols {
            if let Some(w) = cost(r, c) {
                ids[r][c] = Some(net.add(r, rows + c, supplies[r].min(demands[c]), w));
            }
        }
    }
    for (c, &d) in demands.iter().enumerate() {
        net.add(rows + c, sink, d, 0.0);
    }
    (net, ids, src, sink)
}

fn extract(net: &Network, ids: &[Vec<Option<usize>>], supplies: &[u32], demands: &[u32]) -> Vec<Vec<u32>> {
    ids.iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, id)| id.map_or(0, |e| supplies[r].min(demands[c]) - net.edges[e].cap))
                .collect()
        })
        .collect()
}

/// Minimum total `Σ cost[s][i] · flow[s][i]` shipping every supply exactly.
/// Returns `None` when supply and demand totals differ.
pub fn min_cost(supplies: &[u32], demands: &[u32], cost: &[Vec<f64>]) -> Option<Plan> {
    let total: u32 = supplies.iter().sum();
    if total != demands.iter().sum::<u32>() {
        return None;
    }
    let (mut net, ids, src, sink) = build(supplies, demands, |r, c| Some(cost[r][c]));
    let (flow, value) = net.min_cost_flow(src, sink, total);
    (flow == total).then(|| Plan { value, flow: extract(&net, &ids, supplies, demands) })
}

/// Minimum over feasible plans of the largest used edge cost; among plans
/// achieving it, the one with least total cost.
pub fn bottleneck(supplies: &[u32], demands: &[u32], cost: &[Vec<f64>]) -> Option<Plan> {
    let total: u32 = supplies.iter().sum();
    if total != demands.iter().sum::<u32>() {
        return None;
    }
    if total == 0 {
        return Some(Plan { value: 0.0, flow: vec![vec![0; demands.len()]; supplies.len()] });
    }
    let mut levels: Vec<f64> = Vec::new();
    for (r, row) in cost.iter().enumerate() {
        if supplies[r] > 0 {
            levels.extend(row.iter().enumerate().filter(|(c, _)| demands[*c] > 0).map(|(_, &w)| w));
        }
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let attempt = |limit: f64| {
        let (mut net, ids, src, sink) = build(supplies, demands, |r, c| {
            (cost[r][c] <= limit).then_some(cost[r][c])
        });
        let (flow, _) = net.min_cost_flow(src, sink, total);
        (flow == total).then(|| Plan { value: limit, flow: extract(&net, &ids, supplies, demands) })
    };

    let (mut lo, mut hi) = (0, levels.len());
    let mut found = None;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match attempt(levels[mid]) {
            Some(plan) => {
                found = Some(plan);
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    // the last successful probe is at `hi == lo`
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(supplies: &[u32], demands: &[u32], cost: &[Vec<f64>], bottle: bool) -> Option<f64> {
        // enumerate every integer flow matrix
        fn rec(
            r: usize,
            left: &mut Vec<u32>,
            supplies: &[u32],
            cost: &[Vec<f64>],
            bottle: bool,
            acc: f64,
            best: &mut Option<f64>,
        ) {
            if r == supplies.len() {
                if left.iter().all(|&x| x == 0) {
                    *best = Some(best.map_or(acc, |b: f64| b.min(acc)));
                }
                return;
            }
            let cols = left.len();
            let mut split = vec![0u32; cols];
            fn fill(
                c: usize,
                remaining: u32,
                split: &mut Vec<u32>,
                r: usize,
                left: &mut Vec<u32>,
                supplies: &[u32],
                cost: &[Vec<f64>],
                bottle: bool,
                acc: f64,
                best: &mut Option<f64>,
            ) {
                let cols = split.len();
                if c + 1 == cols {
                    if remaining > left[c] {
                        return;
                    }
                    split[c] = remaining;
                    let mut a = acc;
                    for (i, &x) in split.iter().enumerate() {
                        if x > 0 {
                            a = if bottle { a.max(cost[r][i]) } else { a + f64::from(x) * cost[r][i] };
                        }
                    }
                    for i in 0..cols {
                        left[i] -= split[i];
                    }
                    rec(r + 1, left, supplies, cost, bottle, a, best);
                    for i in 0..cols {
                        left[i] += split[i];
                    }
                    return;
                }
                for x in 0..=remaining.min(left[c]) {
                    split[c] = x;
                    fill(c + 1, remaining - x, split, r, left, supplies, cost, bottle, acc, best);
                }
            }
            fill(0, supplies[r], &mut split, r, left, supplies, cost, bottle, acc, best);
        }
        let mut best = None;
        rec(0, &mut demands.to_vec(), supplies, cost, bottle, 0.0, &mut best);
        best
    }

    #[test]
    fn matches_enumeration() {
        let supplies = [3, 1, 2];
        let demands = [2, 2, 2];
        let cost = vec![vec![4.0, 1.0, 7.0], vec![2.0, 2.0, 0.5], vec![1.0, 9.0, 3.0]];
        let plan = min_cost(&supplies, &demands, &cost).unwrap();
        assert!((plan.value - brute(&supplies, &demands, &cost, false).unwrap()).abs() < 1e-9);
        let b = bottleneck(&supplies, &demands, &cost).unwrap();
        assert!((b.value - brute(&supplies, &demands, &cost, true).unwrap()).abs() < 1e-9);
        for plan in [plan, b] {
            for (r, row) in plan.flow.iter().enumerate() {
                assert_eq!(row.iter().sum::<u32>(), supplies[r]);
            }
            for c in 0..3 {
                assert_eq!(plan.flow.iter().map(|row| row[c]).sum::<u32>(), demands[c]);
            }
        }
    }

    #[test]
    fn negative_costs_are_fine() {
        let plan = min_cost(&[2, 2], &[1, 3], &[vec![-5.0, -1.0], vec![-4.0, 0.0]]).unwrap();
        assert!((plan.value - brute(&[2, 2], &[1, 3], &[vec![-5.0, -1.0], vec![-4.0, 0.0]], false).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn unbalanced_totals_are_rejected() {
        assert!(min_cost(&[2], &[1], &[vec![0.0]]).is_none());
        assert!(bottleneck(&[2], &[3], &[vec![0.0]]).is_none());
    }

    proptest::proptest! {
        #[test]
        fn random_problems_match_enumeration(
            supplies in proptest::collection::vec(0u32..3, 1..4),
            cols in 1usize..4,
            seed in proptest::collection::vec(0.0f64..10.0, 16),
            split_seed in 0usize..1000,
        ) {
            let total: u32 = supplies.iter().sum();
            let mut demands = vec![0u32; cols];
            for u in 0..total {
                demands[(u as usize * 7 + split_seed) % cols] += 1;
            }
            let cost: Vec<Vec<f64>> = (0..supplies.len())
                .map(|r| (0..cols).map(|c| seed[(r * 4 + c) % 16].round()).collect())
                .collect();
            let plan = min_cost(&supplies, &demands, &cost).unwrap();
            let want = brute(&supplies, &demands, &cost, false).unwrap();
            proptest::prop_assert!((plan.value - want).abs() < 1e-9);
            let b = bottleneck(&supplies, &demands, &cost).unwrap();
            let want = brute(&supplies, &demands, &cost, true).unwrap();
            proptest::prop_assert!((b.value - want).abs() < 1e-9);
        }
    }
}
