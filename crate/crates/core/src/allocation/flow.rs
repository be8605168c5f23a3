//! Small dense flow primitives behind the VM allocation solver.

/// Min-cost transportation: ship `supply[i]` from every source to
/// destinations with exact demands `demand[j]`, cost `cost[i][j]` per unit.
/// Returns the integral optimal shipment matrix, or `None` when supply and
/// demand totals differ.
pub(crate) fn transport(supply: &[u64], demand: &[u64], cost: &[Vec<f64>]) -> Option<Vec<Vec<u64>>> {
    let total: u64 = supply.iter().sum();
    if total != demand.iter().sum::<u64>() {
        return None;
    }
    let m = supply.len();
    let k = demand.len();
    let source = 0;
    let sink = m + k + 1;
    let mut net = Network::new(m + k + 2);
    for (i, &s) in supply.iter().enumerate() {
        net.add_arc(source, 1 + i, s as i64, 0.0);
    }
    let mut lanes = vec![vec![0usize; k]; m];
    for i in 0..m {
        for j in 0..k {
            lanes[i][j] = net.add_arc(1 + i, 1 + m + j, total as i64, cost[i][j]);
        }
    }
    for (j, &d) in demand.iter().enumerate() {
        net.add_arc(1 + m + j, sink, d as i64, 0.0);
    }
    let sent = net.min_cost_flow(source, sink, total as i64);
    if sent != total as i64 {
        return None;
    }
    Some(
        lanes
            .iter()
            .map(|row| row.iter().map(|&a| net.flow(a) as u64).collect())
            .collect(),
    )
}

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
    cost: f64,
}

/// Residual network with paired arcs (`a` and `a ^ 1`).
#[derive(Debug, Clone)]
struct Network {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    fn flow(&self, arc: usize) -> i64 {
        self.arcs[arc ^ 1].cap
    }

    /// Successive shortest paths with Bellman-Ford labels; pushes the
    /// bottleneck amount on every path.
    fn min_cost_flow(&mut self, s: usize, t: usize, want: i64) -> i64 {
        let nodes = self.adj.len();
        let mut sent = 0;
        while sent < want {
            let mut dist = vec![f64::INFINITY; nodes];
            let mut via = vec![usize::MAX; nodes];
            dist[s] = 0.0;
            for _ in 0..nodes {
                let mut changed = false;
                for u in 0..nodes {
                    if dist[u] == f64::INFINITY {
                        continue;
                    }
                    for &a in &self.adj[u] {
                        let arc = &self.arcs[a];
                        if arc.cap > 0 && dist[u] + arc.cost < dist[arc.to] - 1e-12 {
                            dist[arc.to] = dist[u] + arc.cost;
                            via[arc.to] = a;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if dist[t] == f64::INFINITY {
                break;
            }
            let mut push = want - sent;
            let mut v = t;
            while v != s {
                let a = via[v];
                push = push.min(self.arcs[a].cap);
                v = self.arcs[a ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let a = via[v];
                self.arcs[a].cap -= push;
                self.arcs[a ^ 1].cap += push;
                v = self.arcs[a ^ 1].to;
            }
            sent += push;
        }
        sent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transport_prefers_cheap_lanes() {
        let cost = vec![vec![0.0, 1.0], vec![5.0, 0.0]];
        // Destination 0 needs 3 but source 0 only has 1: two must come from source 1.
        let plan = transport(&[1, 4], &[3, 2], &cost).unwrap();
        assert_eq!(plan, vec![vec![1, 0], vec![2, 2]]);
    }

    #[test]
    fn transport_rejects_unbalanced_totals() {
        assert!(transport(&[1], &[2], &[vec![0.0]]).is_none());
    }

    #[test]
    fn transport_matches_enumeration() {
        let cost = vec![vec![0.0, 2.0, 3.0], vec![1.0, 0.0, 4.0], vec![2.0, 1.5, 0.0]];
        let supply = [4u64, 1, 2];
        let demand = [1u64, 5, 1];
        let plan = transport(&supply, &demand, &cost).unwrap();
        let value = |p: &Vec<Vec<u64>>| -> f64 {
            (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| p[i][j] as f64 * cost[i][j]).sum()
        };
        // exhaustive: rows of source 0 and 1, source 2 takes the rest
        let mut best = f64::INFINITY;
        for a0 in 0..=4u64 {
            for a1 in 0..=4 - a0 {
                for b0 in 0..=1u64 {
                    for b1 in 0..=1 - b0 {
                        let r0 = [a0, a1, 4 - a0 - a1];
                        let r1 = [b0, b1, 1 - b0 - b1];
                        let mut r2 = [0u64; 3];
                        let mut ok = true;
                        for j in 0..3 {
                            let used = r0[j] + r1[j];
                            if used > demand[j] {
                                ok = false;
                                break;
                            }
                            r2[j] = demand[j] - used;
                        }
                        if ok && r2.iter().sum::<u64>() == 2 {
                            let p = vec![r0.to_vec(), r1.to_vec(), r2.to_vec()];
                            best = best.min(value(&p));
                        }
                    }
                }
            }
        }
        assert!((value(&plan) - best).abs() < 1e-12);
        for (i, row) in plan.iter().enumerate() {
            assert_eq!(row.iter().sum::<u64>(), supply[i]);
        }
    }
}
