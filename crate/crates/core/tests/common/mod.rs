//! Independent reference computations shared by the integration tests and
//! the acceptance harness.

#![allow(dead_code)]

use gridcoal::allocation::CoalitionProblem;
use gridcoal::model::DataCenterSpec;
use gridcoal::partition::{Partition, StateSpace};
use rand::Rng;

/// Bell numbers from the Bell triangle.
pub fn bell_triangle(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 1..n {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            next.push(next.last().unwrap() + x);
        }
        row = next;
    }
    *row.last().unwrap()
}

/// Whether `blocks` covers `0..n` exactly once with non-empty blocks.
pub fn is_set_partition(n: usize, blocks: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; n];
    for b in blocks {
        if b.is_empty() {
            return false;
        }
        for &i in b {
            if i >= n || seen[i] {
                return false;
            }
            seen[i] = true;
        }
    }
    seen.iter().all(|&s| s)
}

/// Canonical form: blocks sorted internally and by smallest member.
pub fn canonical(blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = blocks
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.sort_unstable();
            b
        })
        .collect();
    out.sort();
    out
}

/// Shapley values by averaging marginal contributions over all join orders.
pub fn shapley_by_permutations(players: usize, value: &dyn Fn(u32) -> f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..players).collect();
    let mut total = vec![0.0; players];
    let mut count = 0u64;
    loop {
        let mut mask = 0u32;
        for &i in &order {
            let before = value(mask);
            mask |= 1 << i;
            total[i] += value(mask) - before;
        }
        count += 1;
        if !next_permutation(&mut order) {
            break;
        }
    }
    total.iter().map(|t| t / count as f64).collect()
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Facility power of a data center hosting `vms` VMs on the fewest hosts.
pub fn facility_power(spec: &DataCenterSpec, vms: u64) -> f64 {
    if vms == 0 {
        return 0.0;
    }
    let a = spec.vms_per_host;
    let hosts = (vms + a - 1) / a;
    let u = vms as f64 / (hosts * a) as f64;
    hosts as f64 * (spec.p_idle + (spec.p_peak - spec.p_idle) * u) * spec.pue
}

/// Cheapest cost over every integral assignment `ω`, or `None` when no
/// assignment fits the capacities.
pub fn brute_force_allocation(problem: &CoalitionProblem<'_>, members: &[usize]) -> Option<f64> {
    let m = members.len();
    // All ways to split each member's workload over the m servers.
    let splits: Vec<Vec<Vec<u64>>> = members
        .iter()
        .map(|&i| compositions(problem.workloads[i], m))
        .collect();
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; m];
    loop {
        let mut loads = vec![0u64; m];
        let mut migration = 0.0;
        for a in 0..m {
            let row = &splits[a][pick[a]];
            for b in 0..m {
                loads[b] += row[b];
                if a != b {
                    migration += row[b] as f64 * problem.migration.get(members[a], members[b]);
                }
            }
        }
        let fits = members
            .iter()
            .zip(&loads)
            .all(|(&j, &n)| n <= problem.specs[j].hosts * problem.specs[j].vms_per_host);
        if fits {
            let energy: f64 = members
                .iter()
                .zip(&loads)
                .map(|(&j, &n)| {
                    let e = facility_power(&problem.specs[j], n);
                    let bus = &problem.pricing[j];
                    (bus.beta * (e - bus.billing_ref) + bus.base_price) * e
                })
                .sum();
            let cost = energy + migration;
            best = Some(best.map_or(cost, |b: f64| b.min(cost)));
        }
        let mut a = 0;
        loop {
            if a == m {
                return best;
            }
            pick[a] += 1;
            if pick[a] < splits[a].len() {
                break;
            }
            pick[a] = 0;
            a += 1;
        }
    }
}

/// Every vector of `parts` non-negative integers summing to `total`.
fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// A small LP with box bounds `0 ≤ x ≤ upper`.
#[derive(Debug, Clone)]
pub struct BoxLp {
    pub cost: Vec<f64>,
    pub upper: f64,
    /// `(row, rhs, sense)` with sense `-1` for ≤, `0` for =, `1` for ≥.
    pub rows: Vec<(Vec<f64>, f64, i8)>,
}

impl BoxLp {
    pub fn random(rng: &mut impl Rng, vars: usize, rows: usize) -> Self {
        let cost = (0..vars).map(|_| rng.random_range(-5..=5) as f64).collect();
        let rows = (0..rows)
            .map(|_| {
                let row: Vec<f64> = (0..vars).map(|_| rng.random_range(-4..=4) as f64).collect();
                let rhs = rng.random_range(-3..=8) as f64;
                let sense = match rng.random_range(0..6) {
                    0 => 0,
                    1 | 2 => 1,
                    _ => -1,
                };
                (row, rhs, sense)
            })
            .collect();
        BoxLp { cost, upper: 5.0, rows }
    }

    pub fn to_program(&self) -> gridcoal::lp::LinearProgram {
        let mut lp = gridcoal::lp::LinearProgram::new(self.cost.clone());
        for (row, rhs, sense) in &self.rows {
            match sense {
                -1 => lp.add_le(row.clone(), *rhs),
                0 => lp.add_eq(row.clone(), *rhs),
                _ => lp.add_ge(row.clone(), *rhs),
            }
        }
        for i in 0..self.cost.len() {
            lp.set_bounds(i, 0.0, self.upper);
        }
        lp
    }

    fn feasible(&self, x: &[f64]) -> bool {
        const TOL: f64 = 1e-9;
        if x.iter().any(|&v| v < -TOL || v > self.upper + TOL) {
            return false;
        }
        self.rows.iter().all(|(row, rhs, sense)| {
            let lhs: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            match sense {
                -1 => lhs <= rhs + TOL,
                0 => (lhs - rhs).abs() <= TOL,
                _ => lhs >= rhs - TOL,
            }
        })
    }

    /// Best objective over all basic feasible points, or `None` if no
    /// vertex is feasible.
    pub fn vertex_optimum(&self) -> Option<f64> {
        let n = self.cost.len();
        // Candidate hyperplanes: every row, then x_i = 0 and x_i = upper.
        let mut planes: Vec<(Vec<f64>, f64)> = self.rows.iter().map(|(r, b, _)| (r.clone(), *b)).collect();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            planes.push((e.clone(), 0.0));
            planes.push((e, self.upper));
        }
        let mut best: Option<f64> = None;
        for_each_subset(planes.len(), n, &mut |pick| {
            let a: Vec<Vec<f64>> = pick.iter().map(|&p| planes[p].0.clone()).collect();
            let b: Vec<f64> = pick.iter().map(|&p| planes[p].1).collect();
            if let Some(x) = gauss_solve(a, b) {
                if self.feasible(&x) {
                    let z: f64 = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                    best = Some(best.map_or(z, |v: f64| v.max(z)));
                }
            }
        });
        best
    }
}

fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Partitions with no profitable merge of two coalitions and no profitable
/// split of one coalition into two: every actor weakly better off and one
/// strictly. Checked block by block from the partition itself.
pub fn stable_partitions(space: &StateSpace, payoffs: &[Vec<f64>]) -> Vec<usize> {
    let n = space.n();
    let improves = |from: usize, to: &[Vec<usize>], actors: &[usize]| {
        let to = space.id_of(&Partition::from_blocks(n, to).unwrap()).unwrap();
        let weak = actors.iter().all(|&i| payoffs[to][i] >= payoffs[from][i]);
        let strict = actors.iter().any(|&i| payoffs[to][i] > payoffs[from][i]);
        weak && strict
    };
    (0..space.len())
        .filter(|&k| {
            let blocks = space.partition(k).blocks().to_vec();
            for a in 0..blocks.len() {
                for b in a + 1..blocks.len() {
                    let mut next = blocks.clone();
                    let merged: Vec<usize> = blocks[a].iter().chain(&blocks[b]).copied().collect();
                    next[a] = merged.clone();
                    next.remove(b);
                    if improves(k, &next, &merged) {
                        return false;
                    }
                }
            }
            for (b, block) in blocks.iter().enumerate() {
                let s = block.len();
                for mask in 1..(1u32 << s) - 1 {
                    let left: Vec<usize> = (0..s).filter(|t| mask & (1 << t) != 0).map(|t| block[t]).collect();
                    let right: Vec<usize> = (0..s).filter(|t| mask & (1 << t) == 0).map(|t| block[t]).collect();
                    let mut next = blocks.clone();
                    next[b] = left;
                    next.push(right);
                    if improves(k, &next, block) {
                        return false;
                    }
                }
            }
            true
        })
        .collect()
}

/// Owned inputs of a random coalition instance with integer data.
pub struct AllocationInstance {
    pub specs: Vec<DataCenterSpec>,
    pub pricing: Vec<gridcoal::model::BusPricing>,
    pub workloads: Vec<u64>,
    pub migration: gridcoal::allocation::MigrationCostMatrix,
    pub members: Vec<usize>,
}

impl AllocationInstance {
    /// Three providers, a coalition of one to three of them and at most
    /// twelve VMs in total.
    pub fn random(rng: &mut impl Rng) -> Self {
        let n = 3;
        let specs: Vec<DataCenterSpec> = (0..n)
            .map(|id| {
                let p_idle = rng.random_range(1..=3) as f64;
                DataCenterSpec {
                    id,
                    bus: id,
                    hosts: rng.random_range(2..=6),
                    vms_per_host: rng.random_range(1..=3),
                    pue: rng.random_range(1..=2) as f64,
                    p_idle,
                    p_peak: p_idle + rng.random_range(1..=4) as f64,
                    revenue_rate: 1.0,
                }
            })
            .collect();
        let pricing = (0..n)
            .map(|_| gridcoal::model::BusPricing {
                beta: rng.random_range(1..=3) as f64,
                base_price: rng.random_range(1..=5) as f64,
                billing_ref: rng.random_range(0..=10) as f64,
                price_lo: -1e9,
                price_hi: 1e9,
            })
            .collect();
        let cost = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.random_range(0..=6) as f64 }).collect())
            .collect();
        let migration = gridcoal::allocation::MigrationCostMatrix::new(cost).unwrap();
        let mut members: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.6)).collect();
        if members.is_empty() {
            members.push(rng.random_range(0..n));
        }
        let capacity: u64 = members.iter().map(|&j| specs[j].hosts * specs[j].vms_per_host).sum();
        let budget = capacity.min(12);
        let mut workloads = vec![0u64; n];
        let mut left = rng.random_range(1..=budget);
        for (k, &i) in members.iter().enumerate() {
            let w = if k + 1 == members.len() { left } else { rng.random_range(0..=left) };
            workloads[i] = w;
            left -= w;
        }
        AllocationInstance {
            specs,
            pricing,
            workloads,
            migration,
            members,
        }
    }

    pub fn problem(&self) -> CoalitionProblem<'_> {
        CoalitionProblem {
            specs: &self.specs,
            pricing: &self.pricing,
            workloads: &self.workloads,
            migration: &self.migration,
        }
    }
}
