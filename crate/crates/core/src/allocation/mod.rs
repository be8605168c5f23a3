//! Coalition revenue, cost and value under the cost-minimizing VM
//! allocation.
//!
//! The energy part of a coalition's cost depends only on how many VMs each
//! member ends up hosting (the column loads `n_j`), because the bus price
//! depends on the destination's own power draw. The migration part is a
//! transportation problem once the loads are fixed. The solver uses that
//! split:
//!
//! * small instances enumerate every feasible load vector exactly and solve
//!   the transportation problem for each candidate;
//! * large instances run a local search that shifts load between pairs of
//!   members, re-solving the transportation problem for every candidate,
//!   halving the step from the largest power of two down to one VM, then
//!   repairing the host staircase with steps up to twice the largest
//!   VMs-per-host value.
//!
//! The result never costs more than serving every workload at home when
//! that is feasible.

mod flow;

use std::sync::Arc;

use dashmap::DashMap;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{power_draw, power_draw_unchecked, BusPricing, DataCenterSpec, PowerDraw};
use crate::partition::{coalition_of, Coalition};


/// Per-VM migration cost between providers, $ per VM moved for a slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigrationCostMatrix {
    cost: Vec<Vec<f64>>,
}

/// Parameters of the sampled migration-cost model: transfer price × link
/// rate × migration time, with the time drawn from a normal distribution
/// truncated from below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MigrationModel {
    /// $ per GB transferred.
    pub cost_per_gb: f64,
    /// Link rate, Mbit/s.
    pub rate_mbit: f64,
    pub time_mean_s: f64,
    pub time_sd_s: f64,
    /// Draws below this are rejected and redrawn.
    pub time_floor_s: f64,
}

impl Default for MigrationModel {
    fn default() -> Self {
        MigrationModel {
            cost_per_gb: 0.001,
            rate_mbit: 100.0,
            time_mean_s: 554.0,
            time_sd_s: 364.0,
            time_floor_s: 60.0,
        }
    }
}

impl MigrationModel {
    /// Cost of one VM migration lasting `seconds`.
    pub fn cost_for(&self, seconds: f64) -> f64 {
        let gb_per_s = self.rate_mbit / 8.0 / 1000.0;
        self.cost_per_gb * gb_per_s * seconds
    }
}

impl MigrationCostMatrix {
    pub fn new(cost: Vec<Vec<f64>>) -> Result<Self> {
        let n = cost.len();
        for (i, row) in cost.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation("migration", format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if row[i] != 0.0 {
                return Err(Error::validation("migration", format!("diagonal entry {i} must be 0")));
            }
            if let Some(c) = row.iter().find(|c| !(**c >= 0.0 && c.is_finite())) {
                return Err(Error::validation("migration", format!("row {i} has invalid cost {c}")));
            }
        }
        Ok(MigrationCostMatrix { cost })
    }

    pub fn zeros(n: usize) -> Self {
        MigrationCostMatrix {
            cost: vec![vec![0.0; n]; n],
        }
    }

    /// Same cost on every off-diagonal pair.
    pub fn uniform(n: usize, cost: f64) -> Self {
        let cost = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { cost }).collect())
            .collect();
        MigrationCostMatrix { cost }
    }

    /// Draws one migration time per ordered pair.
    pub fn sampled(n: usize, model: &MigrationModel, rng: &mut impl Rng) -> Result<Self> {
        let normal = Normal::new(model.time_mean_s, model.time_sd_s)
            .map_err(|e| Error::validation("migration.time_sd_s", e.to_string()))?;
        if model.time_floor_s >= model.time_mean_s + 6.0 * model.time_sd_s {
            return Err(Error::validation("migration.time_floor_s", "floor leaves no probability mass"));
        }
        let mut cost = vec![vec![0.0; n]; n];
        for (i, row) in cost.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                if i == j {
                    continue;
                }
                let seconds = loop {
                    let t = normal.sample(rng);
                    if t >= model.time_floor_s {
                        break t;
                    }
                };
                *c = model.cost_for(seconds);
            }
        }
        MigrationCostMatrix::new(cost)
    }

    pub fn n(&self) -> usize {
        self.cost.len()
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.cost[from][to]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.cost
    }
}

/// Everything a coalition's value depends on for one slot and price action.
/// Slices are indexed by provider id.
#[derive(Debug, Clone, Copy)]
pub struct CoalitionProblem<'a> {
    pub specs: &'a [DataCenterSpec],
    /// Price function each provider faces.
    pub pricing: &'a [BusPricing],
    /// VMs requested from each provider.
    pub workloads: &'a [u64],
    pub migration: &'a MigrationCostMatrix,
}

impl CoalitionProblem<'_> {
    /// Energy bill of provider `j` hosting `vms` VMs: `θ_j(e)·e`.
    pub fn energy_cost(&self, j: usize, vms: u64) -> f64 {
        let e = power_draw_unchecked(&self.specs[j], vms).power;
        self.pricing[j].price(e) * e
    }
}

/// Solver knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationConfig {
    /// Coalition workloads above this many VMs always use the descent search.
    pub pivot: u64,
    /// Largest number of candidate load vectors the exact search may visit.
    pub enumeration_budget: u64,
    /// Cap on accepted moves in the descent search.
    pub move_budget: usize,
}

impl Default for AllocationConfig {
    fn default() -> Self {
        AllocationConfig {
            pivot: 10_000,
            enumeration_budget: 200_000,
            move_budget: 1_000_000,
        }
    }
}

/// An integral VM assignment inside one coalition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// Coalition members, ascending provider ids.
    pub members: Vec<usize>,
    /// `omega[a][b]`: VMs of member `a` served by member `b` (positions in `members`).
    pub omega: Vec<Vec<u64>>,
    /// Power draw of each member at its final load.
    pub draws: Vec<PowerDraw>,
    /// Unit price each member pays at that draw.
    pub prices: Vec<f64>,
    /// Total cost `C(S)`, energy plus migration.
    pub objective: f64,
}

impl Allocation {
    /// VMs served by each member.
    pub fn loads(&self) -> Vec<u64> {
        let m = self.members.len();
        (0..m).map(|b| self.omega.iter().map(|row| row[b]).sum()).collect()
    }

    /// Whether the allocation serves every workload exactly within capacity.
    pub fn is_feasible(&self, problem: &CoalitionProblem<'_>) -> bool {
        let rows_ok = self
            .omega
            .iter()
            .zip(&self.members)
            .all(|(row, &i)| row.iter().sum::<u64>() == problem.workloads[i]);
        let cols_ok = self
            .loads()
            .iter()
            .zip(&self.members)
            .all(|(&n, &j)| n <= problem.specs[j].capacity());
        rows_ok && cols_ok
    }
}

/// Revenue, cost and value of one coalition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionEvaluation {
    pub revenue: f64,
    pub cost: f64,
    /// `revenue − cost`.
    pub value: f64,
    pub allocation: Allocation,
}

fn check_members(members: &[usize], n: usize) -> Result<()> {
    if members.is_empty() {
        return Err(Error::Domain("coalitions must be non-empty".into()));
    }
    if members.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(format!("members {members:?} must be strictly ascending")));
    }
    if let Some(&bad) = members.iter().find(|&&m| m >= n) {
        return Err(Error::Domain(format!("provider {bad} out of range")));
    }
    Ok(())
}

/// `R(S) = Σ_j W_j·r_j`.
pub fn coalition_revenue(problem: &CoalitionProblem<'_>, members: &[usize]) -> Result<f64> {
    check_members(members, problem.specs.len())?;
    Ok(members
        .iter()
        .map(|&j| problem.workloads[j] as f64 * problem.specs[j].revenue_rate)
        .sum())
}

/// `C(S) = Σ_j θ_j·e_j + Σ_{i≠j} ω_ij·C^M_ij` for a given assignment.
pub fn coalition_cost(problem: &CoalitionProblem<'_>, members: &[usize], omega: &[Vec<u64>]) -> Result<f64> {
    check_members(members, problem.specs.len())?;
    let m = members.len();
    if omega.len() != m || omega.iter().any(|row| row.len() != m) {
        return Err(Error::Domain(format!("omega must be {m}x{m}")));
    }
    let mut energy = 0.0;
    for (b, &j) in members.iter().enumerate() {
        let load: u64 = omega.iter().map(|row| row[b]).sum();
        let e = power_draw(&problem.specs[j], load)?.power;
        energy += problem.pricing[j].price(e) * e;
    }
    let mut migration = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for (b, &j) in members.iter().enumerate() {
            if a != b {
                migration += omega[a][b] as f64 * problem.migration.get(i, j);
            }
        }
    }
    Ok(energy + migration)
}

fn build_allocation(problem: &CoalitionProblem<'_>, members: &[usize], omega: Vec<Vec<u64>>) -> Result<Allocation> {
    let objective = coalition_cost(problem, members, &omega)?;
    let m = members.len();
    let mut draws = Vec::with_capacity(m);
    let mut prices = Vec::with_capacity(m);
    for (b, &j) in members.iter().enumerate() {
        let load: u64 = omega.iter().map(|row| row[b]).sum();
        let draw = power_draw(&problem.specs[j], load)?;
        prices.push(problem.pricing[j].price(draw.power));
        draws.push(draw);
    }
    Ok(Allocation {
        members: members.to_vec(),
        omega,
        draws,
        prices,
        objective,
    })
}

/// Number of load vectors `0 ≤ n_j ≤ caps_j` with `Σ n_j = total`,
/// saturating at `limit`.
fn count_load_vectors(caps: &[u64], total: u64, limit: u64) -> u64 {
    let total = total as usize;
    let mut ways = vec![0u64; total + 1];
    ways[0] = 1;
    for &cap in caps {
        let cap = cap as usize;
        let mut prefix = vec![0u64; total + 2];
        for s in 0..=total {
            prefix[s + 1] = prefix[s].saturating_add(ways[s]).min(limit);
        }
        for s in 0..=total {
            let lo = s.saturating_sub(cap);
            ways[s] = prefix[s + 1].saturating_sub(prefix[lo]).min(limit);
        }
    }
    ways[total]
}

struct ExactSearch<'a> {
    energy: Vec<Vec<f64>>,
    /// `floor[b]`: lowest possible energy of members `b..`.
    floor: Vec<f64>,
    workloads: Vec<u64>,
    migration: &'a [Vec<f64>],
    best: f64,
    best_omega: Option<Vec<Vec<u64>>>,
    loads: Vec<u64>,
}

impl ExactSearch<'_> {
    fn visit(&mut self, b: usize, left: u64, energy: f64) {
        let m = self.loads.len();
        if energy + self.floor[b] >= self.best {
            return;
        }
        if b == m - 1 {
            if left as usize >= self.energy[b].len() {
                return;
            }
            let energy = energy + self.energy[b][left as usize];
            if energy >= self.best {
                return;
            }
            self.loads[b] = left;
            let omega = flow::transport(&self.workloads, &self.loads, self.migration).expect("balanced loads");
            let migration: f64 = omega
                .iter()
                .enumerate()
                .flat_map(|(a, row)| row.iter().enumerate().map(move |(c, &w)| (a, c, w)))
                .map(|(a, c, w)| w as f64 * self.migration[a][c])
                .sum();
            if energy + migration < self.best {
                self.best = energy + migration;
                self.best_omega = Some(omega);
            }
            return;
        }
        let cap = (self.energy[b].len() as u64 - 1).min(left);
        for n in 0..=cap {
            self.loads[b] = n;
            self.visit(b + 1, left - n, energy + self.energy[b][n as usize]);
        }
    }
}

/// Cost-minimizing integral allocation of the coalition's workload.
pub fn solve_allocation(problem: &CoalitionProblem<'_>, members: &[usize], config: &AllocationConfig) -> Result<Allocation> {
    check_members(members, problem.specs.len())?;
    let m = members.len();
    let workloads: Vec<u64> = members.iter().map(|&i| problem.workloads[i]).collect();
    let total: u64 = workloads.iter().sum();
    let capacity: u64 = members.iter().map(|&j| problem.specs[j].capacity()).sum();
    if total > capacity {
        return Err(Error::Infeasible {
            members: members.to_vec(),
            demand: total,
            capacity,
        });
    }
    let caps: Vec<u64> = members
        .iter()
        .map(|&j| problem.specs[j].capacity().min(total))
        .collect();
    let migration: Vec<Vec<f64>> = members
        .iter()
        .map(|&i| members.iter().map(|&j| problem.migration.get(i, j)).collect())
        .collect();

    if m == 1 {
        return build_allocation(problem, members, vec![vec![total]]);
    }

    let exact = total <= config.pivot
        && count_load_vectors(&caps, total, config.enumeration_budget + 1) <= config.enumeration_budget;
    let omega = if exact {
        exact_search(problem, members, &caps, &workloads, &migration)
    } else {
        descent_search(problem, members, &caps, &workloads, &migration, config)
    };

    let mut best = build_allocation(problem, members, omega)?;
    let home_feasible = members
        .iter()
        .all(|&i| problem.workloads[i] <= problem.specs[i].capacity());
    if home_feasible {
        let mut home = vec![vec![0; m]; m];
        for (a, w) in workloads.iter().enumerate() {
            home[a][a] = *w;
        }
        let home = build_allocation(problem, members, home)?;
        if home.objective < best.objective {
            best = home;
        }
    }
    Ok(best)
}

fn exact_search(
    problem: &CoalitionProblem<'_>,
    members: &[usize],
    caps: &[u64],
    workloads: &[u64],
    migration: &[Vec<f64>],
) -> Vec<Vec<u64>> {
    let m = members.len();
    let energy: Vec<Vec<f64>> = members
        .iter()
        .zip(caps)
        .map(|(&j, &cap)| (0..=cap).map(|n| problem.energy_cost(j, n)).collect())
        .collect();
    let mut floor = vec![0.0; m + 1];
    for b in (0..m).rev() {
        let lowest = energy[b].iter().copied().fold(f64::INFINITY, f64::min);
        floor[b] = floor[b + 1] + lowest;
    }
    let total = workloads.iter().sum();
    let mut search = ExactSearch {
        energy,
        floor,
        workloads: workloads.to_vec(),
        migration,
        best: f64::INFINITY,
        best_omega: None,
        loads: vec![0; m],
    };
    search.visit(0, total, 0.0);
    search.best_omega.expect("capacity check guarantees a feasible load vector")
}

fn transport_cost(omega: &[Vec<u64>], migration: &[Vec<f64>]) -> f64 {
    omega
        .iter()
        .zip(migration)
        .map(|(row, cost)| row.iter().zip(cost).map(|(&w, &c)| w as f64 * c).sum::<f64>())
        .sum()
}

/// Local search over load vectors. A move shifts `d` VMs of load from one
/// member to another; every candidate is priced with its exact energy and an
/// exact min-cost transportation. Step sizes run from the largest power of two
/// below the workload down to 1, then a window of small steps repeats until
/// no move improves.
fn descent_search(
    problem: &CoalitionProblem<'_>,
    members: &[usize],
    caps: &[u64],
    workloads: &[u64],
    migration: &[Vec<f64>],
    config: &AllocationConfig,
) -> Vec<Vec<u64>> {
    let m = members.len();
    // Start from serving at home, spilling overflow to spare capacity in order.
    let mut loads: Vec<u64> = workloads.iter().zip(caps).map(|(&w, &c)| w.min(c)).collect();
    let mut overflow: u64 = workloads.iter().sum::<u64>() - loads.iter().sum::<u64>();
    for (b, load) in loads.iter_mut().enumerate() {
        let room = caps[b] - *load;
        let take = room.min(overflow);
        *load += take;
        overflow -= take;
    }
    let energy = |b: usize, n: u64| problem.energy_cost(members[b], n);
    let mut omega = flow::transport(workloads, &loads, migration).expect("balanced loads");
    let mut best = loads.iter().enumerate().map(|(b, &n)| energy(b, n)).sum::<f64>() + transport_cost(&omega, migration);
    let mut moves = 0usize;

    let try_step = |d: u64, loads: &mut Vec<u64>, omega: &mut Vec<Vec<u64>>, best: &mut f64| -> bool {
        let mut improved = false;
        for from in 0..m {
            for to in 0..m {
                if from == to || loads[from] < d || loads[to] + d > caps[to] {
                    continue;
                }
                let mut trial = loads.clone();
                trial[from] -= d;
                trial[to] += d;
                let Some(plan) = flow::transport(workloads, &trial, migration) else {
                    continue;
                };
                let cost = trial.iter().enumerate().map(|(b, &n)| energy(b, n)).sum::<f64>() + transport_cost(&plan, migration);
                if cost < *best - MOVE_GAIN {
                    *best = cost;
                    *loads = trial;
                    *omega = plan;
                    improved = true;
                }
            }
        }
        improved
    };

    let total: u64 = workloads.iter().sum();
    let mut step = if total == 0 { 1 } else { 1u64 << (63 - total.leading_zeros()) };
    loop {
        while moves < config.move_budget && try_step(step, &mut loads, &mut omega, &mut best) {
            moves += 1;
        }
        if step == 1 {
            break;
        }
        step /= 2;
    }
    let widest = members
        .iter()
        .map(|&j| problem.specs[j].vms_per_host)
        .max()
        .unwrap_or(1);
    loop {
        let mut improved = false;
        for d in 1..=2 * widest {
            while moves < config.move_budget && try_step(d, &mut loads, &mut omega, &mut best) {
                moves += 1;
                improved = true;
            }
        }
        if !improved || moves >= config.move_budget {
            break;
        }
    }
    omega
}

/// Smallest cost reduction accepted by the descent search, in $.
const MOVE_GAIN: f64 = 1e-9;

/// Optimal allocation plus the revenue/cost/value breakdown.
pub fn evaluate_coalition(
    problem: &CoalitionProblem<'_>,
    members: &[usize],
    config: &AllocationConfig,
) -> Result<CoalitionEvaluation> {
    let revenue = coalition_revenue(problem, members)?;
    let allocation = solve_allocation(problem, members, config)?;
    let cost = allocation.objective;
    Ok(CoalitionEvaluation {
        revenue,
        cost,
        value: revenue - cost,
        allocation,
    })
}

/// Cache key: member set, the members' billing references (bit patterns)
/// and the slot. Sufficient because a coalition's value depends only on its
/// own members.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValueKey {
    pub members: Coalition,
    pub billing: Vec<u64>,
    pub slot: usize,
}

impl ValueKey {
    pub fn new(problem: &CoalitionProblem<'_>, members: &[usize], slot: usize) -> Self {
        ValueKey {
            members: coalition_of(members),
            billing: members
                .iter()
                .map(|&j| problem.pricing[j].billing_ref.to_bits())
                .collect(),
            slot,
        }
    }
}

/// Memo of coalition evaluations, safe to share across threads.
#[derive(Debug, Default)]
pub struct ValueCache {
    entries: DashMap<ValueKey, Arc<CoalitionEvaluation>>,
}

impl ValueCache {
    pub fn new() -> Self {
        ValueCache::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Memoized [`evaluate_coalition`]. Concurrent misses on the same key may
    /// both compute; the first insert wins.
    pub fn evaluate(
        &self,
        problem: &CoalitionProblem<'_>,
        members: &[usize],
        slot: usize,
        config: &AllocationConfig,
    ) -> Result<Arc<CoalitionEvaluation>> {
        let key = ValueKey::new(problem, members, slot);
        if let Some(hit) = self.entries.get(&key) {
            return Ok(Arc::clone(&hit));
        }
        let fresh = Arc::new(evaluate_coalition(problem, members, config)?);
        Ok(Arc::clone(&self.entries.entry(key).or_insert(fresh)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reference_data_centers;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bus(beta: f64, billing_ref: f64, base_price: f64) -> BusPricing {
        BusPricing {
            beta,
            base_price,
            billing_ref,
            price_lo: 0.0,
            price_hi: 10.0,
        }
    }

    fn small_dc(id: usize, hosts: u64, a: u64, pue: f64) -> DataCenterSpec {
        DataCenterSpec {
            id,
            bus: id,
            hosts,
            vms_per_host: a,
            pue,
            p_idle: 0.1,
            p_peak: 0.3,
            revenue_rate: 0.1,
        }
    }

    /// Every integral ω: each source's workload split over all members.
    fn brute_force(problem: &CoalitionProblem<'_>, members: &[usize]) -> Option<f64> {
        fn splits(total: u64, parts: usize) -> Vec<Vec<u64>> {
            if parts == 1 {
                return vec![vec![total]];
            }
            (0..=total)
                .flat_map(|k| {
                    splits(total - k, parts - 1).into_iter().map(move |mut rest| {
                        rest.insert(0, k);
                        rest
                    })
                })
                .collect()
        }
        let m = members.len();
        let rows: Vec<Vec<Vec<u64>>> = members.iter().map(|&i| splits(problem.workloads[i], m)).collect();
        let mut best: Option<f64> = None;
        let mut pick = vec![0usize; m];
        loop {
            let omega: Vec<Vec<u64>> = (0..m).map(|a| rows[a][pick[a]].clone()).collect();
            let mut cost = 0.0;
            let mut ok = true;
            for (b, &j) in members.iter().enumerate() {
                let load: u64 = omega.iter().map(|r| r[b]).sum();
                if load > problem.specs[j].capacity() {
                    ok = false;
                    break;
                }
                let e = power_draw(&problem.specs[j], load).unwrap().power;
                cost += (problem.pricing[j].beta * (e - problem.pricing[j].billing_ref) + problem.pricing[j].base_price) * e;
            }
            if ok {
                for a in 0..m {
                    for b in 0..m {
                        if a != b {
                            cost += omega[a][b] as f64 * problem.migration.get(members[a], members[b]);
                        }
                    }
                }
                best = Some(best.map_or(cost, |c: f64| c.min(cost)));
            }
            let mut a = 0;
            loop {
                if a == m {
                    return best;
                }
                pick[a] += 1;
                if pick[a] < rows[a].len() {
                    break;
                }
                pick[a] = 0;
                a += 1;
            }
        }
    }

    #[test]
    fn revenue_examples() {
        let specs = vec![small_dc(0, 10, 1, 1.2), {
            let mut s = small_dc(1, 10, 1, 1.2);
            s.revenue_rate = 0.2;
            s
        }];
        let pricing = vec![bus(0.01, 0.0, 0.1); 2];
        let migration = MigrationCostMatrix::zeros(2);
        let workloads = [100, 50];
        let p = CoalitionProblem {
            specs: &specs,
            pricing: &pricing,
            workloads: &workloads,
            migration: &migration,
        };
        assert!((coalition_revenue(&p, &[0]).unwrap() - 10.0).abs() < 1e-12);
        assert!((coalition_revenue(&p, &[0, 1]).unwrap() - 20.0).abs() < 1e-12);
        assert!(matches!(coalition_revenue(&p, &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn cost_counts_migration_once_per_vm() {
        let specs = vec![small_dc(0, 20, 1, 1.2), small_dc(1, 20, 1, 1.2)];
        let pricing = vec![bus(0.01, 0.0, 0.1); 2];
        let migration = MigrationCostMatrix::uniform(2, 0.007);
        let workloads = [10, 0];
        let p = CoalitionProblem {
            specs: &specs,
            pricing: &pricing,
            workloads: &workloads,
            migration: &migration,
        };
        let moved = coalition_cost(&p, &[0, 1], &[vec![0, 10], vec![0, 0]]).unwrap();
        let energy_at_1 = p.energy_cost(1, 10);
        assert!((moved - energy_at_1 - 0.07).abs() < 1e-12);

        let home = coalition_cost(&p, &[0], &[vec![10]]).unwrap();
        assert!((home - p.energy_cost(0, 10)).abs() < 1e-15);
    }

    #[test]
    fn migration_model_mean_cost() {
        let c = MigrationModel::default().cost_for(554.0);
        assert!((c - 0.006925).abs() < 1e-12);
        assert!((c - 0.0069).abs() < 5e-5);
    }

    #[test]
    fn sampled_matrix_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = MigrationCostMatrix::sampled(6, &MigrationModel::default(), &mut rng).unwrap();
        let floor = MigrationModel::default().cost_for(60.0);
        for i in 0..6 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..6 {
                if i != j {
                    assert!(m.get(i, j) >= floor);
                }
            }
        }
    }

    #[test]
    fn migration_matrix_validation() {
        assert!(MigrationCostMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.5]]).is_err());
        assert!(MigrationCostMatrix::new(vec![vec![0.0, -1.0], vec![1.0, 0.0]]).is_err());
        assert!(MigrationCostMatrix::new(vec![vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn singleton_serves_at_home() {
        let specs = reference_data_centers(0.1);
        let pricing = vec![bus(1e-4, 0.0, 0.1); 6];
        let migration = MigrationCostMatrix::zeros(6);
        let workloads = [5000u64, 0, 0, 0, 0, 0];
        let p = CoalitionProblem {
            specs: &specs,
            pricing: &pricing,
            workloads: &workloads,
            migration: &migration,
        };
        let alloc = solve_allocation(&p, &[0], &AllocationConfig::default()).unwrap();
        assert_eq!(alloc.omega, vec![vec![5000]]);
        assert!((alloc.objective - p.energy_cost(0, 5000)).abs() < 1e-9);
    }

    #[test]
    fn cheap_destination_takes_everything() {
        let specs = vec![small_dc(0, 12, 1, 1.2), small_dc(1, 12, 1, 1.2)];
        let pricing = vec![bus(1e-3, 0.0, 0.5), bus(1e-3, 0.0, 0.05)];
        let migration = MigrationCostMatrix::zeros(2);
        let workloads = [5, 4];
        let p = CoalitionProblem {
            specs: &specs,
            pricing: &pricing,
            workloads: &workloads,
            migration: &migration,
        };
        let alloc = solve_allocation(&p, &[0, 1], &AllocationConfig::default()).unwrap();
        assert_eq!(alloc.loads(), vec![0, 9]);
        assert!((alloc.objective - brute_force(&p, &[0, 1]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn expensive_migration_keeps_load_home() {
        let specs = vec![small_dc(0, 12, 1, 1.2), small_dc(1, 12, 1, 1.2)];
        let pricing = vec![bus(1e-3, 0.0, 0.5), bus(1e-3, 0.0, 0.05)];
        let migration = MigrationCostMatrix::uniform(2, 100.0);
        let workloads = [5, 4];
        let p = CoalitionProblem {
            specs: &specs,
            pricing: &pricing,
            workloads: &workloads,
            migration: &migration,
        };
        let alloc = solve_allocation(&p, &[0, 1], &AllocationConfig::default()).unwrap();
        assert_eq!(alloc.omega, vec![vec![5, 0], vec![0, 4]]);
        assert!((alloc.objective - brute_force(&p, &[0, 1]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn infeasible_coalition_is_reported() {
        let specs = vec![small_dc(0, 2, 1, 1.2), small_dc(1, 2, 1, 1.2)];
        let pricing = vec![bus(1e-3, 0.0, 0.1); 2];
        let migration = MigrationCostMatrix::zeros(2);
        let workloads = [3, 2];
        let p = CoalitionProblem {
            specs: &specs,
            pricing: &pricing,
            workloads: &workloads,
            migration: &migration,
        };
        match solve_allocation(&p, &[0, 1], &AllocationConfig::default()) {
            Err(Error::Infeasible { members, demand, capacity }) => {
                assert_eq!((members, demand, capacity), (vec![0, 1], 5, 4));
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
        // Overflow at home is fine as long as the coalition can absorb it.
        let workloads = [3, 0];
        let p = CoalitionProblem { workloads: &workloads, ..p };
        let alloc = solve_allocation(&p, &[0, 1], &AllocationConfig::default()).unwrap();
        assert!(alloc.is_feasible(&p));
    }

    #[test]
    fn three_members_match_oracle() {
        let specs = vec![small_dc(0, 3, 3, 1.1), small_dc(1, 5, 2, 1.6), small_dc(2, 9, 1, 1.3)];
        let pricing = vec![bus(0.2, 1.0, 0.12), bus(0.05, 0.5, 0.2), bus(0.1, 2.0, 0.09)];
        let migration = MigrationCostMatrix::new(vec![
            vec![0.0, 0.01, 0.03],
            vec![0.02, 0.0, 0.005],
            vec![0.04, 0.01, 0.0],
        ])
        .unwrap();
        let workloads = [4, 3, 2];
        let p = CoalitionProblem {
            specs: &specs,
            pricing: &pricing,
            workloads: &workloads,
            migration: &migration,
        };
        let eval = evaluate_coalition(&p, &[0, 1, 2], &AllocationConfig::default()).unwrap();
        assert!((eval.cost - brute_force(&p, &[0, 1, 2]).unwrap()).abs() < 1e-12);
        assert_eq!(eval.value, eval.revenue - eval.cost);
        assert!(eval.allocation.is_feasible(&p));
    }

    #[test]
    fn descent_agrees_with_exact_search_on_midsize_instances() {
        let specs = vec![small_dc(0, 40, 2, 1.2), small_dc(1, 30, 3, 1.5), small_dc(2, 60, 1, 1.1)];
        let pricing = vec![bus(0.004, 10.0, 0.2), bus(0.002, 5.0, 0.1), bus(0.003, 0.0, 0.15)];
        let migration = MigrationCostMatrix::uniform(3, 0.002);
        let workloads = [50, 40, 30];
        let p = CoalitionProblem {
            specs: &specs,
            pricing: &pricing,
            workloads: &workloads,
            migration: &migration,
        };
        let exact = solve_allocation(&p, &[0, 1, 2], &AllocationConfig::default()).unwrap();
        let forced = AllocationConfig {
            pivot: 0,
            ..AllocationConfig::default()
        };
        let descent = solve_allocation(&p, &[0, 1, 2], &forced).unwrap();
        assert!(descent.is_feasible(&p));
        let gap = (descent.objective - exact.objective) / exact.objective.abs();
        assert!(gap >= -1e-12 && gap < 1e-3, "descent {} vs exact {}", descent.objective, exact.objective);
    }

    #[test]
    fn value_is_superadditive_for_exact_solves() {
        let specs = vec![small_dc(0, 4, 2, 1.1), small_dc(1, 6, 1, 1.7), small_dc(2, 5, 1, 1.3)];
        let pricing = vec![bus(0.3, 1.0, 0.3), bus(0.1, 0.0, 0.05), bus(0.2, 0.5, 0.1)];
        let migration = MigrationCostMatrix::uniform(3, 1e3);
        let workloads = [3, 2, 4];
        let p = CoalitionProblem {
            specs: &specs,
            pricing: &pricing,
            workloads: &workloads,
            migration: &migration,
        };
        let cfg = AllocationConfig::default();
        let v = |m: &[usize]| evaluate_coalition(&p, m, &cfg).unwrap().value;
        // With prohibitive migration the union can only match the parts.
        assert!((v(&[0, 1, 2]) - v(&[0, 1]) - v(&[2])).abs() < 1e-9);
        assert!(v(&[0, 1]) >= v(&[0]) + v(&[1]) - 1e-12);
    }

    #[test]
    fn characteristic_form() {
        let specs = vec![small_dc(0, 4, 2, 1.1), small_dc(1, 6, 1, 1.7), small_dc(2, 5, 1, 1.3)];
        let pricing = vec![bus(0.3, 1.0, 0.3), bus(0.1, 0.0, 0.05), bus(0.2, 0.5, 0.1)];
        let migration = MigrationCostMatrix::uniform(3, 0.01);
        let workloads = [3, 2, 4];
        let p = CoalitionProblem {
            specs: &specs,
            pricing: &pricing,
            workloads: &workloads,
            migration: &migration,
        };
        let with_outsider = evaluate_coalition(&p, &[0, 1], &AllocationConfig::default()).unwrap();
        let specs2 = specs[..2].to_vec();
        let migration2 = MigrationCostMatrix::uniform(2, 0.01);
        let p2 = CoalitionProblem {
            specs: &specs2,
            pricing: &pricing[..2],
            workloads: &workloads[..2],
            migration: &migration2,
        };
        let alone = evaluate_coalition(&p2, &[0, 1], &AllocationConfig::default()).unwrap();
        assert_eq!(with_outsider, alone);
    }

    #[test]
    fn cache_returns_same_evaluation() {
        let specs = vec![small_dc(0, 4, 2, 1.1), small_dc(1, 6, 1, 1.7)];
        let pricing = vec![bus(0.3, 1.0, 0.3), bus(0.1, 0.0, 0.05)];
        let migration = MigrationCostMatrix::uniform(2, 0.01);
        let workloads = [3, 2];
        let p = CoalitionProblem {
            specs: &specs,
            pricing: &pricing,
            workloads: &workloads,
            migration: &migration,
        };
        let cache = ValueCache::new();
        let cfg = AllocationConfig::default();
        let a = cache.evaluate(&p, &[0, 1], 0, &cfg).unwrap();
        let b = cache.evaluate(&p, &[0, 1], 0, &cfg).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        cache.evaluate(&p, &[0, 1], 1, &cfg).unwrap();
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn load_vector_count() {
        assert_eq!(count_load_vectors(&[5, 5], 5, 1000), 6);
        assert_eq!(count_load_vectors(&[2, 2], 5, 1000), 0);
        assert_eq!(count_load_vectors(&[3, 3, 3], 4, 1000), 12);
        assert_eq!(count_load_vectors(&[100, 100, 100], 100, 10), 10);
    }
}
