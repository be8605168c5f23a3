//! The smart grid's side: utility, the occupancy-measure linear program
//! over coalition states and price actions, policy extraction and long-run
//! averages, and the two baseline schemes.

use serde::{Deserialize, Serialize};

use crate::dynamics::{stationary_distribution, StationaryDistribution, TransitionMatrix};
use crate::error::{Error, Result};
use crate::game::{SlotGame, SlotInputs, StateOutcome};
use crate::lp::{solve_with_start, LinearProgram, LpSolution};
use crate::model::BusPricing;

/// Largest action grid accepted.
pub const MAX_ACTIONS: usize = 64;

/// How the action grid is built from the per-bus reference loads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    /// Multipliers applied to the reference loads.
    pub factors: Vec<f64>,
    /// Scale every bus independently instead of by one shared factor.
    pub cartesian: bool,
}

impl Default for ActionSpec {
    fn default() -> Self {
        ActionSpec {
            factors: vec![0.6, 0.8, 1.0, 1.2],
            cartesian: false,
        }
    }
}

impl ActionSpec {
    pub fn validate(&self, providers: usize) -> Result<()> {
        if self.factors.is_empty() {
            return Err(Error::validation("actions.factors", "at least one factor is required"));
        }
        if let Some(f) = self.factors.iter().find(|f| !(**f >= 0.0 && f.is_finite())) {
            return Err(Error::validation("actions.factors", format!("factors must be non-negative, got {f}")));
        }
        let count = if self.cartesian {
            (self.factors.len() as f64).powi(providers as i32)
        } else {
            self.factors.len() as f64
        };
        if count > MAX_ACTIONS as f64 {
            return Err(Error::validation(
                "actions",
                format!("grid would have {count} actions, the limit is {MAX_ACTIONS}"),
            ));
        }
        Ok(())
    }
}

/// The finite set of billing-reference vectors the grid chooses from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionGrid {
    /// `actions[a][j]`: billing reference for provider `j`'s bus, kW.
    pub actions: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl ActionGrid {
    /// Scales `reference` by each factor (or by every per-bus combination of
    /// factors). Duplicate vectors are dropped, keeping the first.
    pub fn build(spec: &ActionSpec, reference: &[f64]) -> Result<Self> {
        spec.validate(reference.len())?;
        let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
        if spec.cartesian {
            for _ in reference {
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        (0..spec.factors.len()).map(move |f| {
                            let mut next = c.clone();
                            next.push(f);
                            next
                        })
                    })
                    .collect();
            }
        } else {
            combos = (0..spec.factors.len()).map(|f| vec![f; reference.len()]).collect();
        }
        let mut actions: Vec<Vec<f64>> = Vec::new();
        let mut labels = Vec::new();
        for combo in combos {
            let delta: Vec<f64> = combo.iter().zip(reference).map(|(&f, &r)| spec.factors[f] * r).collect();
            if actions.contains(&delta) {
                continue;
            }
            let label = if spec.cartesian {
                combo.iter().map(|&f| format!("{}", spec.factors[f])).collect::<Vec<_>>().join("/")
            } else {
                format!("x{}", spec.factors[combo[0]])
            };
            actions.push(delta);
            labels.push(label);
        }
        Ok(ActionGrid { actions, labels })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// The grid's utility split into its two terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityBreakdown {
    /// `α₁ Σ θ_j e_j`.
    pub revenue_term: f64,
    /// `α₂ K Σ |e_j − G_j|`, subtracted.
    pub mismatch_term: f64,
    pub utility: f64,
}

/// `α₁ Σ θ_j e_j − α₂ K Σ |e_j − G_j|`.
pub fn sg_utility(power: &[f64], prices: &[f64], supply: &[f64], alpha1: f64, alpha2: f64, k: f64) -> UtilityBreakdown {
    let revenue: f64 = power.iter().zip(prices).map(|(e, p)| e * p).sum();
    let mismatch: f64 = power.iter().zip(supply).map(|(e, g)| (e - g).abs()).sum();
    let revenue_term = alpha1 * revenue;
    let mismatch_term = alpha2 * k * mismatch;
    UtilityBreakdown {
        revenue_term,
        mismatch_term,
        utility: revenue_term - mismatch_term,
    }
}

/// Inputs of the occupancy-measure program.
#[derive(Debug, Clone, Copy)]
pub struct CmdpInput<'a> {
    /// One transition matrix per action.
    pub transitions: &'a [TransitionMatrix],
    /// `utility[k][a]`.
    pub utility: &'a [Vec<f64>],
    /// `prices[k][a][i]`.
    pub prices: &'a [Vec<Vec<f64>>],
    pub price_lo: &'a [f64],
    pub price_hi: &'a [f64],
}

impl CmdpInput<'_> {
    pub fn num_states(&self) -> usize {
        self.utility.len()
    }

    pub fn num_actions(&self) -> usize {
        self.transitions.len()
    }

    /// Variable index of `φ(k, a)`.
    pub fn var(&self, state: usize, action: usize) -> usize {
        state * self.num_actions() + action
    }

    fn validate(&self) -> Result<()> {
        let s = self.num_states();
        let a = self.num_actions();
        if s == 0 || a == 0 {
            return Err(Error::Domain("the program needs at least one state and one action".into()));
        }
        if self.transitions.iter().any(|t| t.size() != s) {
            return Err(Error::Domain("transition matrix size does not match the state count".into()));
        }
        if self.utility.iter().any(|row| row.len() != a) || self.prices.len() != s || self.prices.iter().any(|row| row.len() != a) {
            return Err(Error::Domain("utility or price table does not match states × actions".into()));
        }
        let n = self.price_lo.len();
        if self.price_hi.len() != n || self.prices.iter().flatten().any(|p| p.len() != n) {
            return Err(Error::Domain("price vectors do not match the provider count".into()));
        }
        Ok(())
    }
}

/// Maximize `Σ U φ` over occupancy measures: balance for every state but
/// the last, `Σ φ = 1`, `φ ≥ 0` and `θ_l ≤ Σ θ_i φ ≤ θ_h` per provider.
pub fn build_cmdp_lp(input: &CmdpInput<'_>) -> Result<LinearProgram> {
    input.validate()?;
    let s = input.num_states();
    let a = input.num_actions();
    let vars = s * a;
    let mut objective = vec![0.0; vars];
    for k in 0..s {
        for act in 0..a {
            objective[input.var(k, act)] = input.utility[k][act];
        }
    }
    let mut lp = LinearProgram::new(objective);
    for target in 0..s.saturating_sub(1) {
        let mut row = vec![0.0; vars];
        for act in 0..a {
            row[input.var(target, act)] += 1.0;
        }
        for (act, t) in input.transitions.iter().enumerate() {
            for k in 0..s {
                let p = t.get(k, target);
                if p != 0.0 {
                    row[input.var(k, act)] -= p;
                }
            }
        }
        lp.add_eq(row, 0.0);
    }
    lp.add_eq(vec![1.0; vars], 1.0);
    for i in 0..input.price_lo.len() {
        let mut row = vec![0.0; vars];
        for k in 0..s {
            for act in 0..a {
                row[input.var(k, act)] = input.prices[k][act][i];
            }
        }
        lp.add_ge(row.clone(), input.price_lo[i]);
        lp.add_le(row, input.price_hi[i]);
    }
    Ok(lp)
}

/// Variables of the constant-action policy with the highest stationary
/// utility among those whose expected prices respect the bounds, or, if
/// none does, of the one with the smallest total bound violation. Used as
/// the simplex start basis.
pub fn cmdp_start(input: &CmdpInput<'_>) -> Result<Vec<usize>> {
    input.validate()?;
    let s = input.num_states();
    // (violation, −utility) is minimized lexicographically.
    let mut best: Option<(usize, f64, f64)> = None;
    for (act, t) in input.transitions.iter().enumerate() {
        let Ok(p) = stationary_distribution(t) else {
            continue;
        };
        let violation: f64 = (0..input.price_lo.len())
            .map(|i| {
                let e: f64 = (0..s).map(|k| p.p[k] * input.prices[k][act][i]).sum();
                (input.price_lo[i] - e).max(0.0) + (e - input.price_hi[i]).max(0.0)
            })
            .sum();
        let violation = if violation <= 1e-12 { 0.0 } else { violation };
        let u: f64 = (0..s).map(|k| p.p[k] * input.utility[k][act]).sum();
        if best.is_none_or(|(_, bv, bu)| violation < bv || (violation == bv && u > bu)) {
            best = Some((act, violation, u));
        }
    }
    let act = best.map_or(0, |b| b.0);
    Ok((0..s).map(|k| input.var(k, act)).collect())
}

/// Builds and solves the pricing program, starting from [`cmdp_start`].
pub fn solve_cmdp(input: &CmdpInput<'_>) -> Result<LpSolution> {
    let lp = build_cmdp_lp(input)?;
    solve_with_start(&lp, &cmdp_start(input)?)
}

/// Mass below this makes a state's conditional action distribution
/// undefined.
pub const ZERO_MASS: f64 = 1e-14;

/// A stationary randomized pricing policy and the chain it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingPolicy {
    /// Occupancy measure `φ[k][a]`.
    pub phi: Vec<Vec<f64>>,
    /// Conditional action distribution `φ*[k][a]`.
    pub varphi: Vec<Vec<f64>>,
    /// States that had no mass and received the utility-maximizing action.
    pub fallback_states: Vec<usize>,
    /// `Σ U φ`.
    pub expected_utility: f64,
    /// `Σ θ_i φ` per provider.
    pub expected_prices: Vec<f64>,
    /// `T_π = Σ_a φ*(·, a) T(a)`.
    pub transition: TransitionMatrix,
    pub stationary: StationaryDistribution,
}

/// Per-state normalization of an optimal occupancy measure.
pub fn extract_policy(solution: &LpSolution, input: &CmdpInput<'_>) -> Result<PricingPolicy> {
    input.validate()?;
    if !solution.is_optimal() {
        return Err(Error::Domain(format!("cannot extract a policy from a {:?} program", solution.status)));
    }
    let s = input.num_states();
    let a = input.num_actions();
    if solution.x.len() != s * a {
        return Err(Error::Domain(format!("solution has {} entries, expected {}", solution.x.len(), s * a)));
    }
    let phi: Vec<Vec<f64>> = (0..s)
        .map(|k| (0..a).map(|act| solution.x[input.var(k, act)].max(0.0)).collect())
        .collect();
    let mut varphi = Vec::with_capacity(s);
    let mut fallback_states = Vec::new();
    for (k, row) in phi.iter().enumerate() {
        let mass: f64 = row.iter().sum();
        if mass > ZERO_MASS {
            varphi.push(row.iter().map(|x| x / mass).collect());
        } else {
            let best = argmax_first(&input.utility[k]);
            let mut point = vec![0.0; a];
            point[best] = 1.0;
            varphi.push(point);
            fallback_states.push(k);
        }
    }
    let expected_utility = (0..s)
        .flat_map(|k| (0..a).map(move |act| (k, act)))
        .map(|(k, act)| phi[k][act] * input.utility[k][act])
        .sum();
    let expected_prices = (0..input.price_lo.len())
        .map(|i| {
            (0..s)
                .flat_map(|k| (0..a).map(move |act| (k, act)))
                .map(|(k, act)| phi[k][act] * input.prices[k][act][i])
                .sum()
        })
        .collect();
    let transition = TransitionMatrix::mix(input.transitions, &varphi)?;
    let stationary = stationary_distribution(&transition)?;
    Ok(PricingPolicy {
        phi,
        varphi,
        fallback_states,
        expected_utility,
        expected_prices,
        transition,
        stationary,
    })
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    best
}

/// Long-run averages of a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRunAverages {
    pub sg: f64,
    pub revenue_term: f64,
    pub mismatch_term: f64,
    /// Average Shapley payoff per provider.
    pub cp: Vec<f64>,
    /// Average unit price per provider.
    pub prices: Vec<f64>,
    /// Stationary probability of every state.
    pub state_probability: Vec<f64>,
}

/// `Σ_k p(k) Σ_a φ*(k, a)·x(k, a)` for the utility terms, payoffs and prices.
pub fn average_profits(policy: &PricingPolicy, game: &SlotGame) -> LongRunAverages {
    policy_averages(&policy.varphi, &policy.stationary.p, game)
}

/// Averages of an arbitrary conditional action distribution weighted by
/// state probabilities `p`.
pub fn policy_averages(varphi: &[Vec<f64>], p: &[f64], game: &SlotGame) -> LongRunAverages {
    let n = game.inputs.workloads.len();
    let mut out = LongRunAverages {
        sg: 0.0,
        revenue_term: 0.0,
        mismatch_term: 0.0,
        cp: vec![0.0; n],
        prices: vec![0.0; n],
        state_probability: p.to_vec(),
    };
    for (k, row) in varphi.iter().enumerate() {
        for (act, &w) in row.iter().enumerate() {
            let weight = p[k] * w;
            if weight == 0.0 {
                continue;
            }
            let o = game.outcome(k, act);
            out.sg += weight * o.utility.utility;
            out.revenue_term += weight * o.utility.revenue_term;
            out.mismatch_term += weight * o.utility.mismatch_term;
            for i in 0..n {
                out.cp[i] += weight * o.payoffs[i];
                out.prices[i] += weight * o.prices[i];
            }
        }
    }
    out
}

/// Stationary behaviour of the policy that plays `action` in every state.
pub fn constant_action_averages(game: &SlotGame, transitions: &[TransitionMatrix], action: usize) -> Result<LongRunAverages> {
    let s = game.num_states();
    let varphi: Vec<Vec<f64>> = (0..s)
        .map(|_| {
            let mut row = vec![0.0; game.num_actions()];
            row[action] = 1.0;
            row
        })
        .collect();
    let p = stationary_distribution(&transitions[action])?;
    Ok(policy_averages(&varphi, &p.p, game))
}

/// The centralized optimum of one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentChoice {
    pub state: usize,
    /// Index into the candidate action list.
    pub action: usize,
    pub delta: Vec<f64>,
    pub outcome: StateOutcome,
}

/// Exhaustive argmax of the grid's utility over every (state, action) pair
/// whose prices all lie within their bands. `outcomes[a][k]` must be
/// aligned with `actions[a]`. Ties go to the lowest state, then the lowest
/// action.
pub fn cent_solve(actions: &[Vec<f64>], outcomes: &[Vec<StateOutcome>], pricing: &[BusPricing]) -> Result<CentChoice> {
    if actions.len() != outcomes.len() {
        return Err(Error::Domain("actions and outcomes are not aligned".into()));
    }
    let states = outcomes.first().map_or(0, Vec::len);
    let mut best: Option<(usize, usize, f64)> = None;
    for k in 0..states {
        for (a, per_state) in outcomes.iter().enumerate() {
            let o = &per_state[k];
            if !o.prices_in_bounds(pricing) {
                continue;
            }
            if best.is_none_or(|(_, _, u)| o.utility.utility > u) {
                best = Some((k, a, o.utility.utility));
            }
        }
    }
    let (state, action, _) = best.ok_or_else(|| Error::Domain("no state and action keeps every price within its band".into()))?;
    Ok(CentChoice {
        state,
        action,
        delta: actions[action].clone(),
        outcome: outcomes[action][state].clone(),
    })
}

/// The non-cooperative baseline of one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoCoopChoice {
    pub delta: Vec<f64>,
    /// Every provider serves its own workload; `payoffs` are the providers'
    /// profits `W r − θ e`.
    pub outcome: StateOutcome,
}

/// Each provider serves its own workload. Per bus, the grid takes the
/// billing reference from the grid's candidates that maximizes `θ·e`
/// without exceeding the price cap; if every candidate exceeds the cap it
/// takes the one with the lowest price.
pub fn nocoop_solve(inputs: &SlotInputs, specs: &[crate::model::DataCenterSpec], grid: &ActionGrid) -> Result<NoCoopChoice> {
    let n = inputs.workloads.len();
    if grid.is_empty() {
        return Err(Error::Domain("empty action grid".into()));
    }
    let mut delta = vec![0.0; n];
    let mut prices = vec![0.0; n];
    for j in 0..n {
        let e = inputs.home_power[j];
        let bus = &inputs.pricing[j];
        let mut candidates: Vec<f64> = grid.actions.iter().map(|d| d[j]).collect();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        let price_of = |d: f64| bus.with_billing_ref(d).price(e);
        let mut chosen: Option<(f64, f64)> = None;
        for &d in &candidates {
            let p = price_of(d);
            if p <= bus.price_hi && chosen.is_none_or(|(_, best)| p * e > best * e) {
                chosen = Some((d, p));
            }
        }
        let (d, p) = chosen.unwrap_or_else(|| {
            candidates
                .iter()
                .map(|&d| (d, price_of(d)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty grid")
        });
        delta[j] = d;
        prices[j] = p;
    }
    let power = inputs.home_power.clone();
    let payoffs = (0..n)
        .map(|j| inputs.workloads[j] as f64 * specs[j].revenue_rate - prices[j] * power[j])
        .collect();
    let utility = sg_utility(&power, &prices, &inputs.supply, inputs.alpha1, inputs.alpha2, inputs.k);
    Ok(NoCoopChoice {
        delta,
        outcome: StateOutcome {
            loads: inputs.workloads.clone(),
            power,
            prices,
            utility,
            payoffs,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve, LpStatus};

    #[test]
    fn utility_examples() {
        let u = sg_utility(&[10.0, 20.0], &[0.1, 0.2], &[10.0, 20.0], 0.3, 0.7, 0.25);
        assert!((u.utility - 0.3 * 5.0).abs() < 1e-12);
        assert_eq!(u.mismatch_term, 0.0);

        let u = sg_utility(&[10.0, 20.0], &[0.1, 0.2], &[12.0, 15.0], 0.0, 1.0, 0.25);
        assert!((u.utility + 0.25 * 7.0).abs() < 1e-12);

        // Two data centers by hand: revenue 0.3·(100·0.12 + 50·0.2) = 6.6,
        // mismatch 0.7·0.25·(|100−80| + |50−60|) = 5.25.
        let u = sg_utility(&[100.0, 50.0], &[0.12, 0.2], &[80.0, 60.0], 0.3, 0.7, 0.25);
        assert!((u.revenue_term - 6.6).abs() < 1e-12);
        assert!((u.mismatch_term - 5.25).abs() < 1e-12);
        assert!((u.utility - 1.35).abs() < 1e-12);
    }

    #[test]
    fn grid_construction() {
        let g = ActionGrid::build(&ActionSpec::default(), &[100.0, 50.0]).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.actions[0], vec![60.0, 30.0]);
        assert_eq!(g.labels[3], "x1.2");

        let spec = ActionSpec {
            factors: vec![0.5, 1.0],
            cartesian: true,
        };
        let g = ActionGrid::build(&spec, &[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.actions[1], vec![5.0, 10.0, 30.0]);

        // Zero reference loads collapse every factor onto one action.
        let g = ActionGrid::build(&ActionSpec::default(), &[0.0, 0.0]).unwrap();
        assert_eq!(g.len(), 1);

        let too_big = ActionSpec {
            factors: vec![0.6, 0.8, 1.0, 1.2],
            cartesian: true,
        };
        assert!(ActionGrid::build(&too_big, &[1.0; 6]).is_err());
    }

    fn two_state_input(transitions: &[TransitionMatrix]) -> (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
        let utility = vec![vec![1.0, 3.0], vec![2.0, 0.5]];
        let prices = vec![vec![vec![0.1], vec![0.2]], vec![vec![0.15], vec![0.1]]];
        assert_eq!(transitions.len(), 2);
        (utility, prices)
    }

    #[test]
    fn single_state_single_action() {
        let t = vec![TransitionMatrix::identity(1)];
        let utility = vec![vec![4.2]];
        let prices = vec![vec![vec![0.1]]];
        let input = CmdpInput {
            transitions: &t,
            utility: &utility,
            prices: &prices,
            price_lo: &[0.0],
            price_hi: &[1.0],
        };
        let sol = solve(&build_cmdp_lp(&input).unwrap()).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
        assert!((sol.objective_value - 4.2).abs() < 1e-12);
        let policy = extract_policy(&sol, &input).unwrap();
        assert_eq!(policy.varphi, vec![vec![1.0]]);
    }

    /// Every deterministic stationary policy on the two-state instance.
    fn best_deterministic(input: &CmdpInput<'_>) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for a0 in 0..2 {
            for a1 in 0..2 {
                let varphi = vec![
                    (0..2).map(|a| if a == a0 { 1.0 } else { 0.0 }).collect::<Vec<_>>(),
                    (0..2).map(|a| if a == a1 { 1.0 } else { 0.0 }).collect(),
                ];
                let t = TransitionMatrix::mix(input.transitions, &varphi).unwrap();
                let p = stationary_distribution(&t).unwrap().p;
                let price: f64 = p[0] * input.prices[0][a0][0] + p[1] * input.prices[1][a1][0];
                if price < input.price_lo[0] - 1e-12 || price > input.price_hi[0] + 1e-12 {
                    continue;
                }
                best = best.max(p[0] * input.utility[0][a0] + p[1] * input.utility[1][a1]);
            }
        }
        best
    }

    #[test]
    fn action_independent_chain_picks_per_state_argmax() {
        let chain = TransitionMatrix::from_rows(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
        let t = vec![chain.clone(), chain];
        let (utility, prices) = two_state_input(&t);
        let input = CmdpInput {
            transitions: &t,
            utility: &utility,
            prices: &prices,
            price_lo: &[0.0],
            price_hi: &[1.0],
        };
        let sol = solve(&build_cmdp_lp(&input).unwrap()).unwrap();
        let policy = extract_policy(&sol, &input).unwrap();
        assert_eq!(policy.varphi, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((sol.objective_value - best_deterministic(&input)).abs() < 1e-12);
        // p = (4/7, 3/7)
        assert!((sol.objective_value - (4.0 * 3.0 + 3.0 * 2.0) / 7.0).abs() < 1e-12);
    }

    #[test]
    fn price_constraint_randomizes_at_most_one_state() {
        let chain = TransitionMatrix::from_rows(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
        let t = vec![chain.clone(), chain];
        let (utility, prices) = two_state_input(&t);
        // The unconstrained optimum has expected price 4/7·0.2 + 3/7·0.15 ≈ 0.1786.
        let input = CmdpInput {
            transitions: &t,
            utility: &utility,
            prices: &prices,
            price_lo: &[0.0],
            price_hi: &[0.16],
        };
        let sol = solve(&build_cmdp_lp(&input).unwrap()).unwrap();
        let policy = extract_policy(&sol, &input).unwrap();
        let mixed = policy
            .varphi
            .iter()
            .filter(|row| row.iter().filter(|&&x| x > 1e-12).count() > 1)
            .count();
        assert!(mixed <= 1);
        assert!(policy.expected_prices[0] <= 0.16 + 1e-8);
        assert!(sol.objective_value >= best_deterministic(&input) - 1e-12);
        let total: f64 = policy.phi.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn start_basis_is_the_best_admissible_constant_action() {
        let chain = TransitionMatrix::from_rows(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
        let t = vec![chain.clone(), chain];
        let (utility, prices) = two_state_input(&t);
        // Constant actions: utility 10/7 and 13.5/7, expected price 0.85/7 and 1.1/7.
        for (hi, expected) in [(1.0, vec![1, 3]), (0.15, vec![0, 2]), (0.1, vec![0, 2])] {
            let hi = [hi];
            let input = CmdpInput {
                transitions: &t,
                utility: &utility,
                prices: &prices,
                price_lo: &[0.0],
                price_hi: &hi,
            };
            assert_eq!(cmdp_start(&input).unwrap(), expected);
            let direct = solve(&build_cmdp_lp(&input).unwrap()).unwrap();
            let started = solve_cmdp(&input).unwrap();
            assert_eq!(direct.status, started.status);
            if direct.is_optimal() {
                assert!((direct.objective_value - started.objective_value).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unreachable_price_floor_is_infeasible() {
        let chain = TransitionMatrix::from_rows(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
        let t = vec![chain.clone(), chain];
        let (utility, prices) = two_state_input(&t);
        let input = CmdpInput {
            transitions: &t,
            utility: &utility,
            prices: &prices,
            price_lo: &[0.5],
            price_hi: &[1.0],
        };
        assert_eq!(solve(&build_cmdp_lp(&input).unwrap()).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn zero_mass_states_fall_back_to_best_immediate_action() {
        // State 1 is transient under both actions.
        let chain = TransitionMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let t = vec![chain.clone(), chain];
        let (utility, prices) = two_state_input(&t);
        let input = CmdpInput {
            transitions: &t,
            utility: &utility,
            prices: &prices,
            price_lo: &[0.0],
            price_hi: &[1.0],
        };
        let sol = solve(&build_cmdp_lp(&input).unwrap()).unwrap();
        let policy = extract_policy(&sol, &input).unwrap();
        assert_eq!(policy.fallback_states, vec![1]);
        assert_eq!(policy.varphi[1], vec![1.0, 0.0]);
        assert_eq!(policy.stationary.p, vec![1.0, 0.0]);
    }

    fn outcome(utility: f64, prices: Vec<f64>) -> StateOutcome {
        StateOutcome {
            loads: vec![0; prices.len()],
            power: vec![0.0; prices.len()],
            utility: UtilityBreakdown {
                revenue_term: utility,
                mismatch_term: 0.0,
                utility,
            },
            payoffs: vec![0.0; prices.len()],
            prices,
        }
    }

    fn band() -> Vec<BusPricing> {
        vec![BusPricing {
            beta: 1.0,
            base_price: 0.1,
            billing_ref: 0.0,
            price_lo: 0.08,
            price_hi: 0.25,
        }]
    }

    #[test]
    fn cent_takes_best_feasible_pair_with_low_index_ties() {
        let actions = vec![vec![1.0], vec![2.0]];
        let outcomes = vec![
            vec![outcome(5.0, vec![0.1]), outcome(9.0, vec![0.3])],
            vec![outcome(5.0, vec![0.2]), outcome(4.0, vec![0.2])],
        ];
        let c = cent_solve(&actions, &outcomes, &band()).unwrap();
        assert_eq!((c.state, c.action), (0, 0));

        let none = vec![vec![outcome(1.0, vec![0.5])]];
        assert!(cent_solve(&actions[..1], &none, &band()).is_err());
    }

    #[test]
    fn nocoop_picks_highest_bill_under_the_cap() {
        let inputs = SlotInputs {
            slot: 0,
            workloads: vec![10],
            supply: vec![4.0],
            k: 0.25,
            alpha1: 0.3,
            alpha2: 0.7,
            pricing: vec![BusPricing {
                beta: 0.01,
                base_price: 0.2,
                billing_ref: 0.0,
                price_lo: 0.08,
                price_hi: 0.25,
            }],
            home_power: vec![5.0],
        };
        let specs = crate::model::reference_data_centers(0.1);
        // θ = 0.2 + 0.01·(5 − δ): δ=0 → 0.25 (at the cap), δ=−1 → 0.26.
        let grid = ActionGrid {
            actions: vec![vec![-1.0], vec![0.0], vec![5.0]],
            labels: vec!["a".into(), "b".into(), "c".into()],
        };
        let c = nocoop_solve(&inputs, &specs[..1], &grid).unwrap();
        assert_eq!(c.delta, vec![0.0]);
        assert!((c.outcome.prices[0] - 0.25).abs() < 1e-12);
        assert!((c.outcome.payoffs[0] - (10.0 * 0.1 - 0.25 * 5.0)).abs() < 1e-12);

        // The mismatch term does not depend on the action.
        let other = ActionGrid {
            actions: vec![vec![5.0]],
            labels: vec!["c".into()],
        };
        let d = nocoop_solve(&inputs, &specs[..1], &other).unwrap();
        assert_eq!(c.outcome.utility.mismatch_term, d.outcome.utility.mismatch_term);
    }
}
