//! Everything the schemes need about one slot: for every price action and
//! every coalition structure, the power each data center draws, the prices
//! it pays, the grid's utility and each provider's Shapley payoff.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{CoalitionEvaluation, CoalitionProblem, ValueCache};
use crate::dynamics::{build_transition_matrix, DynamicsParams, TransitionMatrix};
use crate::error::{Error, Result};
use crate::model::{power_draw, BusPricing};
use crate::partition::{members_of, Coalition, StateSpace};
use crate::policy::{sg_utility, ActionGrid, UtilityBreakdown};
use crate::scenario::Scenario;
use crate::shapley::shapley_values;

/// Outcome of one coalition structure under one price action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateOutcome {
    /// VMs hosted by each data center.
    pub loads: Vec<u64>,
    /// Power drawn by each data center, kW.
    pub power: Vec<f64>,
    /// Unit price each data center pays, $/kWh.
    pub prices: Vec<f64>,
    pub utility: UtilityBreakdown,
    /// Shapley payoff of each provider within its coalition, $.
    pub payoffs: Vec<f64>,
}

impl StateOutcome {
    /// Whether every price lies within its bus's legal band.
    pub fn prices_in_bounds(&self, pricing: &[BusPricing]) -> bool {
        self.prices.iter().zip(pricing).all(|(&p, b)| b.in_bounds(p))
    }
}

/// Fixed inputs of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotInputs {
    pub slot: usize,
    pub workloads: Vec<u64>,
    pub supply: Vec<f64>,
    pub k: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Bus prices with a zero billing reference.
    pub pricing: Vec<BusPricing>,
    /// Power each provider draws serving only its own workload.
    pub home_power: Vec<f64>,
}

impl SlotInputs {
    pub fn new(scenario: &Scenario, slot: usize) -> Result<Self> {
        if slot >= scenario.horizon {
            return Err(Error::Domain(format!("slot {slot} is outside the horizon {}", scenario.horizon)));
        }
        let workloads = scenario.workloads_at(slot);
        let home_power = scenario
            .providers
            .iter()
            .zip(&workloads)
            .map(|(p, &w)| power_draw(p, w).map(|d| d.power))
            .collect::<Result<_>>()?;
        Ok(SlotInputs {
            slot,
            supply: scenario.grid.supply_at(slot),
            k: scenario.grid.k_for_slot(slot, &scenario.price_hi_at(slot)),
            alpha1: scenario.grid.alpha1,
            alpha2: scenario.grid.alpha2,
            pricing: scenario.pricing_at(slot).to_vec(),
            workloads,
            home_power,
        })
    }

    /// Bus prices under billing references `delta`.
    pub fn priced(&self, delta: &[f64]) -> Vec<BusPricing> {
        self.pricing
            .iter()
            .zip(delta)
            .map(|(b, &d)| b.with_billing_ref(d))
            .collect()
    }
}

/// Per-action, per-state outcomes of one slot.
#[derive(Debug, Clone)]
pub struct SlotGame {
    pub inputs: SlotInputs,
    pub grid: ActionGrid,
    /// `outcomes[a][k]`.
    pub outcomes: Vec<Vec<StateOutcome>>,
}

impl SlotGame {
    /// Evaluates every state under every action of the scenario's grid.
    pub fn build(scenario: &Scenario, slot: usize, space: &StateSpace, cache: &ValueCache) -> Result<Self> {
        let inputs = SlotInputs::new(scenario, slot)?;
        let grid = ActionGrid::build(&scenario.actions, &inputs.home_power)?;
        let outcomes = grid
            .actions
            .par_iter()
            .map(|delta| evaluate_action(scenario, &inputs, space, delta, cache))
            .collect::<Result<Vec<_>>>()?;
        Ok(SlotGame { inputs, grid, outcomes })
    }

    pub fn num_states(&self) -> usize {
        self.outcomes.first().map_or(0, Vec::len)
    }

    pub fn num_actions(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcome(&self, state: usize, action: usize) -> &StateOutcome {
        &self.outcomes[action][state]
    }

    /// `utility[k][a]`.
    pub fn utility_table(&self) -> Vec<Vec<f64>> {
        (0..self.num_states())
            .map(|k| (0..self.num_actions()).map(|a| self.outcomes[a][k].utility.utility).collect())
            .collect()
    }

    /// `prices[k][a][j]`.
    pub fn price_table(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.num_states())
            .map(|k| (0..self.num_actions()).map(|a| self.outcomes[a][k].prices.clone()).collect())
            .collect()
    }

    /// `payoffs[k][a][i]`.
    pub fn payoff_table(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.num_states())
            .map(|k| (0..self.num_actions()).map(|a| self.outcomes[a][k].payoffs.clone()).collect())
            .collect()
    }

    /// Coalition dynamics under a fixed action.
    pub fn transition_matrix(&self, space: &StateSpace, action: usize, params: &DynamicsParams) -> Result<TransitionMatrix> {
        let payoffs: Vec<Vec<f64>> = self.outcomes[action].iter().map(|o| o.payoffs.clone()).collect();
        build_transition_matrix(space, &payoffs, params)
    }

    /// One matrix per action, built in parallel.
    pub fn transition_matrices(&self, space: &StateSpace, params: &DynamicsParams) -> Result<Vec<TransitionMatrix>> {
        (0..self.num_actions())
            .into_par_iter()
            .map(|a| self.transition_matrix(space, a, params))
            .collect()
    }
}

/// Evaluates every state of `space` under billing references `delta`.
pub fn evaluate_action(
    scenario: &Scenario,
    inputs: &SlotInputs,
    space: &StateSpace,
    delta: &[f64],
    cache: &ValueCache,
) -> Result<Vec<StateOutcome>> {
    let n = scenario.n();
    let pricing = inputs.priced(delta);
    let problem = CoalitionProblem {
        specs: &scenario.providers,
        pricing: &pricing,
        workloads: &inputs.workloads,
        migration: &scenario.migration,
    };
    let all: Vec<Coalition> = (1..(1 as Coalition) << n).collect();
    let evaluations: HashMap<Coalition, Arc<CoalitionEvaluation>> = all
        .par_iter()
        .map(|&mask| {
            cache
                .evaluate(&problem, &members_of(mask), inputs.slot, &scenario.allocation)
                .map(|e| (mask, e))
        })
        .collect::<Result<_>>()?;

    // Shapley division of every coalition that appears as a block.
    let mut division: HashMap<Coalition, Vec<f64>> = HashMap::new();
    for p in space.partitions() {
        for mask in p.block_masks() {
            if division.contains_key(&mask) {
                continue;
            }
            let members = members_of(mask);
            let psi = shapley_values(&members, |sub| Ok(evaluations[&crate::partition::coalition_of(sub)].value))?;
            division.insert(mask, psi.payoff);
        }
    }

    space
        .partitions()
        .iter()
        .map(|p| {
            let mut loads = vec![0u64; n];
            let mut power = vec![0.0; n];
            let mut prices = vec![0.0; n];
            let mut payoffs = vec![0.0; n];
            for mask in p.block_masks() {
                let eval = &evaluations[&mask];
                let alloc = &eval.allocation;
                for (b, (&j, load)) in alloc.members.iter().zip(alloc.loads()).enumerate() {
                    loads[j] = load;
                    power[j] = alloc.draws[b].power;
                    prices[j] = alloc.prices[b];
                }
                for (&j, &psi) in alloc.members.iter().zip(&division[&mask]) {
                    payoffs[j] = psi;
                }
            }
            let utility = sg_utility(&power, &prices, &inputs.supply, inputs.alpha1, inputs.alpha2, inputs.k);
            Ok(StateOutcome {
                loads,
                power,
                prices,
                utility,
                payoffs,
            })
        })
        .collect()
}
