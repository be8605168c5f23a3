//! The day-long experiment: every slot under every requested scheme.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::ValueCache;
use crate::error::{Error, Result};
use crate::game::{evaluate_action, SlotGame};
use crate::lp::LpStatus;
use crate::partition::StateSpace;
use crate::policy::{average_profits, cent_solve, extract_policy, nocoop_solve, solve_cmdp, CmdpInput, PricingPolicy};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Coalition dynamics with the grid's optimal stationary pricing policy.
    Icg,
    /// Centralized optimum over coalition structures and actions.
    Cent,
    /// Every provider serves its own workload.
    NoCoop,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Icg, Scheme::Cent, Scheme::NoCoop];
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Icg => "ICG",
            Scheme::Cent => "CENT",
            Scheme::NoCoop => "NoCoop",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "icg" => Ok(Scheme::Icg),
            "cent" => Ok(Scheme::Cent),
            "nocoop" => Ok(Scheme::NoCoop),
            other => Err(Error::Parse(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Parses a comma-separated scheme list, keeping the canonical order.
pub fn parse_schemes(list: &str) -> Result<Vec<Scheme>> {
    let mut out: Vec<Scheme> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::Parse("no schemes given".into()));
    }
    Ok(out)
}

/// Result of one scheme in one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: usize,
    pub scheme: Scheme,
    pub sg_profit: f64,
    pub revenue_term: f64,
    pub mismatch_term: f64,
    /// Profit of every provider.
    pub cp_profit: Vec<f64>,
    /// Unit price each provider pays (expected price for ICG).
    pub prices: Vec<f64>,
    /// `(state id, probability)` for every state with positive probability.
    pub partitions: Vec<(usize, f64)>,
    /// Billing references chosen (CENT, NoCoop).
    pub delta: Option<Vec<f64>>,
    /// VMs served across all data centers.
    pub served_vms: u64,
    /// VMs requested across all providers.
    pub requested_vms: u64,
    /// Optimal value of the pricing program (ICG).
    pub lp_objective: Option<f64>,
    /// States whose action came from the zero-mass fallback (ICG).
    pub fallback_states: Vec<usize>,
}

/// Every record of a run, ordered by slot and then scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub horizon: usize,
    pub providers: usize,
    pub schemes: Vec<Scheme>,
    /// Display form of every state id.
    pub partition_labels: Vec<String>,
    pub records: Vec<SlotRecord>,
}

impl RunReport {
    pub fn records_for(&self, scheme: Scheme) -> impl Iterator<Item = &SlotRecord> {
        self.records.iter().filter(move |r| r.scheme == scheme)
    }

    /// Horizon average of the grid's profit.
    pub fn mean_sg(&self, scheme: Scheme) -> Option<f64> {
        mean(self.records_for(scheme).map(|r| r.sg_profit))
    }

    /// Horizon average of the providers' total profit.
    pub fn mean_cp_total(&self, scheme: Scheme) -> Option<f64> {
        mean(self.records_for(scheme).map(|r| r.cp_profit.iter().sum()))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// ICG artifacts of one slot, for inspection.
#[derive(Debug, Clone)]
pub struct IcgSolution {
    pub game: SlotGame,
    pub policy: PricingPolicy,
    pub lp_objective: f64,
}

/// Builds and solves the pricing program of one slot.
pub fn solve_icg(game: SlotGame, scenario: &Scenario, slot: usize, space: &StateSpace) -> Result<IcgSolution> {
    let transitions = game.transition_matrices(space, &scenario.dynamics)?;
    let utility = game.utility_table();
    let prices = game.price_table();
    let lo = scenario.price_lo_at(slot);
    let hi = scenario.price_hi_at(slot);
    let input = CmdpInput {
        transitions: &transitions,
        utility: &utility,
        prices: &prices,
        price_lo: &lo,
        price_hi: &hi,
    };
    let solution = solve_cmdp(&input)?;
    match solution.status {
        LpStatus::Optimal => {}
        status => {
            return Err(Error::Domain(format!("pricing program is {status:?}")));
        }
    }
    let policy = extract_policy(&solution, &input)?;
    Ok(IcgSolution {
        game,
        policy,
        lp_objective: solution.objective_value,
    })
}

/// Runs the requested schemes for one slot.
pub fn run_slot(scenario: &Scenario, slot: usize, schemes: &[Scheme], space: &StateSpace, cache: &ValueCache) -> Result<Vec<SlotRecord>> {
    let wrap = |scheme: Scheme| move |e: Error| Error::Slot {
        slot,
        scheme: scheme.to_string(),
        source: Box::new(e),
    };
    let needs_game = schemes.iter().any(|s| matches!(s, Scheme::Icg | Scheme::Cent));
    let game = if needs_game {
        Some(SlotGame::build(scenario, slot, space, cache).map_err(wrap(schemes[0]))?)
    } else {
        None
    };
    let inputs = crate::game::SlotInputs::new(scenario, slot).map_err(wrap(schemes[0]))?;
    let grid = match &game {
        Some(g) => g.grid.clone(),
        None => crate::policy::ActionGrid::build(&scenario.actions, &inputs.home_power).map_err(wrap(Scheme::NoCoop))?,
    };
    let nocoop = nocoop_solve(&inputs, &scenario.providers, &grid).map_err(wrap(Scheme::NoCoop))?;
    let requested: u64 = inputs.workloads.iter().sum();

    let mut records = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        let record = match scheme {
            Scheme::Icg => {
                let game = game.clone().expect("game built for ICG");
                let icg = solve_icg(game, scenario, slot, space).map_err(wrap(scheme))?;
                let avg = average_profits(&icg.policy, &icg.game);
                let served = icg.game.outcome(0, 0).loads.iter().sum();
                SlotRecord {
                    slot,
                    scheme,
                    sg_profit: avg.sg,
                    revenue_term: avg.revenue_term,
                    mismatch_term: avg.mismatch_term,
                    cp_profit: avg.cp,
                    prices: avg.prices,
                    partitions: positive(&avg.state_probability),
                    delta: None,
                    served_vms: served,
                    requested_vms: requested,
                    lp_objective: Some(icg.lp_objective),
                    fallback_states: icg.policy.fallback_states.clone(),
                }
            }
            Scheme::Cent => {
                let game = game.as_ref().expect("game built for CENT");
                let mut actions = game.grid.actions.clone();
                let mut outcomes = game.outcomes.clone();
                if !actions.contains(&nocoop.delta) {
                    outcomes.push(evaluate_action(scenario, &inputs, space, &nocoop.delta, cache).map_err(wrap(scheme))?);
                    actions.push(nocoop.delta.clone());
                }
                let choice = cent_solve(&actions, &outcomes, &inputs.pricing).map_err(wrap(scheme))?;
                SlotRecord {
                    slot,
                    scheme,
                    sg_profit: choice.outcome.utility.utility,
                    revenue_term: choice.outcome.utility.revenue_term,
                    mismatch_term: choice.outcome.utility.mismatch_term,
                    cp_profit: choice.outcome.payoffs.clone(),
                    prices: choice.outcome.prices.clone(),
                    partitions: vec![(choice.state, 1.0)],
                    served_vms: choice.outcome.loads.iter().sum(),
                    delta: Some(choice.delta),
                    requested_vms: requested,
                    lp_objective: None,
                    fallback_states: Vec::new(),
                }
            }
            Scheme::NoCoop => SlotRecord {
                slot,
                scheme,
                sg_profit: nocoop.outcome.utility.utility,
                revenue_term: nocoop.outcome.utility.revenue_term,
                mismatch_term: nocoop.outcome.utility.mismatch_term,
                cp_profit: nocoop.outcome.payoffs.clone(),
                prices: nocoop.outcome.prices.clone(),
                partitions: vec![(space.singletons_id(), 1.0)],
                delta: Some(nocoop.delta.clone()),
                served_vms: nocoop.outcome.loads.iter().sum(),
                requested_vms: requested,
                lp_objective: None,
                fallback_states: Vec::new(),
            },
        };
        records.push(record);
    }
    Ok(records)
}

fn positive(p: &[f64]) -> Vec<(usize, f64)> {
    p.iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(k, &x)| (k, x))
        .collect()
}

/// Runs every slot of the horizon (in parallel) under `schemes`.
pub fn run_experiment(scenario: &Scenario, schemes: &[Scheme]) -> Result<RunReport> {
    scenario.validate()?;
    let mut schemes = schemes.to_vec();
    schemes.sort();
    schemes.dedup();
    if schemes.is_empty() {
        return Err(Error::Domain("no schemes requested".into()));
    }
    let space = StateSpace::new(scenario.n())?;
    let cache = ValueCache::new();
    let per_slot = (0..scenario.horizon)
        .into_par_iter()
        .map(|slot| run_slot(scenario, slot, &schemes, &space, &cache))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunReport {
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        horizon: scenario.horizon,
        providers: scenario.n(),
        partition_labels: space.partitions().iter().map(|p| p.to_string()).collect(),
        schemes,
        records: per_slot.into_iter().flatten().collect(),
    })
}
