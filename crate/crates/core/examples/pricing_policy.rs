//! The grid's randomized pricing policy for one slot.

use gridcoal::allocation::ValueCache;
use gridcoal::experiment::solve_icg;
use gridcoal::game::SlotGame;
use gridcoal::partition::StateSpace;
use gridcoal::policy::average_profits;
use gridcoal::scenario::load_scenario;

fn main() -> gridcoal::error::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/three.toml");
    let scenario = load_scenario(path)?;
    let space = StateSpace::new(scenario.n())?;
    let cache = ValueCache::new();
    let slot = 3;
    let game = SlotGame::build(&scenario, slot, &space, &cache)?;
    let icg = solve_icg(game, &scenario, slot, &space)?;

    println!("actions: {:?}", icg.game.grid.actions);
    for (k, part) in space.partitions().iter().enumerate() {
        let dist: Vec<String> = icg.policy.varphi[k].iter().map(|w| format!("{w:.3}")).collect();
        println!("  {:<24} [{}]", format!("{:?}", part.blocks()), dist.join(", "));
    }
    println!("program objective {:.4}", icg.lp_objective);
    println!("expected prices   {:?}", icg.policy.expected_prices);
    let avg = average_profits(&icg.policy, &icg.game);
    println!("long-run SG profit {:.4}, provider profits {:?}", avg.sg, avg.cp);
    Ok(())
}
