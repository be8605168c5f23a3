//! Merge/split dynamics of one slot: transition matrix, stationary law and
//! stable structures.

use gridcoal::allocation::ValueCache;
use gridcoal::dynamics::{absorbing_states, stationary_distribution, DynamicsParams};
use gridcoal::game::SlotGame;
use gridcoal::partition::StateSpace;
use gridcoal::scenario::load_scenario;

fn main() -> gridcoal::error::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/three.toml");
    let scenario = load_scenario(path)?;
    let space = StateSpace::new(scenario.n())?;
    let cache = ValueCache::new();
    let game = SlotGame::build(&scenario, 2, &space, &cache)?;
    let action = 2;

    let t = game.transition_matrix(&space, action, &scenario.dynamics)?;
    let p = stationary_distribution(&t)?;
    println!("slot 2, price action {:?}", game.grid.actions[action]);
    for (k, part) in space.partitions().iter().enumerate() {
        println!(
            "  {:<24} payoffs {:?}  stationary {:.4}",
            format!("{:?}", part.blocks()),
            game.outcome(k, action).payoffs.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>(),
            p.p[k]
        );
    }

    let noiseless = DynamicsParams { epsilon: 0.0, ..scenario.dynamics };
    let t0 = game.transition_matrix(&space, action, &noiseless)?;
    let stable: Vec<_> = absorbing_states(&t0).iter().map(|&k| space.partition(k).blocks().to_vec()).collect();
    println!("absorbing without noise: {stable:?}");
    Ok(())
}
