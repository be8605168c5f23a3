use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use gridcoal::allocation::ValueCache;
use gridcoal::dynamics::{absorbing_states, ergodic_sets, stationary_distribution};
use gridcoal::experiment::{parse_schemes, run_experiment, solve_icg};
use gridcoal::game::{SlotGame, SlotInputs};
use gridcoal::partition::StateSpace;
use gridcoal::policy::{average_profits, nocoop_solve, ActionGrid};
use gridcoal::report::{summary, write_report};
use gridcoal::scenario::{load_scenario_with_seed, Scenario};

#[derive(Parser)]
#[command(name = "gridcoal", version, about = "Cloud provider coalitions under smart grid pricing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the horizon under the given schemes and write CSV reports.
    Run {
        /// Scenario file, or `paper6` for the built-in scenario.
        #[arg(long, default_value = "paper6")]
        scenario: String,
        #[arg(long, default_value = "icg,cent,nocoop")]
        schemes: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the optimal pricing policy of one slot.
    Policy {
        #[arg(long, default_value = "paper6")]
        scenario: String,
        #[arg(long)]
        slot: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the coalition dynamics of one slot under one action.
    Analyze {
        #[arg(long, default_value = "paper6")]
        scenario: String,
        #[arg(long)]
        slot: usize,
        /// Action index in the slot's grid.
        #[arg(long)]
        delta: usize,
        /// Also write the transition matrix as CSV to this path.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the non-cooperative baseline for every slot.
    Baseline {
        #[arg(long, default_value = "paper6")]
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(source: &str, seed: Option<u64>) -> gridcoal::Result<Scenario> {
    load_scenario_with_seed(source, seed)
}

fn run(cli: Cli) -> gridcoal::Result<()> {
    match cli.command {
        Command::Run { scenario, schemes, out, seed } => {
            let scenario = load(&scenario, seed)?;
            let schemes = parse_schemes(&schemes)?;
            let started = Instant::now();
            let report = run_experiment(&scenario, &schemes)?;
            log::info!("{} slots in {:.1?}", scenario.horizon, started.elapsed());
            let files = write_report(&report, &out)?;
            print!("{}", summary(&report));
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Policy { scenario, slot, seed } => {
            let scenario = load(&scenario, seed)?;
            let space = StateSpace::new(scenario.n())?;
            let game = SlotGame::build(&scenario, slot, &space, &ValueCache::new())?;
            let labels = game.grid.labels.clone();
            let icg = solve_icg(game, &scenario, slot, &space)?;
            let avg = average_profits(&icg.policy, &icg.game);
            println!("state,partition,probability,{}", labels.join(","));
            for (k, row) in icg.policy.varphi.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|x| format!("{x:.6}")).collect();
                println!("{k},{},{:.6},{}", space.partition(k), icg.policy.stationary.p[k], cells.join(","));
            }
            println!();
            println!("lp_objective = {}", icg.lp_objective);
            println!("sg_average = {}", avg.sg);
            println!("fallback_states = {:?}", icg.policy.fallback_states);
            for (i, (cp, price)) in avg.cp.iter().zip(&avg.prices).enumerate() {
                println!("provider {}: average profit {cp}, expected price {price}", i + 1);
            }
        }
        Command::Analyze { scenario, slot, delta, dump, seed } => {
            let scenario = load(&scenario, seed)?;
            let space = StateSpace::new(scenario.n())?;
            let game = SlotGame::build(&scenario, slot, &space, &ValueCache::new())?;
            if delta >= game.num_actions() {
                return Err(gridcoal::Error::Domain(format!(
                    "action {delta} does not exist; the grid has {} actions",
                    game.num_actions()
                )));
            }
            let t = game.transition_matrix(&space, delta, &scenario.dynamics)?;
            println!("action {delta} ({}): {:?}", game.grid.labels[delta], game.grid.actions[delta]);
            if space.len() <= 16 {
                for k in 0..t.size() {
                    let row: Vec<String> = t.row(k).iter().map(|x| format!("{x:.4}")).collect();
                    println!("{:>16} {}", space.partition(k).to_string(), row.join(" "));
                }
            }
            let p = stationary_distribution(&t)?;
            println!("stationary (states with p > 1e-6):");
            for (k, &x) in p.p.iter().enumerate().filter(|(_, &x)| x > 1e-6) {
                println!("  {k} {} {x:.6}", space.partition(k));
            }
            let absorbing: Vec<String> = absorbing_states(&t).iter().map(|&k| space.partition(k).to_string()).collect();
            println!("absorbing: [{}]", absorbing.join(", "));
            println!("closed classes: {}", ergodic_sets(&t).len());
            if let Some(path) = dump {
                t.write_csv(std::fs::File::create(&path)?)?;
                println!("wrote {}", path.display());
            }
        }
        Command::Baseline { scenario, seed } => {
            let scenario = load(&scenario, seed)?;
            println!("slot,sg_profit,cp_profit_total,{}", (1..=scenario.n()).map(|i| format!("price_{i}")).collect::<Vec<_>>().join(","));
            for slot in 0..scenario.horizon {
                let inputs = SlotInputs::new(&scenario, slot)?;
                let grid = ActionGrid::build(&scenario.actions, &inputs.home_power)?;
                let c = nocoop_solve(&inputs, &scenario.providers, &grid)?;
                let prices: Vec<String> = c.outcome.prices.iter().map(|p| p.to_string()).collect();
                println!(
                    "{slot},{},{},{}",
                    c.outcome.utility.utility,
                    c.outcome.payoffs.iter().sum::<f64>(),
                    prices.join(",")
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
