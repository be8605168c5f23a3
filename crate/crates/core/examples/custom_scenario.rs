//! Building a scenario from inline TOML and running the baseline on it.

use gridcoal::experiment::{run_experiment, Scheme};
use gridcoal::scenario::parse_scenario;

const SCENARIO: &str = r#"
name = "pair"
seed = 3
horizon = 4

[[providers]]
hosts = 800
vms_per_host = 2
pue = 1.2
p_idle = 0.1
p_peak = 0.3

[[providers]]
hosts = 600
vms_per_host = 1
pue = 1.6
p_idle = 0.12
p_peak = 0.35

[pricing]
price_lo = "5c"
price_hi = "30c"

[grid]
alpha1 = 0.4
alpha2 = 0.6
supply_fraction = 0.8

[dynamics]
sigma = 0.5
rho = 0.99
epsilon = 0.01

[trace]
profile = "diurnal"

[actions]
factors = [0.8, 1.0, 1.2]
"#;

fn main() -> gridcoal::error::Result<()> {
    let scenario = parse_scenario(SCENARIO, None, None)?;
    println!("{}: {} providers, {} slots", scenario.name, scenario.n(), scenario.horizon);
    for slot in 0..scenario.horizon {
        println!("  slot {slot}: workloads {:?}", scenario.workloads_at(slot));
    }
    let report = run_experiment(&scenario, &[Scheme::NoCoop, Scheme::Icg])?;
    for r in &report.records {
        let (state, prob) = r.partitions.iter().copied().fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        println!(
            "  slot {} {:<7} SG {:>9.3}  likeliest partition {} ({prob:.3})",
            r.slot, r.scheme.to_string(), r.sg_profit, report.partition_labels[state]
        );
    }
    Ok(())
}
