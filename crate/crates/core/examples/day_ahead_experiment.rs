//! Full horizon run of the three pricing schemes, written as CSV.

use gridcoal::experiment::{run_experiment, Scheme};
use gridcoal::report::{summary, write_report};
use gridcoal::scenario::load_scenario;

fn main() -> gridcoal::error::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/three.toml");
    let scenario = load_scenario(path)?;
    let report = run_experiment(&scenario, &[Scheme::Icg, Scheme::Cent, Scheme::NoCoop])?;
    print!("{}", summary(&report));
    let out = std::env::temp_dir().join("gridcoal-day-ahead");
    for file in write_report(&report, &out)? {
        println!("wrote {}", file.display());
    }
    Ok(())
}
