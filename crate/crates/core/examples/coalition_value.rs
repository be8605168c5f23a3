//! Optimal VM allocation inside coalitions, their values and Shapley payoffs.

use gridcoal::allocation::{evaluate_coalition, AllocationConfig, CoalitionProblem, MigrationCostMatrix};
use gridcoal::model::{reference_data_centers, BusPricing};
use gridcoal::shapley::shapley_values;

fn main() -> gridcoal::error::Result<()> {
    let specs: Vec<_> = reference_data_centers(0.05).into_iter().take(3).collect();
    let pricing: Vec<BusPricing> = [0.10, 0.14, 0.18]
        .iter()
        .map(|&base_price| BusPricing {
            beta: 1e-5,
            base_price,
            billing_ref: 0.0,
            price_lo: 0.0,
            price_hi: 1.0,
        })
        .collect();
    let workloads = [4000, 1500, 900];
    let migration = MigrationCostMatrix::uniform(3, 0.002);
    let problem = CoalitionProblem {
        specs: &specs,
        pricing: &pricing,
        workloads: &workloads,
        migration: &migration,
    };
    let config = AllocationConfig::default();

    for members in [vec![0], vec![1], vec![2], vec![0, 1], vec![0, 1, 2]] {
        let ev = evaluate_coalition(&problem, &members, &config)?;
        println!(
            "{members:?}: revenue {:.2}, cost {:.2}, value {:.2}, loads {:?}",
            ev.revenue,
            ev.cost,
            ev.value,
            ev.allocation.loads()
        );
    }

    let payoffs = shapley_values(&[0, 1, 2], |sub| Ok(evaluate_coalition(&problem, sub, &config)?.value))?;
    println!("\nShapley payoffs of the grand coalition:");
    for (j, psi) in payoffs.members.iter().zip(&payoffs.payoff) {
        println!("  provider {j}: {psi:.2}");
    }
    println!("  total {:.2}", payoffs.total());
    Ok(())
}
