//! Facility power of the reference data centers and the bus price it induces.

use gridcoal::model::{electricity_price, power_draw, reference_data_centers, BusPricing};

fn main() -> gridcoal::error::Result<()> {
    let pricing = BusPricing {
        beta: 1e-5,
        base_price: 0.12,
        billing_ref: 0.0,
        price_lo: 0.08,
        price_hi: 0.25,
    };
    println!("dc  load   hosts  util   power_kw  price_$/kWh");
    for spec in reference_data_centers(0.05).iter().take(3) {
        for load in [1, 1001, spec.capacity() / 2 + 1, spec.capacity()] {
            let draw = power_draw(spec, load)?;
            let price = electricity_price(&pricing, draw.power);
            println!(
                "{:<3} {:<6} {:<6} {:<6.3} {:<9.2} {:.5}",
                spec.id, load, draw.active_hosts, draw.utilization, draw.power, price
            );
        }
    }
    Ok(())
}
