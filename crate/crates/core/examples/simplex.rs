//! The dense simplex on a small production-planning program.

use gridcoal::lp::{solve, LinearProgram};

fn main() -> gridcoal::error::Result<()> {
    // max 3x + 5y + 4z
    // 2x + 3y       ≤ 8
    //      2y + 5z  ≤ 10
    // 3x + 2y + 4z  ≤ 15
    // x + y + z     ≥ 1, z ≤ 1.5
    let mut lp = LinearProgram::new(vec![3.0, 5.0, 4.0]);
    lp.add_le(vec![2.0, 3.0, 0.0], 8.0);
    lp.add_le(vec![0.0, 2.0, 5.0], 10.0);
    lp.add_le(vec![3.0, 2.0, 4.0], 15.0);
    lp.add_ge(vec![1.0, 1.0, 1.0], 1.0);
    lp.set_bounds(2, 0.0, 1.5);
    let s = solve(&lp)?;
    println!("status     {:?}", s.status);
    println!("x          {:?}", s.x);
    println!("objective  {:.6}", s.objective_value);
    println!("reduced    {:?}", s.reduced_costs);
    println!("pivots     {}", s.iterations);
    println!("violation  {:e}", lp.max_violation(&s.x));
    Ok(())
}
