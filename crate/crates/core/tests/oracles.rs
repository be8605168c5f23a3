mod common;

use common::{bell_triangle, brute_force_allocation, canonical, is_set_partition, shapley_by_permutations, AllocationInstance, BoxLp};
use gridcoal::allocation::{solve_allocation, AllocationConfig};
use gridcoal::lp::{solve, LpStatus};
use gridcoal::partition::{bell_number, enumerate_partitions};
use gridcoal::shapley::shapley_values;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn partitions_are_distinct_and_counted_by_bell() {
    for n in 1..=7 {
        let all = enumerate_partitions(n).unwrap();
        assert_eq!(all.len() as u64, bell_triangle(n));
        assert_eq!(bell_number(n).unwrap(), bell_triangle(n));
        let mut forms: Vec<_> = all.iter().map(|p| canonical(p.blocks())).collect();
        assert!(all.iter().all(|p| is_set_partition(n, p.blocks())));
        forms.sort();
        forms.dedup();
        assert_eq!(forms.len(), all.len());
    }
}

#[test]
fn lp_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut infeasible = 0;
    for _ in 0..150 {
        let case = BoxLp::random(&mut rng, 3, 3);
        let s = solve(&case.to_program()).unwrap();
        match case.vertex_optimum() {
            Some(z) => {
                assert_eq!(s.status, LpStatus::Optimal, "{case:?}");
                assert!((s.objective_value - z).abs() <= 1e-7, "{case:?}: {} vs {z}", s.objective_value);
            }
            None => {
                infeasible += 1;
                assert_eq!(s.status, LpStatus::Infeasible, "{case:?}");
            }
        }
    }
    assert!(infeasible > 0 && infeasible < 150);
}

#[test]
fn allocation_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let inst = AllocationInstance::random(&mut rng);
        let problem = inst.problem();
        let alloc = solve_allocation(&problem, &inst.members, &AllocationConfig::default()).unwrap();
        let best = brute_force_allocation(&problem, &inst.members).unwrap();
        assert!((alloc.objective - best).abs() <= 1e-9, "{} vs {best}", alloc.objective);
        assert!(alloc.is_feasible(&problem));
    }
}

proptest! {
    #[test]
    fn shapley_matches_permutation_average(worth in prop::collection::vec(-20i32..50, 15)) {
        let value = |mask: u32| if mask == 0 { 0.0 } else { worth[mask as usize - 1] as f64 };
        let members = [0usize, 1, 2, 3];
        let psi = shapley_values(&members, |sub| {
            Ok(value(sub.iter().fold(0u32, |m, &i| m | (1 << i))))
        })
        .unwrap();
        let oracle = shapley_by_permutations(4, &value);
        for i in 0..4 {
            prop_assert!((psi.payoff[i] - oracle[i]).abs() <= 1e-9);
        }
        prop_assert!((psi.total() - value(0b1111)).abs() <= 1e-9);
    }
}
