//! Coalition structures of a small federation and their merge/split moves.

use gridcoal::partition::{bell_number, enumerate_partitions, neighbors, Partition};

fn main() -> gridcoal::error::Result<()> {
    for n in 1..=6 {
        println!("{n} providers: {} partitions", bell_number(n)?);
    }
    let all = enumerate_partitions(4)?;
    println!("\nall {} partitions of four providers:", all.len());
    for p in &all {
        println!("  {:?}", p.blocks());
    }
    let start = Partition::from_blocks(4, &[vec![0, 1], vec![2], vec![3]])?;
    println!("\nmoves from {:?}:", start.blocks());
    for m in neighbors(&start) {
        println!("  {:?} by {:?} -> {:?}", m.kind, m.actors, m.to.blocks());
    }
    Ok(())
}
