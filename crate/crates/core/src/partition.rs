//! Set partitions of the provider set (coalition structures), their
//! restricted-growth-string encoding and the merge/split neighborhood.
//!
//! Providers are indexed `0..n` internally; `Display` prints them 1-based,
//! e.g. `{1,2}{3}`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Largest provider count for which partitions are enumerated.
pub const MAX_PROVIDERS: usize = 12;

/// Bit set of provider indices.
pub type Coalition = u32;

pub fn coalition_of(members: &[usize]) -> Coalition {
    members.iter().fold(0, |mask, &m| mask | (1 << m))
}

pub fn members_of(mask: Coalition) -> Vec<usize> {
    (0..Coalition::BITS as usize).filter(|i| mask & (1 << i) != 0).collect()
}

fn check_size(n: usize) -> Result<()> {
    if (1..=MAX_PROVIDERS).contains(&n) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "partition size {n} outside supported range 1..={MAX_PROVIDERS}"
        )))
    }
}

/// A canonical coalition structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    rgs: Vec<u8>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds from a restricted growth string; rejects non-canonical input.
    pub fn from_rgs(rgs: Vec<u8>) -> Result<Self> {
        check_size(rgs.len())?;
        let mut next = 0u8;
        for (i, &r) in rgs.iter().enumerate() {
            if r > next {
                return Err(Error::Domain(format!("rgs {rgs:?} is not canonical at position {i}")));
            }
            if r == next {
                next += 1;
            }
        }
        let mut blocks = vec![Vec::new(); next as usize];
        for (i, &r) in rgs.iter().enumerate() {
            blocks[r as usize].push(i);
        }
        Ok(Partition { rgs, blocks })
    }

    /// Canonicalizes an arbitrary list of disjoint, covering blocks over `0..n`.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        check_size(n)?;
        let mut label = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Domain("empty block".into()));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::Domain(format!("provider {i} out of range for n = {n}")));
                }
                if label[i] != usize::MAX {
                    return Err(Error::Domain(format!("provider {i} appears in two blocks")));
                }
                label[i] = b;
            }
        }
        if let Some(i) = label.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Domain(format!("provider {i} is not covered")));
        }
        let mut renumber = HashMap::new();
        let rgs = label
            .iter()
            .map(|l| {
                let next = renumber.len() as u8;
                *renumber.entry(*l).or_insert(next)
            })
            .collect();
        Partition::from_rgs(rgs)
    }

    fn from_masks(n: usize, masks: &[Coalition]) -> Self {
        let blocks: Vec<Vec<usize>> = masks.iter().map(|&m| members_of(m)).collect();
        Partition::from_blocks(n, &blocks).expect("masks form a partition")
    }

    pub fn singletons(n: usize) -> Result<Self> {
        check_size(n)?;
        Partition::from_rgs((0..n as u8).collect())
    }

    pub fn grand(n: usize) -> Result<Self> {
        check_size(n)?;
        Partition::from_rgs(vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.rgs.len()
    }

    pub fn rgs(&self) -> &[u8] {
        &self.rgs
    }

    /// Blocks ordered by smallest member, each sorted ascending.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_masks(&self) -> Vec<Coalition> {
        self.blocks.iter().map(|b| coalition_of(b)).collect()
    }

    /// Index of the block containing `provider`.
    pub fn block_of(&self, provider: usize) -> usize {
        self.rgs[provider] as usize
    }

    pub fn coalition_of_provider(&self, provider: usize) -> &[usize] {
        &self.blocks[self.block_of(provider)]
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in &self.blocks {
            write!(f, "{{")?;
            for (i, m) in block.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", m + 1)?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

/// Bell number via the Bell triangle.
pub fn bell_number(n: usize) -> Result<u64> {
    check_size(n)?;
    let mut row = vec![1u64];
    for _ in 1..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let prev = *next.last().unwrap();
            next.push(prev + x);
        }
        row = next;
    }
    Ok(*row.last().unwrap())
}

/// All partitions of `n` providers in lexicographic RGS order. The position
/// of a partition in this list is its state id.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    check_size(n)?;
    let mut out = Vec::with_capacity(bell_number(n)? as usize);
    let mut rgs = vec![0u8; n];
    // prefix_max[i] = max(rgs[0..=i])
    let mut prefix_max = vec![0u8; n];
    loop {
        out.push(Partition::from_rgs(rgs.clone())?);
        let Some(i) = (1..n).rev().find(|&i| rgs[i] <= prefix_max[i - 1]) else {
            break;
        };
        rgs[i] += 1;
        prefix_max[i] = prefix_max[i - 1].max(rgs[i]);
        for k in i + 1..n {
            rgs[k] = 0;
            prefix_max[k] = prefix_max[i];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Merge,
    Split,
}

/// A single merge (two blocks into one) or split (one block into two).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub kind: MoveKind,
    pub from: Partition,
    pub to: Partition,
    /// Providers whose coalition changes, ascending.
    pub actors: Vec<usize>,
}

/// Every single-merge and single-split move out of `p`. Merges come first,
/// over block pairs in order; splits follow, per block, over bipartitions
/// keyed by the subset that keeps the block's smallest member.
pub fn neighbors(p: &Partition) -> Vec<Move> {
    let n = p.n();
    let masks = p.block_masks();
    let mut moves = Vec::new();
    for a in 0..masks.len() {
        for b in a + 1..masks.len() {
            let mut next: Vec<Coalition> = masks.clone();
            next[a] = masks[a] | masks[b];
            next.remove(b);
            moves.push(Move {
                kind: MoveKind::Merge,
                from: p.clone(),
                to: Partition::from_masks(n, &next),
                actors: members_of(masks[a] | masks[b]),
            });
        }
    }
    for (b, &mask) in masks.iter().enumerate() {
        let members = members_of(mask);
        if members.len() < 2 {
            continue;
        }
        let rest = &members[1..];
        // Subsets of the remaining members joined to the first; skip the full block.
        for pick in 0..(1u32 << rest.len()) - 1 {
            let keep = rest
                .iter()
                .enumerate()
                .filter(|(k, _)| pick & (1 << k) != 0)
                .fold(1 << members[0], |m, (_, &i)| m | (1 << i));
            let mut next = masks.clone();
            next[b] = keep;
            next.push(mask & !keep);
            moves.push(Move {
                kind: MoveKind::Split,
                from: p.clone(),
                to: Partition::from_masks(n, &next),
                actors: members.clone(),
            });
        }
    }
    moves
}

/// Outcome of a bottom-up merge-only pass.
#[derive(Debug, Clone)]
pub struct MergePass {
    pub partition: Partition,
    /// Merge attempts evaluated (accepted or not).
    pub attempts: usize,
    pub merges: usize,
}

/// Repeatedly tries merging block pairs in order, restarting the scan after
/// every accepted merge, until a full scan accepts nothing.
pub fn merge_pass(start: &Partition, mut accept: impl FnMut(&Move) -> bool) -> MergePass {
    let mut current = start.clone();
    let mut attempts = 0;
    let mut merges = 0;
    'scan: loop {
        for mv in neighbors(&current).into_iter().filter(|m| m.kind == MoveKind::Merge) {
            attempts += 1;
            if accept(&mv) {
                current = mv.to;
                merges += 1;
                continue 'scan;
            }
        }
        break;
    }
    MergePass {
        partition: current,
        attempts,
        merges,
    }
}

/// A move out of a state, resolved to the target state id.
#[derive(Debug, Clone)]
pub struct Transition {
    pub target: usize,
    pub kind: MoveKind,
    pub actors: Vec<usize>,
}

/// The indexed state space of coalition structures with precomputed
/// neighborhoods.
#[derive(Debug, Clone)]
pub struct StateSpace {
    partitions: Vec<Partition>,
    index: HashMap<Vec<u8>, usize>,
    moves: Vec<Vec<Transition>>,
}

impl StateSpace {
    pub fn new(n: usize) -> Result<Self> {
        let partitions = enumerate_partitions(n)?;
        let index: HashMap<Vec<u8>, usize> = partitions
            .iter()
            .enumerate()
            .map(|(k, p)| (p.rgs().to_vec(), k))
            .collect();
        let moves = partitions
            .iter()
            .map(|p| {
                neighbors(p)
                    .into_iter()
                    .map(|m| Transition {
                        target: index[m.to.rgs()],
                        kind: m.kind,
                        actors: m.actors,
                    })
                    .collect()
            })
            .collect();
        Ok(StateSpace {
            partitions,
            index,
            moves,
        })
    }

    pub fn n(&self) -> usize {
        self.partitions[0].n()
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn partition(&self, k: usize) -> &Partition {
        &self.partitions[k]
    }

    pub fn id_of(&self, p: &Partition) -> Option<usize> {
        self.index.get(p.rgs()).copied()
    }

    pub fn moves(&self, k: usize) -> &[Transition] {
        &self.moves[k]
    }

    pub fn singletons_id(&self) -> usize {
        self.len() - 1
    }
}
