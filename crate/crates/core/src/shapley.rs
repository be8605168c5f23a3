//! Exact Shapley division of a coalition's value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest coalition handled by exact subset enumeration.
pub const MAX_MEMBERS: usize = 12;

/// Payoff of every member of one coalition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffVector {
    pub members: Vec<usize>,
    pub payoff: Vec<f64>,
}

impl PayoffVector {
    pub fn get(&self, provider: usize) -> Option<f64> {
        self.members
            .iter()
            .position(|&m| m == provider)
            .map(|k| self.payoff[k])
    }

    pub fn total(&self) -> f64 {
        self.payoff.iter().sum()
    }
}

/// Shapley value of every member. `value` is called once per subset of
/// `members` (as an ascending slice); the empty coalition is worth 0 and is
/// not queried.
pub fn shapley_values<F>(members: &[usize], mut value: F) -> Result<PayoffVector>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    let s = members.len();
    if s == 0 || s > MAX_MEMBERS {
        return Err(Error::Domain(format!(
            "Shapley values need 1..={MAX_MEMBERS} members, got {s}"
        )));
    }
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != s {
        return Err(Error::Domain(format!("duplicate members in {members:?}")));
    }

    let mut worth = vec![0.0; 1 << s];
    let mut subset = Vec::with_capacity(s);
    for mask in 1usize..1 << s {
        subset.clear();
        subset.extend((0..s).filter(|k| mask & (1 << k) != 0).map(|k| sorted[k]));
        worth[mask] = value(&subset)?;
    }

    // weight[f] = f!·(s−f−1)!/s!
    let mut weight = vec![0.0; s];
    for (f, w) in weight.iter_mut().enumerate() {
        *w = 1.0 / (s as f64 * binomial(s - 1, f));
    }

    let payoff = (0..s)
        .map(|k| {
            let bit = 1usize << k;
            (0usize..1 << s)
                .filter(|mask| mask & bit == 0)
                .map(|mask| weight[mask.count_ones() as usize] * (worth[mask | bit] - worth[mask]))
                .sum()
        })
        .collect();
    Ok(PayoffVector {
        members: sorted,
        payoff,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
