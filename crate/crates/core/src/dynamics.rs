//! Markov dynamics of coalition formation under a fixed price action.
//!
//! A state is a coalition structure. From each state the providers may
//! perform a single merge or a single split; a move happens when every actor
//! acts (probability `σ` each) and follows the best-reply rule (probability
//! `ϱ` when its Shapley payoff does not drop and the move leaves some actor
//! strictly better off, `ε` otherwise) while every
//! bystander stays idle (`1 − σ` each). Whatever probability is left stays on
//! the diagonal.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::StateSpace;

/// Behavioural parameters of the providers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    /// Probability a provider acts in a slot.
    pub sigma: f64,
    /// Probability of following a payoff-improving move.
    pub rho: f64,
    /// Probability of following a payoff-reducing move.
    pub epsilon: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            sigma: 0.5,
            rho: 0.99,
            epsilon: 0.01,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return Err(Error::validation("dynamics.sigma", format!("must lie in (0, 1], got {}", self.sigma)));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::validation("dynamics.rho", format!("must lie in (0, 1], got {}", self.rho)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < self.rho) {
            return Err(Error::validation(
                "dynamics.epsilon",
                format!("must lie in [0, rho), got {}", self.epsilon),
            ));
        }
        Ok(())
    }
}

/// Dense row-stochastic matrix over state ids.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    size: usize,
    entries: Vec<f64>,
}

/// Row sums must be within this of 1.
pub const ROW_SUM_TOL: f64 = 1e-12;

impl TransitionMatrix {
    /// Builds from rows, checking shape and stochasticity.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for (k, row) in rows.into_iter().enumerate() {
            if row.len() != size {
                return Err(Error::Domain(format!("row {k} has {} entries, expected {size}", row.len())));
            }
            if row.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::Domain(format!("row {k} has a negative or NaN entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Domain(format!("row {k} sums to {sum}")));
            }
            entries.extend(row);
        }
        Ok(TransitionMatrix { size, entries })
    }

    pub fn identity(size: usize) -> Self {
        let mut entries = vec![0.0; size * size];
        for k in 0..size {
            entries[k * size + k] = 1.0;
        }
        TransitionMatrix { size, entries }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.size + to]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.entries[k * self.size..(k + 1) * self.size]
    }

    /// Largest deviation of a row sum from 1.
    pub fn max_row_error(&self) -> f64 {
        (0..self.size)
            .map(|k| (self.row(k).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `pᵀT`.
    pub fn left_multiply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        for (k, &pk) in p.iter().enumerate() {
            if pk == 0.0 {
                continue;
            }
            for (o, &t) in out.iter_mut().zip(self.row(k)) {
                *o += pk * t;
            }
        }
        out
    }

    /// Mixture `Σ_a w_a·T_a` of matrices with per-row weights:
    /// row `k` is `Σ_a weights[k][a]·T_a[k, ·]`.
    pub fn mix(matrices: &[TransitionMatrix], weights: &[Vec<f64>]) -> Result<Self> {
        let size = matrices.first().map_or(0, |m| m.size);
        let rows = (0..size)
            .map(|k| {
                let mut row = vec![0.0; size];
                for (t, &w) in matrices.iter().zip(&weights[k]) {
                    for (r, &x) in row.iter_mut().zip(t.row(k)) {
                        *r += w * x;
                    }
                }
                row
            })
            .collect();
        TransitionMatrix::from_rows(rows)
    }

    /// Writes the matrix as CSV with state ids as headers.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["state".to_string()];
        header.extend((0..self.size).map(|k| k.to_string()));
        w.write_record(&header)?;
        for k in 0..self.size {
            let mut rec = vec![k.to_string()];
            rec.extend(self.row(k).iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Best-reply probability for `actor`: `ϱ` if its payoff does not decrease
/// and some actor of the move strictly gains, `ε` otherwise. Payoff slices
/// are indexed by provider id.
pub fn best_reply_prob(params: &DynamicsParams, actor: usize, actors: &[usize], before: &[f64], after: &[f64]) -> Result<f64> {
    if !actors.contains(&actor) {
        return Err(Error::Domain(format!("provider {actor} is not an actor of this move")));
    }
    let someone_gains = actors.iter().any(|&i| after[i] > before[i]);
    Ok(if after[actor] >= before[actor] && someone_gains {
        params.rho
    } else {
        params.epsilon
    })
}

/// `η = Π_{i∈actors} σ·τ_i · (1−σ)^{N−|actors|}`.
pub fn transition_prob(params: &DynamicsParams, players: usize, actors: &[usize], before: &[f64], after: &[f64]) -> Result<f64> {
    if actors.is_empty() || actors.len() > players {
        return Err(Error::Domain(format!("{} actors among {players} players", actors.len())));
    }
    let mut prob = (1.0 - params.sigma).powi((players - actors.len()) as i32);
    for &i in actors {
        prob *= params.sigma * best_reply_prob(params, i, actors, before, after)?;
    }
    Ok(prob)
}

/// Transition matrix for one price action. `payoffs[k][i]` is provider
/// `i`'s Shapley payoff in state `k`.
pub fn build_transition_matrix(space: &StateSpace, payoffs: &[Vec<f64>], params: &DynamicsParams) -> Result<TransitionMatrix> {
    params.validate()?;
    let size = space.len();
    if payoffs.len() != size {
        return Err(Error::Domain(format!("{} payoff rows for {size} states", payoffs.len())));
    }
    let n = space.n();
    let mut entries = vec![0.0; size * size];
    for k in 0..size {
        let mut outflow = 0.0;
        for t in space.moves(k) {
            let eta = transition_prob(params, n, &t.actors, &payoffs[k], &payoffs[t.target])?;
            entries[k * size + t.target] += eta;
            outflow += eta;
        }
        let stay = 1.0 - outflow;
        if stay < 0.0 {
            return Err(Error::Consistency(format!(
                "state {k}: total outflow {outflow} exceeds 1 (sigma {})",
                params.sigma
            )));
        }
        entries[k * size + k] = stay;
    }
    Ok(TransitionMatrix { size, entries })
}

/// States where no merge or split leaves every actor at least as well off
/// with one actor strictly better off.
pub fn merge_split_stable_states(space: &StateSpace, payoffs: &[Vec<f64>]) -> Vec<usize> {
    (0..space.len())
        .filter(|&k| {
            space.moves(k).iter().all(|t| {
                let before = &payoffs[k];
                let after = &payoffs[t.target];
                let weakly = t.actors.iter().all(|&i| after[i] >= before[i]);
                let strictly = t.actors.iter().any(|&i| after[i] > before[i]);
                !(weakly && strictly)
            })
        })
        .collect()
}

/// A probability vector over states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub p: Vec<f64>,
}

/// Limit on `‖pᵀT − pᵀ‖∞` for an accepted stationary vector.
pub const STATIONARY_TOL: f64 = 1e-10;

impl StationaryDistribution {
    pub fn residual(&self, t: &TransitionMatrix) -> f64 {
        t.left_multiply(&self.p)
            .iter()
            .zip(&self.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Expectation of a per-state quantity.
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.p.iter().zip(values).map(|(p, v)| p * v).sum()
    }
}

/// Solves `pᵀ(T − I) = 0, Σp = 1` on the sub-chain `states`, which must be
/// closed.
fn solve_closed(t: &TransitionMatrix, states: &[usize]) -> Result<Vec<f64>> {
    let m = states.len();
    if m == 1 {
        return Ok(vec![1.0]);
    }
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (r, &to) in states.iter().enumerate() {
        for (c, &from) in states.iter().enumerate() {
            a[(r, c)] = t.get(from, to) - if r == c { 1.0 } else { 0.0 };
        }
    }
    for c in 0..m {
        a[(m - 1, c)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[m - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numeric {
            message: "singular stationary system".into(),
            residual: f64::INFINITY,
        })?;
    Ok(x.iter().copied().collect())
}

/// Stationary distribution of `t`.
///
/// A chain with a single closed class is solved directly. With several
/// closed classes the chain has many stationary vectors; the one returned is
/// the limit reached from the uniform initial distribution: each closed
/// class receives the uniform mass of its own states plus the mass that the
/// transient states are absorbed into it with.
pub fn stationary_distribution(t: &TransitionMatrix) -> Result<StationaryDistribution> {
    let n = t.size();
    if n == 0 {
        return Err(Error::Domain("empty chain".into()));
    }
    let classes = ergodic_sets(t);
    let mut p = vec![0.0; n];
    if classes.len() == 1 {
        let all: Vec<usize> = (0..n).collect();
        p = solve_closed(t, &all)?;
    } else {
        let mut class_of = vec![usize::MAX; n];
        for (c, class) in classes.iter().enumerate() {
            for &k in class {
                class_of[k] = c;
            }
        }
        let transient: Vec<usize> = (0..n).filter(|&k| class_of[k] == usize::MAX).collect();
        let mut weight: Vec<f64> = classes.iter().map(|c| c.len() as f64).collect();
        if !transient.is_empty() {
            let m = transient.len();
            let mut a = DMatrix::<f64>::identity(m, m);
            for (r, &i) in transient.iter().enumerate() {
                for (c, &j) in transient.iter().enumerate() {
                    a[(r, c)] -= t.get(i, j);
                }
            }
            let mut rhs = DMatrix::<f64>::zeros(m, classes.len());
            for (r, &i) in transient.iter().enumerate() {
                for (k, &x) in t.row(i).iter().enumerate() {
                    if class_of[k] != usize::MAX {
                        rhs[(r, class_of[k])] += x;
                    }
                }
            }
            let absorbed = a.lu().solve(&rhs).ok_or_else(|| Error::Numeric {
                message: "singular absorption system".into(),
                residual: f64::INFINITY,
            })?;
            for (c, w) in weight.iter_mut().enumerate() {
                *w += absorbed.column(c).sum();
            }
        }
        for (class, w) in classes.iter().zip(&weight) {
            let local = solve_closed(t, class)?;
            for (&k, x) in class.iter().zip(local) {
                p[k] = w / n as f64 * x;
            }
        }
    }
    for x in p.iter_mut() {
        if *x < 0.0 && *x > -1e-12 {
            *x = 0.0;
        }
    }
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= sum);
    let dist = StationaryDistribution { p };
    let residual = dist.residual(t);
    if residual > STATIONARY_TOL || dist.p.iter().any(|x| *x < 0.0) {
        return Err(Error::Numeric {
            message: "stationary solve did not converge".into(),
            residual,
        });
    }
    Ok(dist)
}

/// Iterates `pᵀ ← pᵀT` from `start` until the step change drops below `tol`.
pub fn power_iteration(t: &TransitionMatrix, start: &[f64], max_iter: usize, tol: f64) -> Result<StationaryDistribution> {
    let mut p = start.to_vec();
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        let next = t.left_multiply(&p);
        change = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        p = next;
        if change <= tol {
            return Ok(StationaryDistribution { p });
        }
    }
    Err(Error::Numeric {
        message: format!("power iteration did not converge in {max_iter} steps"),
        residual: change,
    })
}

/// States whose diagonal entry is 1.
pub fn absorbing_states(t: &TransitionMatrix) -> Vec<usize> {
    (0..t.size())
        .filter(|&k| (t.get(k, k) - 1.0).abs() <= ROW_SUM_TOL)
        .collect()
}

/// Minimal closed sets of states, each sorted, ordered by smallest member.
pub fn ergodic_sets(t: &TransitionMatrix) -> Vec<Vec<usize>> {
    let n = t.size();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * 4);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for k in 0..n {
        for (j, &x) in t.row(k).iter().enumerate() {
            if j != k && x > 0.0 {
                graph.add_edge(nodes[k], nodes[j], ());
            }
        }
    }
    let mut component = vec![0usize; n];
    let sccs = tarjan_scc(&graph);
    for (c, scc) in sccs.iter().enumerate() {
        for node in scc {
            component[node.index()] = c;
        }
    }
    let mut closed: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(c, scc)| {
            scc.iter().all(|node| {
                let k = node.index();
                t.row(k)
                    .iter()
                    .enumerate()
                    .all(|(j, &x)| x == 0.0 || component[j] == *c)
            })
        })
        .map(|(_, scc)| {
            let mut states: Vec<usize> = scc.iter().map(|v| v.index()).collect();
            states.sort_unstable();
            states
        })
        .collect();
    closed.sort();
    closed
}
