//! Dense two-phase primal simplex.
//!
//! Pivoting uses Bland's rule throughout: the entering column is the lowest
//! index with a positive reduced cost and the leaving row is the one with the
//! lowest basic-variable index among minimum-ratio ties. Rows whose pivot
//! element is tiny next to the column's largest entry, or next to the largest
//! tied entry, are not candidates. The solver keeps an explicit basis
//! inverse, updated per pivot and rebuilt by Gauss-Jordan elimination every
//! few pivots; basic values and duals are recomputed from it each iteration.
//! Rows and columns are equilibrated before solving.
//!
//! Solves run in `f64` first. A singular or badly conditioned basis, a
//! revisited basis or an exhausted pivot budget reruns the solve in
//! double-double arithmetic.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Entering threshold on reduced costs.
pub const REDUCED_COST_TOL: f64 = 1e-9;
/// Reduced costs must also exceed this many units of roundoff times
/// `Σ|a_ij·y_i|`, the rounding scale of `c_j − yᵀA_j`.
const DUAL_NOISE_ULPS: f64 = 100.0;
/// Largest condition estimate times unit roundoff a basis may reach.
const CONDITION_LIMIT: f64 = 1e-4;
/// Pivot elements at or below this are treated as zero.
const PIVOT_TOL: f64 = 1e-9;
/// Pivot elements must also reach this fraction of the entering column's
/// largest entry.
const RELATIVE_PIVOT_TOL: f64 = 1e-6;
/// Among tied rows, only those whose pivot element is at least this
/// fraction of the largest tied element are candidates.
const TIE_PIVOT_FRACTION: f64 = 0.5;
/// Phase-one residual above this means the program is infeasible.
const FEASIBILITY_TOL: f64 = 1e-8;
/// Smallest entry that can move a leftover artificial out of the basis.
const DRIVE_OUT_TOL: f64 = 1e-9;
/// Smallest element a start basis may pivot on.
const CRASH_PIVOT_TOL: f64 = 1e-12;
/// Negative basic values a start basis may carry; they are clamped to zero.
const CRASH_FEAS_TOL: f64 = 1e-9;
/// Pivots between refactorizations of the basis inverse.
const REFACTOR_EVERY: usize = 50;

/// `maximize cᵀx` subject to equality, `≤` and `≥` rows and per-variable
/// bounds. Lower bounds default to 0 and may be `-∞`; upper bounds default
/// to `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub ub_rows: Vec<Vec<f64>>,
    pub ub_rhs: Vec<f64>,
    pub lb_rows: Vec<Vec<f64>>,
    pub lb_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// A program over `n` nonnegative variables with no rows.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            ub_rows: Vec::new(),
            ub_rhs: Vec::new(),
            lb_rows: Vec::new(),
            lb_rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.ub_rows.push(row);
        self.ub_rhs.push(rhs);
    }

    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) {
        self.lb_rows.push(row);
        self.lb_rhs.push(rhs);
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let groups = [
            ("eq", &self.eq_rows, &self.eq_rhs),
            ("ub", &self.ub_rows, &self.ub_rhs),
            ("lb", &self.lb_rows, &self.lb_rhs),
        ];
        for (name, rows, rhs) in groups {
            if rows.len() != rhs.len() {
                return Err(Error::Domain(format!("{name}: {} rows but {} right-hand sides", rows.len(), rhs.len())));
            }
            for (k, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::Domain(format!("{name} row {k} has {} coefficients, expected {n}", row.len())));
                }
                if row.iter().any(|x| !x.is_finite()) || !rhs[k].is_finite() {
                    return Err(Error::Domain(format!("{name} row {k} has a non-finite entry")));
                }
            }
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Domain("bound vectors do not match the variable count".into()));
        }
        if self.objective.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("objective has a non-finite coefficient".into()));
        }
        if self.lower.iter().any(|l| l.is_nan() || *l == f64::INFINITY)
            || self.upper.iter().any(|u| u.is_nan() || *u == f64::NEG_INFINITY)
        {
            return Err(Error::Domain("invalid variable bound".into()));
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let mut worst = 0.0f64;
        for (row, b) in self.eq_rows.iter().zip(&self.eq_rhs) {
            worst = worst.max((dot(row) - b).abs());
        }
        for (row, b) in self.ub_rows.iter().zip(&self.ub_rhs) {
            worst = worst.max(dot(row) - b);
        }
        for (row, b) in self.lb_rows.iter().zip(&self.lb_rhs) {
            worst = worst.max(b - dot(row));
        }
        for (i, &xi) in x.iter().enumerate() {
            worst = worst.max(self.lower[i] - xi).max(xi - self.upper[i]);
        }
        worst
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point; empty unless optimal.
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// `c_j − yᵀA_j` per original variable at the final basis.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    fn terminal(status: LpStatus, iterations: usize) -> Self {
        let objective_value = match status {
            LpStatus::Unbounded => f64::INFINITY,
            _ => f64::NEG_INFINITY,
        };
        LpSolution {
            status,
            x: Vec::new(),
            objective_value,
            reduced_costs: Vec::new(),
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// How an original variable maps onto standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + col`.
    Shifted { col: usize, offset: f64 },
    /// `x = plus − minus`.
    Free { plus: usize, minus: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Sense {
    Le,
    Ge,
    Eq,
}

/// Standard form `max cᵀx, Ax (sense) b, x ≥ 0` over structural columns.
struct StandardForm {
    rows: Vec<Vec<f64>>,
    senses: Vec<Sense>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    map: Vec<VarMap>,
    /// Column `c` holds `col_scale[c]` units of the unscaled column.
    col_scale: Vec<f64>,
}

/// Scales every row to unit max-norm, then every column likewise.
fn equilibrate(rows: &mut [Vec<f64>], rhs: &mut [f64], cost: &mut [f64]) -> Vec<f64> {
    for (row, b) in rows.iter_mut().zip(rhs.iter_mut()) {
        let m = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if m > 0.0 {
            row.iter_mut().for_each(|x| *x /= m);
            *b /= m;
        }
    }
    let ncols = cost.len();
    let mut scale = vec![1.0; ncols];
    for (c, s) in scale.iter_mut().enumerate() {
        let m = rows.iter().fold(0.0f64, |m, row| m.max(row[c].abs()));
        if m > 0.0 {
            *s = 1.0 / m;
        }
    }
    for row in rows.iter_mut() {
        row.iter_mut().zip(&scale).for_each(|(x, s)| *x *= s);
    }
    cost.iter_mut().zip(&scale).for_each(|(x, s)| *x *= s);
    scale
}

fn standardize(lp: &LinearProgram) -> StandardForm {
    let n = lp.num_vars();
    let mut map = Vec::with_capacity(n);
    let mut ncols = 0;
    for i in 0..n {
        if lp.lower[i] == f64::NEG_INFINITY {
            map.push(VarMap::Free { plus: ncols, minus: ncols + 1 });
            ncols += 2;
        } else {
            map.push(VarMap::Shifted { col: ncols, offset: lp.lower[i] });
            ncols += 1;
        }
    }
    let expand = |row: &[f64]| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; ncols];
        let mut shift = 0.0;
        for (i, &a) in row.iter().enumerate() {
            match map[i] {
                VarMap::Shifted { col, offset } => {
                    out[col] = a;
                    shift += a * offset;
                }
                VarMap::Free { plus, minus } => {
                    out[plus] = a;
                    out[minus] = -a;
                }
            }
        }
        (out, shift)
    };
    let mut rows = Vec::new();
    let mut senses = Vec::new();
    let mut rhs = Vec::new();
    let groups = [
        (Sense::Eq, &lp.eq_rows, &lp.eq_rhs),
        (Sense::Le, &lp.ub_rows, &lp.ub_rhs),
        (Sense::Ge, &lp.lb_rows, &lp.lb_rhs),
    ];
    for (sense, rs, bs) in groups {
        for (row, b) in rs.iter().zip(bs) {
            let (r, shift) = expand(row);
            rows.push(r);
            senses.push(sense);
            rhs.push(b - shift);
        }
    }
    for i in 0..n {
        if lp.upper[i].is_finite() {
            let mut unit = vec![0.0; n];
            unit[i] = 1.0;
            let (r, shift) = expand(&unit);
            rows.push(r);
            senses.push(Sense::Le);
            rhs.push(lp.upper[i] - shift);
        }
    }
    let (mut cost, _) = expand(&lp.objective);
    let col_scale = equilibrate(&mut rows, &mut rhs, &mut cost);
    StandardForm {
        rows,
        senses,
        rhs,
        cost,
        map,
        col_scale,
    }
}

/// Arithmetic the simplex runs in.
trait Real:
    Copy
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Unit roundoff.
    const UNIT: f64;
    /// Ratios this close count as tied.
    const RATIO_TIE: f64;
    fn of(x: f64) -> Self;
    fn f64(self) -> f64;
    fn magnitude(self) -> Self;
    fn quot(self, rhs: Self) -> Self;
}

impl Real for f64 {
    const UNIT: f64 = f64::EPSILON / 2.0;
    const RATIO_TIE: f64 = 1e-12;
    fn of(x: f64) -> Self {
        x
    }
    fn f64(self) -> f64 {
        self
    }
    fn magnitude(self) -> Self {
        self.abs()
    }
    fn quot(self, rhs: Self) -> Self {
        self / rhs
    }
}

impl Real for TwoFloat {
    const UNIT: f64 = f64::EPSILON * f64::EPSILON / 4.0;
    const RATIO_TIE: f64 = 1e-28;
    fn of(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn f64(self) -> f64 {
        self.hi() + self.lo()
    }
    fn magnitude(self) -> Self {
        self.abs()
    }
    /// Long division with two correction steps; the library quotient
    /// loses the low word.
    fn quot(self, rhs: Self) -> Self {
        let d = rhs.hi();
        let q1 = self.hi() / d;
        let r = self - rhs * q1;
        let q2 = r.hi() / d;
        let r = r - rhs * q2;
        let q3 = r.hi() / d;
        TwoFloat::from(q1) + q2 + q3
    }
}

/// Row-major dense matrix.
#[derive(Clone)]
struct Dense<T> {
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Dense<T> {
    fn zeros(rows: usize, cols: usize) -> Self {
        Dense { cols, data: vec![T::of(0.0); rows * cols] }
    }

    fn identity(n: usize) -> Self {
        let mut d = Dense::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = T::of(1.0);
        }
        d
    }

    fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    /// Subtracts `f` times row `src` from row `dst`, over columns `from..`.
    fn axpy_row(&mut self, dst: usize, src: usize, f: T, from: usize) {
        let w = self.cols;
        for c in from..w {
            let v = self.data[src * w + c];
            self.data[dst * w + c] = self.data[dst * w + c] - f * v;
        }
    }

    /// Largest absolute row sum.
    fn norm_inf(&self) -> f64 {
        self.data.chunks(self.cols.max(1)).map(|r| r.iter().map(|v| v.f64().abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

impl<T> Index<(usize, usize)> for Dense<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Dense<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

/// Sparse column: `(row, value)` pairs.
type Column<T> = Vec<(usize, T)>;

/// Revised simplex state over the standard-form columns: structural, then
/// one slack or surplus per inequality row, then one artificial per row.
struct Revised<T> {
    a: Vec<Column<T>>,
    b: Vec<T>,
    basis: Vec<usize>,
    binv: Dense<T>,
    since_refactor: usize,
}

fn numeric(message: impl Into<String>, residual: f64) -> Error {
    Error::Numeric { message: message.into(), residual }
}

impl<T: Real> Revised<T> {
    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn width(&self) -> usize {
        self.a.len()
    }

    /// Recomputes `B⁻¹` from the original columns by Gauss-Jordan
    /// elimination with partial pivoting. Fails on a basis whose condition
    /// estimate is beyond what `T` resolves.
    fn refactor(&mut self) -> Result<()> {
        let m = self.rows();
        let mut lhs = Dense::zeros(m, m);
        for (j, &c) in self.basis.iter().enumerate() {
            for &(i, v) in &self.a[c] {
                lhs[(i, j)] = v;
            }
        }
        let norm = lhs.norm_inf();
        let mut inv = Dense::<T>::identity(m);
        for col in 0..m {
            let p = (col..m)
                .max_by(|&i, &j| lhs[(i, col)].magnitude().partial_cmp(&lhs[(j, col)].magnitude()).expect("finite entries"))
                .expect("nonempty range");
            if lhs[(p, col)].f64() == 0.0 {
                return Err(numeric("basis matrix became singular", 0.0));
            }
            lhs.swap_rows(p, col);
            inv.swap_rows(p, col);
            let d = lhs[(col, col)];
            for c in col..m {
                lhs[(col, c)] = lhs[(col, c)].quot(d);
            }
            for c in 0..m {
                inv[(col, c)] = inv[(col, c)].quot(d);
            }
            for i in 0..m {
                let f = lhs[(i, col)];
                if i != col && f.f64() != 0.0 {
                    lhs.axpy_row(i, col, f, col);
                    inv.axpy_row(i, col, f, 0);
                }
            }
        }
        let condition = norm * inv.norm_inf();
        if !(condition * T::UNIT <= CONDITION_LIMIT) {
            return Err(numeric("basis matrix is too ill-conditioned", condition));
        }
        self.binv = inv;
        self.since_refactor = 0;
        Ok(())
    }

    fn basic_values(&self) -> Vec<T> {
        (0..self.rows()).map(|r| dot(self.binv.row(r), &self.b)).collect()
    }

    fn duals(&self, cost: &[f64]) -> Vec<T> {
        let m = self.rows();
        let mut y = vec![T::of(0.0); m];
        for (i, &c) in self.basis.iter().enumerate() {
            if cost[c] != 0.0 {
                let cb = T::of(cost[c]);
                for (k, &v) in self.binv.row(i).iter().enumerate() {
                    y[k] = y[k] + cb * v;
                }
            }
        }
        y
    }

    /// `c_j − yᵀA_j` and the rounding scale `Σ|a_ij·y_i|` of the product.
    fn reduced_cost(&self, cost: &[f64], y: &[T], j: usize) -> (f64, f64) {
        let (d, scale) = self.a[j].iter().fold((T::of(0.0), 0.0), |(d, s), &(i, a)| {
            let t = a * y[i];
            (d + t, s + t.f64().abs())
        });
        ((T::of(cost[j]) - d).f64(), scale)
    }

    /// Whether column `j` improves the objective by more than rounding.
    fn improves(&self, cost: &[f64], y: &[T], j: usize) -> bool {
        let (rc, scale) = self.reduced_cost(cost, y, j);
        rc > REDUCED_COST_TOL.max(DUAL_NOISE_ULPS * T::UNIT * scale)
    }

    /// `B⁻¹A_j`.
    fn transformed(&self, j: usize) -> Vec<T> {
        (0..self.rows())
            .map(|r| {
                let row = self.binv.row(r);
                self.a[j].iter().fold(T::of(0.0), |s, &(k, v)| s + row[k] * v)
            })
            .collect()
    }

    /// Replaces the basic column of row `r` by `enter`, whose transformed
    /// column is `alpha`.
    fn pivot(&mut self, r: usize, enter: usize, alpha: &[T]) {
        let m = self.rows();
        let p = alpha[r];
        for c in 0..m {
            self.binv[(r, c)] = self.binv[(r, c)].quot(p);
        }
        for (i, &f) in alpha.iter().enumerate() {
            if i != r && f.f64() != 0.0 {
                self.binv.axpy_row(i, r, f, 0);
            }
        }
        self.basis[r] = enter;
        self.since_refactor += 1;
    }

    fn drop_row(&mut self, r: usize) -> Result<()> {
        for col in self.a.iter_mut() {
            col.retain(|&(i, _)| i != r);
            for (i, _) in col.iter_mut() {
                if *i > r {
                    *i -= 1;
                }
            }
        }
        self.b.remove(r);
        self.basis.remove(r);
        self.refactor()
    }

    /// Runs Bland-rule iterations on nonbasic columns `< limit` against
    /// `cost`. Returns false if the program is unbounded. Once a basis
    /// repeats, the pivot filters are dropped and plain Bland pivoting
    /// continues.
    fn optimize(&mut self, cost: &[f64], limit: usize, iterations: &mut usize, cap: usize) -> Result<bool> {
        let mut is_basic = vec![false; self.width()];
        let mut seen = HashSet::new();
        let mut strict = false;
        loop {
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let mut sorted = self.basis.clone();
            sorted.sort_unstable();
            let mut h = DefaultHasher::new();
            sorted.hash(&mut h);
            if !seen.insert(h.finish()) {
                if strict {
                    return Err(numeric("simplex revisited a basis", 0.0));
                }
                strict = true;
                seen.clear();
                seen.insert(h.finish());
            }
            is_basic.iter_mut().for_each(|x| *x = false);
            for &c in &self.basis {
                is_basic[c] = true;
            }
            let y = self.duals(cost);
            let Some(enter) = (0..limit).find(|&j| !is_basic[j] && self.improves(cost, &y, j)) else {
                return Ok(true);
            };
            let alpha: Vec<f64> = self.transformed(enter).into_iter().map(T::f64).collect();
            let largest = alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min_pivot = if strict { PIVOT_TOL } else { PIVOT_TOL.max(RELATIVE_PIVOT_TOL * largest) };
            let fraction = if strict { 0.0 } else { TIE_PIVOT_FRACTION };
            let x = self.basic_values();
            let ratio = |r: usize| x[r].f64().max(0.0) / alpha[r];
            let eligible: Vec<usize> = (0..self.rows()).filter(|&r| alpha[r] > min_pivot).collect();
            let best = eligible.iter().map(|&r| ratio(r)).fold(f64::INFINITY, f64::min);
            let tied: Vec<usize> = eligible.into_iter().filter(|&r| ratio(r) <= best + T::RATIO_TIE).collect();
            let strongest = tied.iter().map(|&r| alpha[r]).fold(0.0, f64::max);
            let leave = tied.into_iter().filter(|&r| alpha[r] >= fraction * strongest).min_by_key(|&r| self.basis[r]);
            let Some(r) = leave else {
                return Ok(false);
            };
            let alpha = self.transformed(enter);
            self.pivot(r, enter, &alpha);
            *iterations += 1;
            if *iterations > cap {
                return Err(numeric(format!("simplex exceeded {cap} pivots"), 0.0));
            }
        }
    }

    /// Makes `cols` basic in place of the artificials of equality rows,
    /// assigning rows by partial pivoting, then gives every other row whose
    /// basic value came out negative its `repair` column instead: the
    /// surplus of a satisfied `≥` row or the artificial of an overshot `≤`
    /// row. Leaves the basis untouched and returns false if the hinted basis
    /// is singular or infeasible; an ill-conditioned hint is an error.
    fn crash(&mut self, cols: &[usize], first_art: usize, on_eq: &[bool], repair: &[Option<usize>]) -> Result<bool> {
        let saved = self.basis.clone();
        let rows: Vec<usize> = (0..self.rows()).filter(|&r| on_eq[r] && self.basis[r] >= first_art).collect();
        let mut slot = vec![None; self.rows()];
        for (i, &r) in rows.iter().enumerate() {
            slot[r] = Some(i);
        }
        let mut work = Dense::<f64>::zeros(rows.len(), cols.len());
        for (j, &c) in cols.iter().enumerate() {
            for &(r, v) in &self.a[c] {
                if let Some(i) = slot[r] {
                    work[(i, j)] = v.f64();
                }
            }
        }
        let mut free = vec![true; rows.len()];
        for (j, &c) in cols.iter().enumerate() {
            let mut best: Option<(usize, f64)> = None;
            for i in (0..rows.len()).filter(|&i| free[i]) {
                let v = work[(i, j)].abs();
                if v > best.map_or(CRASH_PIVOT_TOL, |b| b.1) {
                    best = Some((i, v));
                }
            }
            let Some((p, _)) = best else {
                self.basis = saved;
                return Ok(false);
            };
            free[p] = false;
            for i in (0..rows.len()).filter(|&i| free[i]) {
                let f = work[(i, j)] / work[(p, j)];
                if f != 0.0 {
                    work.axpy_row(i, p, f, j);
                }
            }
            self.basis[rows[p]] = c;
        }
        let x = match self.refactor() {
            Ok(()) => self.basic_values(),
            Err(e) => return self.restore(saved, e),
        };
        let mut swapped = false;
        for r in 0..self.rows() {
            if !cols.contains(&self.basis[r]) && x[r].f64() < 0.0 {
                if let Some(c) = repair[r] {
                    self.basis[r] = c;
                    swapped = true;
                }
            }
        }
        if swapped {
            if let Err(e) = self.refactor() {
                return self.restore(saved, e);
            }
        }
        if self.basic_values().iter().any(|v| v.f64() < -CRASH_FEAS_TOL) {
            self.basis = saved;
            self.refactor()?;
            return Ok(false);
        }
        Ok(true)
    }

    /// Puts back `saved` after a failed crash refactorization. Singular
    /// hints are dropped; ill-conditioned ones propagate `err`.
    fn restore(&mut self, saved: Vec<usize>, err: Error) -> Result<bool> {
        self.basis = saved;
        self.refactor()?;
        match err {
            Error::Numeric { residual, .. } if residual > 0.0 => Err(err),
            _ => Ok(false),
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::of(0.0), |s, (&x, &y)| s + x * y)
}

/// Solves `lp`. Infeasible and unbounded programs are reported through the
/// status; malformed input is an error.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    solve_with_start(lp, &[])
}

/// Like [`solve`], but starts from a basis containing the listed
/// variables. A good start is a set of variables whose columns are
/// independent on the equality rows and nonnegative at the resulting basic
/// solution; otherwise the hint is ignored. Free variables in the hint are
/// skipped.
pub fn solve_with_start(lp: &LinearProgram, start: &[usize]) -> Result<LpSolution> {
    lp.validate()?;
    if let Some(&v) = start.iter().find(|&&v| v >= lp.num_vars()) {
        return Err(Error::Domain(format!("start variable {v} does not exist")));
    }
    if lp.lower.iter().zip(&lp.upper).any(|(l, u)| l > u) {
        return Ok(LpSolution::terminal(LpStatus::Infeasible, 0));
    }
    let sf = standardize(lp);
    match run::<f64>(lp, &sf, start) {
        Err(Error::Numeric { message, .. }) => {
            log::debug!("retrying in double-double precision: {message}");
            run::<TwoFloat>(lp, &sf, start)
        }
        other => other,
    }
}

/// Solves in double-double precision regardless of conditioning.
#[cfg(test)]
fn solve_extended(lp: &LinearProgram, start: &[usize]) -> Result<LpSolution> {
    run::<TwoFloat>(lp, &standardize(lp), start)
}

fn run<T: Real>(lp: &LinearProgram, sf: &StandardForm, start: &[usize]) -> Result<LpSolution> {
    let m = sf.rows.len();
    let ns = sf.cost.len();

    let mut slack_of = vec![None; m];
    let mut art_of = vec![None; m];
    let mut next = ns;
    let mut signs = vec![1.0; m];
    let mut senses = sf.senses.clone();
    for r in 0..m {
        if sf.rhs[r] < 0.0 {
            signs[r] = -1.0;
            senses[r] = match senses[r] {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        if senses[r] != Sense::Eq {
            slack_of[r] = Some(next);
            next += 1;
        }
    }
    // Artificials of `≤` rows enter with coefficient −1 and are only used
    // by a start basis that overshoots the row.
    let first_art = next;
    for a in art_of.iter_mut() {
        *a = Some(next);
        next += 1;
    }
    let width = next;
    let mut a: Vec<Column<T>> = vec![Vec::new(); width];
    let mut basis = vec![0; m];
    for r in 0..m {
        for (c, &v) in sf.rows[r].iter().enumerate() {
            if v != 0.0 {
                a[c].push((r, T::of(signs[r] * v)));
            }
        }
        if let Some(c) = slack_of[r] {
            a[c].push((r, T::of(if senses[r] == Sense::Le { 1.0 } else { -1.0 })));
        }
        let art = art_of[r].expect("every row has an artificial");
        if senses[r] == Sense::Le {
            a[art].push((r, T::of(-1.0)));
            basis[r] = slack_of[r].expect("inequality rows have a slack");
        } else {
            a[art].push((r, T::of(1.0)));
            basis[r] = art;
        }
    }
    let b = (0..m).map(|r| T::of(signs[r] * sf.rhs[r])).collect();
    let mut rs = Revised {
        a,
        b,
        basis,
        binv: Dense::identity(m),
        since_refactor: 0,
    };
    let cap = 200 * (m + width).max(100);
    let mut iterations = 0;

    let start_cols: Vec<usize> = start
        .iter()
        .filter_map(|&v| match sf.map[v] {
            VarMap::Shifted { col, .. } => Some(col),
            VarMap::Free { .. } => None,
        })
        .collect();
    if !start_cols.is_empty() {
        let on_eq: Vec<bool> = senses.iter().map(|&x| x == Sense::Eq).collect();
        // Column that turns a negative basic value of each row positive.
        let repair: Vec<Option<usize>> = (0..m)
            .map(|r| match senses[r] {
                Sense::Ge => slack_of[r],
                Sense::Le => art_of[r],
                Sense::Eq => None,
            })
            .collect();
        rs.crash(&start_cols, first_art, &on_eq, &repair)?;
    }

    // Phase one: drive the artificials to zero. Artificials that leave the
    // basis never return.
    if rs.basis.iter().any(|&c| c >= first_art) {
        let mut phase1 = vec![0.0; width];
        for c in phase1.iter_mut().skip(first_art) {
            *c = -1.0;
        }
        rs.optimize(&phase1, first_art, &mut iterations, cap)?;
        let x = rs.basic_values();
        let residual: f64 =
            rs.basis.iter().zip(&x).filter(|(&c, _)| c >= first_art).map(|(_, v)| v.f64().max(0.0)).sum();
        if residual > FEASIBILITY_TOL {
            return Ok(LpSolution::terminal(LpStatus::Infeasible, iterations));
        }
        // Pivot remaining artificials out; rows where that is impossible
        // are redundant.
        let mut r = 0;
        while r < rs.rows() {
            if rs.basis[r] < first_art {
                r += 1;
                continue;
            }
            let row = rs.binv.row(r).to_vec();
            let entry = |c: usize| rs.a[c].iter().fold(T::of(0.0), |s, &(k, v)| s + row[k] * v).f64();
            let enter = (0..first_art).find(|&c| !rs.basis.contains(&c) && entry(c).abs() > DRIVE_OUT_TOL);
            match enter {
                Some(c) => {
                    let alpha = rs.transformed(c);
                    rs.pivot(r, c, &alpha);
                    iterations += 1;
                    r += 1;
                }
                None => rs.drop_row(r)?,
            }
        }
        rs.refactor()?;
    }

    let mut cost = vec![0.0; width];
    cost[..ns].copy_from_slice(&sf.cost);
    if !rs.optimize(&cost, first_art, &mut iterations, cap)? {
        return Ok(LpSolution::terminal(LpStatus::Unbounded, iterations));
    }
    rs.refactor()?;

    let x = rs.basic_values();
    let y = rs.duals(&cost);
    let mut z = vec![0.0; first_art];
    for (r, &c) in rs.basis.iter().enumerate() {
        z[c] = x[r].f64().max(0.0);
    }
    let mut reduced: Vec<f64> = (0..first_art).map(|j| rs.reduced_cost(&cost, &y, j).0).collect();
    for &c in &rs.basis {
        reduced[c] = 0.0;
    }
    for c in 0..ns {
        z[c] *= sf.col_scale[c];
        reduced[c] /= sf.col_scale[c];
    }
    let x: Vec<f64> = sf
        .map
        .iter()
        .map(|v| match *v {
            VarMap::Shifted { col, offset } => offset + z[col],
            VarMap::Free { plus, minus } => z[plus] - z[minus],
        })
        .collect();
    let reduced_costs = sf
        .map
        .iter()
        .map(|v| match *v {
            VarMap::Shifted { col, .. } => reduced[col],
            VarMap::Free { plus, .. } => reduced[plus],
        })
        .collect();
    let objective_value = lp.objective_at(&x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective_value,
        reduced_costs,
        iterations,
    })
}
