//! Exact counts `N_t(n,p)` of t-ary trees with `n` nodes and path length
//! `p`, and the path-length marginals `T_t(p)`.
//!
//! Two independent backends produce the same numbers: [`build_table`], a
//! dynamic program over subtree sizes, and [`build_series`], fixed-point
//! iteration of the bivariate generating function.

mod persist;
mod series;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{check_arity, Error, Result};
use crate::formulas::{self, alpha, catalan_t, ln_big, max_nodes_for_path_length};

pub use persist::{load_or_build, CacheOutcome, TABLE_FORMAT};
pub use series::{build_series, build_series_with, SeriesTable};

/// Default cap on the estimated memory footprint of a table build.
pub const DEFAULT_MEMORY_CAP: u64 = 4 << 30;

#[derive(Clone, Copy, Debug)]
pub struct TableLimits {
    pub memory_bytes: u64,
}

impl Default for TableLimits {
    fn default() -> Self {
        TableLimits {
            memory_bytes: DEFAULT_MEMORY_CAP,
        }
    }
}

/// `N_t(n,p)` for every `n <= n_max` and `p <= p_limit`, where `n_max` is the
/// largest node count that admits a path length within the limit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    t: usize,
    p_limit: usize,
    // rows[n][p]; rows[0] is the empty tree and never enters a marginal
    rows: Vec<Vec<BigUint>>,
    marginals: Vec<BigUint>,
}

impl CountTable {
    fn from_rows(t: usize, p_limit: usize, rows: Vec<Vec<BigUint>>) -> CountTable {
        let mut marginals = vec![BigUint::zero(); p_limit + 1];
        for row in rows.iter().skip(1) {
            for (m, c) in marginals.iter_mut().zip(row) {
                *m += c;
            }
        }
        CountTable {
            t,
            p_limit,
            rows,
            marginals,
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn p_limit(&self) -> usize {
        self.p_limit
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    fn check_p(&self, p: usize) -> Result<()> {
        if p > self.p_limit {
            return Err(Error::OutOfRange(format!(
                "path length {p} beyond table limit {}",
                self.p_limit
            )));
        }
        Ok(())
    }

    /// Number of `[t,n,p]` trees. `n = 0` is the empty tree.
    pub fn count_np(&self, n: usize, p: usize) -> Result<BigUint> {
        self.check_p(p)?;
        Ok(self
            .rows
            .get(n)
            .map(|row| row[p].clone())
            .unwrap_or_default())
    }

    /// `T_t(p)`, the number of non-empty trees with path length `p`.
    pub fn count_p(&self, p: usize) -> Result<&BigUint> {
        self.check_p(p)?;
        Ok(&self.marginals[p])
    }

    pub fn marginals(&self) -> &[BigUint] {
        &self.marginals
    }

    /// Counts by path length for trees of `n` nodes, truncated at `p_limit`.
    pub fn row(&self, n: usize) -> Option<&[BigUint]> {
        self.rows.get(n).map(Vec::as_slice)
    }

    /// Whether every `[t,n]` tree has a path length within the table.
    pub fn covers_row(&self, n: usize) -> bool {
        n <= self.n_max() && formulas::p_max(n) <= self.p_limit
    }

    pub fn row_sum(&self, n: usize) -> BigUint {
        self.row(n).map(|r| r.iter().sum()).unwrap_or_default()
    }

    /// Nonzero `(n, p, count)` cells with `n >= 1`, sorted by `(n, p)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &BigUint)> {
        self.rows.iter().enumerate().skip(1).flat_map(|(n, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(move |(p, c)| (n, p, c))
        })
    }

    /// Per-node-count breakdown of `T_t(p)`.
    pub fn breakdown(&self, p: usize) -> Result<Vec<(usize, BigUint)>> {
        self.check_p(p)?;
        Ok(self
            .rows
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, row)| !row[p].is_zero())
            .map(|(n, row)| (n, row[p].clone()))
            .collect())
    }

    /// Recomputes the table for a larger limit and checks that every cell
    /// already present is reproduced.
    pub fn extend(&self, p_limit: usize) -> Result<CountTable> {
        self.extend_with(p_limit, &TableLimits::default())
    }

    pub fn extend_with(&self, p_limit: usize, limits: &TableLimits) -> Result<CountTable> {
        if p_limit <= self.p_limit {
            return Ok(self.clone());
        }
        let bigger = build_table_with(self.t, p_limit, limits)?;
        for (n, p, c) in self.entries() {
            if bigger.rows[n][p] != *c {
                return Err(Error::Invariant(format!(
                    "cached N({n},{p}) = {c} differs from recomputed {}",
                    bigger.rows[n][p]
                )));
            }
        }
        Ok(bigger)
    }

    /// Mean path length over all `[t,q]` trees, from the table row.
    pub fn average_path_length(&self, q: usize) -> Result<f64> {
        if q == 0 || !self.covers_row(q) {
            return Err(Error::OutOfRange(format!(
                "row {q} is not fully covered by a table with p_limit {}",
                self.p_limit
            )));
        }
        let total: BigUint = self.rows[q]
            .iter()
            .enumerate()
            .map(|(p, c)| c * p)
            .sum();
        Ok((ln_big(&total) - ln_big(&catalan_t(self.t, q))).exp())
    }
}

/// `r(p) = ln T_t(p) ln p / (alpha p)`, which tends to 1.
pub fn theorem1_ratio(table: &CountTable, p: usize) -> Result<f64> {
    if p < 2 {
        return Err(Error::Domain(format!("ratio needs p >= 2, got {p}")));
    }
    let count = table.count_p(p)?;
    let pf = p as f64;
    Ok(ln_big(count) * pf.ln() / (alpha(table.t) * pf))
}

pub fn build_table(t: usize, p_limit: usize) -> Result<CountTable> {
    build_table_with(t, p_limit, &TableLimits::default())
}

pub fn build_table_with(t: usize, p_limit: usize, limits: &TableLimits) -> Result<CountTable> {
    check_arity(t)?;
    let n_limit = max_nodes_for_path_length(t, p_limit);
    check_memory(t, n_limit, p_limit, t + 1, limits)?;
    let rows = count_rows(t, n_limit, p_limit);
    Ok(CountTable::from_rows(t, p_limit, rows))
}

/// Full path-length distribution of `[t,q]` trees: entry `p` is `N_t(q,p)`
/// for `0 <= p <= q(q-1)/2`.
pub fn path_length_distribution(t: usize, q: usize) -> Result<Vec<BigUint>> {
    check_arity(t)?;
    let p_limit = formulas::p_max(q);
    check_memory(t, q, p_limit, t + 1, &TableLimits::default())?;
    let mut rows = count_rows(t, q, p_limit);
    Ok(rows.swap_remove(q))
}

pub(crate) fn check_memory(
    t: usize,
    n_limit: usize,
    p_limit: usize,
    planes: usize,
    limits: &TableLimits,
) -> Result<()> {
    let bits = ln_big(&catalan_t(t, n_limit)) / std::f64::consts::LN_2;
    let per_cell = 32.0 + 8.0 * (bits / 64.0).ceil();
    let cells = (n_limit as f64 + 1.0) * (p_limit as f64 + 1.0) * planes as f64;
    let estimate = cells * per_cell;
    if estimate > limits.memory_bytes as f64 {
        return Err(Error::ResourceLimit(format!(
            "estimated {:.0} bytes for t={t}, n<={n_limit}, p<={p_limit} exceeds the cap of {} bytes",
            estimate, limits.memory_bytes
        )));
    }
    Ok(())
}

/// Nonzero window of a truncated count sequence.
#[derive(Clone, Debug, Default)]
struct Window {
    offset: usize,
    vals: Vec<BigUint>,
}

impl Window {
    fn from_dense(dense: Vec<BigUint>) -> Window {
        let Some(lo) = dense.iter().position(|c| !c.is_zero()) else {
            return Window::default();
        };
        let hi = dense.iter().rposition(|c| !c.is_zero()).unwrap();
        let vals = dense.into_iter().skip(lo).take(hi - lo + 1).collect();
        Window { offset: lo, vals }
    }

    /// The same sequence moved `by` positions up, truncated at `limit`.
    fn shifted(&self, by: usize, limit: usize) -> Window {
        let offset = self.offset + by;
        if self.vals.is_empty() || offset > limit {
            return Window::default();
        }
        let keep = (limit - offset + 1).min(self.vals.len());
        Window {
            offset,
            vals: self.vals[..keep].to_vec(),
        }
    }
}

pub(crate) fn mul_add(acc: &mut BigUint, x: &BigUint, y: &BigUint) {
    match (x.to_u64(), y.to_u64()) {
        (Some(a), Some(b)) => *acc += u128::from(a) * u128::from(b),
        _ => *acc += x * y,
    }
}

/// `acc[i + j] += x[i] * y[j]` for `i + j` within `acc`.
fn convolve_into(acc: &mut [BigUint], x: &Window, y: &Window) {
    let limit = acc.len() - 1;
    if x.vals.is_empty() || y.vals.is_empty() || x.offset + y.offset > limit {
        return;
    }
    for (i, xv) in x.vals.iter().enumerate() {
        if xv.is_zero() {
            continue;
        }
        let base = x.offset + i + y.offset;
        if base > limit {
            break;
        }
        let span = (limit - base + 1).min(y.vals.len());
        for (j, yv) in y.vals[..span].iter().enumerate() {
            if !yv.is_zero() {
                mul_add(&mut acc[base + j], xv, yv);
            }
        }
    }
}

/// Rows `N[n][p]` for `n <= n_limit`, `p <= p_limit`, with `N[0] = [1]` for
/// the empty tree.
///
/// A node of size `n` has `t` ordered slots holding subtrees whose sizes sum
/// to `n - 1`; a subtree of size `b` and path length `p'` contributes
/// `p' + b` to the whole. With `S[b](w) = w^b N[b](w)`, `N[n]` is the
/// coefficient of `z^{n-1}` in `(sum_b S[b] z^b)^t`, built up as `t - 1`
/// successive convolutions of partial powers.
fn count_rows(t: usize, n_limit: usize, p_limit: usize) -> Vec<Vec<BigUint>> {
    let width = p_limit + 1;
    let mut empty = vec![BigUint::zero(); width];
    empty[0] = BigUint::from(1u32);
    let mut rows = vec![empty];
    // powers[k][a]: coefficient of z^a in (sum_b S[b] z^b)^(k+1)
    let mut powers: Vec<Vec<Window>> = vec![Vec::with_capacity(n_limit); t - 1];
    let mut last = Window::from_dense(rows[0].clone());
    for n in 1..=n_limit {
        let a = n - 1;
        powers[0].push(last.shifted(a, p_limit));
        let mut row = None;
        for k in 1..t {
            let mut acc = vec![BigUint::zero(); width];
            for b in 0..=a {
                convolve_into(&mut acc, &powers[0][b], &powers[k - 1][a - b]);
            }
            if k + 1 < t {
                powers[k].push(Window::from_dense(acc));
            } else {
                row = Some(acc);
            }
        }
        let row = row.expect("t >= 2");
        last = Window::from_dense(row.clone());
        rows.push(row);
    }
    // keep the shared dense width even for rows that were never touched
    debug_assert!(rows.iter().all(|r| r.len() == width));
    rows
}

/// Sum of path lengths over all `[t,n]` trees for `n <= n_limit`.
///
/// With `C_n` the tree counts and `A_n = P_n + n C_n`, a root whose slots
/// hold sizes `n_1..n_t` contributes `sum_i A_{n_i} prod_{j != i} C_{n_j}`,
/// so `P_n = t [z^{n-1}] A(z) C(z)^{t-1}`.
pub fn total_path_lengths(t: usize, n_limit: usize) -> Vec<BigUint> {
    assert!(t >= 2, "arity must be at least 2");
    let c: Vec<BigUint> = (0..=n_limit).map(|n| catalan_t(t, n)).collect();
    let mut c_pow = c.clone();
    for _ in 2..t {
        let mut next = vec![BigUint::zero(); n_limit + 1];
        for (i, x) in c_pow.iter().enumerate() {
            for (j, y) in c.iter().enumerate().take(n_limit + 1 - i) {
                mul_add(&mut next[i + j], x, y);
            }
        }
        c_pow = next;
    }
    let mut total = vec![BigUint::zero(); n_limit + 1];
    let mut a = vec![BigUint::zero(); n_limit + 1];
    for n in 1..=n_limit {
        let mut s = BigUint::zero();
        for b in 0..n {
            mul_add(&mut s, &a[b], &c_pow[n - 1 - b]);
        }
        total[n] = s * t;
        a[n] = &total[n] + &c[n] * n;
    }
    total
}

/// Mean path length over all `[t,q]` trees.
pub fn average_path_length(t: usize, q: usize) -> Result<f64> {
    check_arity(t)?;
    if q == 0 {
        return Err(Error::Precondition("average path length needs q >= 1".into()));
    }
    let total = total_path_lengths(t, q).swap_remove(q);
    Ok((ln_big(&total) - ln_big(&catalan_t(t, q))).exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub p: usize,
    pub count: String,
    pub ln_count: f64,
    pub predictor: f64,
    pub ratio: f64,
}

/// `(p, T_t(p), ln T_t(p), alpha p / ln p, r(p))` for the given grid.
pub fn ratio_rows(table: &CountTable, grid: &[usize]) -> Result<Vec<RatioRow>> {
    grid.iter()
        .map(|&p| {
            let count = table.count_p(p)?;
            Ok(RatioRow {
                p,
                count: count.to_string(),
                ln_count: ln_big(count),
                predictor: formulas::theorem1_predictor(table.t, p as f64)?,
                ratio: theorem1_ratio(table, p)?,
            })
        })
        .collect()
}
