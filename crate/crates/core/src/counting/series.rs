//! Generating-function backend: `B(w,z) = 1 + z B(w, wz)^t`, where the
//! coefficient of `w^p z^n` counts `[t,n,p]` trees and the constant term is
//! the empty tree.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{check_memory, mul_add, TableLimits};
use crate::error::{check_arity, Error, Result};
use crate::formulas::max_nodes_for_path_length;

/// Truncated coefficient array `b[p][n]` of `B(w,z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesTable {
    t: usize,
    p_limit: usize,
    coeffs: Vec<Vec<BigUint>>,
    iterations: usize,
}

impl SeriesTable {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn p_limit(&self) -> usize {
        self.p_limit
    }

    pub fn n_limit(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    /// Number of fixed-point passes until the truncated series stopped
    /// changing (the last pass reproduced its input).
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Coefficient of `w^p z^n`; zero beyond the truncation in `n`.
    pub fn coefficient(&self, p: usize, n: usize) -> Result<BigUint> {
        if p > self.p_limit {
            return Err(Error::OutOfRange(format!(
                "path length {p} beyond series limit {}",
                self.p_limit
            )));
        }
        Ok(self.coeffs[p].get(n).cloned().unwrap_or_default())
    }
}

type Grid = Vec<Vec<BigUint>>;

fn nonzero(grid: &Grid) -> Vec<(usize, usize, &BigUint)> {
    grid.iter()
        .enumerate()
        .flat_map(|(p, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(move |(n, c)| (p, n, c))
        })
        .collect()
}

fn product(x: &Grid, y: &Grid, p_limit: usize, n_limit: usize) -> Grid {
    let mut out = vec![vec![BigUint::zero(); n_limit + 1]; p_limit + 1];
    let ys = nonzero(y);
    for (p1, n1, a) in nonzero(x) {
        for &(p2, n2, b) in &ys {
            if p1 + p2 <= p_limit && n1 + n2 <= n_limit {
                mul_add(&mut out[p1 + p2][n1 + n2], a, b);
            }
        }
    }
    out
}

pub fn build_series(t: usize, p_limit: usize) -> Result<SeriesTable> {
    build_series_with(t, p_limit, &TableLimits::default())
}

/// Iterates `B <- 1 + z B(w, wz)^t` from `B = 1` until the truncated
/// coefficients are stable.
///
/// The substitution `z -> wz` moves `b[p][n]` to `b[p+n][n]`. Each pass fixes
/// at least one more power of `z`, so stability is reached after at most
/// `n_limit + 2` passes.
pub fn build_series_with(t: usize, p_limit: usize, limits: &TableLimits) -> Result<SeriesTable> {
    check_arity(t)?;
    let n_limit = max_nodes_for_path_length(t, p_limit);
    check_memory(t, n_limit, p_limit, 3, limits)?;
    let zero_grid = || vec![vec![BigUint::zero(); n_limit + 1]; p_limit + 1];
    let mut current = zero_grid();
    current[0][0] = BigUint::one();
    let max_passes = n_limit + 2;
    for pass in 1..=max_passes {
        let mut shifted = zero_grid();
        for (p, n, c) in nonzero(&current) {
            if p + n <= p_limit {
                shifted[p + n][n] = c.clone();
            }
        }
        let mut power = shifted.clone();
        for _ in 1..t {
            power = product(&power, &shifted, p_limit, n_limit);
        }
        let mut next = zero_grid();
        next[0][0] = BigUint::one();
        for (p, row) in power.into_iter().enumerate() {
            for (n, c) in row.into_iter().enumerate().take(n_limit) {
                next[p][n + 1] = c;
            }
        }
        if next == current {
            return Ok(SeriesTable {
                t,
                p_limit,
                coeffs: current,
                iterations: pass,
            });
        }
        current = next;
    }
    Err(Error::Invariant(format!(
        "series for t={t}, p<={p_limit} did not stabilize within {max_passes} passes"
    )))
}
