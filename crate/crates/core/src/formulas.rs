//! Closed forms and bounds for t-ary trees: generalized Catalan numbers,
//! the minimal and maximal path length of a tree with a given number of
//! nodes or leaves, the entropy constant governing the growth of `T_t(p)`,
//! and the Stirling-type estimate of `C_t(n)`.
//!
//! Real-valued quantities are computed in the natural base. Counts are exact.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{check_arity, Error, Result};
use crate::tree::Profile;

/// `C_t(n) = binom(tn, n) / ((t-1)n + 1)`, the number of `[t,n]` trees.
pub fn catalan_t(t: usize, n: usize) -> BigUint {
    assert!(t >= 2, "arity must be at least 2");
    let top = t * n;
    let mut binom = BigUint::one();
    // binom(tn, n) built as a running product; each partial product is itself
    // a binomial coefficient, so the division is exact
    for i in 1..=n {
        binom *= top - n + i;
        binom /= i;
    }
    let (quot, rem) = binom.div_rem(&BigUint::from((t - 1) * n + 1));
    debug_assert!(rem.is_zero());
    quot
}

/// Natural logarithm of an arbitrary-precision integer, accurate to double
/// precision. Returns `-inf` for zero.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit prefix");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Binary entropy `h(x) = -x ln x - (1-x) ln(1-x)` in nats.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("binary entropy needs 0 < x < 1, got {x}")));
    }
    Ok(-x * x.ln() - (1.0 - x) * (1.0 - x).ln())
}

/// `h(1/t) * t * ln t`, the growth constant of `ln T_t(p)` against `p / ln p`.
pub fn alpha(t: usize) -> f64 {
    assert!(t >= 2, "arity must be at least 2");
    let tf = t as f64;
    binary_entropy(1.0 / tf).expect("1/t in (0,1)") * tf * tf.ln()
}

/// Logarithm bases offered for reporting real-valued results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Natural,
    Two,
    Arity,
}

impl LogBase {
    pub fn ln_of_base(self, t: usize) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::Arity => (t as f64).ln(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticParams {
    pub t: usize,
    /// `alpha` in nats.
    pub alpha: f64,
}

impl AsymptoticParams {
    pub fn new(t: usize) -> Result<Self> {
        check_arity(t)?;
        Ok(AsymptoticParams { t, alpha: alpha(t) })
    }

    /// `alpha` is a product of two logarithms, so a change of base divides
    /// it by the square of `ln(base)`.
    pub fn alpha_in(&self, base: LogBase) -> f64 {
        let l = base.ln_of_base(self.t);
        self.alpha / (l * l)
    }
}

/// Smallest `m` with `t^m >= x` (for `x >= 1`).
pub fn ceil_log(t: usize, x: usize) -> usize {
    let (mut m, mut pow) = (0, 1usize);
    while pow < x {
        pow *= t;
        m += 1;
    }
    m
}

/// Largest `m` with `t^m <= x` (for `x >= 1`).
pub fn floor_log(t: usize, x: usize) -> usize {
    let (mut m, mut pow) = (0, t);
    while pow <= x {
        pow *= t;
        m += 1;
    }
    m
}

/// Minimal-path-length tree with a prescribed number of leaves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinProfileResult {
    pub t: usize,
    pub leaves: usize,
    pub m: usize,
    pub l1: usize,
    /// leaves at depth `m - 1`
    pub l0: usize,
    pub n: usize,
    pub profile: Profile,
    pub p_min: usize,
    pub mu: usize,
}

/// Node count of the minimal tree with `leaves` leaves:
/// `leaves + ceil((leaves - 1) / (t - 1))`.
pub fn nodes_for_leaves(t: usize, leaves: usize) -> usize {
    leaves + (leaves - 1).div_ceil(t - 1)
}

pub fn min_profile(t: usize, leaves: usize) -> Result<MinProfileResult> {
    check_arity(t)?;
    if leaves == 0 {
        return Err(Error::Precondition("a tree has at least one leaf".into()));
    }
    let m = ceil_log(t, leaves);
    let full = t.pow(m as u32);
    let l1 = leaves - (full - leaves) / (t - 1);
    let n = nodes_for_leaves(t, leaves);
    let mut depths: Vec<usize> = (0..m).map(|j| t.pow(j as u32)).collect();
    depths.push(l1);
    let profile = Profile(depths);
    let p_min = closed_form_min_path_length(t, n, m)?;
    if profile.node_count() != n || profile.path_length() != p_min {
        return Err(Error::Invariant(format!(
            "minimal profile for t={t}, leaves={leaves} disagrees with the node/path-length closed forms"
        )));
    }
    Ok(MinProfileResult {
        t,
        leaves,
        m,
        l1,
        l0: leaves - l1,
        n,
        profile,
        p_min,
        mu: m,
    })
}

/// `(n + 1/(t-1)) mu - t (t^mu - 1) / (t-1)^2`, evaluated exactly.
pub fn closed_form_min_path_length(t: usize, n: usize, mu: usize) -> Result<usize> {
    let (t, n, mu) = (t as i128, n as i128, mu as u32);
    let d = t - 1;
    let num = (n * d + 1) * d * mu as i128 - t * (t.pow(mu) - 1);
    if num < 0 || num % (d * d) != 0 {
        return Err(Error::Invariant(format!(
            "closed-form path length is not a nonnegative integer (t={t}, n={n}, mu={mu})"
        )));
    }
    Ok((num / (d * d)) as usize)
}

/// Leaf count of a minimal `[t,n]` tree: the largest `l` whose minimal tree
/// needs at most `n` nodes.
pub fn leaves_of_minimal(t: usize, n: usize) -> usize {
    let mut l = 1;
    while nodes_for_leaves(t, l + 1) <= n {
        l += 1;
    }
    l
}

/// The depth parameter as literally stated for the minimal-path-length
/// closed form: `m(l)` if `n != 2 (mod t)`, `m(l) + 1` otherwise.
///
/// This reading undercounts whenever `n = 2 (mod t)` and the leaf count is
/// not a power of `t` (first case: `t = 2, n = 6`). [`p_min`] uses
/// [`mu_for_nodes`] instead; this function is kept for the discrepancy report.
pub fn mu_literal(t: usize, n: usize) -> usize {
    let m = ceil_log(t, leaves_of_minimal(t, n));
    if n % t == 2 % t {
        m + 1
    } else {
        m
    }
}

/// Depth parameter that makes the closed form exact: `m(l)` if
/// `n != 2 (mod t)`, `floor(log_t l) + 1` otherwise. Both equal the depth of
/// the `n`-th node of the complete t-ary tree in breadth-first order.
pub fn mu_for_nodes(t: usize, n: usize) -> usize {
    let l = leaves_of_minimal(t, n);
    if n % t == 2 % t {
        floor_log(t, l) + 1
    } else {
        ceil_log(t, l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PMin {
    pub p: usize,
    pub mu: usize,
}

/// Minimal path length over all `[t,n]` trees.
///
/// Evaluated by the closed form and by summing the depths of the first `n`
/// nodes of the complete t-ary tree; a disagreement is reported as an
/// invariant violation.
pub fn p_min(t: usize, n: usize) -> Result<PMin> {
    check_arity(t)?;
    if n == 0 {
        return Err(Error::Precondition("p_min needs n >= 1".into()));
    }
    let mu = mu_for_nodes(t, n);
    let p = closed_form_min_path_length(t, n, mu)?;
    let greedy = p_min_greedy(t, n);
    if p != greedy {
        return Err(Error::Invariant(format!(
            "closed-form p_min({t},{n}) = {p} but breadth-first fill gives {greedy}"
        )));
    }
    Ok(PMin { p, mu })
}

/// Sum of depths of the first `n` nodes of the infinite complete t-ary tree
/// in breadth-first order.
pub fn p_min_greedy(t: usize, n: usize) -> usize {
    let (mut left, mut depth, mut width, mut total) = (n, 0usize, 1usize, 0usize);
    while left > 0 {
        let take = left.min(width);
        total += take * depth;
        left -= take;
        depth += 1;
        width = width.saturating_mul(t);
    }
    total
}

/// Path length of the single-leaf chain on `n` nodes.
pub fn p_max(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Largest `n` such that some `[t,n]` tree has path length at most `p`.
pub fn max_nodes_for_path_length(t: usize, p: usize) -> usize {
    assert!(t >= 2, "arity must be at least 2");
    let (mut n, mut total, mut depth, mut width, mut used) = (1usize, 0usize, 1usize, t, 0usize);
    loop {
        if total + depth > p {
            return n;
        }
        total += depth;
        n += 1;
        used += 1;
        if used == width {
            used = 0;
            depth += 1;
            width = width.saturating_mul(t);
        }
    }
}

/// `C_t(n) n^{3/2} exp(-h(1/t) t n)`, which stays between two positive
/// constants as `n` grows.
pub fn stirling_ratio(t: usize, n: usize) -> Result<f64> {
    check_arity(t)?;
    if n == 0 {
        return Err(Error::Precondition("stirling ratio needs n >= 1".into()));
    }
    let tf = t as f64;
    let exponent = binary_entropy(1.0 / tf)? * tf * n as f64;
    let log_ratio = ln_big(&catalan_t(t, n)) + 1.5 * (n as f64).ln() - exponent;
    Ok(log_ratio.exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct StirlingSample {
    pub n: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StirlingReport {
    pub t: usize,
    pub samples: Vec<StirlingSample>,
    /// empirical lower constant (minimum ratio seen)
    pub c1: f64,
    /// empirical upper constant (maximum ratio seen)
    pub c2: f64,
}

impl StirlingReport {
    /// Whether the ratio is monotone over samples with `n >= from`.
    pub fn is_monotone_from(&self, from: usize) -> bool {
        let tail: Vec<f64> = self
            .samples
            .iter()
            .filter(|s| s.n >= from)
            .map(|s| s.ratio)
            .collect();
        tail.windows(2).all(|w| w[1] >= w[0]) || tail.windows(2).all(|w| w[1] <= w[0])
    }
}

pub fn stirling_scan(t: usize, n_lo: usize, n_hi: usize) -> Result<StirlingReport> {
    check_arity(t)?;
    if n_lo == 0 || n_lo > n_hi {
        return Err(Error::Precondition(format!("bad scan range {n_lo}..={n_hi}")));
    }
    let tf = t as f64;
    let h = binary_entropy(1.0 / tf)? * tf;
    let mut samples = Vec::with_capacity(n_hi - n_lo + 1);
    let mut c = catalan_t(t, n_lo);
    for n in n_lo..=n_hi {
        if n > n_lo {
            c = catalan_step(t, n - 1, &c);
        }
        let ratio = (ln_big(&c) + 1.5 * (n as f64).ln() - h * n as f64).exp();
        samples.push(StirlingSample { n, ratio });
    }
    let c1 = samples.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    let c2 = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    Ok(StirlingReport { t, samples, c1, c2 })
}

/// `C_t(n+1)` from `C_t(n)`.
fn catalan_step(t: usize, n: usize, c: &BigUint) -> BigUint {
    // C(n+1)/C(n) = binom(t(n+1), n+1) / binom(tn, n) * ((t-1)n+1) / ((t-1)(n+1)+1)
    let mut num = c * ((t - 1) * n + 1);
    for i in 1..=t {
        num *= t * n + i;
    }
    let mut den = BigUint::from((t - 1) * (n + 1) + 1) * (n + 1);
    for i in 1..t {
        den *= (t - 1) * n + i;
    }
    let (q, r) = num.div_rem(&den);
    debug_assert!(r.is_zero());
    q
}

/// Leading-order prediction `alpha p / ln p` of `ln T_t(p)`.
pub fn theorem1_predictor(t: usize, p: f64) -> Result<f64> {
    check_arity(t)?;
    if p.is_nan() || p < 2.0 {
        return Err(Error::Domain(format!("predictor needs p >= 2, got {p}")));
    }
    Ok(alpha(t) * p / p.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, LN_2};

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn catalan_examples() {
        assert_eq!(catalan_t(2, 0), BigUint::from(1u32));
        assert_eq!(catalan_t(2, 3), BigUint::from(5u32));
        assert_eq!(catalan_t(2, 8), BigUint::from(1430u32));
        assert_eq!(catalan_t(3, 2), BigUint::from(3u32));
    }

    #[test]
    fn catalan_step_matches_closed_form() {
        for t in 2..=5 {
            for n in 0..40 {
                assert_eq!(catalan_step(t, n, &catalan_t(t, n)), catalan_t(t, n + 1));
            }
        }
    }

    #[test]
    fn entropy_and_alpha() {
        assert!(close(binary_entropy(0.5).unwrap() / LN_2, 1.0, 1e-12));
        assert!(close(binary_entropy(0.3).unwrap(), binary_entropy(0.7).unwrap(), 1e-12));
        assert!(binary_entropy(0.0).is_err());
        assert!(binary_entropy(1.0).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
        assert!(close(alpha(2), 2.0 * LN_2 * LN_2, 1e-12));
        assert!(close(alpha(2), 0.960906, 1e-6));
        let params = AsymptoticParams::new(2).unwrap();
        assert!(close(params.alpha_in(LogBase::Two), 2.0, 1e-12));
        assert!(close(params.alpha_in(LogBase::Two) * LN_2 * LN_2, params.alpha, 1e-12));
    }

    #[test]
    fn min_profile_examples() {
        let r = min_profile(2, 5).unwrap();
        assert_eq!((r.m, r.l1, r.n, r.p_min), (3, 2, 9, 16));
        assert_eq!(r.profile.depths(), &[1, 2, 4, 2]);
        assert_eq!(r.l0, 3);

        let r = min_profile(3, 3).unwrap();
        assert_eq!((r.m, r.l1, r.n, r.p_min), (1, 3, 4, 3));
        assert_eq!(r.profile.depths(), &[1, 3]);

        let r = min_profile(2, 1).unwrap();
        assert_eq!((r.m, r.l1, r.n, r.p_min), (0, 1, 1, 0));
        assert_eq!(r.profile.depths(), &[1]);

        assert!(min_profile(2, 0).is_err());
    }

    #[test]
    fn min_profile_is_consistent_for_many_leaf_counts() {
        for t in 2..=5 {
            for l in 1..500 {
                let r = min_profile(t, l).unwrap();
                assert!(r.profile.is_feasible(t));
                // leaves: the depth-m nodes plus childless depth-(m-1) nodes
                if r.m > 0 {
                    let parents = r.l1.div_ceil(t);
                    let above = r.profile.depths()[r.m - 1];
                    assert_eq!(r.l1 + above - parents, l, "t={t} l={l}");
                }
            }
        }
    }

    #[test]
    fn p_min_examples() {
        assert_eq!(p_min(2, 1).unwrap().p, 0);
        assert_eq!(p_min(2, 4).unwrap(), PMin { p: 4, mu: 2 });
        assert_eq!(p_min(2, 7).unwrap(), PMin { p: 10, mu: 2 });
        assert!(p_min(2, 0).is_err());
    }

    #[test]
    fn p_min_closed_form_matches_greedy_widely() {
        for t in 2..=6 {
            for n in 1..3000 {
                assert!(p_min(t, n).is_ok(), "t={t} n={n}");
            }
        }
    }

    #[test]
    fn literal_mu_reading_disagrees_at_known_points() {
        // n = 6, t = 2: six nodes have three leaves, m = 2, and the literal
        // rule gives mu = 3 and a path length of 7 < 8.
        assert_eq!(mu_literal(2, 6), 3);
        assert_eq!(closed_form_min_path_length(2, 6, 3).unwrap(), 7);
        assert_eq!(p_min_greedy(2, 6), 8);
        // it does agree whenever n != 2 mod t, or the leaf count is a power of t
        for t in 2..=5 {
            for n in 1..500 {
                let l = leaves_of_minimal(t, n);
                if n % t != 2 % t || t.pow(ceil_log(t, l) as u32) == l {
                    assert_eq!(mu_literal(t, n), mu_for_nodes(t, n), "t={t} n={n}");
                }
            }
        }
    }

    #[test]
    fn p_max_examples() {
        assert_eq!(p_max(1), 0);
        assert_eq!(p_max(5), 10);
        assert_eq!(p_max(4), 6);
    }

    #[test]
    fn max_nodes_examples() {
        assert_eq!(max_nodes_for_path_length(2, 0), 1);
        assert_eq!(max_nodes_for_path_length(2, 6), 5);
        assert_eq!(max_nodes_for_path_length(2, 10), 7);
        for t in 2..=4 {
            let mut prev = 0;
            for p in 0..400 {
                let n = max_nodes_for_path_length(t, p);
                assert!(n >= prev);
                assert!(p_min_greedy(t, n) <= p && p_min_greedy(t, n + 1) > p);
                prev = n;
            }
        }
    }

    #[test]
    fn stirling_examples() {
        assert!(close(stirling_ratio(2, 1).unwrap(), 0.25, 1e-12));
        for t in 2..=4 {
            for n in [1, 5, 50, 500] {
                assert!(stirling_ratio(t, n).unwrap() > 0.0);
            }
        }
        let scan = stirling_scan(2, 1, 100).unwrap();
        for s in &scan.samples {
            assert!(close(s.ratio, stirling_ratio(2, s.n).unwrap(), 1e-9));
        }
    }

    #[test]
    fn predictor_examples() {
        let a = alpha(2);
        assert!(close(theorem1_predictor(2, E * E).unwrap(), a * E * E / 2.0, 1e-12));
        assert!(close(theorem1_predictor(2, 100.0).unwrap(), 20.866, 1e-4));
        assert!(theorem1_predictor(2, 1.0).is_err());
    }

    #[test]
    fn ln_big_large_values() {
        let x = BigUint::from(3u32).pow(2000);
        assert!(close(ln_big(&x), 2000.0 * 3f64.ln(), 1e-12));
        assert_eq!(ln_big(&BigUint::zero()), f64::NEG_INFINITY);
    }
}
