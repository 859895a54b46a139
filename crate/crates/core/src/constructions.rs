//! Explicit trees: minimal-path-length trees, the unit path-length
//! increment, and the permutation family used for the lower bound on
//! `T_t(p)`.
//!
//! The family takes the minimal tree `T` with `l` leaves, grafts the `l - 1`
//! shortest `[t,q]` trees onto all leaves but one in a permuted order, and a
//! filler tree onto the remaining deepest leaf. Every permutation yields a
//! different tree with the same path length, so `T_t(p) >= (l-1)!` at that
//! path length; the filler's path length is a free knob that shifts `p` one
//! unit at a time.

use itertools::Itertools;
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::counting::path_length_distribution;
use crate::error::{check_arity, Error, Result};
use crate::formulas::{alpha, catalan_t, min_profile, p_max, p_min_greedy};
use crate::tree::{first_k_by_path_length, FlatTree, ParentLink, Tree};

pub type Beta = Ratio<u64>;

/// Tree whose level `j` holds `depths[j]` nodes, each level attached to the
/// previous one left to right, filling every parent's slots in order.
fn left_packed(t: usize, depths: &[usize]) -> FlatTree {
    let mut flat = FlatTree::single(t);
    let mut level = vec![0usize];
    for &count in depths.iter().skip(1) {
        let mut next = Vec::with_capacity(count);
        for k in 0..count {
            next.push(flat.add_child(level[k / t], k % t));
        }
        level = next;
    }
    flat
}

fn greedy_depths(t: usize, n: usize) -> Vec<usize> {
    let (mut left, mut width, mut depths) = (n, 1usize, Vec::new());
    while left > 0 {
        let take = left.min(width);
        depths.push(take);
        left -= take;
        width = width.saturating_mul(t);
    }
    depths
}

/// The minimal-path-length tree with `leaves` leaves: levels `0..m-1` full,
/// `l1` nodes at depth `m` packed to the left.
pub fn build_minimal_tree(t: usize, leaves: usize) -> Result<Tree> {
    let shape = min_profile(t, leaves)?;
    Ok(left_packed(t, shape.profile.depths()).to_tree())
}

/// The breadth-first-filled tree on `n` nodes, which has minimal path length
/// among `[t,n]` trees.
pub fn minimal_tree_for_nodes(t: usize, n: usize) -> Result<Tree> {
    check_arity(t)?;
    if n == 0 {
        return Err(Error::Precondition("a tree has at least one node".into()));
    }
    Ok(left_packed(t, &greedy_depths(t, n)).to_tree())
}

/// One step of the path-length increment on a flat tree: with `j` the
/// deepest level holding more than one node, the rightmost leaf on that
/// level is removed and a child is added to the leftmost other node there.
fn increment_flat(flat: &mut FlatTree) -> Result<()> {
    let order = flat.bfs();
    let mut per_depth: Vec<Vec<(usize, Option<ParentLink>)>> = Vec::new();
    for (id, depth, parent) in order {
        if per_depth.len() <= depth {
            per_depth.push(Vec::new());
        }
        per_depth[depth].push((id, parent));
    }
    let level = per_depth
        .iter()
        .rposition(|nodes| nodes.len() > 1)
        .ok_or(Error::AtMaximum)?;
    let nodes = &per_depth[level];
    let &(u, u_parent) = nodes
        .iter()
        .rev()
        .find(|(id, _)| flat.is_leaf(*id))
        .ok_or_else(|| Error::Invariant("no leaf on the deepest crowded level".into()))?;
    let &(v, _) = nodes
        .iter()
        .find(|(id, _)| *id != u && flat.slots[*id].iter().any(Option::is_none))
        .ok_or_else(|| Error::Invariant("no node with a vacant slot beside the removed leaf".into()))?;
    let (parent, slot) = u_parent.expect("a crowded level is below the root");
    flat.slots[parent][slot] = None;
    let vacant = flat.slots[v].iter().position(Option::is_none).expect("checked above");
    // reuse the detached node id so the arena does not grow
    flat.slots[v][vacant] = Some(u);
    Ok(())
}

/// A tree with the same node count and path length one larger.
pub fn increment_path_length(tree: &Tree) -> Result<Tree> {
    let mut flat = FlatTree::from_tree(tree);
    increment_flat(&mut flat)?;
    Ok(flat.to_tree())
}

/// A `[t,n,p]` tree, reached from the minimal `[t,n]` tree by unit increments.
pub fn make_tree(t: usize, n: usize, p: usize) -> Result<Tree> {
    check_arity(t)?;
    if n == 0 {
        return Err(Error::OutOfRange("no tree has zero nodes".into()));
    }
    let lo = p_min_greedy(t, n);
    let hi = p_max(n);
    if p < lo || p > hi {
        return Err(Error::OutOfRange(format!(
            "path length {p} outside [{lo}, {hi}] for t={t}, n={n}"
        )));
    }
    let mut flat = left_packed(t, &greedy_depths(t, n));
    for _ in lo..p {
        increment_flat(&mut flat)?;
    }
    Ok(flat.to_tree())
}

/// The smallest `q` with `C_t(q) >= l - 1`.
pub fn select_q(t: usize, leaves: usize) -> Result<usize> {
    check_arity(t)?;
    if leaves < 3 {
        return Err(Error::Precondition(format!(
            "the family needs at least 3 leaves, got {leaves}"
        )));
    }
    let need = BigUint::from(leaves - 1);
    Ok((1..).find(|&q| catalan_t(t, q) >= need).expect("C_t grows"))
}

/// Smallest integer above `sqrt(2 alpha / ln^2 t + 1)`, plus one.
pub fn default_beta(t: usize) -> Beta {
    let lt = (t as f64).ln();
    let threshold = (2.0 * alpha(t) / (lt * lt) + 1.0).sqrt();
    Beta::from_integer(threshold.floor() as u64 + 2)
}

fn filler_nodes(beta: Beta, q: usize) -> Result<usize> {
    let n = (beta * Beta::from_integer(q as u64)).ceil().to_integer();
    if n == 0 {
        return Err(Error::Precondition(format!(
            "filler size ceil({beta} * {q}) must be at least 1"
        )));
    }
    Ok(n as usize)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionReport {
    pub t: usize,
    pub leaves: usize,
    pub m: usize,
    pub l1: usize,
    pub l0: usize,
    pub q: usize,
    pub beta: String,
    pub filler_nodes: usize,
    pub filler_path_length: usize,
    /// path lengths of the selected `[t,q]` trees, in selection order
    pub nu: Vec<usize>,
    pub nu_mean: f64,
    /// depth offset of each attachment leaf (in left-to-right order) below `m - 1`
    pub epsilon: Vec<usize>,
    /// 0-based: attachment leaf `i` receives selected tree `permutation[i]`
    pub permutation: Vec<usize>,
    pub p_measured: usize,
    /// per-part sum with the attachment depth offsets summing to `l1 - 1`
    pub p_formula: usize,
    /// the same sum with the offsets taken to sum to `l1`; exceeds the
    /// measured value by `q - 1`
    pub p_formula_uncorrected: usize,
    #[serde(with = "crate::decimal")]
    pub family_size: BigUint,
}

#[derive(Clone, Debug)]
pub struct TPi {
    pub tree: Tree,
    pub report: ConstructionReport,
}

/// `((l-1)(m-1) + e)(q-1) + sum_nu + m(n_F - 1) + nu_F + p(T)` where `e` is
/// the number of attachment leaves at depth `m`.
#[allow(clippy::too_many_arguments)]
fn assembled_path_length(
    leaves: usize,
    m: usize,
    deep_attachments: usize,
    q: usize,
    sum_nu: usize,
    filler_nodes: usize,
    filler_p: usize,
    base_p: usize,
) -> usize {
    ((leaves - 1) * (m - 1) + deep_attachments) * (q - 1)
        + sum_nu
        + m * (filler_nodes - 1)
        + filler_p
        + base_p
}

pub fn build_t_pi(
    t: usize,
    leaves: usize,
    permutation: &[usize],
    beta: Beta,
    filler_path_length: Option<usize>,
) -> Result<TPi> {
    let q = select_q(t, leaves)?;
    build_t_pi_with_q(t, leaves, q, permutation, beta, filler_path_length)
}

/// As [`build_t_pi`], with the size `q` of the permuted subtrees given
/// explicitly (it must still admit `l - 1` distinct trees).
pub fn build_t_pi_with_q(
    t: usize,
    leaves: usize,
    q: usize,
    permutation: &[usize],
    beta: Beta,
    filler_path_length: Option<usize>,
) -> Result<TPi> {
    check_arity(t)?;
    if leaves < 3 {
        return Err(Error::Precondition(format!(
            "the family needs at least 3 leaves, got {leaves}"
        )));
    }
    let k = leaves - 1;
    if permutation.len() != k || !permutation.iter().copied().sorted().eq(0..k) {
        return Err(Error::Precondition(format!(
            "expected a permutation of 0..{k}, got {permutation:?}"
        )));
    }
    let shape = min_profile(t, leaves)?;
    let m = shape.m;
    let n_f = filler_nodes(beta, q)?;
    let lo = p_min_greedy(t, n_f);
    let nu_f = filler_path_length.unwrap_or(lo);
    if nu_f < lo || nu_f > p_max(n_f) {
        return Err(Error::Precondition(format!(
            "filler path length {nu_f} outside [{lo}, {}] for {n_f} nodes",
            p_max(n_f)
        )));
    }
    let taus = first_k_by_path_length(t, q, k)?;
    let filler = make_tree(t, n_f, nu_f)?;

    let mut flat = left_packed(t, shape.profile.depths());
    let leaf_list = flat.leaves_left_to_right();
    let host = leaf_list
        .iter()
        .rposition(|&(_, d)| d == m)
        .ok_or_else(|| Error::Invariant("minimal tree has no leaf at depth m".into()))?;
    let attach: Vec<(usize, usize)> = leaf_list
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != host)
        .map(|(_, &l)| l)
        .collect();
    let epsilon: Vec<usize> = attach.iter().map(|&(_, d)| d + 1 - m).collect();
    for (&(id, _), &which) in attach.iter().zip(permutation) {
        flat.graft(id, &taus[which]);
    }
    flat.graft(leaf_list[host].0, &filler);
    let tree = flat.to_tree();

    let nu: Vec<usize> = taus.iter().map(Tree::path_length).collect();
    let sum_nu: usize = nu.iter().sum();
    let deep: usize = epsilon.iter().sum();
    let p_measured = tree.path_length();
    let p_formula = assembled_path_length(leaves, m, deep, q, sum_nu, n_f, nu_f, shape.p_min);
    let p_formula_uncorrected =
        assembled_path_length(leaves, m, shape.l1, q, sum_nu, n_f, nu_f, shape.p_min);
    if p_formula != p_measured || deep + 1 != shape.l1 {
        return Err(Error::Invariant(format!(
            "assembled path length {p_formula} != measured {p_measured} (t={t}, l={leaves})"
        )));
    }
    let report = ConstructionReport {
        t,
        leaves,
        m,
        l1: shape.l1,
        l0: shape.l0,
        q,
        beta: beta.to_string(),
        filler_nodes: n_f,
        filler_path_length: nu_f,
        nu_mean: sum_nu as f64 / k as f64,
        nu,
        epsilon,
        permutation: permutation.to_vec(),
        p_measured,
        p_formula,
        p_formula_uncorrected,
        family_size: family_count(leaves),
    };
    Ok(TPi { tree, report })
}

/// `(l - 1)!`, the number of distinct trees in one family.
pub fn family_count(leaves: usize) -> BigUint {
    (1..leaves).fold(BigUint::one(), |acc, i| acc * i)
}

#[derive(Clone, Debug, Serialize)]
pub struct GapDiagnostics {
    pub t: usize,
    pub leaves: usize,
    pub m: usize,
    pub q: usize,
    pub delta_p_measured: i64,
    /// closed form for the step, when one applies (no change of `q`)
    pub delta_p_formula: Option<i64>,
    pub delta_l1: i64,
    pub delta_m: usize,
    pub delta_q: usize,
    /// path length of the subtree newly selected at `l + 1`
    pub nu_new: usize,
    /// `(alpha / ln^2 t + 1/2) q^2`
    pub bound_leading: f64,
    /// the leading term plus `(2 + ln 2 / ln t) q + 2m`
    pub bound_explicit: f64,
    pub q_break: bool,
}

fn default_build(t: usize, leaves: usize, beta: Beta) -> Result<TPi> {
    let identity: Vec<usize> = (0..leaves - 1).collect();
    build_t_pi(t, leaves, &identity, beta, None)
}

/// Path-length step between the default constructions at `l` and `l + 1`.
pub fn delta_p(t: usize, leaves: usize, beta: Beta) -> Result<GapDiagnostics> {
    let here = default_build(t, leaves, beta)?.report;
    let next = default_build(t, leaves + 1, beta)?.report;
    let delta_m = next.m - here.m;
    let delta_q = next.q - here.q;
    let delta_l1 = next.l1 as i64 - here.l1 as i64;
    let nu_new = next.nu[leaves - 1];
    let (m, q) = (here.m as i64, here.q as i64);
    let delta_p_formula = match (delta_q, delta_m) {
        (0, 0) => Some((m - 1 + delta_l1) * (q - 1) + nu_new as i64 + delta_l1 * m),
        (0, 1) => Some((m + 1) * (q + 1) + nu_new as i64 + here.filler_nodes as i64 - 1),
        _ => None,
    };
    let lt = (t as f64).ln();
    let qf = here.q as f64;
    let bound_leading = (alpha(t) / (lt * lt) + 0.5) * qf * qf;
    let bound_explicit =
        bound_leading + (2.0 + std::f64::consts::LN_2 / lt) * qf + 2.0 * here.m as f64;
    Ok(GapDiagnostics {
        t,
        leaves,
        m: here.m,
        q: here.q,
        delta_p_measured: next.p_measured as i64 - here.p_measured as i64,
        delta_p_formula,
        delta_l1,
        delta_m,
        delta_q,
        nu_new,
        bound_leading,
        bound_explicit,
        q_break: delta_q == 1,
    })
}

/// The `k` smallest path lengths among `[t,q]` trees, with multiplicity.
fn smallest_path_lengths(t: usize, q: usize, k: usize) -> Result<Vec<usize>> {
    let dist = path_length_distribution(t, q)?;
    let mut out = Vec::with_capacity(k);
    for (p, count) in dist.iter().enumerate() {
        let take = count.to_usize().unwrap_or(usize::MAX).min(k - out.len());
        out.extend(std::iter::repeat_n(p, take));
        if out.len() == k {
            return Ok(out);
        }
    }
    Err(Error::InsufficientPopulation {
        t,
        q,
        requested: k,
        available: catalan_t(t, q).to_string(),
    })
}

/// Path length of the construction with the filler at its minimum, computed
/// from the part sizes without building the tree. `nu_cache` is keyed by `q`
/// and must only be shared between calls with the same `t`.
fn base_path_length(
    t: usize,
    leaves: usize,
    q: usize,
    beta: Beta,
    nu_cache: &mut Vec<(usize, Vec<usize>)>,
) -> Result<(usize, usize, usize)> {
    let shape = min_profile(t, leaves)?;
    let k = leaves - 1;
    let idx = match nu_cache.iter().position(|(cq, v)| *cq == q && v.len() >= k) {
        Some(i) => i,
        None => {
            // fetch ahead so a scan over increasing l rarely recomputes
            let population = catalan_t(t, q).to_usize().unwrap_or(usize::MAX);
            let want = population.min(2 * k).max(k);
            nu_cache.retain(|(cq, _)| *cq != q);
            nu_cache.push((q, smallest_path_lengths(t, q, want)?));
            nu_cache.len() - 1
        }
    };
    let sum_nu: usize = nu_cache[idx].1[..k].iter().sum();
    let n_f = filler_nodes(beta, q)?;
    let nu_f = p_min_greedy(t, n_f);
    let p = assembled_path_length(leaves, shape.m, shape.l1 - 1, q, sum_nu, n_f, nu_f, shape.p_min);
    Ok((p, n_f, nu_f))
}

#[derive(Clone, Debug, Serialize)]
pub struct Family {
    pub t: usize,
    pub p_target: usize,
    pub leaves: usize,
    pub q: usize,
    /// 0 for the standard subtree size, 1 when the larger size was needed
    pub q_shift: usize,
    pub beta: String,
    #[serde(skip)]
    beta_value: Beta,
    pub base_p: usize,
    pub filler_nodes: usize,
    pub filler_path_length_min: usize,
    pub filler_path_length: usize,
    #[serde(with = "crate::decimal")]
    pub family_size: BigUint,
}

impl Family {
    /// Builds the member selected by `permutation` (0-based).
    pub fn build(&self, permutation: &[usize]) -> Result<TPi> {
        build_t_pi_with_q(
            self.t,
            self.leaves,
            self.q,
            permutation,
            self.beta_value,
            Some(self.filler_path_length),
        )
    }

    /// The first `count` permutations in lexicographic order.
    pub fn permutations(&self, count: usize) -> Vec<Vec<usize>> {
        (0..self.leaves - 1)
            .permutations(self.leaves - 1)
            .take(count)
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyAttempt {
    pub q_shift: usize,
    pub leaves: Option<usize>,
    pub base_p: Option<usize>,
    pub filler_path_length_needed: Option<usize>,
    pub filler_path_length_max: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum FamilySearch {
    Found(Family),
    Unreachable {
        t: usize,
        p_target: usize,
        beta: String,
        attempts: Vec<FamilyAttempt>,
    },
}

/// Looks for a permutation family whose members all have path length
/// exactly `p_target`.
///
/// Takes the largest `l` whose base construction fits under the target and
/// lets the filler absorb the difference; if the filler cannot stretch that
/// far, retries with subtrees one node larger. Reaching every target is
/// only guaranteed asymptotically, so failure is reported, not raised.
pub fn family_for_path_length(t: usize, p_target: usize, beta: Option<Beta>) -> Result<FamilySearch> {
    check_arity(t)?;
    if p_target == 0 {
        return Err(Error::Precondition("target path length must be positive".into()));
    }
    let beta = beta.unwrap_or_else(|| default_beta(t));
    let mut attempts = Vec::new();
    let mut cache = Vec::new();
    for q_shift in 0..=1 {
        let mut best = None;
        for leaves in 3.. {
            let q = select_q(t, leaves)? + q_shift;
            let (p, n_f, nu_f) = base_path_length(t, leaves, q, beta, &mut cache)?;
            if p > p_target {
                break;
            }
            best = Some((leaves, q, p, n_f, nu_f));
        }
        let Some((leaves, q, base_p, n_f, nu_f_min)) = best else {
            attempts.push(FamilyAttempt {
                q_shift,
                leaves: None,
                base_p: None,
                filler_path_length_needed: None,
                filler_path_length_max: None,
            });
            continue;
        };
        let needed = nu_f_min + (p_target - base_p);
        if needed <= p_max(n_f) {
            return Ok(FamilySearch::Found(Family {
                t,
                p_target,
                leaves,
                q,
                q_shift,
                beta: beta.to_string(),
                beta_value: beta,
                base_p,
                filler_nodes: n_f,
                filler_path_length_min: nu_f_min,
                filler_path_length: needed,
                family_size: family_count(leaves),
            }));
        }
        attempts.push(FamilyAttempt {
            q_shift,
            leaves: Some(leaves),
            base_p: Some(base_p),
            filler_path_length_needed: Some(needed),
            filler_path_length_max: Some(p_max(n_f)),
        });
    }
    Ok(FamilySearch::Unreachable {
        t,
        p_target,
        beta: beta.to_string(),
        attempts,
    })
}

/// Mean path length of the selected subtrees never exceeds the mean over
/// all `[t,q]` trees.
pub fn selection_is_economical(report: &ConstructionReport) -> Result<bool> {
    let all = crate::counting::average_path_length(report.t, report.q)?;
    Ok(report.nu_mean <= all + 1e-9 * all.max(1.0))
}
