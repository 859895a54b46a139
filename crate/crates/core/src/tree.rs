//! Ordered t-ary trees: representation, measurement, the canonical text
//! form and exhaustive enumeration.
//!
//! A [`Tree`] always has a root. Empty subtrees only exist as vacant child
//! slots, so every tree has at least one node and a well-defined path length.

use std::collections::{BinaryHeap, VecDeque};
use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{check_arity, Error, Result};
use crate::formulas::catalan_t;

/// Default upper bound on the number of trees a single enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

const OPEN: u8 = b'(';
const CLOSE: u8 = b')';
const EMPTY: u8 = b'.';

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    children: Vec<Option<Tree>>,
}

impl Tree {
    /// A single node with `t` vacant child slots.
    pub fn leaf(t: usize) -> Tree {
        assert!(t >= 2, "arity must be at least 2");
        Tree {
            children: vec![None; t],
        }
    }

    /// Builds a node from its child slots. The slot count is the arity and
    /// every present child must have the same arity.
    pub fn from_children(children: Vec<Option<Tree>>) -> Result<Tree> {
        let t = children.len();
        check_arity(t)?;
        if let Some(bad) = children.iter().flatten().find(|c| c.arity() != t) {
            return Err(Error::Precondition(format!(
                "child of arity {} under a node of arity {t}",
                bad.arity()
            )));
        }
        Ok(Tree { children })
    }

    pub fn arity(&self) -> usize {
        self.children.len()
    }

    pub fn children(&self) -> &[Option<Tree>] {
        &self.children
    }

    pub fn child(&self, slot: usize) -> Option<&Tree> {
        self.children.get(slot).and_then(Option::as_ref)
    }

    pub fn is_leaf(&self) -> bool {
        self.children.iter().all(Option::is_none)
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .flatten()
            .map(Tree::node_count)
            .sum::<usize>()
    }

    /// Path length by the subtree recursion: every node of a child subtree
    /// sits one level deeper than it does inside that subtree.
    pub fn path_length(&self) -> usize {
        self.children
            .iter()
            .flatten()
            .map(|c| c.path_length() + c.node_count())
            .sum()
    }

    /// Nodes in breadth-first order, left to right within each level, with
    /// their depths.
    pub fn bfs(&self) -> Vec<(&Tree, usize)> {
        let mut out = Vec::new();
        let mut queue = VecDeque::from([(self, 0usize)]);
        while let Some((node, depth)) = queue.pop_front() {
            out.push((node, depth));
            for c in node.children.iter().flatten() {
                queue.push_back((c, depth + 1));
            }
        }
        out
    }

    pub fn measure(&self) -> Measure {
        let mut depths: Vec<usize> = Vec::new();
        let mut leaves = 0;
        for (node, depth) in self.bfs() {
            if depths.len() <= depth {
                depths.push(0);
            }
            depths[depth] += 1;
            if node.is_leaf() {
                leaves += 1;
            }
        }
        let profile = Profile(depths);
        Measure {
            n: profile.node_count(),
            p: profile.path_length(),
            max_depth: profile.max_depth(),
            leaves,
            profile,
        }
    }

    pub fn profile(&self) -> Profile {
        self.measure().profile
    }

    pub fn encode(&self) -> CanonicalForm {
        let mut out = String::with_capacity(self.node_count() * (self.arity() + 1) + 1);
        self.encode_into(&mut out);
        CanonicalForm(out)
    }

    fn encode_into(&self, out: &mut String) {
        out.push('(');
        for slot in &self.children {
            match slot {
                Some(c) => c.encode_into(out),
                None => out.push('.'),
            }
        }
        out.push(')');
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree({})", self.encode())
    }
}

/// Node counts per depth, `D_0, D_1, ..., D_k`, with `D_k > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Profile(pub Vec<usize>);

impl Profile {
    pub fn depths(&self) -> &[usize] {
        &self.0
    }

    pub fn node_count(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn path_length(&self) -> usize {
        self.0.iter().enumerate().map(|(j, d)| j * d).sum()
    }

    pub fn max_depth(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    /// `D_0 = 1` and each level holds at most `t` times the previous one.
    pub fn is_feasible(&self, t: usize) -> bool {
        self.0.first() == Some(&1)
            && self.0.last().is_some_and(|&d| d > 0)
            && self.0.windows(2).all(|w| w[1] <= t * w[0])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Measure {
    pub n: usize,
    pub p: usize,
    pub profile: Profile,
    pub leaves: usize,
    pub max_depth: usize,
}

/// Text serialization of a tree: a node is `(` followed by its `t` slots and
/// `)`, a vacant slot is `.`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalForm(String);

impl CanonicalForm {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Node count and path length read straight off the text.
    pub fn stats(&self) -> (usize, usize) {
        form_stats(self.0.as_bytes())
    }

    /// `(n, p)` of text already known to be a well-formed canonical form,
    /// such as the forms passed to a [`for_each_canonical`] visitor.
    pub fn stats_of(form: &str) -> (usize, usize) {
        form_stats(form.as_bytes())
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for CanonicalForm {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub fn encode(tree: &Tree) -> CanonicalForm {
    tree.encode()
}

/// Parses a canonical form for arity `t`.
pub fn decode(text: &str, t: usize) -> Result<Tree> {
    check_arity(t)?;
    let bytes = text.as_bytes();
    let mut pos = 0;
    let tree = decode_node(bytes, t, &mut pos)?;
    if pos != bytes.len() {
        return Err(malformed(pos, "trailing characters after the root"));
    }
    Ok(tree)
}

fn malformed(position: usize, reason: &str) -> Error {
    Error::Malformed {
        position,
        reason: reason.to_string(),
    }
}

fn decode_node(bytes: &[u8], t: usize, pos: &mut usize) -> Result<Tree> {
    match bytes.get(*pos) {
        Some(&OPEN) => *pos += 1,
        Some(_) => return Err(malformed(*pos, "expected '('")),
        None => return Err(malformed(*pos, "unexpected end of input")),
    }
    let mut children = Vec::with_capacity(t);
    for _ in 0..t {
        match bytes.get(*pos) {
            Some(&EMPTY) => {
                *pos += 1;
                children.push(None);
            }
            Some(&OPEN) => children.push(Some(decode_node(bytes, t, pos)?)),
            Some(&CLOSE) => return Err(malformed(*pos, "node closed before all slots were given")),
            Some(_) => return Err(malformed(*pos, "stray character")),
            None => return Err(malformed(*pos, "unexpected end of input")),
        }
    }
    match bytes.get(*pos) {
        Some(&CLOSE) => {
            *pos += 1;
            Ok(Tree { children })
        }
        Some(&OPEN) | Some(&EMPTY) => Err(malformed(*pos, "node has more than t slots")),
        Some(_) => Err(malformed(*pos, "stray character")),
        None => Err(malformed(*pos, "unexpected end of input")),
    }
}

fn form_stats(bytes: &[u8]) -> (usize, usize) {
    let (mut n, mut p, mut open) = (0, 0, 0);
    for &b in bytes {
        match b {
            OPEN => {
                n += 1;
                p += open;
                open += 1;
            }
            CLOSE => open -= 1,
            _ => {}
        }
    }
    (n, p)
}

/// Visits the canonical form of every `[t,n]` tree in ascending
/// lexicographic order, without building the trees.
///
/// The forms are generated character by character. At each vacant slot the
/// only choices are `(` and `.`, tried in that (byte) order, and `)` is
/// forced once a node has all of its slots, so the visit order is exactly
/// the lexicographic order of the text.
pub fn for_each_canonical(t: usize, n: usize, cap: u64, mut visit: impl FnMut(&str)) -> Result<()> {
    check_arity(t)?;
    check_cap(t, n, cap)?;
    if n == 0 {
        return Ok(());
    }
    let mut gen = FormGenerator {
        t,
        n,
        buf: vec![OPEN],
        filled: vec![0],
        used: 1,
        free: t,
    };
    gen.run(&mut visit);
    Ok(())
}

fn check_cap(t: usize, n: usize, cap: u64) -> Result<()> {
    let total = catalan_t(t, n);
    if total.to_u64().is_none_or(|c| c > cap) {
        return Err(Error::ResourceLimit(format!(
            "C_{t}({n}) = {total} trees exceeds the enumeration cap of {cap}"
        )));
    }
    Ok(())
}

struct FormGenerator {
    t: usize,
    n: usize,
    buf: Vec<u8>,
    // slots already written for each open node
    filled: Vec<usize>,
    used: usize,
    // vacant slots still to be written across all open nodes
    free: usize,
}

impl FormGenerator {
    fn run(&mut self, visit: &mut impl FnMut(&str)) {
        let Some(&top) = self.filled.last() else {
            if self.used == self.n {
                // only ASCII bytes are ever pushed
                visit(std::str::from_utf8(&self.buf).expect("ascii"));
            }
            return;
        };
        if top == self.t {
            self.filled.pop();
            self.buf.push(CLOSE);
            self.run(visit);
            self.buf.pop();
            self.filled.push(top);
            return;
        }
        if self.used < self.n {
            *self.filled.last_mut().unwrap() += 1;
            self.filled.push(0);
            self.buf.push(OPEN);
            self.used += 1;
            self.free += self.t - 1;
            self.run(visit);
            self.free -= self.t - 1;
            self.used -= 1;
            self.buf.pop();
            self.filled.pop();
            *self.filled.last_mut().unwrap() -= 1;
        }
        // a vacant slot is only allowed if the remaining nodes still fit
        if self.used == self.n || self.free > 1 {
            *self.filled.last_mut().unwrap() += 1;
            self.buf.push(EMPTY);
            self.free -= 1;
            self.run(visit);
            self.free += 1;
            self.buf.pop();
            *self.filled.last_mut().unwrap() -= 1;
        }
    }
}

/// All `[t,n]` trees in ascending canonical-form order, using the default cap.
pub fn enumerate_trees(t: usize, n: usize) -> Result<Vec<Tree>> {
    enumerate_trees_capped(t, n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_trees_capped(t: usize, n: usize, cap: u64) -> Result<Vec<Tree>> {
    let mut out = Vec::new();
    let mut err = None;
    for_each_canonical(t, n, cap, |form| match decode(form, t) {
        Ok(tree) => out.push(tree),
        Err(e) => err = err.take().or(Some(e)),
    })?;
    match err {
        Some(e) => Err(Error::Invariant(format!("generated form failed to decode: {e}"))),
        None => Ok(out),
    }
}

/// The first `k` `[t,q]` trees when all of them are ordered by path length,
/// ties broken by canonical form.
pub fn first_k_by_path_length(t: usize, q: usize, k: usize) -> Result<Vec<Tree>> {
    first_k_by_path_length_capped(t, q, k, DEFAULT_ENUMERATION_CAP)
}

pub fn first_k_by_path_length_capped(t: usize, q: usize, k: usize, cap: u64) -> Result<Vec<Tree>> {
    check_arity(t)?;
    let population = catalan_t(t, q);
    if population < num_bigint::BigUint::from(k) {
        return Err(Error::InsufficientPopulation {
            t,
            q,
            requested: k,
            available: population.to_string(),
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    // max-heap holding the k smallest (p, form) seen so far
    let mut best: BinaryHeap<(usize, String)> = BinaryHeap::with_capacity(k + 1);
    for_each_canonical(t, q, cap, |form| {
        let (_, p) = form_stats(form.as_bytes());
        if best.len() < k {
            best.push((p, form.to_string()));
        } else if let Some(top) = best.peek() {
            if (p, form) < (top.0, top.1.as_str()) {
                best.pop();
                best.push((p, form.to_string()));
            }
        }
    })?;
    best.into_sorted_vec()
        .into_iter()
        .map(|(_, form)| decode(&form, t))
        .collect()
}

/// `(parent, slot)` of a non-root node.
pub(crate) type ParentLink = (usize, usize);

/// Index-based mutable view of a tree, used by the transforms that need to
/// address nodes by position (deleting a leaf, grafting at a leaf).
#[derive(Clone, Debug)]
pub(crate) struct FlatTree {
    pub t: usize,
    pub slots: Vec<Vec<Option<usize>>>,
}

impl FlatTree {
    pub fn single(t: usize) -> FlatTree {
        FlatTree {
            t,
            slots: vec![vec![None; t]],
        }
    }

    pub fn from_tree(tree: &Tree) -> FlatTree {
        let mut flat = FlatTree::single(tree.arity());
        flat.graft(0, tree);
        flat
    }

    /// Replaces node `at` (expected to be a leaf) by a copy of `tree`, the
    /// node itself becoming the copy's root.
    pub fn graft(&mut self, at: usize, tree: &Tree) {
        let mut stack = vec![(at, tree)];
        while let Some((id, node)) = stack.pop() {
            for (slot, child) in node.children.iter().enumerate() {
                if let Some(c) = child {
                    let cid = self.add_child(id, slot);
                    stack.push((cid, c));
                }
            }
        }
    }

    pub fn add_child(&mut self, parent: usize, slot: usize) -> usize {
        debug_assert!(self.slots[parent][slot].is_none());
        let id = self.slots.len();
        self.slots.push(vec![None; self.t]);
        self.slots[parent][slot] = Some(id);
        id
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.slots[id].iter().all(Option::is_none)
    }

    /// Reachable nodes in breadth-first, left-to-right order with depth and
    /// parent link.
    pub fn bfs(&self) -> Vec<(usize, usize, Option<ParentLink>)> {
        let mut out = Vec::new();
        let mut queue = VecDeque::from([(0usize, 0usize, None)]);
        while let Some((id, depth, parent)) = queue.pop_front() {
            out.push((id, depth, parent));
            for (slot, c) in self.slots[id].iter().enumerate() {
                if let Some(c) = *c {
                    queue.push_back((c, depth + 1, Some((id, slot))));
                }
            }
        }
        out
    }

    /// Leaves in left-to-right (preorder) order, with their depths.
    pub fn leaves_left_to_right(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            if self.is_leaf(id) {
                out.push((id, depth));
            }
            for c in self.slots[id].iter().rev().flatten() {
                stack.push((*c, depth + 1));
            }
        }
        out
    }

    pub fn to_tree(&self) -> Tree {
        self.subtree(0)
    }

    fn subtree(&self, id: usize) -> Tree {
        Tree {
            children: self.slots[id]
                .iter()
                .map(|c| c.map(|c| self.subtree(c)))
                .collect(),
        }
    }
}
