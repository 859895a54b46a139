//! LZ78 incremental parsing over a t-symbol alphabet and the universal type
//! of a sequence, i.e. the shape of its phrase dictionary.
//!
//! The dictionary is a t-ary tree: the root is the empty phrase and the child
//! in slot `s` of a phrase is that phrase extended by symbol `s`. When the
//! parse ends exactly on a phrase boundary the tree's path length equals the
//! sequence length, which makes the number of universal types of length-`L`
//! sequences equal to `T_t(L)`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{check_arity, Error, Result};
use crate::tree::{CanonicalForm, FlatTree, Tree};

/// Default cap on the number of sequences a census may visit.
pub const DEFAULT_CENSUS_CAP: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequence {
    t: usize,
    symbols: Vec<u32>,
}

impl Sequence {
    pub fn new(t: usize, symbols: Vec<u32>) -> Result<Sequence> {
        check_arity(t)?;
        if let Some((position, &symbol)) = symbols
            .iter()
            .enumerate()
            .find(|(_, &s)| s as usize >= t)
        {
            return Err(Error::SymbolOutOfRange {
                symbol,
                position,
                t,
            });
        }
        Ok(Sequence { t, symbols })
    }

    /// Maps each character of `text` to its index in `alphabet`; the
    /// alphabet size is the arity.
    pub fn from_alphabet(text: &str, alphabet: &str) -> Result<Sequence> {
        let letters: Vec<char> = alphabet.chars().collect();
        let t = letters.len();
        check_arity(t)?;
        if letters.iter().collect::<BTreeSet<_>>().len() != t {
            return Err(Error::Precondition(format!(
                "alphabet {alphabet:?} repeats a letter"
            )));
        }
        let symbols = text
            .chars()
            .enumerate()
            .map(|(position, c)| {
                letters
                    .iter()
                    .position(|&l| l == c)
                    .map(|i| i as u32)
                    .ok_or_else(|| {
                        Error::Precondition(format!(
                            "character {c:?} at position {position} is not in alphabet {alphabet:?}"
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Sequence { t, symbols })
    }

    /// Parses `"0,1,1,0"`; the empty string is the empty sequence.
    pub fn from_integers(text: &str, t: usize) -> Result<Sequence> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Sequence::new(t, Vec::new());
        }
        let symbols = trimmed
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Precondition(format!("not a symbol index: {part:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Sequence::new(t, symbols)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseResult {
    pub phrases: Vec<Vec<u32>>,
    pub tree: Tree,
    /// the input ended exactly at the end of a phrase
    pub exact: bool,
    /// the trailing symbols that matched an existing phrase when input ran out
    pub residual: Vec<u32>,
}

impl ParseResult {
    /// Checks concatenation, distinctness, prefix closure and the path length
    /// identity against the parsed input.
    pub fn check(&self, seq: &Sequence) -> Result<()> {
        let fail = |what: &str| Err(Error::Invariant(format!("parse result: {what}")));
        let joined: Vec<u32> = self
            .phrases
            .iter()
            .flatten()
            .chain(&self.residual)
            .copied()
            .collect();
        if joined != seq.symbols {
            return fail("phrases and residual do not concatenate to the input");
        }
        let mut seen: BTreeSet<&[u32]> = BTreeSet::new();
        for phrase in &self.phrases {
            if phrase.is_empty() {
                return fail("empty phrase");
            }
            if !(phrase.len() == 1 || seen.contains(&phrase[..phrase.len() - 1])) {
                return fail("phrase prefix missing from earlier phrases");
            }
            if !seen.insert(phrase) {
                return fail("repeated phrase");
            }
        }
        if self.exact != self.residual.is_empty() {
            return fail("exactness flag disagrees with the residual");
        }
        if !self.residual.is_empty() && !seen.contains(self.residual.as_slice()) {
            return fail("residual is not a known phrase");
        }
        let measure = self.tree.measure();
        if measure.n != self.phrases.len() + 1 || measure.p != seq.len() - self.residual.len() {
            return fail("tree size or path length does not match the phrases");
        }
        Ok(())
    }
}

pub fn parse(seq: &Sequence) -> ParseResult {
    let mut dict = FlatTree::single(seq.t);
    let mut phrases = Vec::new();
    let (mut node, mut start) = (0usize, 0usize);
    for (i, &s) in seq.symbols.iter().enumerate() {
        let s = s as usize;
        match dict.slots[node][s] {
            Some(next) => node = next,
            None => {
                dict.add_child(node, s);
                phrases.push(seq.symbols[start..=i].to_vec());
                node = 0;
                start = i + 1;
            }
        }
    }
    let residual = seq.symbols[start..].to_vec();
    ParseResult {
        phrases,
        tree: dict.to_tree(),
        exact: residual.is_empty(),
        residual,
    }
}

/// Canonical form of the dictionary built from the complete phrases.
pub fn type_of(seq: &Sequence) -> CanonicalForm {
    parse(seq).tree.encode()
}

#[derive(Clone, Debug, Serialize)]
pub struct Census {
    pub t: usize,
    pub length: usize,
    pub sequences: u64,
    pub exact_sequences: u64,
    pub types: BTreeSet<CanonicalForm>,
    pub count: usize,
}

pub fn census(t: usize, length: usize) -> Result<Census> {
    census_capped(t, length, DEFAULT_CENSUS_CAP)
}

/// Collects the universal types of all exactly-parsed sequences of the given
/// length.
pub fn census_capped(t: usize, length: usize, cap: u64) -> Result<Census> {
    check_arity(t)?;
    let total = num_bigint::BigUint::from(t)
        .pow(length as u32)
        .to_u64()
        .filter(|&c| c <= cap)
        .ok_or_else(|| {
            Error::ResourceLimit(format!(
                "{t}^{length} sequences exceed the census cap of {cap}"
            ))
        })?;
    let mut symbols = vec![0u32; length];
    let mut types = BTreeSet::new();
    let mut exact_sequences = 0;
    for _ in 0..total {
        let seq = Sequence {
            t,
            symbols: symbols.clone(),
        };
        let parsed = parse(&seq);
        if parsed.exact {
            exact_sequences += 1;
            types.insert(parsed.tree.encode());
        }
        // odometer increment, last symbol fastest
        for s in symbols.iter_mut().rev() {
            *s += 1;
            if (*s as usize) < t {
                break;
            }
            *s = 0;
        }
    }
    Ok(Census {
        t,
        length,
        sequences: total,
        exact_sequences,
        count: types.len(),
        types,
    })
}

/// A sequence whose parse dictionary is exactly `tree`: the phrases of all
/// non-root nodes in breadth-first, left-to-right order.
pub fn witness(tree: &Tree) -> Sequence {
    let t = tree.arity();
    let mut out = Vec::with_capacity(tree.path_length());
    let mut queue = std::collections::VecDeque::from([(tree, Vec::<u32>::new())]);
    while let Some((node, path)) = queue.pop_front() {
        out.extend_from_slice(&path);
        for (slot, child) in node.children().iter().enumerate() {
            if let Some(c) = child {
                let mut next = path.clone();
                next.push(slot as u32);
                queue.push_back((c, next));
            }
        }
    }
    Sequence { t, symbols: out }
}

/// Buckets corpus indices by universal type, buckets ordered by canonical
/// form.
pub fn classify(
    corpus: &[Sequence],
    require_equal_length: bool,
) -> Result<BTreeMap<CanonicalForm, Vec<usize>>> {
    let mut buckets: BTreeMap<CanonicalForm, Vec<usize>> = BTreeMap::new();
    let Some(first) = corpus.first() else {
        return Ok(buckets);
    };
    for (index, seq) in corpus.iter().enumerate() {
        if seq.t != first.t {
            return Err(Error::MixedArity {
                expected: first.t,
                found: seq.t,
                index,
            });
        }
        if require_equal_length && seq.len() != first.len() {
            return Err(Error::LengthMismatch {
                expected: first.len(),
                found: seq.len(),
                index,
            });
        }
        buckets.entry(type_of(seq)).or_default().push(index);
    }
    Ok(buckets)
}
