use std::collections::BTreeSet;

use proptest::prelude::*;

use pathlen_core::constructions::{increment_path_length, make_tree};
use pathlen_core::formulas::{catalan_t, p_max, p_min};
use pathlen_core::lz78::{classify, parse, type_of, witness, Sequence};
use pathlen_core::{build_table, decode, Error, Tree};

/// Grows a tree by attaching each new node to a vacant slot picked by `picks`.
fn grow(t: usize, picks: &[usize]) -> Tree {
    let mut slots: Vec<Vec<Option<usize>>> = vec![vec![None; t]];
    for &pick in picks {
        let vacant: Vec<(usize, usize)> = slots
            .iter()
            .enumerate()
            .flat_map(|(id, s)| (0..t).filter(move |&k| s[k].is_none()).map(move |k| (id, k)))
            .collect();
        let (id, k) = vacant[pick % vacant.len()];
        slots.push(vec![None; t]);
        let new = slots.len() - 1;
        slots[id][k] = Some(new);
    }
    fn build(slots: &[Vec<Option<usize>>], id: usize) -> Tree {
        Tree::from_children(slots[id].iter().map(|c| c.map(|c| build(slots, c))).collect()).unwrap()
    }
    build(&slots, 0)
}

fn trees() -> impl Strategy<Value = Tree> {
    (2usize..=4, prop::collection::vec(any::<usize>(), 0..40)).prop_map(|(t, picks)| grow(t, &picks))
}

fn sequences() -> impl Strategy<Value = Sequence> {
    (2usize..=4)
        .prop_flat_map(|t| (Just(t), prop::collection::vec(0..t as u32, 0..200)))
        .prop_map(|(t, symbols)| Sequence::new(t, symbols).unwrap())
}

proptest! {
    #[test]
    fn encoding_round_trips(tree in trees()) {
        let form = tree.encode();
        // one "(" and ")" per node, one "." per vacant slot
        prop_assert_eq!(form.as_str().len(), (tree.arity() + 1) * tree.node_count() + 1);
        prop_assert_eq!(&decode(form.as_str(), tree.arity()).unwrap(), &tree);
        prop_assert_eq!(form.stats(), (tree.node_count(), tree.path_length()));
    }

    #[test]
    fn measure_is_consistent(tree in trees()) {
        let m = tree.measure();
        let t = tree.arity();
        prop_assert_eq!(m.n, tree.node_count());
        prop_assert_eq!(m.p, tree.path_length());
        prop_assert_eq!(m.profile.node_count(), m.n);
        prop_assert_eq!(m.profile.path_length(), m.p);
        prop_assert!(m.profile.is_feasible(t));
        prop_assert_eq!(m.max_depth + 1, m.profile.depths().len());
        let depth_sum: usize = tree.bfs().iter().map(|&(_, d)| d).sum();
        prop_assert_eq!(depth_sum, m.p);
        let leaves = tree.bfs().iter().filter(|(node, _)| node.is_leaf()).count();
        prop_assert_eq!(leaves, m.leaves);
        prop_assert!(p_min(t, m.n).unwrap().p <= m.p && m.p <= p_max(m.n));
    }

    #[test]
    fn increment_adds_exactly_one(tree in trees()) {
        let m = tree.measure();
        match increment_path_length(&tree) {
            Ok(next) => {
                prop_assert_eq!(next.node_count(), m.n);
                prop_assert_eq!(next.path_length(), m.p + 1);
                prop_assert_eq!(next.arity(), tree.arity());
            }
            Err(Error::AtMaximum) => prop_assert_eq!(m.p, p_max(m.n)),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn make_tree_hits_any_feasible_target(t in 2usize..=4, n in 1usize..=40, frac in 0.0f64..=1.0) {
        let lo = p_min(t, n).unwrap().p;
        let hi = p_max(n);
        let p = lo + ((hi - lo) as f64 * frac) as usize;
        let tree = make_tree(t, n, p).unwrap();
        prop_assert_eq!((tree.node_count(), tree.path_length()), (n, p));
        prop_assert!(make_tree(t, n, hi + 1).is_err());
    }

    #[test]
    fn parse_invariants(seq in sequences()) {
        let r = parse(&seq);
        r.check(&seq).unwrap();
        prop_assert_eq!(r.tree.arity(), seq.t());
        prop_assert_eq!(r.phrases.len() + 1, r.tree.node_count());
        let distinct: BTreeSet<_> = r.phrases.iter().collect();
        prop_assert_eq!(distinct.len(), r.phrases.len());
    }

    #[test]
    fn witness_reproduces_its_tree(tree in trees()) {
        let w = witness(&tree);
        prop_assert_eq!(w.len(), tree.path_length());
        let r = parse(&w);
        prop_assert!(r.exact);
        prop_assert_eq!(&r.tree, &tree);
        prop_assert_eq!(type_of(&w), tree.encode());
    }

    #[test]
    fn classify_partitions_the_corpus(seqs in prop::collection::vec(prop::collection::vec(0u32..2, 0..24), 0..30)) {
        let corpus: Vec<Sequence> = seqs.into_iter().map(|s| Sequence::new(2, s).unwrap()).collect();
        let buckets = classify(&corpus, false).unwrap();
        let mut seen: Vec<usize> = buckets.values().flatten().copied().collect();
        seen.sort();
        prop_assert_eq!(seen, (0..corpus.len()).collect::<Vec<_>>());
        for (form, members) in &buckets {
            for &i in members {
                prop_assert_eq!(&type_of(&corpus[i]), form);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn table_counts_every_sampled_tree(tree in trees()) {
        let m = tree.measure();
        let table = build_table(tree.arity(), m.p).unwrap();
        prop_assert!(table.count_np(m.n, m.p).unwrap() >= 1u32.into());
        if table.covers_row(m.n) {
            prop_assert_eq!(table.row_sum(m.n), catalan_t(tree.arity(), m.n));
        }
    }
}
