//! Library results against independent computations: brute-force
//! enumeration, textbook recurrences and plain floating-point arithmetic.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use pathlen_core::counting::{average_path_length, build_table, path_length_distribution};
use pathlen_core::formulas::{alpha, binary_entropy, catalan_t, max_nodes_for_path_length, p_min};
use pathlen_core::tree::{enumerate_trees, first_k_by_path_length};

/// `C_t(n)` from the slot recurrence `C(n) = [z^(n-1)] C(z)^t`.
fn catalan_by_recurrence(t: usize, n_hi: usize) -> Vec<BigUint> {
    let mut c = vec![BigUint::one()];
    for n in 1..=n_hi {
        let mut power = vec![BigUint::one()];
        for _ in 0..t {
            let mut next = vec![BigUint::zero(); n];
            for (i, a) in power.iter().enumerate() {
                for (j, b) in c.iter().enumerate() {
                    if i + j < n {
                        next[i + j] += a * b;
                    }
                }
            }
            power = next;
        }
        c.push(power[n - 1].clone());
    }
    c
}

#[test]
fn catalan_matches_recurrence() {
    for t in 2..=5 {
        let expected = catalan_by_recurrence(t, 30);
        for (n, e) in expected.iter().enumerate() {
            assert_eq!(&catalan_t(t, n), e, "t={t} n={n}");
        }
    }
}

#[test]
fn table_matches_enumeration_cell_by_cell() {
    for (t, n_hi) in [(2, 9), (3, 7), (4, 6), (5, 5)] {
        let mut brute: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for n in 1..=n_hi {
            for tree in enumerate_trees(t, n).unwrap() {
                *brute.entry((n, tree.path_length())).or_default() += 1;
            }
        }
        let p_hi = n_hi * (n_hi - 1) / 2;
        let table = build_table(t, p_hi).unwrap();
        for n in 1..=n_hi {
            for p in 0..=p_hi {
                let expected = brute.get(&(n, p)).copied().unwrap_or(0);
                assert_eq!(table.count_np(n, p).unwrap(), BigUint::from(expected), "t={t} n={n} p={p}");
            }
        }
    }
}

#[test]
fn max_nodes_is_tight() {
    for t in 2..=4 {
        for p in 0..200 {
            let n = max_nodes_for_path_length(t, p);
            assert!(p_min(t, n).unwrap().p <= p, "t={t} p={p}");
            assert!(p_min(t, n + 1).unwrap().p > p, "t={t} p={p}");
        }
    }
}

#[test]
fn first_k_are_the_k_smallest() {
    for (t, q, k) in [(2, 6, 20), (3, 5, 40), (2, 8, 100)] {
        let mut all: Vec<(usize, String)> = enumerate_trees(t, q)
            .unwrap()
            .into_iter()
            .map(|tree| (tree.path_length(), tree.encode().into_string()))
            .collect();
        all.sort();
        let picked: Vec<(usize, String)> = first_k_by_path_length(t, q, k)
            .unwrap()
            .into_iter()
            .map(|tree| (tree.path_length(), tree.encode().into_string()))
            .collect();
        assert_eq!(picked, all[..k].to_vec(), "t={t} q={q}");
    }
}

#[test]
fn distribution_and_average_match_enumeration() {
    for (t, q) in [(2, 9), (3, 6)] {
        let trees = enumerate_trees(t, q).unwrap();
        let mut by_p = vec![0u64; q * (q - 1) / 2 + 1];
        for tree in &trees {
            by_p[tree.path_length()] += 1;
        }
        let dist = path_length_distribution(t, q).unwrap();
        let dist: Vec<u64> = dist.iter().map(|c| c.to_u64().unwrap()).collect();
        assert_eq!(dist, by_p);
        let mean = trees.iter().map(|x| x.path_length() as f64).sum::<f64>() / trees.len() as f64;
        assert!((average_path_length(t, q).unwrap() - mean).abs() < 1e-12 * mean);
    }
}

#[test]
fn entropy_constants() {
    let ln2 = std::f64::consts::LN_2;
    assert!((alpha(2) - 2.0 * ln2 * ln2).abs() < 1e-15);
    assert!((alpha(2) - 0.960906).abs() < 1e-6);
    // h(1/3) * 3 * ln 3 = (3 ln 3 - 2 ln 2) ln 3
    let ln3 = 3f64.ln();
    assert!((alpha(3) - (3.0 * ln3 - 2.0 * ln2) * ln3).abs() < 1e-13);
    for x in [0.1, 0.25, 0.4] {
        assert!((binary_entropy(x).unwrap() - binary_entropy(1.0 - x).unwrap()).abs() < 1e-15);
    }
}
