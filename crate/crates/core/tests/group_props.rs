use std::collections::BTreeSet;

use pressure_lab::group::*;
use proptest::prelude::*;

fn word_strategy(rank: usize, max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..(2 * rank) as u8, 0..max).prop_map(|v| Word::reduce(v.into_iter().map(Letter::from_code)))
}

fn nonidentity(rank: usize, max: usize) -> impl Strategy<Value = Word> {
    word_strategy(rank, max).prop_filter("non-identity", |w| !w.is_identity())
}

/// All reduced words of length n, by brute force over letter strings.
fn reduced_words(rank: usize, n: usize) -> Vec<Vec<u8>> {
    let a = 2 * rank as u8;
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &out {
            for c in 0..a {
                if w.last().is_none_or(|&l: &u8| l ^ 1 != c) {
                    let mut v = w.clone();
                    v.push(c);
                    next.push(v);
                }
            }
        }
        out = next;
    }
    out
}

#[test]
fn cyclically_reduced_counts_match_formula() {
    for n in 1..=8 {
        let crw = reduced_words(2, n).into_iter().filter(|w| w[0] ^ 1 != w[n - 1]).count() as u128;
        let formula = 3u128.pow(n as u32) + 2 + if n % 2 == 0 { 1 } else { 0 } - if n % 2 == 1 { 1 } else { 0 };
        assert_eq!(crw, formula, "n = {n}");
        assert_eq!(cyclically_reduced_count(2, n), formula);
    }
    assert_eq!(cyclically_reduced_count(2, 3), 28);
}

#[test]
fn enumeration_matches_rotation_dedup_oracle() {
    for n in 1..=8 {
        let mut necklaces = BTreeSet::new();
        for w in reduced_words(2, n) {
            if w[0] ^ 1 == w[n - 1] {
                continue;
            }
            let min = (0..n).map(|r| [&w[r..], &w[..r]].concat()).min().unwrap();
            necklaces.insert(min);
        }
        let ours: Vec<Vec<u8>> =
            necklaces_of_length(2, n).iter().map(|c| c.rep().letters().iter().map(|l| l.code()).collect()).collect();
        assert_eq!(ours, necklaces.into_iter().collect::<Vec<_>>(), "n = {n}");
    }
    let all = enumerate_classes(2, 8, 1 << 20).unwrap();
    let total: usize = (1..=8).map(|n| necklaces_of_length(2, n).len()).sum();
    assert_eq!(all.len(), total);
    assert!(all.windows(2).all(|p| (p[0].length(), p[0].rep()) < (p[1].length(), p[1].rep())));
}

#[test]
fn rank_three_enumeration() {
    let classes = enumerate_classes(3, 4, 1 << 20).unwrap();
    for n in 1..=4 {
        let rotations: u128 = classes.iter().filter(|c| c.length() == n).map(|c| c.root_len() as u128).sum();
        assert_eq!(rotations, cyclically_reduced_count(3, n));
    }
}

#[test]
fn spec_examples() {
    let w = |s: &str| s.parse::<Word>().unwrap();
    assert_eq!(class_representative(&w("abA")).unwrap().rep(), &w("b"));
    let c = class_representative(&w("abab")).unwrap();
    assert_eq!(c.root(), w("ab"));
    assert!(!c.is_primitive());
    assert_eq!(class_representative(&w("ba")).unwrap().rep(), &w("ab"));
    assert!(matches!(class_representative(&w("aA")), Err(pressure_lab::LabError::IdentityWord)));
    assert_eq!(enumerate_classes(2, 1, 100).unwrap().len(), 4);
    assert!(are_coprime(&w("a"), &w("b")).unwrap());
    assert!(!are_coprime(&w("ab"), &w("abab")).unwrap());
    assert!(!are_coprime(&w("a"), &w("A")).unwrap());
    assert_eq!(random_word(1, 2, 3).unwrap(), random_word(1, 2, 3).unwrap());
    assert!(random_word(2, 2, 0).is_err());
}

proptest! {
    #[test]
    fn reduce_is_idempotent(raw in prop::collection::vec(0u8..4, 0..40)) {
        let w = Word::reduce(raw.into_iter().map(Letter::from_code));
        prop_assert_eq!(Word::reduce(w.letters().iter().copied()), w);
    }

    #[test]
    fn inverse_cancels(x in word_strategy(3, 30)) {
        prop_assert!(x.multiply(&x.invert()).is_identity());
        prop_assert!(x.invert().multiply(&x).is_identity());
    }

    #[test]
    fn class_rep_is_conjugation_invariant(x in nonidentity(2, 20), g in word_strategy(2, 10)) {
        let y = g.multiply(&x).multiply(&g.invert());
        prop_assert_eq!(class_representative(&x).unwrap(), class_representative(&y).unwrap());
    }

    #[test]
    fn coprimality_symmetries(x in nonidentity(2, 12), y in nonidentity(2, 12)) {
        let c = are_coprime(&x, &y).unwrap();
        prop_assert_eq!(c, are_coprime(&y, &x).unwrap());
        prop_assert_eq!(c, are_coprime(&x.invert(), &y).unwrap());
    }

    #[test]
    fn power_is_repeated_product(x in word_strategy(2, 10), n in 0i64..6) {
        let mut p = Word::identity();
        for _ in 0..n {
            p = p.multiply(&x);
        }
        prop_assert_eq!(x.power(n), p.clone());
        prop_assert_eq!(x.power(-n), p.invert());
    }

    #[test]
    fn random_words_are_reduced(seed in any::<u64>(), n in 1usize..50) {
        let w = random_word(seed, 2, n).unwrap();
        prop_assert_eq!(w.len(), n);
        prop_assert_eq!(Word::reduce(w.letters().iter().copied()), w);
    }
}
