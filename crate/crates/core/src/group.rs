//! Free-group combinatorics: reduced words, conjugacy classes, enumeration.
//!
//! Letters are ordered `a < A < b < B < ...` where uppercase denotes the
//! inverse generator. Conjugacy classes are represented by the minimal
//! rotation of a cyclically reduced word under that order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::par;

/// Largest supported rank (letters are printed as `a..z`).
pub const MAX_RANK: usize = 26;

/// A generator or its inverse, encoded as `2 * index + inverse`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(u8);

impl Letter {
    pub fn generator(index: usize) -> Self {
        Letter((2 * index) as u8)
    }

    pub fn generator_inverse(index: usize) -> Self {
        Letter((2 * index + 1) as u8)
    }

    pub fn from_code(code: u8) -> Self {
        Letter(code)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.0 ^ 1 == other.0
    }

    fn to_char(self) -> char {
        let c = (b'a' + self.index() as u8) as char;
        if self.is_inverse() {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }
}

/// Freely reduced word. The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word { letters: Vec::new() }
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(raw: I) -> Self {
        let mut letters: Vec<Letter> = Vec::new();
        for l in raw {
            match letters.last() {
                Some(&last) if last.cancels(l) => {
                    letters.pop();
                }
                _ => letters.push(l),
            }
        }
        Word { letters }
    }

    /// Wraps letters that are already known to be reduced.
    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|w| !w[0].cancels(w[1])));
        Word { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Highest generator index used plus one.
    pub fn min_rank(&self) -> usize {
        self.letters.iter().map(|l| l.index() + 1).max().unwrap_or(0)
    }

    pub fn multiply(&self, other: &Word) -> Word {
        Word::reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn invert(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn power(&self, n: i64) -> Word {
        let base = if n < 0 { self.invert() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(f), Some(l)) => self.letters.len() == 1 || !f.cancels(*l),
            _ => true,
        }
    }

    /// Returns `(u, core)` with `self = u * core * u^{-1}` and `core`
    /// cyclically reduced.
    pub fn cyclic_reduction(&self) -> (Word, Word) {
        let n = self.letters.len();
        let mut i = 0;
        while n >= 2 * i + 2 && self.letters[i].cancels(self.letters[n - 1 - i]) {
            i += 1;
        }
        (
            Word { letters: self.letters[..i].to_vec() },
            Word { letters: self.letters[i..n - i].to_vec() },
        )
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = LabError;

    /// Parses `abAB`-style words; `1`, `e` or the empty string give the identity.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "1" || s == "e" {
            return Ok(Word::identity());
        }
        let mut raw = Vec::with_capacity(s.len());
        for c in s.chars() {
            if !c.is_ascii_alphabetic() {
                return Err(LabError::InvalidArgument(format!("bad letter {c:?} in word {s:?}")));
            }
            let idx = (c.to_ascii_lowercase() as u8 - b'a') as usize;
            raw.push(if c.is_ascii_uppercase() {
                Letter::generator_inverse(idx)
            } else {
                Letter::generator(idx)
            });
        }
        Ok(Word::reduce(raw))
    }
}

/// Conjugacy class of a non-trivial element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConjClass {
    rep: Word,
    root_len: usize,
}

impl ConjClass {
    /// Canonical representative: cyclically reduced, minimal rotation.
    pub fn rep(&self) -> &Word {
        &self.rep
    }

    /// Translation length (letter count of the representative).
    pub fn length(&self) -> usize {
        self.rep.len()
    }

    pub fn root(&self) -> Word {
        Word::from_reduced(self.rep.letters[..self.root_len].to_vec())
    }

    pub fn root_len(&self) -> usize {
        self.root_len
    }

    /// `p` in `rep = root^p`.
    pub fn power(&self) -> usize {
        self.rep.len() / self.root_len
    }

    pub fn is_primitive(&self) -> bool {
        self.root_len == self.rep.len()
    }

    /// Class of the inverse element.
    pub fn inverse(&self) -> ConjClass {
        class_representative(&self.rep.invert()).expect("non-trivial class")
    }
}

impl fmt::Display for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rep.fmt(f)
    }
}

/// Rank-`k` free group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeGroup {
    rank: usize,
}

impl FreeGroup {
    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 || rank > MAX_RANK {
            return Err(LabError::InvalidArgument(format!("rank {rank} outside 1..={MAX_RANK}")));
        }
        Ok(FreeGroup { rank })
    }

    /// Only free groups are supported; any other presentation is rejected.
    pub fn from_presentation(kind: &str, rank: usize) -> Result<Self> {
        match kind {
            "free" => FreeGroup::new(rank),
            other => Err(LabError::UnsupportedGroup(other.to_string())),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn alphabet_size(&self) -> usize {
        2 * self.rank
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..2 * self.rank as u8).map(Letter)
    }
}

/// Least rotation by the two-pointer method; returns the start index.
fn least_rotation(s: &[Letter]) -> usize {
    let n = s.len();
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = s[(i + k) % n];
        let b = s[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

/// Smallest period `p` with `p | n` such that the word is a power of its
/// length-`p` prefix.
fn primitive_period(s: &[Letter]) -> usize {
    let n = s.len();
    let mut fail = vec![0usize; n + 1];
    let mut k = 0;
    for i in 1..n {
        while k > 0 && s[i] != s[k] {
            k = fail[k];
        }
        if s[i] == s[k] {
            k += 1;
        }
        fail[i + 1] = k;
    }
    let p = n - fail[n];
    if n.is_multiple_of(p) {
        p
    } else {
        n
    }
}

pub fn class_representative(x: &Word) -> Result<ConjClass> {
    let (_, core) = x.cyclic_reduction();
    if core.is_empty() {
        return Err(LabError::IdentityWord);
    }
    let k = least_rotation(&core.letters);
    let mut letters = core.letters[k..].to_vec();
    letters.extend_from_slice(&core.letters[..k]);
    let root_len = primitive_period(&letters);
    Ok(ConjClass { rep: Word::from_reduced(letters), root_len })
}

/// Number of cyclically reduced words of length `n` in `F_k`.
pub fn cyclically_reduced_count(rank: usize, n: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    let q = (2 * rank - 1) as u128;
    let parity: u128 = if n.is_multiple_of(2) { 2 } else { 0 };
    q.pow(n as u32) + 1 + (rank as u128 - 1) * parity
}

/// Upper estimate of the number of conjugacy classes with length `<= max_len`.
pub fn class_count_estimate(rank: usize, max_len: usize) -> u128 {
    (1..=max_len).map(|n| cyclically_reduced_count(rank, n) / n as u128 + 1).sum()
}

pub const DEFAULT_CLASS_BUDGET: usize = 20_000_000;

/// All conjugacy classes of length `1..=max_len`, ordered by length and then
/// lexicographically by representative.
pub fn enumerate_classes(rank: usize, max_len: usize, budget: usize) -> Result<Vec<ConjClass>> {
    if rank < 2 {
        return Err(LabError::InvalidArgument("enumeration needs rank >= 2".into()));
    }
    if max_len == 0 {
        return Err(LabError::InvalidArgument("max_len must be >= 1".into()));
    }
    FreeGroup::new(rank)?;
    let est = class_count_estimate(rank, max_len);
    if est > budget as u128 {
        return Err(LabError::ResourceLimit(format!(
            "about {est} classes up to length {max_len} exceed the budget of {budget}"
        )));
    }
    let mut out = Vec::with_capacity(est as usize);
    for n in 1..=max_len {
        out.extend(necklaces_of_length(rank, n));
    }
    Ok(out)
}

/// Classes of length exactly `n` in lexicographic order.
pub fn necklaces_of_length(rank: usize, n: usize) -> Vec<ConjClass> {
    let alphabet = (2 * rank) as u8;
    // Split the search tree at a fixed depth so subtrees can run in parallel;
    // concatenating subtree outputs in frontier order reproduces the
    // sequential order exactly.
    let split = if n >= 8 { 3 } else { n + 1 };
    let mut frontier = Vec::new();
    let mut a = vec![0u8; n + 1];
    let mut sink = Vec::new();
    fkm(1, 1, n, alphabet, split, &mut a, &mut frontier, &mut sink);
    if frontier.is_empty() {
        return sink;
    }
    let parts = par::map(&frontier, |(prefix, p): &(Vec<u8>, usize)| {
        let mut a = prefix.clone();
        a.resize(n + 1, 0);
        let mut out = Vec::new();
        let mut unused = Vec::new();
        fkm(prefix.len(), *p, n, alphabet, usize::MAX, &mut a, &mut unused, &mut out);
        out
    });
    parts.into_iter().flatten().collect()
}

/// Fredricksen–Kessler–Maiorana prenecklace recursion restricted to reduced
/// words. `a[0]` is a sentinel; `a[1..=n]` holds the word.
#[allow(clippy::too_many_arguments)]
fn fkm(
    t: usize,
    p: usize,
    n: usize,
    alphabet: u8,
    split: usize,
    a: &mut Vec<u8>,
    frontier: &mut Vec<(Vec<u8>, usize)>,
    out: &mut Vec<ConjClass>,
) {
    if t > n {
        if n.is_multiple_of(p) && (n == 1 || a[n] ^ 1 != a[1]) {
            let letters = a[1..=n].iter().map(|&c| Letter(c)).collect();
            out.push(ConjClass { rep: Word::from_reduced(letters), root_len: p });
        }
        return;
    }
    if t == split {
        frontier.push((a[..t].to_vec(), p));
        return;
    }
    let start = a[t - p];
    for j in start..alphabet {
        if t > 1 && j == a[t - 1] ^ 1 {
            continue;
        }
        a[t] = j;
        let np = if j == start { p } else { t };
        fkm(t + 1, np, n, alphabet, split, a, frontier, out);
    }
}

/// Coprime elements share no common power; in a free group this is
/// equivalent to non-commuting.
pub fn are_coprime(x: &Word, y: &Word) -> Result<bool> {
    if x.is_identity() || y.is_identity() {
        return Err(LabError::IdentityWord);
    }
    Ok(x.multiply(y) != y.multiply(x))
}

/// Uniformly random reduced word of length `n`, deterministic in `seed`.
pub fn random_word(seed: u64, rank: usize, n: usize) -> Result<Word> {
    if n == 0 {
        return Err(LabError::InvalidArgument("random word length must be >= 1".into()));
    }
    FreeGroup::new(rank)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = 2 * rank as u8;
    let mut letters = Vec::with_capacity(n);
    letters.push(Letter(rng.gen_range(0..alphabet)));
    while letters.len() < n {
        // Uniform over the 2k-1 letters that do not cancel the previous one.
        let prev = *letters.last().unwrap();
        let mut c = rng.gen_range(0..alphabet - 1);
        if c >= prev.inverse().0 {
            c += 1;
        }
        letters.push(Letter(c));
    }
    Ok(Word::from_reduced(letters))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn reduce_examples() {
        let a = Letter::generator(0);
        let ai = Letter::generator_inverse(0);
        let b = Letter::generator(1);
        let bi = Letter::generator_inverse(1);
        assert_eq!(Word::reduce([a, ai, b]), w("b"));
        assert!(Word::reduce([]).is_identity());
        assert_eq!(Word::reduce([a, b, bi, a]), w("aa"));
    }

    #[test]
    fn group_operations() {
        assert!(w("a").multiply(&w("A")).is_identity());
        assert_eq!(w("ab").invert(), w("BA"));
        assert_eq!(w("ab").power(2), w("abab"));
        assert!(w("ab").power(0).is_identity());
        assert_eq!(w("ab").power(-1), w("BA"));
    }

    #[test]
    fn representatives() {
        let c = class_representative(&w("abA")).unwrap();
        assert_eq!(c.rep(), &w("b"));
        assert_eq!(c.length(), 1);
        assert!(c.is_primitive());

        let c = class_representative(&w("abab")).unwrap();
        assert_eq!(c.rep(), &w("abab"));
        assert_eq!(c.root(), w("ab"));
        assert!(!c.is_primitive());
        assert_eq!(c.power(), 2);

        assert_eq!(class_representative(&w("ba")).unwrap().rep(), &w("ab"));
        assert_eq!(class_representative(&w("aA")), Err(LabError::IdentityWord));
    }

    #[test]
    fn letter_order_is_a_lt_inverse_a_lt_b() {
        // a < A < b, so the class of {Ab, bA} is represented by Ab.
        assert_eq!(class_representative(&w("bA")).unwrap().rep(), &w("Ab"));
    }

    #[test]
    fn small_enumeration() {
        let cs = enumerate_classes(2, 1, DEFAULT_CLASS_BUDGET).unwrap();
        let reps: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
        assert_eq!(reps, ["a", "A", "b", "B"]);
    }

    #[test]
    fn crw_counts() {
        for n in 1..=8 {
            let expect = 3u128.pow(n as u32) as i128 + 2 + if n % 2 == 0 { 1 } else { -1 };
            assert_eq!(cyclically_reduced_count(2, n) as i128, expect);
        }
        assert_eq!(cyclically_reduced_count(2, 3), 28);
    }

    #[test]
    fn budget_enforced() {
        assert!(matches!(enumerate_classes(2, 30, 1000), Err(LabError::ResourceLimit(_))));
    }

    #[test]
    fn coprimality() {
        assert!(are_coprime(&w("a"), &w("b")).unwrap());
        assert!(!are_coprime(&w("ab"), &w("abab")).unwrap());
        assert!(!are_coprime(&w("a"), &w("A")).unwrap());
        assert_eq!(are_coprime(&w(""), &w("a")), Err(LabError::IdentityWord));
    }

    #[test]
    fn random_words() {
        let x = random_word(1, 2, 3).unwrap();
        assert_eq!(x, random_word(1, 2, 3).unwrap());
        assert_eq!(x.len(), 3);
        assert!(random_word(2, 2, 0).is_err());
        let long = random_word(7, 3, 200).unwrap();
        assert_eq!(long.len(), 200);
        assert_eq!(Word::reduce(long.letters().iter().copied()), long);
    }

    #[test]
    fn surface_groups_rejected() {
        assert!(matches!(
            FreeGroup::from_presentation("surface", 2),
            Err(LabError::UnsupportedGroup(_))
        ));
    }
}
