//! Shared oracles and helpers for the integration suites.
//!
//! Everything here is deliberately independent of the library's algorithms:
//! an explicit matrix model of the Weyl letters, trial division, and a
//! brute-force reduction-graph explorer for signed words.  The suites check
//! the library against these, never the library against itself.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::process::Command;

use serde_json::Value;

/// Path to the compiled `tgrw` binary.
pub const BIN: &str = env!("CARGO_BIN_EXE_tgrw");

/// Run the binary, returning its exit code and parsed run report.
pub fn run_tgrw(args: &[&str], envs: &[(&str, &str)]) -> (i32, Value) {
    let mut command = Command::new(BIN);
    command.args(args);
    for (key, value) in envs {
        command.env(key, value);
    }
    let output = command.output().expect("tgrw runs");
    let code = output.status.code().expect("tgrw exits normally");
    let stdout = String::from_utf8(output.stdout).expect("tgrw prints UTF-8");
    let report = serde_json::from_str(&stdout)
        .unwrap_or_else(|e| panic!("tgrw printed malformed JSON ({e}): {stdout}"));
    (code, report)
}

// ---------------------------------------------------------------------------
// Operator model of the Weyl letters.
//
// `a` acts as d/ds and `b` as multiplication by s on polynomials in s,
// truncated to the monomial basis s^0 .. s^(DIM-1); the central letter is
// modelled as the scalar 2 so that its multiplicity stays observable.  A
// word acts by composing left to right (the rightmost letter applies
// first), i.e. as the ordinary matrix product of its letters' matrices.

pub const DIM: usize = 20;

/// Column-major action: `m[i][j]` is the coefficient of s^i in the image of
/// s^j.
pub type Mat = Vec<Vec<i64>>;

pub fn mat_zero() -> Mat {
    vec![vec![0; DIM]; DIM]
}

pub fn mat_identity() -> Mat {
    let mut m = mat_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

pub fn mat_scalar(value: i64) -> Mat {
    let mut m = mat_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = value;
    }
    m
}

/// d/ds: sends s^j to j·s^(j-1).
pub fn mat_deriv() -> Mat {
    let mut m = mat_zero();
    for j in 1..DIM {
        m[j - 1][j] = j as i64;
    }
    m
}

/// Multiplication by s: sends s^j to s^(j+1).
pub fn mat_mul_s() -> Mat {
    let mut m = mat_zero();
    for j in 0..DIM - 1 {
        m[j + 1][j] = 1;
    }
    m
}

pub fn mat_mul(p: &Mat, q: &Mat) -> Mat {
    let mut out = mat_zero();
    for i in 0..DIM {
        for k in 0..DIM {
            let v = p[i][k];
            if v == 0 {
                continue;
            }
            for j in 0..DIM {
                out[i][j] += v * q[k][j];
            }
        }
    }
    out
}

pub fn mat_add(p: &Mat, q: &Mat) -> Mat {
    let mut out = p.clone();
    for (row, qrow) in out.iter_mut().zip(q) {
        for (cell, &v) in row.iter_mut().zip(qrow) {
            *cell += v;
        }
    }
    out
}

pub fn mat_neg(p: &Mat) -> Mat {
    p.iter()
        .map(|row| row.iter().map(|&v| -v).collect())
        .collect()
}

pub fn mat_scale(p: &Mat, factor: i64) -> Mat {
    p.iter()
        .map(|row| row.iter().map(|&v| v * factor).collect())
        .collect()
}

/// The operator of one Weyl letter token ("" and "𝟙" are the unit).
pub fn weyl_letter_matrix(token: &str) -> Mat {
    let mut out = mat_identity();
    if token == "𝟙" {
        return out;
    }
    for c in token.chars() {
        let factor = match c {
            'a' => mat_deriv(),
            'b' => mat_mul_s(),
            'c' => mat_scalar(2),
            other => panic!("unexpected Weyl character {other:?}"),
        };
        out = mat_mul(&out, &factor);
    }
    out
}

/// Compare two operators on the columns s^0 .. s^max_col: words of length
/// at most DIM - 1 - max_col never push those columns past the truncation.
pub fn mats_agree_on_low_columns(p: &Mat, q: &Mat, max_col: usize) -> bool {
    (0..DIM).all(|i| (0..=max_col).all(|j| p[i][j] == q[i][j]))
}

/// Columns on which equality of truncated operators is faithful for the
/// letter lengths the property suites use (at most 3 characters, artifacts
/// confined to columns >= DIM - 3).
pub const FAITHFUL_COLS: usize = 12;

/// A truncated operator compared only where the truncation is faithful, so
/// that identities of the untruncated algebra hold as equalities.
#[derive(Clone, Debug)]
pub struct TruncOp(pub Mat);

impl PartialEq for TruncOp {
    fn eq(&self, other: &Self) -> bool {
        mats_agree_on_low_columns(&self.0, &other.0, FAITHFUL_COLS)
    }
}

// ---------------------------------------------------------------------------
// Trial division.

pub fn prime_factorization(mut n: u64) -> BTreeMap<u64, u32> {
    assert!(n >= 2, "factorization needs n >= 2");
    let mut out = BTreeMap::new();
    let mut d = 2;
    while d * d <= n {
        while n % d == 0 {
            *out.entry(d).or_insert(0) += 1;
            n /= d;
        }
        d += 1;
    }
    if n > 1 {
        *out.entry(n).or_insert(0) += 1;
    }
    out
}

pub fn big_omega(n: u64) -> u32 {
    prime_factorization(n).values().sum()
}

// ---------------------------------------------------------------------------
// Brute-force signed-word reduction graphs.
//
// A signed word is a Vec of (letter index, sign) packed into u8s: letter
// index 0..letters, sign 0 (positive) or 1 (negative).  Two occurrences are
// independent exactly when their letters are distinct and commute; adjacent
// independent occurrences may swap, and adjacent occurrences of the same
// letter with opposite signs may cancel.  The oracle explores every
// interleaving of swaps and cancellations and reports the set of reachable
// irreducible classes, each named by its lexicographically least word.

pub type SignedWord = Vec<u8>;

pub fn pack(letter: u8, negative: bool) -> u8 {
    letter * 2 + u8::from(negative)
}

pub fn letter_of(symbol: u8) -> u8 {
    symbol / 2
}

pub fn is_negative(symbol: u8) -> bool {
    symbol % 2 == 1
}

pub struct SignedOracle {
    /// `commuting[x][y]` for letter indices x, y.
    commuting: Vec<Vec<bool>>,
    irr_sets: HashMap<SignedWord, BTreeSet<SignedWord>>,
}

impl SignedOracle {
    pub fn new(letters: usize, commuting_pairs: &[(u8, u8)]) -> Self {
        let mut commuting = vec![vec![false; letters]; letters];
        for &(x, y) in commuting_pairs {
            assert_ne!(x, y, "commutation is irreflexive");
            commuting[x as usize][y as usize] = true;
            commuting[y as usize][x as usize] = true;
        }
        SignedOracle {
            commuting,
            irr_sets: HashMap::new(),
        }
    }

    fn symbols_swap(&self, s: u8, t: u8) -> bool {
        let (x, y) = (letter_of(s), letter_of(t));
        x != y && self.commuting[x as usize][y as usize]
    }

    fn symbols_cancel(&self, s: u8, t: u8) -> bool {
        letter_of(s) == letter_of(t) && is_negative(s) != is_negative(t)
    }

    /// Every representative of the swap class of `word`.
    pub fn class(&self, word: &SignedWord) -> BTreeSet<SignedWord> {
        let mut seen = BTreeSet::new();
        let mut queue = vec![word.clone()];
        seen.insert(word.clone());
        while let Some(current) = queue.pop() {
            for i in 0..current.len().saturating_sub(1) {
                if self.symbols_swap(current[i], current[i + 1]) {
                    let mut next = current.clone();
                    next.swap(i, i + 1);
                    if seen.insert(next.clone()) {
                        queue.push(next);
                    }
                }
            }
        }
        seen
    }

    /// The class's lexicographically least representative.
    pub fn class_min(&self, word: &SignedWord) -> SignedWord {
        self.class(word).into_iter().next().expect("nonempty class")
    }

    /// All irreducible classes reachable from `word`, as class minima.
    pub fn irreducible_forms(&mut self, word: &SignedWord) -> BTreeSet<SignedWord> {
        let key = self.class_min(word);
        if let Some(cached) = self.irr_sets.get(&key) {
            return cached.clone();
        }
        let mut children: BTreeSet<SignedWord> = BTreeSet::new();
        for representative in self.class(&key) {
            for i in 0..representative.len().saturating_sub(1) {
                if self.symbols_cancel(representative[i], representative[i + 1]) {
                    let mut child = representative.clone();
                    child.drain(i..=i + 1);
                    children.insert(child);
                }
            }
        }
        let result = if children.is_empty() {
            BTreeSet::from([key.clone()])
        } else {
            let mut out = BTreeSet::new();
            for child in children {
                out.extend(self.irreducible_forms(&child));
            }
            out
        };
        self.irr_sets.insert(key, result.clone());
        result
    }
}

/// All signed words of exactly `len` over `letters` letters.
pub fn signed_words(letters: u8, len: usize) -> Vec<SignedWord> {
    let symbols: Vec<u8> = (0..letters * 2).collect();
    let mut out: Vec<SignedWord> = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                symbols.iter().map(move |&s| {
                    let mut next = w.clone();
                    next.push(s);
                    next
                })
            })
            .collect();
    }
    out
}

// ---------------------------------------------------------------------------
// Misc.

/// All words of length 1..=len over the given characters.
pub fn words_up_to(chars: &[char], len: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut layer: Vec<String> = vec![String::new()];
    for _ in 0..len {
        layer = layer
            .into_iter()
            .flat_map(|w| {
                chars.iter().map(move |&c| {
                    let mut next = w.clone();
                    next.push(c);
                    next
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Direct character counts, the prefab invariant the shuffle system must
/// reproduce.
pub fn char_counts(word: &str) -> BTreeMap<char, usize> {
    let mut out = BTreeMap::new();
    for c in word.chars() {
        *out.entry(c).or_insert(0) += 1;
    }
    out
}

/// Deduplicate while preserving order.
pub fn dedup_preserving_order<T: Clone + Eq + std::hash::Hash>(items: Vec<T>) -> Vec<T> {
    let mut seen = HashSet::new();
    items.into_iter().filter(|t| seen.insert(t.clone())).collect()
}
