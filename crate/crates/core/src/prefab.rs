//! A generic adapter for decomposition structures ("prefabs"): families of
//! elements with a multivalued composition, where every element decomposes
//! into prime pieces.
//!
//! An adapter names the element set, an order, and a split function sending
//! an element to its proper decompositions (each a multiset of at least two
//! smaller elements).  [`prefab_system`] turns that into a rewrite system
//! over a fully commutative alphabet — one rule per decomposition — whose
//! irreducible letters are the primes and whose normal forms are prime
//! multisets.
//!
//! Two instances live here: words under shuffle (primes: single characters;
//! invariant: the commutative image) and integers ≥ 2 under multiplication
//! (primes: the primes; invariant: the factorization).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::convergence::WeightCertificate;
use crate::error::{Error, Result};
use crate::rewrite::RewriteSystem;
use crate::trace::{Commutation, CommutationAlphabet, Letter, Trace};

type ElementPredicate = Arc<dyn Fn(&str) -> bool + Send + Sync>;
type ElementOrder = Arc<dyn Fn(&str, &str) -> Ordering + Send + Sync>;
type SplitFn = Arc<dyn Fn(&Letter) -> Result<Vec<Vec<Letter>>> + Send + Sync>;
type ElementEnumerator = Arc<dyn Fn(usize) -> Vec<Letter> + Send + Sync>;

/// A decomposition structure, ready to be compiled into a rewrite system.
#[derive(Clone)]
pub struct PrefabAdapter {
    id: String,
    is_element: ElementPredicate,
    order: ElementOrder,
    splits: SplitFn,
    enumerator: Option<ElementEnumerator>,
}

impl PrefabAdapter {
    /// `splits` must return, for each element, its proper decompositions:
    /// multisets of **at least two** elements composing to it.  Primes return
    /// an empty list.
    pub fn new(
        id: impl Into<String>,
        is_element: impl Fn(&str) -> bool + Send + Sync + 'static,
        order: impl Fn(&str, &str) -> Ordering + Send + Sync + 'static,
        splits: impl Fn(&Letter) -> Result<Vec<Vec<Letter>>> + Send + Sync + 'static,
    ) -> Self {
        PrefabAdapter {
            id: id.into(),
            is_element: Arc::new(is_element),
            order: Arc::new(order),
            splits: Arc::new(splits),
            enumerator: None,
        }
    }

    pub fn with_enumerator(
        mut self,
        enumerator: impl Fn(usize) -> Vec<Letter> + Send + Sync + 'static,
    ) -> Self {
        self.enumerator = Some(Arc::new(enumerator));
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }
}

impl std::fmt::Debug for PrefabAdapter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrefabAdapter")
            .field("id", &self.id)
            .finish_non_exhaustive()
    }
}

/// Compile an adapter into its decomposition rewrite system.
pub fn prefab_system(adapter: PrefabAdapter) -> RewriteSystem {
    let is_element = adapter.is_element.clone();
    let order = adapter.order.clone();
    let mut alphabet = CommutationAlphabet::new(
        adapter.id.clone(),
        move |token| is_element(token),
        move |x, y| order(x, y),
        Commutation::Total,
    );
    if let Some(enumerator) = adapter.enumerator.clone() {
        alphabet = alphabet.with_enumerator(move |bound| enumerator(bound));
    }
    let splits = adapter.splits;
    let rule_alphabet = alphabet.clone();
    RewriteSystem::new(alphabet, move |letter| {
        let mut out = Vec::new();
        let mut seen: BTreeSet<Trace> = BTreeSet::new();
        for parts in splits(letter)? {
            if parts.len() < 2 {
                return Err(Error::InvalidInput(format!(
                    "split of {:?} is not proper: {} part(s)",
                    letter.as_str(),
                    parts.len()
                )));
            }
            let rhs = Trace::new(&rule_alphabet, parts)?;
            if seen.insert(rhs.clone()) {
                out.push(rhs);
            }
        }
        Ok(out)
    })
}

// ---------------------------------------------------------------------------
// Words under shuffle.
// ---------------------------------------------------------------------------

/// Character-count cap for shuffle splitting and shuffle sets: both are
/// exponential in the length.
const SHUFFLE_LEN_CAP: usize = 16;

fn shuffle_order(x: &str, y: &str) -> Ordering {
    x.chars()
        .count()
        .cmp(&y.chars().count())
        .then_with(|| x.cmp(y))
}

/// All ways to interleave `u` and `v` while keeping each word's own character
/// order.  Both words must be nonempty.
pub fn shuffle_set(u: &str, v: &str) -> Result<BTreeSet<String>> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::InvalidInput("shuffle operands must be nonempty".into()));
    }
    let uc: Vec<char> = u.chars().collect();
    let vc: Vec<char> = v.chars().collect();
    if uc.len() + vc.len() > SHUFFLE_LEN_CAP {
        return Err(Error::ResourceExceeded(format!(
            "shuffle of {} + {} characters exceeds the cap of {}",
            uc.len(),
            vc.len(),
            SHUFFLE_LEN_CAP
        )));
    }
    fn go(u: &[char], v: &[char], out: &mut BTreeSet<String>, prefix: &mut String) {
        if u.is_empty() && v.is_empty() {
            out.insert(prefix.clone());
            return;
        }
        if let Some((&head, rest)) = u.split_first() {
            prefix.push(head);
            go(rest, v, out, prefix);
            prefix.pop();
        }
        if let Some((&head, rest)) = v.split_first() {
            prefix.push(head);
            go(u, rest, out, prefix);
            prefix.pop();
        }
    }
    let mut out = BTreeSet::new();
    go(&uc, &vc, &mut out, &mut String::new());
    Ok(out)
}

/// The shuffle decomposition system: a word splits into every pair
/// (subsequence, complementary subsequence) over a proper nonempty position
/// subset.  Primes are the single characters.
pub fn shuffle_system() -> RewriteSystem {
    let adapter = PrefabAdapter::new(
        "shuffle",
        |token| !token.is_empty(),
        shuffle_order,
        |letter| {
            let chars: Vec<char> = letter.as_str().chars().collect();
            let n = chars.len();
            if n > SHUFFLE_LEN_CAP {
                return Err(Error::ResourceExceeded(format!(
                    "splitting a {}-character word exceeds the cap of {}",
                    n, SHUFFLE_LEN_CAP
                )));
            }
            let mut out = Vec::new();
            if n < 2 {
                return Ok(out);
            }
            for mask in 1..((1u32 << n) - 1) {
                let mut left = String::new();
                let mut right = String::new();
                for (i, &ch) in chars.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        left.push(ch);
                    } else {
                        right.push(ch);
                    }
                }
                out.push(vec![Letter::from(left), Letter::from(right)]);
            }
            Ok(out)
        },
    );
    prefab_system(adapter)
}

/// Termination weights for shuffle splitting: the character count.  Both
/// parts of a proper split are strictly shorter.
pub fn shuffle_weight_certificate() -> WeightCertificate {
    WeightCertificate::new("character count", |letter| {
        let n = letter.as_str().chars().count() as u64;
        (n > 0).then_some(n)
    })
}

/// The prime multiset of a word under shuffle decomposition, computed by
/// normalizing — it must coincide with the word's character counts.
pub fn shuffle_prefab_invariant(word: &str) -> Result<BTreeMap<char, usize>> {
    let system = shuffle_system();
    let trace = system.alphabet().trace(&[word])?;
    let report = system.normalize(&trace)?;
    let Some(normal_form) = report.normal_form() else {
        return Err(Error::Budget(format!(
            "shuffle decomposition of {:?} exhausted its budget",
            word
        )));
    };
    let mut counts = BTreeMap::new();
    for (letter, count) in normal_form.counts() {
        let mut chars = letter.as_str().chars();
        let (Some(ch), None) = (chars.next(), chars.next()) else {
            return Err(Error::InvalidInput(format!(
                "normal form contains the non-prime letter {:?}",
                letter.as_str()
            )));
        };
        *counts.entry(ch).or_insert(0) += count;
    }
    Ok(counts)
}

// ---------------------------------------------------------------------------
// Integers under multiplication.
// ---------------------------------------------------------------------------

fn parse_arith_token(token: &str) -> Option<u64> {
    let n: u64 = token.parse().ok()?;
    (n >= 2 && n.to_string() == token).then_some(n)
}

fn arith_order(x: &str, y: &str) -> Ordering {
    match (parse_arith_token(x), parse_arith_token(y)) {
        (Some(a), Some(b)) => a.cmp(&b),
        _ => x.cmp(y),
    }
}

/// All unordered factorizations of `n` into parts ≥ 2, each given as a
/// nondecreasing vector, including the trivial factorization `[n]`.
pub fn arith_decompositions(n: u64) -> Result<Vec<Vec<u64>>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "multiplicative elements start at 2 (got {})",
            n
        )));
    }
    fn go(n: u64, min: u64, out: &mut Vec<Vec<u64>>, stem: &mut Vec<u64>) {
        if n >= min {
            stem.push(n);
            out.push(stem.clone());
            stem.pop();
        }
        let mut d = min;
        while d * d <= n {
            if n % d == 0 {
                stem.push(d);
                go(n / d, d, out, stem);
                stem.pop();
            }
            d += 1;
        }
    }
    let mut out = Vec::new();
    go(n, 2, &mut out, &mut Vec::new());
    out.sort();
    Ok(out)
}

/// The multiplicative decomposition system: n ⇒ d₁·…·d_k for every
/// nontrivial factorization.  Primes (the letters with no rules) are the
/// prime numbers.
pub fn arith_system() -> RewriteSystem {
    let adapter = PrefabAdapter::new(
        "arith",
        |token| parse_arith_token(token).is_some(),
        arith_order,
        |letter| {
            let n = parse_arith_token(letter.as_str()).ok_or_else(|| {
                Error::InvalidInput(format!("not a multiplicative element: {:?}", letter.as_str()))
            })?;
            Ok(arith_decompositions(n)?
                .into_iter()
                .filter(|parts| parts.len() >= 2)
                .map(|parts| parts.into_iter().map(|d| Letter::from(d.to_string())).collect())
                .collect())
        },
    )
    .with_enumerator(|bound| (2..=bound as u64).map(|n| Letter::from(n.to_string())).collect());
    prefab_system(adapter)
}

/// Termination weights: 1 + Ω(n), the number of prime factors counted with
/// multiplicity.  Every part of a nontrivial factorization has strictly
/// smaller Ω.
pub fn arith_weight_certificate() -> WeightCertificate {
    WeightCertificate::new("1 + Ω", |letter| {
        let mut n = parse_arith_token(letter.as_str())?;
        let mut omega = 0u64;
        let mut d = 2u64;
        while d * d <= n {
            while n % d == 0 {
                omega += 1;
                n /= d;
            }
            d += 1;
        }
        if n > 1 {
            omega += 1;
        }
        Some(1 + omega)
    })
}

/// The prime factorization of `m`, computed by normalizing in the
/// decomposition system (not by trial division — that is the test oracle).
pub fn arith_invariant(m: u64) -> Result<BTreeMap<u64, u32>> {
    let system = arith_system();
    let trace = system.alphabet().trace(&[m.to_string()])?;
    let report = system.normalize(&trace)?;
    let Some(normal_form) = report.normal_form() else {
        return Err(Error::Budget(format!(
            "factorization of {} exhausted its budget",
            m
        )));
    };
    let mut exponents = BTreeMap::new();
    for (letter, count) in normal_form.counts() {
        let p = parse_arith_token(letter.as_str()).ok_or_else(|| {
            Error::InvalidInput(format!("normal form contains {:?}", letter.as_str()))
        })?;
        *exponents.entry(p).or_insert(0) += count as u32;
    }
    Ok(exponents)
}

/// The multivalued composition of the multiplicative prefab: every multiset
/// union D ⊎ D′ of a decomposition of `m` with one of `n`, as nondecreasing
/// part vectors.
pub fn arith_compose(m: u64, n: u64) -> Result<BTreeSet<Vec<u64>>> {
    let left = arith_decompositions(m)?;
    let right = arith_decompositions(n)?;
    let mut out = BTreeSet::new();
    for d in &left {
        for e in &right {
            let mut union = d.clone();
            union.extend_from_slice(e);
            union.sort_unstable();
            out.insert(union);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::{verify_weight_certificate, Scope};

    #[test]
    fn shuffle_set_of_the_worked_example() {
        let expected: BTreeSet<String> = ["αγββ", "αβγβ", "αββγ", "βαγβ", "βαβγ", "ββαγ"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(shuffle_set("αγ", "ββ").unwrap(), expected);
    }

    #[test]
    fn shuffle_set_sizes_and_degenerate_cases() {
        // Distinct characters: C(4, 2) = 6 interleavings.
        assert_eq!(shuffle_set("ab", "cd").unwrap().len(), 6);
        // Identical characters collapse to one word.
        let collapsed = shuffle_set("aa", "aa").unwrap();
        assert_eq!(collapsed.len(), 1);
        assert!(collapsed.contains("aaaa"));
        assert!(shuffle_set("", "x").is_err());
        let long = "a".repeat(17);
        assert!(matches!(
            shuffle_set(&long, "b"),
            Err(Error::ResourceExceeded(_))
        ));
    }

    #[test]
    fn shuffle_splits_invert_the_shuffle() {
        let system = shuffle_system();
        for word in ["ab", "aab", "αγβ", "abca"] {
            let rules = system.letter_rewrites(&Letter::new(word)).unwrap();
            assert!(!rules.is_empty());
            for rhs in &rules {
                assert_eq!(rhs.len(), 2);
                let left = rhs.letters()[0].as_str();
                let right = rhs.letters()[1].as_str();
                assert!(
                    shuffle_set(left, right).unwrap().contains(word),
                    "({}, {}) should shuffle back to {}",
                    left,
                    right,
                    word
                );
            }
        }
        // Single characters are prime.
        assert!(system.letter_rewrites(&Letter::new("α")).unwrap().is_empty());
    }

    #[test]
    fn shuffle_split_cap_is_enforced() {
        let system = shuffle_system();
        let long = Letter::from("a".repeat(17));
        assert!(matches!(
            system.letter_rewrites(&long),
            Err(Error::ResourceExceeded(_))
        ));
    }

    #[test]
    fn shuffle_invariant_is_the_commutative_image() {
        let inv = shuffle_prefab_invariant("αβα").unwrap();
        let expected: BTreeMap<char, usize> = [('α', 2), ('β', 1)].into_iter().collect();
        assert_eq!(inv, expected);
        let inv = shuffle_prefab_invariant("a").unwrap();
        assert_eq!(inv, [('a', 1)].into_iter().collect());
    }

    #[test]
    fn shuffle_weights_descend_on_a_sample_scope() {
        let system = shuffle_system();
        let letters: Vec<Letter> = ["a", "b", "ab", "ba", "aab", "bab", "abab"]
            .into_iter()
            .map(Letter::new)
            .collect();
        let scope = Scope::new(letters, "sample words over {a, b}");
        let report =
            verify_weight_certificate(&system, &shuffle_weight_certificate(), &scope).unwrap();
        assert!(report.termination.is_certified());
    }

    #[test]
    fn decompositions_of_small_integers() {
        assert_eq!(arith_decompositions(2).unwrap(), vec![vec![2]]);
        assert_eq!(
            arith_decompositions(8).unwrap(),
            vec![vec![2, 2, 2], vec![2, 4], vec![8]]
        );
        assert_eq!(
            arith_decompositions(12).unwrap(),
            vec![vec![2, 2, 3], vec![2, 6], vec![3, 4], vec![12]]
        );
        assert!(arith_decompositions(1).is_err());
    }

    #[test]
    fn arith_rules_are_the_nontrivial_decompositions() {
        let system = arith_system();
        let rules = system.letter_rewrites(&Letter::new("8")).unwrap();
        let mut shapes: Vec<Vec<String>> = rules.iter().map(|t| t.tokens()).collect();
        shapes.sort();
        assert_eq!(
            shapes,
            vec![vec!["2".to_string(), "2".to_string(), "2".to_string()], vec![
                "2".to_string(),
                "4".to_string()
            ]]
        );
        assert!(system.letter_rewrites(&Letter::new("7")).unwrap().is_empty());
        assert!(system.letter_rewrites(&Letter::new("02")).is_err());
        assert!(system.letter_rewrites(&Letter::new("1")).is_err());
    }

    #[test]
    fn arith_invariant_factors_correctly() {
        let expected: BTreeMap<u64, u32> = [(2, 3), (3, 2), (5, 1)].into_iter().collect();
        assert_eq!(arith_invariant(360).unwrap(), expected);
        assert_eq!(arith_invariant(2).unwrap(), [(2, 1)].into_iter().collect());
        assert_eq!(arith_invariant(97).unwrap(), [(97, 1)].into_iter().collect());
        assert!(arith_invariant(1).is_err());
    }

    #[test]
    fn composition_of_eight_and_four() {
        let expected: BTreeSet<Vec<u64>> = [
            vec![2, 2, 2, 2, 2],
            vec![2, 2, 2, 4],
            vec![2, 4, 4],
            vec![2, 2, 8],
            vec![4, 8],
        ]
        .into_iter()
        .collect();
        assert_eq!(arith_compose(8, 4).unwrap(), expected);
    }

    #[test]
    fn arith_weights_are_one_plus_omega() {
        let w = arith_weight_certificate();
        assert_eq!(w.weight(&Letter::new("8")), Some(4));
        assert_eq!(w.weight(&Letter::new("7")), Some(2));
        assert_eq!(w.weight(&Letter::new("360")), Some(7));
        assert_eq!(w.weight(&Letter::new("1")), None);
        assert_eq!(w.weight(&Letter::new("x")), None);
        let system = arith_system();
        let scope = Scope::enumerate(&system, 40)
            .unwrap()
            .described("integers 2..=40");
        let report = verify_weight_certificate(&system, &w, &scope).unwrap();
        assert!(report.termination.is_certified());
    }

    #[test]
    fn numeric_order_beats_string_order() {
        let system = arith_system();
        let t = system.alphabet().trace(&["10", "9"]).unwrap();
        assert_eq!(t.tokens(), vec!["9", "10"]);
    }
}
