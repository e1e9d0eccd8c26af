//! The group where normal-form invariants live.
//!
//! Elements are reduced signed words over the alphabet's letters: formal
//! products of letters and their inverses, where signed letters commute
//! exactly when their underlying letters do, and a letter cancels its own
//! inverse whenever the two can be brought together by commutation.  Reduced
//! words are canonicalized lexicographically, so structural equality is group
//! equality; uniqueness of the reduced form is asserted by exhaustive
//! desk-scale tests rather than by citation.
//!
//! [`universal_invariant`] sends a letter to its normal form, embedded as an
//! all-positive signed word — this is the invariant every rule-respecting
//! group-valued map factors through.  [`evaluate_trace`] and
//! [`extend_homomorphism`] perform that factoring for caller-supplied target
//! groups, spot-checking the caller's claims (commutation respect, rule
//! invariance, group laws) before trusting them.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rewrite::RewriteSystem;
use crate::trace::{canonical_arrangement, CommutationAlphabet, Letter, Trace};

/// Exponent sign of a group letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

/// An element of the free partially commutative group over an alphabet:
/// a reduced, canonicalized signed word.
#[derive(Clone)]
pub struct TGElement {
    alphabet: Arc<CommutationAlphabet>,
    word: Vec<(Letter, Sign)>,
}

impl TGElement {
    pub fn identity(alphabet: &Arc<CommutationAlphabet>) -> Self {
        TGElement {
            alphabet: alphabet.clone(),
            word: Vec::new(),
        }
    }

    /// A single signed generator.
    pub fn generator(alphabet: &Arc<CommutationAlphabet>, letter: &Letter, sign: Sign) -> Result<Self> {
        alphabet.require_letter(letter)?;
        Ok(TGElement {
            alphabet: alphabet.clone(),
            word: vec![(letter.clone(), sign)],
        })
    }

    /// Reduce and canonicalize an arbitrary signed word.
    pub fn from_signed(
        alphabet: &Arc<CommutationAlphabet>,
        word: Vec<(Letter, Sign)>,
    ) -> Result<Self> {
        for (letter, _) in &word {
            alphabet.require_letter(letter)?;
        }
        Ok(TGElement {
            alphabet: alphabet.clone(),
            word: reduce_signed(alphabet, word),
        })
    }

    /// Embed a trace as an all-positive signed word.  No cancellation can
    /// occur, so this is the canonical monoid embedding.
    pub fn from_trace(trace: &Trace) -> Self {
        TGElement {
            alphabet: trace.alphabet().clone(),
            word: trace
                .letters()
                .iter()
                .map(|l| (l.clone(), Sign::Pos))
                .collect(),
        }
    }

    /// Build from an exponent map (meaningful when the involved letters
    /// commute pairwise, e.g. over irreducibles of a fully commutative
    /// system).
    pub fn from_exponents(
        alphabet: &Arc<CommutationAlphabet>,
        exponents: &BTreeMap<Letter, i64>,
    ) -> Result<Self> {
        let mut word = Vec::new();
        for (letter, &exp) in exponents {
            alphabet.require_letter(letter)?;
            let sign = if exp >= 0 { Sign::Pos } else { Sign::Neg };
            for _ in 0..exp.unsigned_abs() {
                word.push((letter.clone(), sign));
            }
        }
        TGElement::from_signed(alphabet, word)
    }

    pub fn alphabet(&self) -> &Arc<CommutationAlphabet> {
        &self.alphabet
    }

    /// The canonical reduced signed word.
    pub fn signed_letters(&self) -> &[(Letter, Sign)] {
        &self.word
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Group multiplication: concatenate and reduce.
    pub fn mul(&self, other: &TGElement) -> Result<TGElement> {
        if self.alphabet.id() != other.alphabet.id() {
            return Err(Error::AlphabetMismatch {
                left: self.alphabet.id().to_owned(),
                right: other.alphabet.id().to_owned(),
            });
        }
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        Ok(TGElement {
            alphabet: self.alphabet.clone(),
            word: reduce_signed(&self.alphabet, word),
        })
    }

    /// Group inverse: reverse and flip signs.
    pub fn inverse(&self) -> TGElement {
        let word: Vec<(Letter, Sign)> = self
            .word
            .iter()
            .rev()
            .map(|(l, s)| (l.clone(), s.flip()))
            .collect();
        TGElement {
            alphabet: self.alphabet.clone(),
            word: reduce_signed(&self.alphabet, word),
        }
    }

    /// Net exponents per letter, when the element's support letters commute
    /// pairwise (then the exponent map determines the element).  `None`
    /// otherwise.
    pub fn exponents(&self) -> Option<BTreeMap<Letter, i64>> {
        let mut support: Vec<&Letter> = self.word.iter().map(|(l, _)| l).collect();
        support.sort();
        support.dedup();
        for i in 0..support.len() {
            for j in i + 1..support.len() {
                if !self.alphabet.commutes(support[i], support[j]) {
                    return None;
                }
            }
        }
        let mut map: BTreeMap<Letter, i64> = BTreeMap::new();
        for (letter, sign) in &self.word {
            *map.entry(letter.clone()).or_insert(0) += i64::from(sign.as_i8());
        }
        map.retain(|_, v| *v != 0);
        Some(map)
    }
}

impl PartialEq for TGElement {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet.id() == other.alphabet.id() && self.word == other.word
    }
}

impl Eq for TGElement {}

impl Hash for TGElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.alphabet.id().hash(state);
        self.word.hash(state);
    }
}

impl fmt::Debug for TGElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("ε");
        }
        for (i, (letter, sign)) in self.word.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            match sign {
                Sign::Pos => write!(f, "{}", letter)?,
                Sign::Neg => write!(f, "{}⁻¹", letter)?,
            }
        }
        Ok(())
    }
}

/// Cancel inverse pairs modulo commutation until none remain, then
/// canonicalize.  A pair (x, +)(x, −) cancels when every occurrence between
/// the two commutes with x; scanning the canonical word for the first
/// dependent occurrence to the right of each position finds such a pair
/// whenever one exists.
fn reduce_signed(
    alphabet: &Arc<CommutationAlphabet>,
    mut word: Vec<(Letter, Sign)>,
) -> Vec<(Letter, Sign)> {
    let canonicalize = |items: &[(Letter, Sign)]| -> Vec<(Letter, Sign)> {
        canonical_arrangement(
            items,
            |(la, _), (lb, _)| la == lb || !alphabet.commutes(la, lb),
            |(la, sa), (lb, sb)| match alphabet.cmp_letters(la, lb) {
                Ordering::Equal => sa.cmp(sb),
                other => other,
            },
        )
    };
    word = canonicalize(&word);
    'scan: loop {
        for i in 0..word.len() {
            let (ref x, sign) = word[i];
            for j in i + 1..word.len() {
                let (ref y, other_sign) = word[j];
                if y == x {
                    if other_sign != sign {
                        word.remove(j);
                        word.remove(i);
                        word = canonicalize(&word);
                        continue 'scan;
                    }
                    // Same letter, same sign: blocks everything behind it.
                    break;
                }
                if !alphabet.commutes(x, y) {
                    break;
                }
            }
        }
        return word;
    }
}

type Combine<T> = Arc<dyn Fn(&T, &T) -> T + Send + Sync>;
type Unary<T> = Arc<dyn Fn(&T) -> T + Send + Sync>;
type Image<T> = Arc<dyn Fn(&Letter) -> T + Send + Sync>;
type Equality<T> = Arc<dyn Fn(&T, &T) -> bool + Send + Sync>;
type Encoder<T> = Arc<dyn Fn(&T) -> String + Send + Sync>;

/// A caller-supplied target group together with a letter map.
///
/// The group laws are the caller's assertion; they are spot-checked on the
/// values an evaluation actually touches.  Equality is optional: when absent,
/// checks fall back to comparing encoder output, and when neither is present
/// the spot-checks are skipped (there is nothing to compare with).
#[derive(Clone)]
pub struct GroupCallbacks<T> {
    multiply: Combine<T>,
    invert: Unary<T>,
    identity: T,
    letter_image: Image<T>,
    equals: Option<Equality<T>>,
    encode: Option<Encoder<T>>,
}

impl<T: Clone> GroupCallbacks<T> {
    pub fn new(
        identity: T,
        multiply: impl Fn(&T, &T) -> T + Send + Sync + 'static,
        invert: impl Fn(&T) -> T + Send + Sync + 'static,
        letter_image: impl Fn(&Letter) -> T + Send + Sync + 'static,
    ) -> Self {
        GroupCallbacks {
            multiply: Arc::new(multiply),
            invert: Arc::new(invert),
            identity,
            letter_image: Arc::new(letter_image),
            equals: None,
            encode: None,
        }
    }

    pub fn with_equality(mut self, equals: impl Fn(&T, &T) -> bool + Send + Sync + 'static) -> Self {
        self.equals = Some(Arc::new(equals));
        self
    }

    pub fn with_encoder(mut self, encode: impl Fn(&T) -> String + Send + Sync + 'static) -> Self {
        self.encode = Some(Arc::new(encode));
        self
    }

    pub fn identity(&self) -> &T {
        &self.identity
    }

    pub fn letter_image(&self, letter: &Letter) -> T {
        (self.letter_image)(letter)
    }

    pub fn multiply(&self, a: &T, b: &T) -> T {
        (self.multiply)(a, b)
    }

    pub fn invert(&self, a: &T) -> T {
        (self.invert)(a)
    }

    /// Equality if any capability exists.
    fn values_equal(&self, a: &T, b: &T) -> Option<bool> {
        if let Some(eq) = &self.equals {
            return Some(eq(a, b));
        }
        self.encode.as_ref().map(|enc| enc(a) == enc(b))
    }

    fn fold_word(&self, letters: &[Letter]) -> T {
        let mut acc = self.identity.clone();
        for letter in letters {
            acc = self.multiply(&acc, &self.letter_image(letter));
        }
        acc
    }

    fn fold_signed(&self, word: &[(Letter, Sign)]) -> T {
        let mut acc = self.identity.clone();
        for (letter, sign) in word {
            let image = self.letter_image(letter);
            let factor = match sign {
                Sign::Pos => image,
                Sign::Neg => self.invert(&image),
            };
            acc = self.multiply(&acc, &factor);
        }
        acc
    }

    /// Spot-check the asserted group laws on sample values.  Silently
    /// vacuous without an equality capability.
    fn spot_check_laws(&self, samples: &[T]) -> Result<()> {
        if self.values_equal(&self.identity, &self.identity).is_none() {
            return Ok(());
        }
        for s in samples {
            if self.values_equal(&self.multiply(&self.identity, s), s) == Some(false) {
                return Err(Error::Precondition(
                    "identity law fails on a sampled value".into(),
                ));
            }
            let inv = self.invert(s);
            if self.values_equal(&self.multiply(s, &inv), &self.identity) == Some(false) {
                return Err(Error::Precondition(
                    "inverse law fails on a sampled value".into(),
                ));
            }
        }
        if samples.len() >= 3 {
            let (a, b, c) = (&samples[0], &samples[1], &samples[2]);
            let left = self.multiply(&self.multiply(a, b), c);
            let right = self.multiply(a, &self.multiply(b, c));
            if self.values_equal(&left, &right) == Some(false) {
                return Err(Error::Precondition(
                    "associativity fails on sampled values".into(),
                ));
            }
        }
        Ok(())
    }

    /// Verify, on the given letters, that the letter map respects the
    /// commutations and is invariant under the system's rules.
    fn spot_check_support(&self, system: &RewriteSystem, support: &[Letter]) -> Result<()> {
        let images: Vec<T> = support.iter().map(|l| self.letter_image(l)).collect();
        self.spot_check_laws(&images)?;
        for i in 0..support.len() {
            for j in i + 1..support.len() {
                let (x, y) = (&support[i], &support[j]);
                if !system.alphabet().commutes(x, y) {
                    continue;
                }
                let xy = self.multiply(&images[i], &images[j]);
                let yx = self.multiply(&images[j], &images[i]);
                if self.values_equal(&xy, &yx) == Some(false) {
                    return Err(Error::Precondition(format!(
                        "letter images do not commute for the commuting pair ({}, {})",
                        x, y
                    )));
                }
            }
        }
        for (letter, image) in support.iter().zip(&images) {
            for rhs in system.letter_rewrites(letter)? {
                let folded = self.fold_word(rhs.letters());
                if self.values_equal(image, &folded) == Some(false) {
                    return Err(Error::Precondition(format!(
                        "letter map is not invariant under the rule {} ⇒ {}",
                        letter, rhs
                    )));
                }
            }
        }
        Ok(())
    }
}

impl<T> fmt::Debug for GroupCallbacks<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupCallbacks")
            .field("has_equality", &self.equals.is_some())
            .field("has_encoder", &self.encode.is_some())
            .finish_non_exhaustive()
    }
}

fn distinct_support(letters: impl Iterator<Item = Letter>) -> Vec<Letter> {
    let mut support: Vec<Letter> = letters.collect();
    support.sort();
    support.dedup();
    support
}

/// Fold a letter map over a trace, after spot-checking that the map respects
/// the commutations and rules touching the trace.
///
/// Sound without any convergence assumption: multiplicativity over
/// concatenation and invariance along reductions hold as long as the
/// spot-checked claims do.
pub fn evaluate_trace<T: Clone>(
    system: &RewriteSystem,
    callbacks: &GroupCallbacks<T>,
    trace: &Trace,
) -> Result<T> {
    if trace.alphabet().id() != system.alphabet().id() {
        return Err(Error::AlphabetMismatch {
            left: system.alphabet().id().to_owned(),
            right: trace.alphabet().id().to_owned(),
        });
    }
    let support = distinct_support(trace.letters().iter().cloned());
    callbacks.spot_check_support(system, &support)?;
    Ok(callbacks.fold_word(trace.letters()))
}

/// The homomorphism induced on the group by a letter map: fold over the
/// reduced signed word, sending negative letters through the inverse.
pub fn extend_homomorphism<T: Clone>(
    system: &RewriteSystem,
    callbacks: &GroupCallbacks<T>,
    element: &TGElement,
) -> Result<T> {
    if element.alphabet().id() != system.alphabet().id() {
        return Err(Error::AlphabetMismatch {
            left: system.alphabet().id().to_owned(),
            right: element.alphabet().id().to_owned(),
        });
    }
    let support = distinct_support(element.signed_letters().iter().map(|(l, _)| l.clone()));
    callbacks.spot_check_support(system, &support)?;
    Ok(callbacks.fold_signed(element.signed_letters()))
}

/// The universal invariant of a letter: its normal form, embedded in the
/// group as an all-positive signed word.  Requires a verified convergence
/// certificate — without convergence, "the" normal form is not well-defined.
pub fn universal_invariant(system: &RewriteSystem, letter: &Letter) -> Result<TGElement> {
    system.require_certificate("universal_invariant")?;
    let trace = system.alphabet().letter_trace(letter)?;
    let report = system.normalize(&trace)?;
    match report.normal_form() {
        Some(nf) => Ok(TGElement::from_trace(nf)),
        None => Err(Error::Budget(format!(
            "normalization of letter {} exhausted its budget",
            letter
        ))),
    }
}

/// One defining relation: lhs = rhs as group elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub lhs: Vec<(Letter, Sign)>,
    pub rhs: Vec<(Letter, Sign)>,
}

/// A finite group presentation: generators, commutator relations from θ, and
/// one relation per rewrite rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub generators: Vec<Letter>,
    pub relations: Vec<Relation>,
}

/// Transcribe the system over an explicit finite generator list.
///
/// Valid with or without convergence: the presented group is determined by
/// the relation set alone.  Every rule right-hand side must stay inside the
/// generator list.
pub fn group_presentation(system: &RewriteSystem, generators: &[Letter]) -> Result<Presentation> {
    for letter in generators {
        system.alphabet().require_letter(letter)?;
    }
    let mut seen = std::collections::BTreeSet::new();
    for letter in generators {
        if !seen.insert(letter.clone()) {
            return Err(Error::InvalidInput(format!(
                "duplicate generator {:?}",
                letter.as_str()
            )));
        }
    }

    let mut relations = Vec::new();
    // Commutators x·y·x⁻¹·y⁻¹ = ε for each commuting pair, in list order.
    for i in 0..generators.len() {
        for j in i + 1..generators.len() {
            let (x, y) = (&generators[i], &generators[j]);
            if system.alphabet().commutes(x, y) {
                relations.push(Relation {
                    lhs: vec![
                        (x.clone(), Sign::Pos),
                        (y.clone(), Sign::Pos),
                        (x.clone(), Sign::Neg),
                        (y.clone(), Sign::Neg),
                    ],
                    rhs: Vec::new(),
                });
            }
        }
    }
    // One relation x = w per rule.
    for letter in generators {
        for rhs in system.letter_rewrites(letter)? {
            for target in rhs.letters() {
                if !seen.contains(target) {
                    return Err(Error::Unsupported(format!(
                        "rule {} ⇒ {} mentions letter {:?} outside the generator list",
                        letter,
                        rhs,
                        target.as_str()
                    )));
                }
            }
            relations.push(Relation {
                lhs: vec![(letter.clone(), Sign::Pos)],
                rhs: rhs
                    .letters()
                    .iter()
                    .map(|l| (l.clone(), Sign::Pos))
                    .collect(),
            });
        }
    }
    Ok(Presentation {
        generators: generators.to_vec(),
        relations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::Commutation;
    use std::collections::BTreeSet;

    fn alphabet() -> Arc<CommutationAlphabet> {
        // p, q, r with only (p, q) commuting.
        CommutationAlphabet::finite("pqr", &["p", "q", "r"], Commutation::from_pairs([("p", "q")]))
    }

    fn signed(alphabet: &Arc<CommutationAlphabet>, items: &[(&str, Sign)]) -> TGElement {
        TGElement::from_signed(
            alphabet,
            items.iter().map(|(l, s)| (Letter::new(l), *s)).collect(),
        )
        .unwrap()
    }

    use Sign::{Neg, Pos};

    #[test]
    fn adjacent_inverses_cancel() {
        let a = alphabet();
        let e = signed(&a, &[("p", Pos), ("p", Neg)]);
        assert!(e.is_identity());
    }

    #[test]
    fn cancellation_reaches_across_commuting_letters() {
        let a = alphabet();
        // p and q commute, so p·q·p⁻¹ = q.
        let e = signed(&a, &[("p", Pos), ("q", Pos), ("p", Neg)]);
        assert_eq!(e, signed(&a, &[("q", Pos)]));
        // r does not commute with p: p·r·p⁻¹ stays length 3.
        let f = signed(&a, &[("p", Pos), ("r", Pos), ("p", Neg)]);
        assert_eq!(f.len(), 3);
    }

    #[test]
    fn mul_and_inverse_satisfy_group_laws() {
        let a = alphabet();
        let elems = [
            TGElement::identity(&a),
            signed(&a, &[("p", Pos)]),
            signed(&a, &[("q", Neg), ("r", Pos)]),
            signed(&a, &[("r", Pos), ("p", Neg), ("q", Pos)]),
        ];
        for x in &elems {
            assert_eq!(&x.mul(&x.inverse()).unwrap(), &TGElement::identity(&a));
            assert_eq!(&x.inverse().inverse(), x);
            for y in &elems {
                for z in &elems {
                    let left = x.mul(y).unwrap().mul(z).unwrap();
                    let right = x.mul(&y.mul(z).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }

    /// Oracle: exhaustively apply single cancellation moves (over all
    /// representative words) and collect the irreducible signed words.
    fn exhaustive_reduced_forms(
        alphabet: &Arc<CommutationAlphabet>,
        word: &[(Letter, Sign)],
    ) -> BTreeSet<Vec<(Letter, Sign)>> {
        // All representative words of the signed trace.
        fn class(
            alphabet: &CommutationAlphabet,
            word: &[(Letter, Sign)],
        ) -> BTreeSet<Vec<(Letter, Sign)>> {
            let mut seen = BTreeSet::new();
            let mut queue = vec![word.to_vec()];
            seen.insert(word.to_vec());
            while let Some(w) = queue.pop() {
                for i in 0..w.len().saturating_sub(1) {
                    let (ref x, _) = w[i];
                    let (ref y, _) = w[i + 1];
                    if x != y && alphabet.commutes(x, y) {
                        let mut s = w.clone();
                        s.swap(i, i + 1);
                        if seen.insert(s.clone()) {
                            queue.push(s);
                        }
                    }
                }
            }
            seen
        }
        let mut irreducible = BTreeSet::new();
        let mut stack = vec![word.to_vec()];
        let mut visited: BTreeSet<Vec<(Letter, Sign)>> = BTreeSet::new();
        while let Some(w) = stack.pop() {
            if !visited.insert(w.clone()) {
                continue;
            }
            let mut any = false;
            for rep in class(alphabet, &w) {
                for i in 0..rep.len().saturating_sub(1) {
                    if rep[i].0 == rep[i + 1].0 && rep[i].1 != rep[i + 1].1 {
                        let mut next = rep.clone();
                        next.drain(i..=i + 1);
                        stack.push(next);
                        any = true;
                    }
                }
            }
            if !any {
                // Record the canonical member of the class.
                irreducible.insert(
                    class(alphabet, &w)
                        .into_iter()
                        .min()
                        .expect("class is nonempty"),
                );
            }
        }
        irreducible
    }

    #[test]
    fn reduction_agrees_with_exhaustive_search() {
        let a = alphabet();
        let words: Vec<Vec<(Letter, Sign)>> = vec![
            vec![
                (Letter::new("p"), Pos),
                (Letter::new("q"), Pos),
                (Letter::new("p"), Neg),
                (Letter::new("q"), Neg),
            ],
            vec![
                (Letter::new("p"), Pos),
                (Letter::new("r"), Pos),
                (Letter::new("r"), Neg),
                (Letter::new("p"), Neg),
                (Letter::new("q"), Pos),
            ],
            vec![
                (Letter::new("q"), Neg),
                (Letter::new("p"), Pos),
                (Letter::new("q"), Pos),
                (Letter::new("r"), Pos),
                (Letter::new("q"), Neg),
            ],
        ];
        for word in words {
            let reduced = TGElement::from_signed(&a, word.clone()).unwrap();
            let forms = exhaustive_reduced_forms(&a, &word);
            assert_eq!(forms.len(), 1, "reduced form must be unique for {:?}", word);
            let expected = forms.into_iter().next().unwrap();
            // Compare up to commutation: re-canonicalize the oracle's form.
            let oracle = TGElement::from_signed(&a, expected).unwrap();
            assert_eq!(reduced, oracle);
        }
    }

    #[test]
    fn exponents_exist_exactly_on_commuting_support() {
        let a = alphabet();
        let e = signed(&a, &[("p", Pos), ("q", Pos), ("p", Pos)]);
        let exps = e.exponents().unwrap();
        assert_eq!(exps.get(&Letter::new("p")), Some(&2));
        assert_eq!(exps.get(&Letter::new("q")), Some(&1));
        // p and r do not commute: no exponent view.
        let f = signed(&a, &[("p", Pos), ("r", Pos)]);
        assert!(f.exponents().is_none());
    }

    #[test]
    fn from_exponents_round_trips() {
        let a = alphabet();
        let mut map = BTreeMap::new();
        map.insert(Letter::new("p"), 2i64);
        map.insert(Letter::new("q"), -1i64);
        let e = TGElement::from_exponents(&a, &map).unwrap();
        assert_eq!(e.exponents().unwrap(), map);
    }

    fn trivial_system(alphabet: Arc<CommutationAlphabet>) -> RewriteSystem {
        RewriteSystem::new(alphabet, |_| Ok(Vec::new()))
    }

    #[test]
    fn evaluate_counts_letters_in_the_integers() {
        let a = alphabet();
        let system = trivial_system(a.clone());
        let counting = GroupCallbacks::new(0i64, |x, y| x + y, |x| -x, |_| 1i64)
            .with_equality(|x, y| x == y);
        let t = a.trace(&["p", "q", "p", "r"]).unwrap();
        assert_eq!(evaluate_trace(&system, &counting, &t).unwrap(), 4);
    }

    #[test]
    fn evaluate_rejects_non_commuting_images() {
        let a = alphabet();
        let system = trivial_system(a.clone());
        // 2×2 integer matrices under multiplication; p and q get
        // non-commuting images even though (p, q) ∈ θ.
        type M = [[i64; 2]; 2]; // row-major
        fn matmul(x: &M, y: &M) -> M {
            let mut out = [[0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = (0..2).map(|k| x[i][k] * y[k][j]).sum();
                }
            }
            out
        }
        let callbacks = GroupCallbacks::new(
            [[1, 0], [0, 1]] as M,
            matmul,
            |_m: &M| [[1, 0], [0, 1]], // inverse unused in this test
            |l: &Letter| match l.as_str() {
                "p" => [[1, 1], [0, 1]],
                "q" => [[1, 0], [1, 1]],
                _ => [[1, 0], [0, 1]],
            },
        )
        .with_equality(|x: &M, y: &M| x == y);
        let t = a.trace(&["p", "q"]).unwrap();
        assert!(matches!(
            evaluate_trace(&system, &callbacks, &t),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn evaluate_rejects_rule_breaking_images() {
        let a = CommutationAlphabet::finite("xy", &["x", "y"], Commutation::None);
        let rhs = a.trace(&["y", "y"]).unwrap();
        let system =
            RewriteSystem::from_rule_list(a.clone(), vec![(Letter::new("x"), vec![rhs])]).unwrap();
        // f(x) = 1, f(y) = 1, but the rule x ⇒ y·y needs f(x) = 2.
        let counting = GroupCallbacks::new(0i64, |x, y| x + y, |x| -x, |_| 1i64)
            .with_equality(|x, y| x == y);
        let t = a.trace(&["x"]).unwrap();
        assert!(matches!(
            evaluate_trace(&system, &counting, &t),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn extend_homomorphism_respects_signs() {
        let a = alphabet();
        let system = trivial_system(a.clone());
        let counting = GroupCallbacks::new(0i64, |x, y| x + y, |x| -x, |_| 1i64)
            .with_equality(|x, y| x == y);
        let e = signed(&a, &[("p", Pos), ("q", Neg), ("r", Neg)]);
        assert_eq!(extend_homomorphism(&system, &counting, &e).unwrap(), -1);
    }

    #[test]
    fn universal_invariant_needs_certificate_and_embeds_normal_form() {
        let a = CommutationAlphabet::finite("xab", &["x", "a", "b"], Commutation::None);
        let rhs = a.trace(&["a", "b"]).unwrap();
        let system =
            RewriteSystem::from_rule_list(a.clone(), vec![(Letter::new("x"), vec![rhs])]).unwrap();
        assert!(matches!(
            universal_invariant(&system, &Letter::new("x")),
            Err(Error::MissingCertificate { .. })
        ));
        let scope = crate::convergence::Scope::enumerate(&system, 0).unwrap().exhaustive();
        let weights = crate::convergence::WeightCertificate::from_map(
            "x heavier",
            [(Letter::new("x"), 2u64), (Letter::new("a"), 1), (Letter::new("b"), 1)]
                .into_iter()
                .collect(),
        );
        let report = crate::convergence::certify_convergence(
            &system,
            &weights,
            &scope,
            &crate::rewrite::Budgets::default(),
        )
        .unwrap();
        let system = system.with_certificate(report.certificate().unwrap().clone());
        let inv = universal_invariant(&system, &Letter::new("x")).unwrap();
        assert_eq!(
            inv.signed_letters(),
            &[(Letter::new("a"), Pos), (Letter::new("b"), Pos)]
        );
        // Irreducible letters map to themselves.
        let inv_a = universal_invariant(&system, &Letter::new("a")).unwrap();
        assert_eq!(inv_a.signed_letters(), &[(Letter::new("a"), Pos)]);
    }

    #[test]
    fn presentation_transcribes_commutators_and_rules() {
        let a = CommutationAlphabet::finite("xy", &["x", "y"], Commutation::from_pairs([("x", "y")]));
        let system = trivial_system(a.clone());
        let gens = vec![Letter::new("x"), Letter::new("y")];
        let p = group_presentation(&system, &gens).unwrap();
        assert_eq!(p.generators, gens);
        assert_eq!(
            p.relations,
            vec![Relation {
                lhs: vec![
                    (Letter::new("x"), Pos),
                    (Letter::new("y"), Pos),
                    (Letter::new("x"), Neg),
                    (Letter::new("y"), Neg),
                ],
                rhs: vec![],
            }]
        );
    }

    #[test]
    fn presentation_includes_rule_relations() {
        let a = CommutationAlphabet::finite("xab", &["x", "a", "b"], Commutation::None);
        let rhs = a.trace(&["a", "b"]).unwrap();
        let system =
            RewriteSystem::from_rule_list(a.clone(), vec![(Letter::new("x"), vec![rhs])]).unwrap();
        let gens = vec![Letter::new("x"), Letter::new("a"), Letter::new("b")];
        let p = group_presentation(&system, &gens).unwrap();
        assert_eq!(
            p.relations,
            vec![Relation {
                lhs: vec![(Letter::new("x"), Pos)],
                rhs: vec![(Letter::new("a"), Pos), (Letter::new("b"), Pos)],
            }]
        );
    }

    #[test]
    fn presentation_rejects_out_of_scope_rules() {
        let a = CommutationAlphabet::finite("xab", &["x", "a", "b"], Commutation::None);
        let rhs = a.trace(&["a", "b"]).unwrap();
        let system =
            RewriteSystem::from_rule_list(a.clone(), vec![(Letter::new("x"), vec![rhs])]).unwrap();
        let gens = vec![Letter::new("x"), Letter::new("a")];
        assert!(matches!(
            group_presentation(&system, &gens),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn monoid_embedding_is_multiplicative() {
        let a = alphabet();
        let t = a.trace(&["p", "r"]).unwrap();
        let u = a.trace(&["q", "p"]).unwrap();
        let embedded = TGElement::from_trace(&t.concat(&u).unwrap());
        let multiplied = TGElement::from_trace(&t).mul(&TGElement::from_trace(&u)).unwrap();
        assert_eq!(embedded, multiplied);
    }
}
