//! Monomial straightening: sorting a word by adjacent transpositions.
//!
//! Letters are nonempty words over a finite ordered base; a word with an
//! adjacent descent rewrites (in one of possibly several ways) to the word
//! with that descent swapped.  Rules are length-preserving and single-valued
//! per occurrence, irreducible letters are exactly the nondecreasing words,
//! and the normal form of a word is its sorted permutation — so an
//! independent oracle is one call to sort.

use std::collections::BTreeMap;

use crate::convergence::WeightCertificate;
use crate::error::{Error, Result};
use crate::rewrite::RewriteSystem;
use crate::trace::{Commutation, CommutationAlphabet, Letter};

fn base_ranks(base: &str) -> Result<BTreeMap<char, usize>> {
    if base.is_empty() {
        return Err(Error::InvalidInput("straightening base must be nonempty".into()));
    }
    let mut ranks = BTreeMap::new();
    for (i, ch) in base.chars().enumerate() {
        if ranks.insert(ch, i).is_some() {
            return Err(Error::InvalidInput(format!(
                "straightening base repeats the character {:?}",
                ch
            )));
        }
    }
    Ok(ranks)
}

fn word_ranks(token: &str, ranks: &BTreeMap<char, usize>) -> Option<Vec<usize>> {
    token.chars().map(|ch| ranks.get(&ch).copied()).collect()
}

/// The straightening system over an ordered base (the string fixes the
/// generator order, e.g. `"abc"` means a < b < c).
pub fn pbw_system(base: &str) -> Result<RewriteSystem> {
    let ranks = base_ranks(base)?;
    let id = format!("pbw-{}", base);

    let validity_ranks = ranks.clone();
    let order_ranks = ranks.clone();
    let alphabet = CommutationAlphabet::new(
        id,
        move |token| !token.is_empty() && word_ranks(token, &validity_ranks).is_some(),
        move |x, y| match (word_ranks(x, &order_ranks), word_ranks(y, &order_ranks)) {
            (Some(rx), Some(ry)) => rx.len().cmp(&ry.len()).then_with(|| rx.cmp(&ry)),
            _ => x.cmp(y),
        },
        Commutation::Total,
    )
    .with_enumerator({
        let chars: Vec<char> = base.chars().collect();
        move |bound| {
            let mut words = vec![String::new()];
            let mut out = Vec::new();
            for _ in 0..bound {
                words = words
                    .iter()
                    .flat_map(|w| {
                        chars.iter().map(move |&ch| {
                            let mut next = w.clone();
                            next.push(ch);
                            next
                        })
                    })
                    .collect();
                out.extend(words.iter().cloned().map(Letter::from));
            }
            out
        }
    });

    let rule_alphabet = alphabet.clone();
    Ok(RewriteSystem::new(alphabet, move |letter| {
        let chars: Vec<char> = letter.as_str().chars().collect();
        let mut out = Vec::new();
        for j in 0..chars.len().saturating_sub(1) {
            if ranks[&chars[j]] > ranks[&chars[j + 1]] {
                let mut swapped = chars.clone();
                swapped.swap(j, j + 1);
                let token: String = swapped.into_iter().collect();
                out.push(rule_alphabet.trace(&[token])?);
            }
        }
        Ok(out)
    }))
}

/// Termination weights: one plus the number of inversions (pairs out of base
/// order).  Each rule swaps one adjacent descent, removing exactly one.
pub fn pbw_weight_certificate(base: &str) -> Result<WeightCertificate> {
    let ranks = base_ranks(base)?;
    Ok(WeightCertificate::new(
        format!("1 + inversions over {:?}", base),
        move |letter| {
            let rs = word_ranks(letter.as_str(), &ranks)?;
            if rs.is_empty() {
                return None;
            }
            let mut inversions = 0u64;
            for i in 0..rs.len() {
                for j in i + 1..rs.len() {
                    if rs[i] > rs[j] {
                        inversions += 1;
                    }
                }
            }
            Some(1 + inversions)
        },
    ))
}

/// Straighten a word over the base of its own distinct characters (in
/// character order).  The result is always a single sorted term, reported as
/// a multiset for symmetry with the other normal-order maps.
pub fn pbw_normal_order(raw: &str) -> Result<BTreeMap<String, usize>> {
    let mut base: Vec<char> = raw.chars().collect();
    base.sort_unstable();
    base.dedup();
    let base: String = base.into_iter().collect();
    let system = pbw_system(&base)?;
    let trace = system.alphabet().trace(&[raw])?;
    let report = system.normalize(&trace)?;
    let Some(normal_form) = report.normal_form() else {
        return Err(Error::Budget(format!(
            "straightening of {:?} exhausted its budget after {} steps",
            raw, report.steps
        )));
    };
    Ok(normal_form
        .counts()
        .into_iter()
        .map(|(letter, count)| (letter.as_str().to_owned(), count))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::{verify_weight_certificate, Scope};
    use crate::rewrite::Strategy;

    #[test]
    fn base_must_be_nonempty_without_repeats() {
        assert!(pbw_system("").is_err());
        assert!(pbw_system("aba").is_err());
        assert!(pbw_system("abc").is_ok());
    }

    #[test]
    fn rules_swap_each_adjacent_descent() {
        let system = pbw_system("abc").unwrap();
        let rules = system.letter_rewrites(&Letter::new("cba")).unwrap();
        let tokens: Vec<String> = rules.iter().map(|t| t.letters()[0].as_str().to_owned()).collect();
        assert_eq!(tokens, vec!["bca", "cab"]);
        assert!(system.letter_rewrites(&Letter::new("abc")).unwrap().is_empty());
        assert!(system.letter_rewrites(&Letter::new("aab")).unwrap().is_empty());
    }

    #[test]
    fn normal_order_is_the_sorted_word() {
        let expected: BTreeMap<String, usize> = [("abc".to_string(), 1)].into_iter().collect();
        assert_eq!(pbw_normal_order("cba").unwrap(), expected);
        // Exhaustive small check: normal form = sort, under every strategy.
        let system = pbw_system("abc").unwrap();
        let letters = system.alphabet().enumerate_up_to(4).unwrap();
        for letter in letters {
            let mut sorted: Vec<char> = letter.as_str().chars().collect();
            sorted.sort_unstable();
            let sorted: String = sorted.into_iter().collect();
            let trace = system.alphabet().letter_trace(&letter).unwrap();
            for strategy in [Strategy::Leftmost, Strategy::Rightmost, Strategy::Random(7)] {
                let report = system.normalize_with(&trace, strategy).unwrap();
                let nf = report.normal_form().unwrap();
                assert_eq!(nf.letters()[0].as_str(), sorted, "word {:?}", letter);
            }
        }
    }

    #[test]
    fn base_order_is_what_counts_not_character_order() {
        // Over the base "cba" the straightened form of "abc" is "cba".
        let system = pbw_system("cba").unwrap();
        let trace = system.alphabet().trace(&["abc"]).unwrap();
        let report = system.normalize(&trace).unwrap();
        assert_eq!(report.normal_form().unwrap().letters()[0].as_str(), "cba");
    }

    #[test]
    fn weights_count_inversions_and_descend() {
        let w = pbw_weight_certificate("abc").unwrap();
        assert_eq!(w.weight(&Letter::new("abc")), Some(1));
        assert_eq!(w.weight(&Letter::new("cba")), Some(4));
        assert_eq!(w.weight(&Letter::new("bac")), Some(2));
        assert_eq!(w.weight(&Letter::new("zzz")), None);
        let system = pbw_system("abc").unwrap();
        let scope = Scope::enumerate(&system, 3)
            .unwrap()
            .described("words of length ≤ 3 over abc");
        let report = verify_weight_certificate(&system, &w, &scope).unwrap();
        assert!(report.termination.is_certified());
    }

    #[test]
    fn empty_word_is_not_a_letter() {
        let system = pbw_system("ab").unwrap();
        assert!(!system.alphabet().is_letter(""));
        assert!(system.alphabet().trace(&[""]).is_err());
    }
}
