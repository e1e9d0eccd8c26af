//! Normal ordering in the Weyl algebra.
//!
//! Letters are the unit symbol 𝟙 and nonempty words over {a, b} — optionally
//! with a central letter c, kept as a canonical prefix — and a trace over
//! this fully commutative alphabet is a formal sum of such words.  The
//! relation a·b = b·a + 1 becomes an alphabetic rule: a word with an "ab" at
//! position j rewrites to the two-letter trace (swap at j)·(strip at j),
//! where stripping an "ab" from a one-pair word yields 𝟙.  Irreducible
//! letters are exactly the normally ordered words c^i·b^j·a^k, so the normal
//! form of a word is its normal-order expansion with multiplicities.
//!
//! With a = d/ds and b = (s·) acting on polynomials, every identity here is
//! checkable by honest operator arithmetic; the tests do exactly that.

use std::collections::BTreeMap;

use crate::convergence::WeightCertificate;
use crate::error::{Error, Result};
use crate::rewrite::RewriteSystem;
use crate::trace::{Commutation, CommutationAlphabet, Letter};

const UNIT: &str = "𝟙";

/// The unit letter 𝟙 (the empty product, kept as an explicit letter so that
/// stripping the last "ab" pair still produces a letter).
pub fn weyl_unit() -> Letter {
    Letter::new(UNIT)
}

fn split_central(token: &str) -> (usize, &str) {
    let c_count = token.bytes().take_while(|&b| b == b'c').count();
    (c_count, &token[c_count..])
}

/// Letter validity: 𝟙, or a nonempty word of c's (central alphabets only)
/// followed by a's and b's.
fn is_weyl_token(token: &str, central: bool) -> bool {
    if token == UNIT {
        return true;
    }
    if token.is_empty() {
        return false;
    }
    let (c_count, body) = split_central(token);
    if c_count > 0 && !central {
        return false;
    }
    body.bytes().all(|b| b == b'a' || b == b'b')
}

/// Canonicalize a raw word into a letter: c's (central and hence movable)
/// migrate to the front, the a/b order is preserved.  Accepts 𝟙 verbatim.
pub fn weyl_letter(raw: &str) -> Result<Letter> {
    if raw == UNIT {
        return Ok(weyl_unit());
    }
    if raw.is_empty() {
        return Err(Error::InvalidInput(
            "empty word; use the unit letter 𝟙 for the empty product".into(),
        ));
    }
    let mut c_count = 0usize;
    let mut body = String::with_capacity(raw.len());
    for ch in raw.chars() {
        match ch {
            'c' => c_count += 1,
            'a' | 'b' => body.push(ch),
            other => {
                return Err(Error::InvalidInput(format!(
                    "letter {:?} is not over {{a, b, c}}",
                    other
                )))
            }
        }
    }
    Ok(Letter::from(format!("{}{}", "c".repeat(c_count), body)))
}

fn shortlex_with_unit(x: &str, y: &str) -> std::cmp::Ordering {
    match (x == UNIT, y == UNIT) {
        (true, true) => std::cmp::Ordering::Equal,
        (true, false) => std::cmp::Ordering::Less,
        (false, true) => std::cmp::Ordering::Greater,
        (false, false) => x.len().cmp(&y.len()).then_with(|| x.cmp(y)),
    }
}

fn ab_words(len: usize) -> Vec<String> {
    let mut words = vec![String::new()];
    for _ in 0..len {
        words = words
            .into_iter()
            .flat_map(|w| {
                let mut with_a = w.clone();
                with_a.push('a');
                let mut with_b = w;
                with_b.push('b');
                [with_a, with_b]
            })
            .collect();
    }
    words
}

/// The normal-ordering rewrite system.  `central` adjoins the letter c as a
/// canonical prefix that rides along unchanged through every rule.
pub fn weyl_system(central: bool) -> RewriteSystem {
    let id = if central { "weyl-central" } else { "weyl" };
    let alphabet = CommutationAlphabet::new(
        id,
        move |token| is_weyl_token(token, central),
        shortlex_with_unit,
        Commutation::Total,
    )
    .with_enumerator(move |bound| {
        let mut out = vec![weyl_unit()];
        for len in 1..=bound {
            let c_max = if central { len } else { 0 };
            for c_count in 0..=c_max {
                for body in ab_words(len - c_count) {
                    if c_count == 0 && body.is_empty() {
                        continue;
                    }
                    out.push(Letter::from(format!("{}{}", "c".repeat(c_count), body)));
                }
            }
        }
        out
    });
    let rule_alphabet = alphabet.clone();
    RewriteSystem::new(alphabet, move |letter| {
        let token = letter.as_str();
        if token == UNIT {
            return Ok(Vec::new());
        }
        let (c_count, body) = split_central(token);
        let bytes = body.as_bytes();
        let prefix = "c".repeat(c_count);
        let mut out = Vec::new();
        for j in 0..bytes.len().saturating_sub(1) {
            if bytes[j] == b'a' && bytes[j + 1] == b'b' {
                let mut swapped = body.to_owned().into_bytes();
                swapped.swap(j, j + 1);
                let swapped = format!(
                    "{}{}",
                    prefix,
                    String::from_utf8(swapped).expect("ascii body")
                );
                let stripped_body = format!("{}{}", &body[..j], &body[j + 2..]);
                let stripped = if c_count == 0 && stripped_body.is_empty() {
                    UNIT.to_owned()
                } else {
                    format!("{}{}", prefix, stripped_body)
                };
                out.push(rule_alphabet.trace(&[swapped, stripped])?);
            }
        }
        Ok(out)
    })
}

/// Termination weights: one plus the number of (a, b) inversions — pairs of
/// an a strictly before a b.  Swapping an adjacent "ab" removes exactly that
/// inversion; stripping removes it and possibly more.
pub fn weyl_weight_certificate() -> WeightCertificate {
    WeightCertificate::new("1 + ab-inversions", |letter| {
        let token = letter.as_str();
        if token == UNIT {
            return Some(1);
        }
        if !is_weyl_token(token, true) {
            return None;
        }
        let (_, body) = split_central(token);
        let mut inversions = 0u64;
        let mut b_suffix = 0u64;
        for byte in body.bytes().rev() {
            match byte {
                b'b' => b_suffix += 1,
                b'a' => inversions += b_suffix,
                _ => {}
            }
        }
        Some(1 + inversions)
    })
}

/// Normal-order a word: the multiset of normally ordered terms with their
/// multiplicities.  The unit letter is reported under the empty-string key.
pub fn weyl_normal_order(raw: &str) -> Result<BTreeMap<String, usize>> {
    let letter = weyl_letter(raw)?;
    let central = letter.as_str().contains('c');
    let system = weyl_system(central);
    let trace = system.alphabet().letter_trace(&letter)?;
    let report = system.normalize(&trace)?;
    let Some(normal_form) = report.normal_form() else {
        return Err(Error::Budget(format!(
            "normal ordering of {:?} exhausted its budget after {} steps",
            raw, report.steps
        )));
    };
    Ok(normal_form
        .counts()
        .into_iter()
        .map(|(letter, count)| {
            let key = if letter.as_str() == UNIT {
                String::new()
            } else {
                letter.as_str().to_owned()
            };
            (key, count)
        })
        .collect())
}
