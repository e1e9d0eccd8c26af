//! Deterministic inputs for the benchmarks: big enough that the measured
//! loops dominate setup, small enough that a full run stays interactive.

use std::sync::Arc;

use tgrw_core::{Commutation, CommutationAlphabet, Letter, Multigraph, Sign};

/// An alphabet of `width` single-character letters where letters commute
/// exactly when their positions differ by at least two — enough structure
/// that canonicalization has real sorting work to do.
pub fn banded_alphabet(width: usize) -> Arc<CommutationAlphabet> {
    assert!(width <= 26, "single-character letters only");
    let last = (b'a' + width as u8 - 1) as char;
    CommutationAlphabet::new(
        "banded",
        move |token| {
            let mut chars = token.chars();
            matches!((chars.next(), chars.next()), (Some(c), None) if ('a'..=last).contains(&c))
        },
        |x, y| x.cmp(y),
        Commutation::Predicate(Arc::new(|x: &str, y: &str| {
            let a = x.as_bytes()[0] as i32;
            let b = y.as_bytes()[0] as i32;
            (a - b).abs() >= 2
        })),
    )
}

/// A fixed pseudo-random token sequence over the first `width` letters.
pub fn scrambled_tokens(width: usize, len: usize) -> Vec<String> {
    let mut state = 0x2545f4914f6cdd1du64;
    (0..len)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let i = (state % width as u64) as u8;
            ((b'a' + i) as char).to_string()
        })
        .collect()
}

/// Three letters with a single commuting pair — the smallest alphabet whose
/// signed words need commutation moves before they can cancel.
pub fn group_alphabet() -> Arc<CommutationAlphabet> {
    CommutationAlphabet::finite(
        "pqr",
        &["p", "q", "r"],
        Commutation::from_pairs([("p", "q")]),
    )
}

/// A signed word over {p, q, r} with one commuting pair, shaped so that
/// cancellations only appear after commutation moves.
pub fn tangled_signed_word(len: usize) -> Vec<(Letter, Sign)> {
    let p = Letter::new("p");
    let q = Letter::new("q");
    let r = Letter::new("r");
    (0..len)
        .map(|i| match i % 6 {
            0 => (p.clone(), Sign::Pos),
            1 => (q.clone(), Sign::Pos),
            2 => (p.clone(), Sign::Neg),
            3 => (r.clone(), Sign::Pos),
            4 => (q.clone(), Sign::Neg),
            _ => (r.clone(), Sign::Neg),
        })
        .collect()
}

/// The complete graph on `n` vertices.
pub fn complete_graph(n: usize) -> Multigraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v));
        }
    }
    Multigraph::new(n, edges).expect("complete graph within the vertex cap")
}
