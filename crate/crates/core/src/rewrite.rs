//! Alphabetic rewriting of traces.
//!
//! Rules replace a single letter by a nonempty trace: `x ⇒ w`.  A one-step
//! reduction of a trace `t` picks a factorization `t = u·x·v` (as traces, not
//! words) and yields `u·w·v`.  Because independent letters slide past each
//! other, a single occurrence of `x` can admit several genuinely different
//! factorizations; reduct enumeration walks all of them, deduplicating by
//! canonical form.
//!
//! Everything that can grow is budgeted.  `normalize` counts steps and bounds
//! intermediate trace length; reduct enumeration bounds the number of
//! candidates it examines.  Budget exhaustion is reported, never silent.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convergence::ConvergenceCertificate;
use crate::error::{Error, Result};
use crate::trace::{Commutation, CommutationAlphabet, Letter, Trace};

/// Hard limits for potentially unbounded work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    /// Maximum rewrite steps in a single normalization.
    pub max_steps: usize,
    /// Maximum factorization candidates examined per reduct-set computation,
    /// and per-side node bound in bounded searches built on top of it.
    pub max_reduct_nodes: usize,
    /// Maximum intermediate trace length during normalization.
    pub max_trace_len: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_steps: 100_000,
            max_reduct_nodes: 10_000,
            max_trace_len: 10_000,
        }
    }
}

/// Which budget ran out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetKind {
    Steps,
    ReductNodes,
    TraceLength,
}

impl std::fmt::Display for BudgetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BudgetKind::Steps => f.write_str("step budget"),
            BudgetKind::ReductNodes => f.write_str("reduct-node budget"),
            BudgetKind::TraceLength => f.write_str("trace-length budget"),
        }
    }
}

/// Result of a (budgeted) normalization run.
#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub outcome: ReductionOutcome,
    /// Rewrite steps actually performed.
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub enum ReductionOutcome {
    /// Reached an irreducible trace.
    Irreducible(Trace),
    /// A budget ran out; `partial` is the last trace reached.
    Budget { kind: BudgetKind, partial: Trace },
}

impl ReductionReport {
    /// The normal form, if one was reached.
    pub fn normal_form(&self) -> Option<&Trace> {
        match &self.outcome {
            ReductionOutcome::Irreducible(t) => Some(t),
            ReductionOutcome::Budget { .. } => None,
        }
    }

    /// Last trace reached, normal form or not.
    pub fn last_trace(&self) -> &Trace {
        match &self.outcome {
            ReductionOutcome::Irreducible(t) => t,
            ReductionOutcome::Budget { partial, .. } => partial,
        }
    }

    pub fn budget_hit(&self) -> Option<BudgetKind> {
        match &self.outcome {
            ReductionOutcome::Irreducible(_) => None,
            ReductionOutcome::Budget { kind, .. } => Some(*kind),
        }
    }
}

/// One-step reducts of a trace, possibly truncated by the node budget.
#[derive(Clone, Debug)]
pub struct ReductSet {
    pub traces: BTreeSet<Trace>,
    /// True when enumeration stopped early; the set is then a subset of the
    /// true reduct set.
    pub truncated: bool,
}

/// Occurrence-selection strategy for `normalize_with`.
///
/// On a convergent system all strategies reach the same normal form; the
/// engine makes no such assumption and simply follows the chosen order.
#[derive(Clone, Copy, Debug)]
pub enum Strategy {
    /// Leftmost reducible occurrence of the canonical word, first rule.
    Leftmost,
    /// Rightmost reducible occurrence of the canonical word, first rule.
    Rightmost,
    /// Random representative word, random reducible occurrence, random rule.
    Random(u64),
}

type RuleGenerator = Arc<dyn Fn(&Letter) -> Result<Vec<Trace>> + Send + Sync>;

/// An alphabetic rewrite system: an alphabet, a finite-valued rule generator,
/// and budgets.  Immutable; cheap to clone.
///
/// A verified convergence certificate can be attached with
/// [`RewriteSystem::with_certificate`]; operations that are only sound on
/// convergent systems (equivalence testing, the universal invariant) insist
/// on one.
#[derive(Clone)]
pub struct RewriteSystem {
    alphabet: Arc<CommutationAlphabet>,
    rules: RuleGenerator,
    budgets: Budgets,
    certificate: Option<Arc<ConvergenceCertificate>>,
}

impl RewriteSystem {
    pub fn new(
        alphabet: Arc<CommutationAlphabet>,
        rules: impl Fn(&Letter) -> Result<Vec<Trace>> + Send + Sync + 'static,
    ) -> Self {
        RewriteSystem {
            alphabet,
            rules: Arc::new(rules),
            budgets: Budgets::default(),
            certificate: None,
        }
    }

    /// Convenience constructor for finite rule tables.
    pub fn from_rule_list(
        alphabet: Arc<CommutationAlphabet>,
        rules: Vec<(Letter, Vec<Trace>)>,
    ) -> Result<Self> {
        let mut table: HashMap<Letter, Vec<Trace>> = HashMap::new();
        for (lhs, rhss) in rules {
            alphabet.require_letter(&lhs)?;
            for rhs in &rhss {
                if rhs.alphabet().id() != alphabet.id() {
                    return Err(Error::AlphabetMismatch {
                        left: alphabet.id().to_owned(),
                        right: rhs.alphabet().id().to_owned(),
                    });
                }
            }
            table.entry(lhs).or_default().extend(rhss);
        }
        Ok(RewriteSystem::new(alphabet, move |x| {
            Ok(table.get(x).cloned().unwrap_or_default())
        }))
    }

    pub fn with_budgets(mut self, budgets: Budgets) -> Self {
        self.budgets = budgets;
        self
    }

    pub fn budgets(&self) -> Budgets {
        self.budgets
    }

    pub fn alphabet(&self) -> &Arc<CommutationAlphabet> {
        &self.alphabet
    }

    /// Attach a verified convergence certificate.
    pub fn with_certificate(mut self, certificate: ConvergenceCertificate) -> Self {
        self.certificate = Some(Arc::new(certificate));
        self
    }

    pub fn certificate(&self) -> Option<&ConvergenceCertificate> {
        self.certificate.as_deref()
    }

    pub(crate) fn require_certificate(&self, operation: &'static str) -> Result<&ConvergenceCertificate> {
        self.certificate
            .as_deref()
            .ok_or(Error::MissingCertificate { operation })
    }

    /// The rule right-hand sides for a letter.  Deterministic and finite;
    /// an empty list means the letter is irreducible.
    pub fn letter_rewrites(&self, letter: &Letter) -> Result<Vec<Trace>> {
        self.alphabet.require_letter(letter)?;
        (self.rules)(letter)
    }

    pub fn is_irreducible_letter(&self, letter: &Letter) -> Result<bool> {
        Ok(self.letter_rewrites(letter)?.is_empty())
    }

    /// A trace is irreducible exactly when all its letters are: rules fire on
    /// single letters, so a reducible letter anywhere yields a reduct.
    pub fn is_irreducible(&self, trace: &Trace) -> Result<bool> {
        self.check_trace(trace)?;
        for letter in distinct_letters(trace) {
            if !self.is_irreducible_letter(&letter)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The irreducible letters among `letters`, in the given order.
    pub fn irreducible_letters(&self, letters: &[Letter]) -> Result<Vec<Letter>> {
        let mut out = Vec::new();
        for letter in letters {
            if self.is_irreducible_letter(letter)? {
                out.push(letter.clone());
            }
        }
        Ok(out)
    }

    fn check_trace(&self, trace: &Trace) -> Result<()> {
        if trace.alphabet().id() != self.alphabet.id() {
            return Err(Error::AlphabetMismatch {
                left: self.alphabet.id().to_owned(),
                right: trace.alphabet().id().to_owned(),
            });
        }
        Ok(())
    }

    /// All one-step reducts of a trace, up to trace equality.
    ///
    /// Enumerates, for every reducible occurrence, every trace factorization
    /// `t = u·x·v` — equivalently every way of splitting the occurrences
    /// independent of `x` to the two sides consistently with the dependence
    /// order — and applies every rule of `x`.  On fully commutative alphabets
    /// the split is immaterial and a direct multiset replacement is used.
    pub fn one_step_reducts(&self, trace: &Trace) -> Result<ReductSet> {
        self.check_trace(trace)?;
        let budget = self.budgets.max_reduct_nodes;
        let mut out = ReductSet {
            traces: BTreeSet::new(),
            truncated: false,
        };
        let mut candidates = 0usize;

        if self.alphabet.commutation().is_total() {
            let word = trace.letters();
            let mut seen_letters: BTreeSet<&Letter> = BTreeSet::new();
            for (i, letter) in word.iter().enumerate() {
                if !seen_letters.insert(letter) {
                    continue;
                }
                for rhs in self.letter_rewrites(letter)? {
                    candidates += 1;
                    if candidates > budget {
                        out.truncated = true;
                        return Ok(out);
                    }
                    let mut next = Vec::with_capacity(word.len() - 1 + rhs.len());
                    next.extend_from_slice(&word[..i]);
                    next.extend_from_slice(&word[i + 1..]);
                    next.extend_from_slice(rhs.letters());
                    out.traces.insert(Trace::from_valid(&self.alphabet, next));
                }
            }
            return Ok(out);
        }

        let word = trace.letters();
        let n = word.len();
        // Dependence order on occurrences: transitive closure of
        // "earlier and non-commuting".  succ[i] = occurrences above i.
        let mut succ = vec![vec![false; n]; n];
        for i in (0..n).rev() {
            for j in i + 1..n {
                if !self.alphabet.commutes(&word[i], &word[j]) {
                    if !succ[i][j] {
                        succ[i][j] = true;
                    }
                    for k in j..n {
                        if succ[j][k] {
                            succ[i][k] = true;
                        }
                    }
                }
            }
        }

        for p in 0..n {
            let rules = self.letter_rewrites(&word[p])?;
            if rules.is_empty() {
                continue;
            }
            // Occurrences independent of p, in position order.
            let indep: Vec<usize> = (0..n)
                .filter(|&q| q != p && !succ[p.min(q)][p.max(q)])
                .collect();
            // For each independent occurrence, its predecessors within the
            // independent set (must precede it into any down-set).
            let preds: Vec<Vec<usize>> = indep
                .iter()
                .map(|&q| {
                    indep
                        .iter()
                        .enumerate()
                        .filter(|&(_, &r)| r < q && succ[r][q])
                        .map(|(idx, _)| idx)
                        .collect()
                })
                .collect();

            // Enumerate down-sets of the independent occurrences: members go
            // to the prefix, the rest to the suffix.  Depth-first over
            // inclusion decisions, iteratively, so the budget check can
            // abort cleanly.
            let mut chosen = vec![false; indep.len()];
            let mut stack: Vec<(usize, bool)> = vec![(0, false)];
            'outer: while let Some(&(idx, tried_include)) = stack.last() {
                if idx == indep.len() {
                    // Leaf: emit a reduct per rule.
                    for rhs in &rules {
                        candidates += 1;
                        if candidates > budget {
                            out.truncated = true;
                            break 'outer;
                        }
                        let on_left = |q: usize| match indep.binary_search(&q) {
                            Ok(i) => chosen[i],
                            // Dependent occurrences stay on their side of p.
                            Err(_) => q < p,
                        };
                        let mut next: Vec<Letter> = Vec::with_capacity(n - 1 + rhs.len());
                        for q in 0..n {
                            if q != p && on_left(q) {
                                next.push(word[q].clone());
                            }
                        }
                        next.extend_from_slice(rhs.letters());
                        for q in 0..n {
                            if q != p && !on_left(q) {
                                next.push(word[q].clone());
                            }
                        }
                        out.traces.insert(Trace::from_valid(&self.alphabet, next));
                    }
                    stack.pop();
                    continue;
                }
                if !tried_include {
                    // First visit: descend with idx excluded.
                    stack.last_mut().expect("nonempty").1 = true;
                    chosen[idx] = false;
                    stack.push((idx + 1, false));
                } else if chosen[idx] {
                    // Third visit: both branches explored, unwind.
                    chosen[idx] = false;
                    stack.pop();
                } else if preds[idx].iter().all(|&r| chosen[r]) {
                    // Second visit: descend with idx included if the set
                    // stays downward closed.
                    chosen[idx] = true;
                    stack.push((idx + 1, false));
                } else {
                    stack.pop();
                }
            }
            if out.truncated {
                break;
            }
        }
        Ok(out)
    }

    /// Normalize with the deterministic leftmost strategy.
    pub fn normalize(&self, trace: &Trace) -> Result<ReductionReport> {
        self.normalize_with(trace, Strategy::Leftmost)
    }

    /// Normalize under a chosen strategy, within the system budgets.
    pub fn normalize_with(&self, trace: &Trace, strategy: Strategy) -> Result<ReductionReport> {
        self.check_trace(trace)?;
        let budgets = self.budgets;
        let mut rng = match strategy {
            Strategy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        let mut rule_cache: HashMap<Letter, Arc<Vec<Trace>>> = HashMap::new();
        let mut current = trace.clone();
        let mut steps = 0usize;

        loop {
            let word: Vec<Letter> = match &mut rng {
                Some(rng) => random_representative(&self.alphabet, current.letters(), rng),
                None => current.letters().to_vec(),
            };

            let mut rules_for = |letter: &Letter| -> Result<Arc<Vec<Trace>>> {
                if let Some(hit) = rule_cache.get(letter) {
                    return Ok(hit.clone());
                }
                let fresh = Arc::new(self.letter_rewrites(letter)?);
                rule_cache.insert(letter.clone(), fresh.clone());
                Ok(fresh)
            };

            let mut reducible: Vec<(usize, Arc<Vec<Trace>>)> = Vec::new();
            for (i, letter) in word.iter().enumerate() {
                let rules = rules_for(letter)?;
                if !rules.is_empty() {
                    reducible.push((i, rules));
                    if matches!(strategy, Strategy::Leftmost) {
                        break;
                    }
                }
            }
            let Some((position, rules)) = (match (&strategy, &mut rng) {
                (Strategy::Leftmost, _) => reducible.into_iter().next(),
                (Strategy::Rightmost, _) => reducible.into_iter().last(),
                (Strategy::Random(_), Some(rng)) => {
                    if reducible.is_empty() {
                        None
                    } else {
                        let i = rng.gen_range(0..reducible.len());
                        Some(reducible.swap_remove(i))
                    }
                }
                (Strategy::Random(_), None) => unreachable!(),
            }) else {
                return Ok(ReductionReport {
                    outcome: ReductionOutcome::Irreducible(current),
                    steps,
                });
            };

            if steps >= budgets.max_steps {
                return Ok(ReductionReport {
                    outcome: ReductionOutcome::Budget {
                        kind: BudgetKind::Steps,
                        partial: current,
                    },
                    steps,
                });
            }
            let rule_index = match &mut rng {
                Some(rng) => rng.gen_range(0..rules.len()),
                None => 0,
            };
            let rhs = &rules[rule_index];
            if word.len() - 1 + rhs.len() > budgets.max_trace_len {
                return Ok(ReductionReport {
                    outcome: ReductionOutcome::Budget {
                        kind: BudgetKind::TraceLength,
                        partial: current,
                    },
                    steps,
                });
            }
            let mut next = Vec::with_capacity(word.len() - 1 + rhs.len());
            next.extend_from_slice(&word[..position]);
            next.extend_from_slice(rhs.letters());
            next.extend_from_slice(&word[position + 1..]);
            current = Trace::from_valid(&self.alphabet, next);
            steps += 1;
        }
    }

    /// Do two traces have the same normal form?
    ///
    /// Sound as an equivalence test only on convergent systems, so a verified
    /// certificate is required.  Budget exhaustion is an error here: there is
    /// no honest partial answer.
    pub fn thue_equivalent(&self, left: &Trace, right: &Trace) -> Result<bool> {
        self.require_certificate("thue_equivalent")?;
        let l = self.normalize(left)?;
        let r = self.normalize(right)?;
        match (l.normal_form(), r.normal_form()) {
            (Some(a), Some(b)) => Ok(a == b),
            _ => Err(Error::Budget(
                "normalization exhausted its budget before reaching a normal form".into(),
            )),
        }
    }
}

impl std::fmt::Debug for RewriteSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RewriteSystem")
            .field("alphabet", &self.alphabet.id())
            .field("budgets", &self.budgets)
            .field("certified", &self.certificate.is_some())
            .finish_non_exhaustive()
    }
}

fn distinct_letters(trace: &Trace) -> Vec<Letter> {
    let mut letters: Vec<Letter> = trace.letters().to_vec();
    letters.sort();
    letters.dedup();
    letters
}

/// A uniform-ish random representative of a trace's class: repeatedly emit a
/// random available occurrence (one not preceded by a remaining occurrence it
/// depends on).
fn random_representative(
    alphabet: &CommutationAlphabet,
    word: &[Letter],
    rng: &mut ChaCha8Rng,
) -> Vec<Letter> {
    if matches!(alphabet.commutation(), Commutation::None) {
        return word.to_vec();
    }
    let n = word.len();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let mut available: Vec<usize> = Vec::new();
        'occ: for (slot, &i) in remaining.iter().enumerate() {
            for &j in &remaining[..slot] {
                if !alphabet.commutes(&word[j], &word[i]) {
                    continue 'occ;
                }
            }
            available.push(slot);
        }
        let pick = *available.choose(rng).expect("a first occurrence is always available");
        out.push(word[remaining[pick]].clone());
        remaining.remove(pick);
    }
    out
}
