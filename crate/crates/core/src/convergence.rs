//! Termination certificates and bounded confluence checking.
//!
//! Termination is certified by letter weights: every rule must strictly drop
//! from its left-hand letter to *each* letter of each right-hand side, which
//! makes every rewrite step a strict multiset descent.  Local confluence is
//! checked two ways: joinability of all right-hand-side pairs of each scoped
//! letter, and a bounded model check over small traces.  Both are scoped and
//! budgeted, and the report says exactly what was covered — a sample-scoped
//! result is never presented as a global proof.
//!
//! A report whose termination and confluence legs both succeed carries a
//! [`ConvergenceCertificate`]; attaching it to the system (see
//! [`RewriteSystem::with_certificate`]) unlocks equivalence testing and the
//! universal invariant.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rewrite::{Budgets, RewriteSystem};
use crate::trace::{Letter, Trace};

/// Positive letter weights proposed as a termination certificate.
///
/// The weight function may be partial (`None` marks letters it does not
/// cover); verification fails with an input error if a scoped letter is
/// uncovered or assigned a non-positive weight.
#[derive(Clone)]
pub struct WeightCertificate {
    description: String,
    weight: Arc<dyn Fn(&Letter) -> Option<u64> + Send + Sync>,
}

impl WeightCertificate {
    pub fn new(
        description: impl Into<String>,
        weight: impl Fn(&Letter) -> Option<u64> + Send + Sync + 'static,
    ) -> Self {
        WeightCertificate {
            description: description.into(),
            weight: Arc::new(weight),
        }
    }

    pub fn from_map(description: impl Into<String>, map: BTreeMap<Letter, u64>) -> Self {
        WeightCertificate::new(description, move |l| map.get(l).copied())
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn weight(&self, letter: &Letter) -> Option<u64> {
        (self.weight)(letter)
    }

    fn require_weight(&self, letter: &Letter) -> Result<u64> {
        match self.weight(letter) {
            Some(0) | None => Err(Error::InvalidInput(format!(
                "weight certificate {:?} does not assign a positive weight to letter {:?}",
                self.description,
                letter.as_str()
            ))),
            Some(w) => Ok(w),
        }
    }
}

impl std::fmt::Debug for WeightCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightCertificate")
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

/// What a convergence check covers.
///
/// `letters` feed the weight verification and the rule-level peak check;
/// `trace_letters` (a subset by default equal to `letters`) seed the bounded
/// model check with all traces up to `max_trace_len`.  `exhaustive` records
/// the caller's claim that `letters` is the whole alphabet, which upgrades a
/// certified termination result from sample-scoped to global.
#[derive(Clone, Debug)]
pub struct Scope {
    pub letters: Vec<Letter>,
    pub trace_letters: Vec<Letter>,
    pub max_trace_len: usize,
    pub exhaustive: bool,
    pub description: String,
}

impl Scope {
    pub fn new(letters: Vec<Letter>, description: impl Into<String>) -> Self {
        Scope {
            trace_letters: letters.clone(),
            letters,
            max_trace_len: 2,
            exhaustive: false,
            description: description.into(),
        }
    }

    /// Scope over everything the alphabet enumerates up to `bound`.
    pub fn enumerate(system: &RewriteSystem, bound: usize) -> Result<Self> {
        let letters = system
            .alphabet()
            .enumerate_up_to(bound)
            .ok_or_else(|| Error::Unsupported(format!(
                "alphabet {} has no enumerator; provide scope letters explicitly",
                system.alphabet().id()
            )))?;
        let description = format!(
            "letters of {} enumerated up to bound {}",
            system.alphabet().id(),
            bound
        );
        Ok(Scope::new(letters, description))
    }

    /// Restrict the model-check seeds (weight and peak checks keep the full
    /// letter list).
    pub fn with_trace_letters(mut self, letters: Vec<Letter>) -> Self {
        self.trace_letters = letters;
        self
    }

    pub fn with_max_trace_len(mut self, len: usize) -> Self {
        self.max_trace_len = len;
        self
    }

    /// Assert that `letters` is the entire alphabet.
    pub fn exhaustive(mut self) -> Self {
        self.exhaustive = true;
        self
    }

    pub fn described(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }
}

/// Outcome of the termination leg.
#[derive(Clone, Debug)]
pub enum TerminationStatus {
    /// Every scoped rule strictly drops the certificate weights.
    Certified {
        /// True when the scope covered the whole alphabet.
        exhaustive: bool,
    },
    /// Verification failed or was not attempted; the reason says which.
    Unknown { reason: String },
    /// A reduction cycle was found: the system cannot terminate.
    RefutedByCycle { cycle: Vec<Trace> },
}

impl TerminationStatus {
    pub fn is_certified(&self) -> bool {
        matches!(self, TerminationStatus::Certified { .. })
    }
}

/// Outcome of the local-confluence leg.
#[derive(Clone, Debug)]
pub enum ConfluenceStatus {
    /// Every scoped peak was joined.
    Verified,
    /// Two reducts of one trace with provably disjoint descendant sets.
    Counterexample(Box<ConfluenceCounterexample>),
    /// Some peak could not be decided within the budgets.
    BudgetExhausted { detail: String },
    /// The check was not run (e.g. weight-only verification).
    Unchecked,
}

impl ConfluenceStatus {
    pub fn is_verified(&self) -> bool {
        matches!(self, ConfluenceStatus::Verified)
    }
}

/// A non-joinable peak: `peak ⇒ left`, `peak ⇒ right`, and the bounded
/// descendant sets of `left` and `right` are disjoint and complete.
#[derive(Clone, Debug)]
pub struct ConfluenceCounterexample {
    pub peak: Trace,
    pub left: Trace,
    pub right: Trace,
}

impl ConfluenceCounterexample {
    /// Re-derive the disjointness: recompute both bounded descendant sets and
    /// report whether they are still complete and disjoint.
    pub fn replay(&self, system: &RewriteSystem) -> Result<bool> {
        let mut ctx = JoinContext::new(system);
        Ok(matches!(ctx.joinability(&self.left, &self.right)?, Joinability::Disjoint))
    }
}

/// Proof token that a system was checked convergent on a scope.  Produced
/// only by [`certify_convergence`].
#[derive(Clone, Debug)]
pub struct ConvergenceCertificate {
    system_id: String,
    scope: String,
    weights: String,
}

impl ConvergenceCertificate {
    pub fn system_id(&self) -> &str {
        &self.system_id
    }

    pub fn scope(&self) -> &str {
        &self.scope
    }

    pub fn weights(&self) -> &str {
        &self.weights
    }
}

/// Combined result of the termination and confluence legs.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub termination: TerminationStatus,
    pub local_confluence: ConfluenceStatus,
    pub scope: String,
    certificate: Option<ConvergenceCertificate>,
}

impl ConvergenceReport {
    /// Both legs succeeded on their scope.
    pub fn is_convergent_on_scope(&self) -> bool {
        self.termination.is_certified() && self.local_confluence.is_verified()
    }

    pub fn certificate(&self) -> Option<&ConvergenceCertificate> {
        self.certificate.as_ref()
    }

    pub fn counterexample(&self) -> Option<&ConfluenceCounterexample> {
        match &self.local_confluence {
            ConfluenceStatus::Counterexample(c) => Some(c),
            _ => None,
        }
    }
}

/// Check that the proposed weights strictly drop across every scoped rule.
///
/// Weight order alone never proves confluence; the returned report leaves the
/// confluence leg unchecked.
pub fn verify_weight_certificate(
    system: &RewriteSystem,
    certificate: &WeightCertificate,
    scope: &Scope,
) -> Result<ConvergenceReport> {
    let mut failure: Option<String> = None;
    'letters: for letter in &scope.letters {
        let lhs_weight = certificate.require_weight(letter)?;
        for rhs in system.letter_rewrites(letter)? {
            for target in rhs.letters() {
                let rhs_weight = certificate.require_weight(target)?;
                if rhs_weight >= lhs_weight {
                    failure = Some(format!(
                        "rule {} ⇒ {} does not descend: weight({}) = {} but weight({}) = {}",
                        letter,
                        rhs,
                        letter,
                        lhs_weight,
                        target,
                        rhs_weight
                    ));
                    break 'letters;
                }
            }
        }
    }
    let termination = match failure {
        Some(reason) => TerminationStatus::Unknown { reason },
        None => TerminationStatus::Certified {
            exhaustive: scope.exhaustive,
        },
    };
    Ok(ConvergenceReport {
        termination,
        local_confluence: ConfluenceStatus::Unchecked,
        scope: scope.description.clone(),
        certificate: None,
    })
}

#[derive(Debug, PartialEq, Eq)]
enum Joinability {
    Joinable,
    Disjoint,
    Exhausted,
}

/// Shared state for joinability queries within one check: memoized
/// normalization results and reduct sets.
struct JoinContext<'a> {
    system: &'a RewriteSystem,
    normal_forms: HashMap<Trace, Option<Trace>>,
    reducts: HashMap<Trace, Option<Arc<Vec<Trace>>>>,
}

impl<'a> JoinContext<'a> {
    fn new(system: &'a RewriteSystem) -> Self {
        JoinContext {
            system,
            normal_forms: HashMap::new(),
            reducts: HashMap::new(),
        }
    }

    fn normal_form(&mut self, t: &Trace) -> Result<Option<Trace>> {
        if let Some(hit) = self.normal_forms.get(t) {
            return Ok(hit.clone());
        }
        let report = self.system.normalize(t)?;
        let nf = report.normal_form().cloned();
        self.normal_forms.insert(t.clone(), nf.clone());
        Ok(nf)
    }

    /// Complete reduct list, or `None` if enumeration was truncated.
    fn reducts(&mut self, t: &Trace) -> Result<Option<Arc<Vec<Trace>>>> {
        if let Some(hit) = self.reducts.get(t) {
            return Ok(hit.clone());
        }
        let set = self.system.one_step_reducts(t)?;
        let value = if set.truncated {
            None
        } else {
            Some(Arc::new(set.traces.into_iter().collect::<Vec<_>>()))
        };
        self.reducts.insert(t.clone(), value.clone());
        Ok(value)
    }

    /// Do `left` and `right` have a common descendant (including themselves)?
    ///
    /// Fast path: if both normalize within budget to the same trace, they are
    /// joinable — deterministic normalization follows genuine reduction
    /// sequences, so this is a sound positive answer.  Otherwise both
    /// bounded descendant sets are computed and intersected; `Disjoint` is
    /// only reported when both sets are complete.
    fn joinability(&mut self, left: &Trace, right: &Trace) -> Result<Joinability> {
        if left == right {
            return Ok(Joinability::Joinable);
        }
        if let (Some(a), Some(b)) = (self.normal_form(left)?, self.normal_form(right)?) {
            if a == b {
                return Ok(Joinability::Joinable);
            }
        }
        let node_budget = self.system.budgets().max_reduct_nodes;
        let left_set = self.descendants(left, node_budget)?;
        let right_set = self.descendants(right, node_budget)?;
        if left_set.nodes.iter().any(|t| right_set.nodes.contains(t)) {
            return Ok(Joinability::Joinable);
        }
        if left_set.complete && right_set.complete {
            Ok(Joinability::Disjoint)
        } else {
            Ok(Joinability::Exhausted)
        }
    }

    fn descendants(&mut self, from: &Trace, node_budget: usize) -> Result<DescendantSet> {
        let mut nodes: HashSet<Trace> = HashSet::new();
        let mut queue: VecDeque<Trace> = VecDeque::new();
        let mut complete = true;
        nodes.insert(from.clone());
        queue.push_back(from.clone());
        while let Some(t) = queue.pop_front() {
            match self.reducts(&t)? {
                None => {
                    complete = false;
                    continue;
                }
                Some(reducts) => {
                    for r in reducts.iter() {
                        if nodes.contains(r) {
                            continue;
                        }
                        if nodes.len() >= node_budget {
                            complete = false;
                            break;
                        }
                        nodes.insert(r.clone());
                        queue.push_back(r.clone());
                    }
                }
            }
        }
        Ok(DescendantSet { nodes, complete })
    }
}

struct DescendantSet {
    nodes: HashSet<Trace>,
    complete: bool,
}

/// Enumerate all traces of length 1..=max_len over the given letters, up to
/// trace equality.
fn traces_up_to(
    system: &RewriteSystem,
    letters: &[Letter],
    max_len: usize,
) -> Result<Vec<Trace>> {
    let alphabet = system.alphabet();
    let mut out: Vec<Trace> = Vec::new();
    let mut seen: BTreeSet<Trace> = BTreeSet::new();
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next_layer = Vec::new();
        for stem in &layer {
            for letter in letters {
                let mut word = stem.clone();
                word.push(letter.clone());
                let trace = Trace::new(alphabet, word.clone())?;
                if seen.insert(trace.clone()) {
                    out.push(trace);
                }
                next_layer.push(word);
            }
        }
        layer = next_layer;
    }
    Ok(out)
}

/// Check local confluence on the scope: (a) all right-hand-side pairs of each
/// scoped letter are joinable, (b) all peaks of all traces up to the scope's
/// length bound over the scope's trace letters are joinable.
///
/// The termination leg of the returned report is deliberately `Unknown`:
/// confluence checking says nothing about termination.
pub fn check_local_confluence(
    system: &RewriteSystem,
    scope: &Scope,
    budgets: &Budgets,
) -> Result<ConvergenceReport> {
    let system = system.clone().with_budgets(*budgets);
    let mut ctx = JoinContext::new(&system);
    let mut status = ConfluenceStatus::Verified;

    // (a) rule-level peaks: x ⇒ r_i, x ⇒ r_j.
    'outer: for letter in &scope.letters {
        let rules = system.letter_rewrites(letter)?;
        if rules.len() < 2 {
            continue;
        }
        let peak = system.alphabet().letter_trace(letter)?;
        for i in 0..rules.len() {
            for j in i + 1..rules.len() {
                match ctx.joinability(&rules[i], &rules[j])? {
                    Joinability::Joinable => {}
                    Joinability::Disjoint => {
                        status = ConfluenceStatus::Counterexample(Box::new(
                            ConfluenceCounterexample {
                                peak,
                                left: rules[i].clone(),
                                right: rules[j].clone(),
                            },
                        ));
                        break 'outer;
                    }
                    Joinability::Exhausted => {
                        status = ConfluenceStatus::BudgetExhausted {
                            detail: format!(
                                "joinability of the right-hand sides of {} was not decided within budget",
                                letter
                            ),
                        };
                        break 'outer;
                    }
                }
            }
        }
    }

    // (b) bounded model check over small traces.
    if status.is_verified() {
        'model: for trace in traces_up_to(&system, &scope.trace_letters, scope.max_trace_len)? {
            let Some(reducts) = ctx.reducts(&trace)? else {
                status = ConfluenceStatus::BudgetExhausted {
                    detail: format!("reduct enumeration of {} was truncated", trace),
                };
                break 'model;
            };
            for i in 0..reducts.len() {
                for j in i + 1..reducts.len() {
                    match ctx.joinability(&reducts[i], &reducts[j])? {
                        Joinability::Joinable => {}
                        Joinability::Disjoint => {
                            status = ConfluenceStatus::Counterexample(Box::new(
                                ConfluenceCounterexample {
                                    peak: trace.clone(),
                                    left: reducts[i].clone(),
                                    right: reducts[j].clone(),
                                },
                            ));
                            break 'model;
                        }
                        Joinability::Exhausted => {
                            status = ConfluenceStatus::BudgetExhausted {
                                detail: format!(
                                    "peak of {} not decided within budget",
                                    trace
                                ),
                            };
                            break 'model;
                        }
                    }
                }
            }
        }
    }

    Ok(ConvergenceReport {
        termination: TerminationStatus::Unknown {
            reason: "termination was not assessed by the confluence check".into(),
        },
        local_confluence: status,
        scope: scope.description.clone(),
        certificate: None,
    })
}

/// Search for a reduction cycle among descendants of the scoped letters.
/// Depth-first with an explicit path stack, bounded by `node_budget` visited
/// traces per seed.
fn find_cycle(system: &RewriteSystem, scope: &Scope, node_budget: usize) -> Result<Option<Vec<Trace>>> {
    for letter in &scope.trace_letters {
        let seed = system.alphabet().letter_trace(letter)?;
        let mut visited: HashSet<Trace> = HashSet::new();
        // (trace, child cursor); path = stack contents.
        let mut stack: Vec<(Trace, Vec<Trace>, usize)> = Vec::new();
        let mut on_path: HashSet<Trace> = HashSet::new();
        let reducts_of = |t: &Trace| -> Result<Vec<Trace>> {
            Ok(system.one_step_reducts(t)?.traces.into_iter().collect())
        };
        visited.insert(seed.clone());
        on_path.insert(seed.clone());
        stack.push((seed.clone(), reducts_of(&seed)?, 0));
        while let Some((trace, children, cursor)) = stack.last().cloned() {
            if cursor >= children.len() {
                on_path.remove(&trace);
                stack.pop();
                continue;
            }
            stack.last_mut().expect("nonempty").2 += 1;
            let child = children[cursor].clone();
            if on_path.contains(&child) {
                // Cycle: slice the current path from the first occurrence.
                let mut cycle: Vec<Trace> =
                    stack.iter().map(|(t, _, _)| t.clone()).collect();
                if let Some(pos) = cycle.iter().position(|t| *t == child) {
                    cycle.drain(..pos);
                }
                cycle.push(child);
                return Ok(Some(cycle));
            }
            if visited.len() >= node_budget {
                break;
            }
            if visited.insert(child.clone()) {
                on_path.insert(child.clone());
                let grand = reducts_of(&child)?;
                stack.push((child, grand, 0));
            }
        }
    }
    Ok(None)
}

/// Run both legs and, on success, mint a certificate.
///
/// Termination comes from the weight certificate; if the weights fail, a
/// bounded cycle search tries to upgrade "unknown" to an outright refutation.
/// Confluence comes from [`check_local_confluence`].  The result is
/// convergent *on the stated scope*; `scope.exhaustive` is the only way to
/// claim more.
pub fn certify_convergence(
    system: &RewriteSystem,
    certificate: &WeightCertificate,
    scope: &Scope,
    budgets: &Budgets,
) -> Result<ConvergenceReport> {
    let weight_report = verify_weight_certificate(system, certificate, scope)?;
    let termination = match weight_report.termination {
        TerminationStatus::Certified { exhaustive } => TerminationStatus::Certified { exhaustive },
        TerminationStatus::Unknown { reason } => {
            match find_cycle(system, scope, budgets.max_reduct_nodes.min(2_000))? {
                Some(cycle) => TerminationStatus::RefutedByCycle { cycle },
                None => TerminationStatus::Unknown { reason },
            }
        }
        refuted @ TerminationStatus::RefutedByCycle { .. } => refuted,
    };

    let confluence_report = check_local_confluence(system, scope, budgets)?;
    let local_confluence = confluence_report.local_confluence;

    let certificate_token = if termination.is_certified() && local_confluence.is_verified() {
        Some(ConvergenceCertificate {
            system_id: system.alphabet().id().to_owned(),
            scope: scope.description.clone(),
            weights: certificate.description().to_owned(),
        })
    } else {
        None
    };

    Ok(ConvergenceReport {
        termination,
        local_confluence,
        scope: scope.description.clone(),
        certificate: certificate_token,
    })
}
