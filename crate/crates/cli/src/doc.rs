//! JSON documents the CLI reads and writes.
//!
//! A *system document* describes a rewrite system either explicitly —
//! letters, commutations, alphabetic rules, optional termination weights and
//! budgets — or by naming one of the built-in packs.  A *graph document* is
//! a vertex count plus an edge list.
//!
//! Parsing is strict: every token mentioned anywhere in a document must be a
//! declared letter, commutation pairs must relate two distinct letters, and a
//! rule's right-hand side must be a nonempty sequence of letters (rules map
//! into the trace monoid with the empty trace removed).  [`normalized`]
//! returns the document in canonical field order so that parse followed by
//! serialize is a stable round trip.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use tgrw_core::error::Result;
use tgrw_core::{
    arith_system, arith_weight_certificate, graph_system, graph_weight_certificate, pbw_system,
    pbw_weight_certificate, shuffle_system, shuffle_weight_certificate, weyl_system,
    weyl_weight_certificate, Budgets, Commutation, CommutationAlphabet, Error, Letter, Multigraph,
    RewriteSystem, Scope, WeightCertificate,
};

/// A rewrite system on disk: explicit tables or a named pack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemDocument {
    Pack(PackDocument),
    Explicit(ExplicitDocument),
}

/// A built-in system family selected by name, with optional parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackDocument {
    /// One of `weyl`, `pbw`, `graphs`, `arith`, `shuffle`.
    pub pack: String,
    #[serde(default, skip_serializing_if = "PackParams::is_default")]
    pub params: PackParams,
}

/// Pack parameters; each pack reads the fields it understands.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PackParams {
    /// Weyl only: adjoin the central generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub central: Option<bool>,
    /// PBW only: the ordered base alphabet (default `abc`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    /// Size bound for the letters a `check` enumerates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
}

impl PackParams {
    fn is_default(&self) -> bool {
        *self == PackParams::default()
    }
}

/// A fully spelled-out finite system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitDocument {
    /// The alphabet, in order; list position is the letter order.
    pub letters: Vec<String>,
    /// `"total"`, `"none"`, or an explicit list of commuting pairs.
    pub commutations: CommutationsDoc,
    #[serde(default)]
    pub rules: Vec<RuleDoc>,
    /// Termination weights, one positive integer per letter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<BTreeMap<String, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<BudgetsDoc>,
}

/// The commutation field: a keyword or explicit pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CommutationsDoc {
    Keyword(String),
    Pairs(Vec<(String, String)>),
}

/// One alphabetic rule; `rhs` is a trace as a token array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleDoc {
    pub lhs: String,
    pub rhs: Vec<String>,
}

/// Optional per-document budget overrides.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BudgetsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_reduct_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_trace_len: Option<usize>,
}

impl BudgetsDoc {
    /// Overlay the document's overrides on a base budget set.
    pub fn apply(&self, mut budgets: Budgets) -> Budgets {
        if let Some(v) = self.max_steps {
            budgets.max_steps = v;
        }
        if let Some(v) = self.max_reduct_nodes {
            budgets.max_reduct_nodes = v;
        }
        if let Some(v) = self.max_trace_len {
            budgets.max_trace_len = v;
        }
        budgets
    }
}

/// A multigraph on disk: `{"vertices": n, "edges": [[u, v], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: usize,
    #[serde(default)]
    pub edges: Vec<(usize, usize)>,
}

impl GraphDocument {
    pub fn to_multigraph(&self) -> Result<Multigraph> {
        Multigraph::new(self.vertices, self.edges.clone())
    }
}

/// Parse a system document from JSON text.
pub fn parse_system_document(text: &str) -> Result<SystemDocument> {
    serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("malformed system document: {e}")))
}

/// Parse a graph document from JSON text.
pub fn parse_graph_document(text: &str) -> Result<GraphDocument> {
    serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("malformed graph document: {e}")))
}

/// The canonical form of a document: commutation pairs are internally
/// ordered, sorted, and deduplicated; everything else keeps its order (the
/// letter list is ordered data, not a set).
pub fn normalized(doc: &SystemDocument) -> SystemDocument {
    match doc {
        SystemDocument::Pack(p) => SystemDocument::Pack(p.clone()),
        SystemDocument::Explicit(e) => {
            let mut out = e.clone();
            if let CommutationsDoc::Pairs(pairs) = &e.commutations {
                let mut canon: Vec<(String, String)> = pairs
                    .iter()
                    .map(|(a, b)| {
                        if a <= b {
                            (a.clone(), b.clone())
                        } else {
                            (b.clone(), a.clone())
                        }
                    })
                    .collect();
                canon.sort();
                canon.dedup();
                out.commutations = CommutationsDoc::Pairs(canon);
            }
            SystemDocument::Explicit(out)
        }
    }
}

/// The document's own budget block, if it has one.
pub fn document_budgets(doc: &SystemDocument) -> Option<BudgetsDoc> {
    match doc {
        SystemDocument::Explicit(e) => e.budgets,
        SystemDocument::Pack(_) => None,
    }
}

/// A document turned into a live system, with whatever check inputs the
/// document provides: termination weights and an enumerable check scope.
pub struct LoadedSystem {
    pub system: RewriteSystem,
    pub weights: Option<WeightCertificate>,
    pub scope: Option<Scope>,
    /// Letters to report for `irr`, in document (or enumeration) order.
    pub letters: Vec<Letter>,
}

/// Build the system a document describes.  `budgets` is the fully resolved
/// budget set (defaults, document, environment, and flags already merged).
pub fn load_system(doc: &SystemDocument, budgets: Budgets) -> Result<LoadedSystem> {
    match doc {
        SystemDocument::Explicit(e) => load_explicit(e, budgets),
        SystemDocument::Pack(p) => load_pack(p, budgets),
    }
}

fn load_explicit(doc: &ExplicitDocument, budgets: Budgets) -> Result<LoadedSystem> {
    if doc.letters.is_empty() {
        return Err(Error::InvalidInput("document declares no letters".into()));
    }
    let mut seen = BTreeSet::new();
    for letter in &doc.letters {
        if !seen.insert(letter.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate letter {letter:?}")));
        }
    }

    let commutation = match &doc.commutations {
        CommutationsDoc::Keyword(word) => match word.as_str() {
            "total" => Commutation::Total,
            "none" => Commutation::None,
            other => {
                return Err(Error::InvalidInput(format!(
                    "commutations must be \"total\", \"none\", or a pair list, got {other:?}"
                )))
            }
        },
        CommutationsDoc::Pairs(pairs) => {
            for (a, b) in pairs {
                if a == b {
                    return Err(Error::InvalidInput(format!(
                        "letter {a:?} cannot commute with itself"
                    )));
                }
                for token in [a, b] {
                    if !seen.contains(token.as_str()) {
                        return Err(Error::InvalidInput(format!(
                            "commutation pair mentions undeclared letter {token:?}"
                        )));
                    }
                }
            }
            Commutation::from_pairs(pairs.iter().map(|(a, b)| (a.clone(), b.clone())))
        }
    };

    let alphabet = CommutationAlphabet::finite(
        format!("doc:{}", doc.letters.join("|")),
        &doc.letters,
        commutation,
    );

    let mut rules = Vec::new();
    for rule in &doc.rules {
        if rule.rhs.is_empty() {
            return Err(Error::InvalidInput(
                "rules must map into S, not M".into(),
            ));
        }
        let rhs = alphabet.trace(&rule.rhs)?;
        rules.push((Letter::new(&rule.lhs), vec![rhs]));
    }
    let system = RewriteSystem::from_rule_list(alphabet.clone(), rules)?.with_budgets(budgets);

    let weights = match &doc.weights {
        None => None,
        Some(map) => {
            let mut table = BTreeMap::new();
            for (token, &weight) in map {
                if !seen.contains(token.as_str()) {
                    return Err(Error::InvalidInput(format!(
                        "weights mention undeclared letter {token:?}"
                    )));
                }
                table.insert(Letter::new(token), weight);
            }
            Some(WeightCertificate::from_map("document weights", table))
        }
    };

    let letters: Vec<Letter> = doc.letters.iter().map(Letter::new).collect();
    let scope = Scope::new(letters.clone(), "all declared letters").exhaustive();
    Ok(LoadedSystem {
        system,
        weights,
        scope: Some(scope),
        letters,
    })
}

/// Letter-size bounds a pack check enumerates when the document does not say
/// otherwise: the first drives the weight and rule-peak legs, the second the
/// trace-level model check (kept smaller so checks stay fast).
fn pack_bounds(pack: &str) -> (usize, usize) {
    match pack {
        "graphs" => (4, 4),
        "arith" => (50, 12),
        _ => (4, 3),
    }
}

fn load_pack(doc: &PackDocument, budgets: Budgets) -> Result<LoadedSystem> {
    let params = &doc.params;
    let (system, weights) = match doc.pack.as_str() {
        "weyl" => (
            weyl_system(params.central.unwrap_or(false)),
            weyl_weight_certificate(),
        ),
        "pbw" => {
            let base = params.base.as_deref().unwrap_or("abc");
            (pbw_system(base)?, pbw_weight_certificate(base)?)
        }
        "graphs" => (graph_system(), graph_weight_certificate()),
        "arith" => (arith_system(), arith_weight_certificate()),
        "shuffle" => (shuffle_system(), shuffle_weight_certificate()),
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown pack {other:?}; expected weyl, pbw, graphs, arith, or shuffle"
            )))
        }
    };
    let system = system.with_budgets(budgets);

    let (default_bound, default_trace_bound) = pack_bounds(&doc.pack);
    let bound = params.bound.unwrap_or(default_bound);
    let trace_bound = bound.min(default_trace_bound);
    let scope = match system.alphabet().enumerate_up_to(bound) {
        None => None,
        Some(letters) => {
            let trace_letters = system
                .alphabet()
                .enumerate_up_to(trace_bound)
                .unwrap_or_else(|| letters.clone());
            let scope = Scope::new(letters, "").with_trace_letters(trace_letters);
            let scope = if trace_bound == bound {
                scope.exhaustive().described(format!(
                    "pack {}: letters of size <= {bound}, model check over all of them \
                     in traces of length <= 2",
                    doc.pack
                ))
            } else {
                scope.described(format!(
                    "pack {}: letters of size <= {bound}, model check over letters of size \
                     <= {trace_bound} in traces of length <= 2",
                    doc.pack
                ))
            };
            Some(scope)
        }
    };
    let letters = scope.as_ref().map(|s| s.letters.clone()).unwrap_or_default();
    Ok(LoadedSystem {
        system,
        weights: Some(weights),
        scope,
        letters,
    })
}
