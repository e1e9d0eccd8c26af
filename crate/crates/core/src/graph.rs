//! Multigraphs under deletion and contraction.
//!
//! Letters of the graph alphabet are canonical certificates of connected
//! multigraphs (loops and parallel edges allowed).  The alphabet is fully
//! commutative — a trace is a formal sum of graphs — and the rule replaces a
//! graph by the two-letter trace (G − e)·(G / e) at one canonical link e per
//! isomorphism class ([`deletion_contraction_rules`] lists the alternatives).
//! Irreducible graphs have only bridges and loops, and the universal
//! invariant of a graph, read through the monomial x^#bridges · y^#loops on
//! irreducibles, is its Tutte polynomial.
//!
//! Certificates are the minimum edge-list encoding over vertex relabelings,
//! with the search pruned by iterated degree refinement.  An independent
//! rank–nullity subset expansion ([`tutte_oracle`]) keeps the rewriting
//! honest.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use itertools::Itertools;

use crate::convergence::WeightCertificate;
use crate::error::{Error, Result};
use crate::poly::BivarPoly;
use crate::rewrite::RewriteSystem;
use crate::trace::{Commutation, CommutationAlphabet, Letter, Trace};

/// Largest vertex count for which certificates are computed.  The canonical
/// search is factorial in the worst case (highly symmetric graphs); the cap
/// keeps it from becoming an accidental denial of service.
pub const DEFAULT_VERTEX_CAP: usize = 10;

/// How an edge sits in its graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// Both endpoints equal.
    Loop,
    /// Deleting it increases the number of components.
    Bridge,
    /// Neither: the edge can be deleted and contracted.
    Link,
}

/// An undirected multigraph on vertices `0..n`.  Edges are stored normalized
/// (`u ≤ v`) and sorted, so structural equality is labeled-graph equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multigraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Multigraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("a graph needs at least one vertex".into()));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) out of range for {} vertices",
                    u, v, n
                )));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        Ok(Multigraph { n, edges: normalized })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of connected components (isolated vertices count).
    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut Vec<usize>, mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        let mut count = self.n;
        for &(u, v) in &self.edges {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru] = rv;
                count -= 1;
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.components() == 1
    }

    /// Apply a vertex relabeling (`perm[v]` is the new name of `v`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Multigraph> {
        if perm.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "relabeling has {} entries for {} vertices",
                perm.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || seen[p] {
                return Err(Error::InvalidInput("relabeling is not a permutation".into()));
            }
            seen[p] = true;
        }
        Multigraph::new(
            self.n,
            self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect(),
        )
    }

    /// Classify the edge at `index`.
    pub fn edge_classify(&self, index: usize) -> Result<EdgeKind> {
        let &(u, v) = self.edges.get(index).ok_or_else(|| {
            Error::InvalidInput(format!("no edge at index {}", index))
        })?;
        if u == v {
            return Ok(EdgeKind::Loop);
        }
        if self.delete_edge(index)?.components() > self.components() {
            Ok(EdgeKind::Bridge)
        } else {
            Ok(EdgeKind::Link)
        }
    }

    /// Remove one edge, keeping all vertices.
    pub fn delete_edge(&self, index: usize) -> Result<Multigraph> {
        if index >= self.edges.len() {
            return Err(Error::InvalidInput(format!("no edge at index {}", index)));
        }
        let mut edges = self.edges.clone();
        edges.remove(index);
        Multigraph::new(self.n, edges)
    }

    /// Contract a non-loop edge: merge its endpoints (other parallel copies
    /// become loops) and compact the vertex names.
    pub fn contract_edge(&self, index: usize) -> Result<Multigraph> {
        let &(u, v) = self.edges.get(index).ok_or_else(|| {
            Error::InvalidInput(format!("no edge at index {}", index))
        })?;
        if u == v {
            return Err(Error::InvalidInput("cannot contract a loop".into()));
        }
        // u < v by normalization: fold v into u, then shift names above v.
        let rename = |w: usize| -> usize {
            let w = if w == v { u } else { w };
            if w > v {
                w - 1
            } else {
                w
            }
        };
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != index)
            .map(|(_, &(a, b))| (rename(a), rename(b)))
            .collect();
        Multigraph::new(self.n - 1, edges)
    }

    /// Iterated degree refinement: partition vertices into classes that any
    /// isomorphism must respect.  Classes come back in a canonical order
    /// (initial key: degree with loops counted twice, then loop count;
    /// refined by the multiset of neighbor classes).
    fn refinement_classes(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut degree = vec![0usize; n];
        let mut loops = vec![0usize; n];
        for &(u, v) in &self.edges {
            if u == v {
                loops[u] += 1;
                degree[u] += 2;
            } else {
                degree[u] += 1;
                degree[v] += 1;
            }
        }
        let initial: Vec<(usize, usize)> = (0..n).map(|v| (degree[v], loops[v])).collect();
        let mut keys: Vec<(usize, usize)> = initial.clone();
        keys.sort_unstable();
        keys.dedup();
        let mut color: Vec<usize> = initial
            .iter()
            .map(|k| keys.binary_search(k).expect("own key"))
            .collect();
        let mut distinct = keys.len();

        loop {
            let mut signatures: Vec<(usize, Vec<usize>)> = (0..n).map(|v| (color[v], Vec::new())).collect();
            for &(u, v) in &self.edges {
                if u != v {
                    signatures[u].1.push(color[v]);
                    signatures[v].1.push(color[u]);
                }
            }
            for sig in &mut signatures {
                sig.1.sort_unstable();
            }
            let mut sig_keys = signatures.clone();
            sig_keys.sort_unstable();
            sig_keys.dedup();
            if sig_keys.len() == distinct {
                break;
            }
            distinct = sig_keys.len();
            color = signatures
                .iter()
                .map(|s| sig_keys.binary_search(s).expect("own signature"))
                .collect();
        }

        let mut classes: Vec<Vec<usize>> = vec![Vec::new(); distinct];
        for v in 0..n {
            classes[color[v]].push(v);
        }
        classes
    }

    /// The canonical certificate: `g{n}:` followed by the minimum relabeled
    /// edge list over all permutations compatible with the refinement
    /// classes.  Equal certificates ⇔ isomorphic multigraphs.
    pub fn certificate(&self) -> Result<String> {
        if self.n > DEFAULT_VERTEX_CAP {
            return Err(Error::ResourceExceeded(format!(
                "certificate computation is capped at {} vertices (graph has {})",
                DEFAULT_VERTEX_CAP, self.n
            )));
        }
        let classes = self.refinement_classes();
        let mut best: Option<Vec<(usize, usize)>> = None;
        let mut label = vec![0usize; self.n];
        for assignment in classes
            .iter()
            .map(|class| class.iter().copied().permutations(class.len()))
            .multi_cartesian_product()
        {
            let mut next = 0usize;
            for class_order in &assignment {
                for &old in class_order {
                    label[old] = next;
                    next += 1;
                }
            }
            let mut edges: Vec<(usize, usize)> = self
                .edges
                .iter()
                .map(|&(u, v)| {
                    let (a, b) = (label[u], label[v]);
                    (a.min(b), a.max(b))
                })
                .collect();
            edges.sort_unstable();
            if best.as_ref().map_or(true, |b| edges < *b) {
                best = Some(edges);
            }
        }
        let edges = best.unwrap_or_default();
        let body = edges
            .iter()
            .map(|(u, v)| format!("{}-{}", u, v))
            .collect::<Vec<_>>()
            .join(",");
        Ok(format!("g{}:{}", self.n, body))
    }

    /// Parse a certificate-shaped string back into a labeled multigraph.
    /// Accepts any valid encoding, canonical or not.
    pub fn parse_certificate(token: &str) -> Result<Multigraph> {
        let rest = token
            .strip_prefix('g')
            .ok_or_else(|| Error::InvalidInput(format!("graph token must start with 'g': {:?}", token)))?;
        let (n_part, edge_part) = rest
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("graph token needs a ':': {:?}", token)))?;
        let n: usize = n_part
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad vertex count in {:?}", token)))?;
        let mut edges = Vec::new();
        if !edge_part.is_empty() {
            for pair in edge_part.split(',') {
                let (u, v) = pair
                    .split_once('-')
                    .ok_or_else(|| Error::InvalidInput(format!("bad edge {:?} in {:?}", pair, token)))?;
                let u: usize = u
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad endpoint in {:?}", token)))?;
                let v: usize = v
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad endpoint in {:?}", token)))?;
                edges.push((u, v));
            }
        }
        Multigraph::new(n, edges)
    }

    /// Bridge and loop counts, the exponents of an irreducible graph's
    /// monomial.
    pub fn bridge_and_loop_counts(&self) -> (usize, usize) {
        let mut bridges = 0;
        let mut loops = 0;
        for index in 0..self.edges.len() {
            match self.edge_classify(index).expect("index in range") {
                EdgeKind::Bridge => bridges += 1,
                EdgeKind::Loop => loops += 1,
                EdgeKind::Link => {}
            }
        }
        (bridges, loops)
    }
}

fn certificate_memo() -> &'static Mutex<HashMap<String, bool>> {
    static MEMO: OnceLock<Mutex<HashMap<String, bool>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Is this token the canonical certificate of a *connected* multigraph?
/// This is the letter-validity predicate of the graph alphabet; results are
/// memoized because recanonicalization is the expensive part.
fn is_graph_letter(token: &str) -> bool {
    if let Some(&hit) = certificate_memo().lock().expect("memo lock").get(token) {
        return hit;
    }
    let value = Multigraph::parse_certificate(token)
        .ok()
        .filter(|g| g.is_connected())
        .and_then(|g| g.certificate().ok().map(|c| c == token))
        .unwrap_or(false);
    certificate_memo()
        .lock()
        .expect("memo lock")
        .insert(token.to_owned(), value);
    value
}

/// All connected multigraphs with at most `max_vertices` vertices and
/// `max_edges` edges, one representative per isomorphism class, sorted by
/// certificate.
pub fn enumerate_connected_multigraphs(
    max_vertices: usize,
    max_edges: usize,
) -> Result<Vec<Multigraph>> {
    if max_vertices > DEFAULT_VERTEX_CAP {
        return Err(Error::ResourceExceeded(format!(
            "enumeration is capped at {} vertices",
            DEFAULT_VERTEX_CAP
        )));
    }
    let mut certs: BTreeSet<String> = BTreeSet::new();
    for n in 1..=max_vertices {
        let mut slots: Vec<(usize, usize)> = Vec::new();
        for u in 0..n {
            for v in u..n {
                slots.push((u, v));
            }
        }
        // Connectivity needs at least n − 1 edges.
        for m in n.saturating_sub(1)..=max_edges {
            for combo in (0..slots.len()).combinations_with_replacement(m) {
                let edges: Vec<(usize, usize)> = combo.iter().map(|&i| slots[i]).collect();
                let graph = Multigraph::new(n, edges)?;
                if graph.is_connected() {
                    certs.insert(graph.certificate()?);
                }
            }
        }
    }
    certs
        .into_iter()
        .map(|c| Multigraph::parse_certificate(&c))
        .collect()
}

/// The right-hand sides of the deletion/contraction rule for one graph
/// letter: the two-letter trace (G − e)·(G / e) for each link e, deduplicated.
///
/// This lists every decomposition site.  The rewrite system itself uses only
/// the canonical one ([`canonical_decomposition`]): different sites always
/// yield the same polynomial, but they can strand non-isomorphic bridge–loop
/// graphs, so a multi-site rule set has no unique normal forms.
pub fn deletion_contraction_rules(
    alphabet: &Arc<CommutationAlphabet>,
    letter: &Letter,
) -> Result<Vec<Trace>> {
    let graph = Multigraph::parse_certificate(letter.as_str())?;
    let mut out: Vec<Trace> = Vec::new();
    let mut seen: BTreeSet<Trace> = BTreeSet::new();
    for index in 0..graph.edge_count() {
        if graph.edge_classify(index)? != EdgeKind::Link {
            continue;
        }
        let deleted = graph.delete_edge(index)?.certificate()?;
        let contracted = graph.contract_edge(index)?.certificate()?;
        let rhs = alphabet.trace(&[deleted, contracted])?;
        if seen.insert(rhs.clone()) {
            out.push(rhs);
        }
    }
    Ok(out)
}

/// The single rule the rewrite system applies to one graph letter: the
/// deletion/contraction pair at the first link in certificate edge order
/// (empty for bridge/loop-only letters).
///
/// Committing to one site per isomorphism class is what makes normal forms
/// unique.  A triangle with a loop is the smallest witness that the site
/// matters: decomposing at the loop-opposite link leaves a path with its
/// loop on the middle vertex, decomposing at either other link leaves the
/// loop on an end vertex, and the two paths are not isomorphic.  Every site
/// still produces the same bridge/loop monomial sum, which is why the
/// polynomial — unlike the multiset — never depends on the choice.
pub fn canonical_decomposition(
    alphabet: &Arc<CommutationAlphabet>,
    letter: &Letter,
) -> Result<Vec<Trace>> {
    let graph = Multigraph::parse_certificate(letter.as_str())?;
    for index in 0..graph.edge_count() {
        if graph.edge_classify(index)? != EdgeKind::Link {
            continue;
        }
        let deleted = graph.delete_edge(index)?.certificate()?;
        let contracted = graph.contract_edge(index)?.certificate()?;
        return Ok(vec![alphabet.trace(&[deleted, contracted])?]);
    }
    Ok(Vec::new())
}

/// The deletion/contraction rewrite system.  Letters are certificates of
/// connected multigraphs, every pair of distinct letters commutes (traces are
/// formal sums), and the enumerator bound is an edge count.
pub fn graph_system() -> RewriteSystem {
    let alphabet = CommutationAlphabet::new(
        "graphs",
        is_graph_letter,
        |x, y| x.cmp(y),
        Commutation::Total,
    )
    .with_enumerator(|bound| {
        let max_vertices = (bound + 1).min(DEFAULT_VERTEX_CAP);
        enumerate_connected_multigraphs(max_vertices, bound)
            .unwrap_or_default()
            .iter()
            .filter_map(|g| g.certificate().ok().map(Letter::from))
            .collect()
    });
    let rule_alphabet = alphabet.clone();
    RewriteSystem::new(alphabet, move |letter| {
        canonical_decomposition(&rule_alphabet, letter)
    })
}

/// Termination weights for deletion/contraction: one plus the edge count.
/// Both rule targets of a graph with m edges have m − 1.
pub fn graph_weight_certificate() -> WeightCertificate {
    WeightCertificate::new("1 + edge count", |letter| {
        Multigraph::parse_certificate(letter.as_str())
            .ok()
            .map(|g| 1 + g.edge_count() as u64)
    })
}

/// Memoized deletion/contraction evaluator.
///
/// Computes the multiset normal form N(G) = N(G − e) ⊎ N(G / e) directly on
/// graphs, caching by certificate.  Each step decomposes the canonical
/// representative at the same site as [`canonical_decomposition`], so this
/// is the fast path for — and agrees exactly with — normalizing the
/// one-letter trace in [`graph_system`].
pub struct TutteEngine {
    memo: HashMap<String, Arc<HashMap<String, usize>>>,
}

impl Default for TutteEngine {
    fn default() -> Self {
        TutteEngine::new()
    }
}

impl TutteEngine {
    pub fn new() -> Self {
        TutteEngine { memo: HashMap::new() }
    }

    /// The normal-form multiset of irreducible certificates for `graph`.
    pub fn normal_form(&mut self, graph: &Multigraph) -> Result<Arc<HashMap<String, usize>>> {
        let cert = graph.certificate()?;
        if let Some(hit) = self.memo.get(&cert) {
            return Ok(hit.clone());
        }
        // Relabeling changes which link comes first; decompose the canonical
        // representative so the site is a function of the isomorphism class.
        let graph = &Multigraph::parse_certificate(&cert)?;
        let first_link = (0..graph.edge_count())
            .find(|&i| matches!(graph.edge_classify(i), Ok(EdgeKind::Link)));
        let result: HashMap<String, usize> = match first_link {
            None => {
                let mut leaf = HashMap::new();
                leaf.insert(cert.clone(), 1);
                leaf
            }
            Some(index) => {
                let deleted = self.normal_form(&graph.delete_edge(index)?)?;
                let contracted = self.normal_form(&graph.contract_edge(index)?)?;
                let mut sum: HashMap<String, usize> = (*deleted).clone();
                for (piece, count) in contracted.iter() {
                    *sum.entry(piece.clone()).or_insert(0) += count;
                }
                sum
            }
        };
        let result = Arc::new(result);
        self.memo.insert(cert, result.clone());
        Ok(result)
    }

    /// The Tutte polynomial: sum the monomial x^#bridges · y^#loops over the
    /// normal form.
    pub fn tutte(&mut self, graph: &Multigraph) -> Result<BivarPoly> {
        let normal_form = self.normal_form(graph)?;
        let mut total = BivarPoly::zero();
        for (cert, &count) in normal_form.iter() {
            let piece = Multigraph::parse_certificate(cert)?;
            let (bridges, loops) = piece.bridge_and_loop_counts();
            total = &total + &BivarPoly::monomial(bridges as u32, loops as u32, count as i64);
        }
        Ok(total)
    }
}

/// The Tutte polynomial by deletion/contraction (fresh engine per call; reuse
/// a [`TutteEngine`] for batches).
pub fn tutte_polynomial(graph: &Multigraph) -> Result<BivarPoly> {
    TutteEngine::new().tutte(graph)
}

/// Independent check: the rank–nullity subset expansion
/// T(G) = Σ_{A ⊆ E} (x − 1)^{r(E) − r(A)} (y − 1)^{|A| − r(A)}
/// with r(A) = n − c(V, A).  Exponential in the edge count, so capped.
pub fn tutte_oracle(graph: &Multigraph) -> Result<BivarPoly> {
    let m = graph.edge_count();
    if m > 20 {
        return Err(Error::ResourceExceeded(format!(
            "subset expansion over {} edges (2^{} subsets) exceeds the cap of 20",
            m, m
        )));
    }
    let n = graph.vertex_count();
    let x_minus_1 = &BivarPoly::x() - &BivarPoly::one();
    let y_minus_1 = &BivarPoly::y() - &BivarPoly::one();
    let full_rank = n - graph.components();
    let mut total = BivarPoly::zero();
    for mask in 0u64..(1u64 << m) {
        let edges: Vec<(usize, usize)> = graph
            .edges()
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let size = edges.len();
        let sub = Multigraph::new(n, edges)?;
        let rank = n - sub.components();
        let term = &x_minus_1.pow((full_rank - rank) as u32) * &y_minus_1.pow((size - rank) as u32);
        total = &total + &term;
    }
    Ok(total)
}
