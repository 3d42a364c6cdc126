//! Origami (square-tiled surface) graphs, monodromy and genus, and the
//! M-origami embedding count of an Adinkra.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::adinkra::Chromotopology;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Label {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrigamiEdge {
    pub from: usize,
    pub to: usize,
    pub label: Label,
}

/// A directed graph with x/y labelled edges on the squares `0..d`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrigamiGraph {
    pub d: usize,
    pub edges: Vec<OrigamiEdge>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DegreeCounts {
    pub out_x: usize,
    pub in_x: usize,
    pub out_y: usize,
    pub in_y: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum OrigamiWitness {
    EdgeOutOfRange { edge: usize },
    Degree { vertex: usize, counts: DegreeCounts },
    Disconnected { unreached: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrigamiValidation {
    pub degrees: Vec<DegreeCounts>,
    pub connected: bool,
    pub witnesses: Vec<OrigamiWitness>,
}

impl OrigamiValidation {
    pub fn is_valid(&self) -> bool {
        self.witnesses.is_empty()
    }
}

pub fn validate_origami_graph(g: &OrigamiGraph) -> OrigamiValidation {
    let mut degrees = vec![DegreeCounts::default(); g.d];
    let mut witnesses = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        if e.from >= g.d || e.to >= g.d {
            witnesses.push(OrigamiWitness::EdgeOutOfRange { edge: i });
            continue;
        }
        match e.label {
            Label::X => {
                degrees[e.from].out_x += 1;
                degrees[e.to].in_x += 1;
            }
            Label::Y => {
                degrees[e.from].out_y += 1;
                degrees[e.to].in_y += 1;
            }
        }
    }
    for (v, c) in degrees.iter().enumerate() {
        if (c.out_x, c.in_x, c.out_y, c.in_y) != (1, 1, 1, 1) {
            witnesses.push(OrigamiWitness::Degree { vertex: v, counts: *c });
        }
    }
    let mut adj = vec![Vec::new(); g.d];
    for e in g.edges.iter().filter(|e| e.from < g.d && e.to < g.d) {
        adj[e.from].push(e.to);
        adj[e.to].push(e.from);
    }
    let mut seen = vec![false; g.d];
    let mut stack = Vec::new();
    if g.d > 0 {
        seen[0] = true;
        stack.push(0);
    }
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    let unreached = seen.iter().filter(|s| !**s).count();
    let connected = g.d > 0 && unreached == 0;
    if !connected {
        witnesses.push(OrigamiWitness::Disconnected { unreached });
    }
    OrigamiValidation { degrees, connected, witnesses }
}

/// Permutation pair (σ_x, σ_y) on `0..d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monodromy {
    sigma_x: Vec<usize>,
    sigma_y: Vec<usize>,
}

pub fn check_permutation(p: &[usize], what: &str) -> Result<()> {
    let mut seen = vec![false; p.len()];
    for (i, &x) in p.iter().enumerate() {
        if x >= p.len() || seen[x] {
            return Err(Error::invalid("origami", format!("{what} is not a permutation (entry {i})")));
        }
        seen[x] = true;
    }
    Ok(())
}

pub fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

/// `(p ∘ q)(i) = p(q(i))`.
pub fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&i| p[i]).collect()
}

pub fn cycle_lengths(p: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
            len += 1;
        }
        out.push(len);
    }
    out
}

/// Whether the group generated by the permutations acts transitively.
pub fn is_transitive(perms: &[&[usize]], d: usize) -> bool {
    if d == 0 {
        return false;
    }
    let mut seen = vec![false; d];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(x) = stack.pop() {
        for p in perms {
            let y = p[x];
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.iter().all(|&s| s)
}

impl Monodromy {
    pub fn new(sigma_x: Vec<usize>, sigma_y: Vec<usize>) -> Result<Self> {
        if sigma_x.len() != sigma_y.len() || sigma_x.is_empty() {
            return Err(Error::invalid("origami", "σ_x and σ_y must be nonempty and of equal degree"));
        }
        check_permutation(&sigma_x, "σ_x")?;
        check_permutation(&sigma_y, "σ_y")?;
        if !is_transitive(&[&sigma_x, &sigma_y], sigma_x.len()) {
            return Err(Error::invalid("origami", "the monodromy group is not transitive"));
        }
        Ok(Monodromy { sigma_x, sigma_y })
    }

    /// Builds from 1-indexed image arrays.
    pub fn from_one_indexed(sx: &[usize], sy: &[usize]) -> Result<Self> {
        let shift = |p: &[usize]| -> Result<Vec<usize>> {
            p.iter()
                .map(|&x| x.checked_sub(1).ok_or_else(|| Error::invalid("origami", "entries are 1-indexed")))
                .collect()
        };
        Self::new(shift(sx)?, shift(sy)?)
    }

    pub fn degree(&self) -> usize {
        self.sigma_x.len()
    }

    pub fn sigma_x(&self) -> &[usize] {
        &self.sigma_x
    }

    pub fn sigma_y(&self) -> &[usize] {
        &self.sigma_y
    }

    pub fn one_indexed(&self) -> (Vec<usize>, Vec<usize>) {
        (self.sigma_x.iter().map(|x| x + 1).collect(), self.sigma_y.iter().map(|x| x + 1).collect())
    }

    /// σ_x σ_y σ_x⁻¹ σ_y⁻¹.
    pub fn commutator(&self) -> Vec<usize> {
        let xi = invert(&self.sigma_x);
        let yi = invert(&self.sigma_y);
        compose(&self.sigma_x, &compose(&self.sigma_y, &compose(&xi, &yi)))
    }

    /// Genus of the square-tiled surface: the corners are the cycles of the
    /// commutator, and V − 2d + d = 2 − 2g.
    pub fn genus(&self) -> usize {
        let v = cycle_lengths(&self.commutator()).len();
        1 + (self.degree() - v) / 2
    }

    /// Simultaneous relabelling `i ↦ relabel[i]`.
    pub fn conjugate(&self, relabel: &[usize]) -> Result<Self> {
        check_permutation(relabel, "relabelling")?;
        let inv = invert(relabel);
        let apply = |p: &[usize]| -> Vec<usize> { (0..p.len()).map(|i| relabel[p[inv[i]]]).collect() };
        Monodromy::new(apply(&self.sigma_x), apply(&self.sigma_y))
    }

    /// Canonical representative of the conjugacy class: the lexicographically
    /// smallest (σ_x, σ_y) among breadth-first relabellings from every square.
    pub fn canonical(&self) -> Self {
        let d = self.degree();
        let xi = invert(&self.sigma_x);
        let yi = invert(&self.sigma_y);
        let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
        for start in 0..d {
            let mut label = vec![usize::MAX; d];
            let mut queue = VecDeque::from([start]);
            label[start] = 0;
            let mut next = 1;
            while let Some(u) = queue.pop_front() {
                for w in [self.sigma_x[u], self.sigma_y[u], xi[u], yi[u]] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        next += 1;
                        queue.push_back(w);
                    }
                }
            }
            let inv = invert(&label);
            let sx: Vec<usize> = (0..d).map(|i| label[self.sigma_x[inv[i]]]).collect();
            let sy: Vec<usize> = (0..d).map(|i| label[self.sigma_y[inv[i]]]).collect();
            let cand = (sx, sy);
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
        let (sigma_x, sigma_y) = best.expect("degree is positive");
        Monodromy { sigma_x, sigma_y }
    }

    pub fn is_conjugate_to(&self, other: &Self) -> bool {
        self.degree() == other.degree() && self.canonical() == other.canonical()
    }
}

pub fn monodromy(g: &OrigamiGraph) -> Result<Monodromy> {
    let rep = validate_origami_graph(g);
    if !rep.is_valid() {
        return Err(Error::invalid("origami", format!("not an origami graph: {:?}", rep.witnesses[0])));
    }
    let mut sx = vec![0; g.d];
    let mut sy = vec![0; g.d];
    for e in &g.edges {
        match e.label {
            Label::X => sx[e.from] = e.to,
            Label::Y => sy[e.from] = e.to,
        }
    }
    Monodromy::new(sx, sy)
}

pub fn graph_from_monodromy(m: &Monodromy) -> OrigamiGraph {
    let mut edges = Vec::with_capacity(2 * m.degree());
    for u in 0..m.degree() {
        edges.push(OrigamiEdge { from: u, to: m.sigma_x[u], label: Label::X });
        edges.push(OrigamiEdge { from: u, to: m.sigma_y[u], label: Label::Y });
    }
    OrigamiGraph { d: m.degree(), edges }
}

/// The Adinkra with each edge replaced by two parallel copies; copy `b` of
/// edge `e` is doubled edge `2e + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DoubledGraph {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize, u32)>,
}

pub fn doubled_graph(a: &Chromotopology) -> DoubledGraph {
    let edges = a.edges().iter().flat_map(|e| [(e.u, e.v, e.color), (e.u, e.v, e.color)]).collect();
    DoubledGraph { vertex_count: a.vertex_count(), edges }
}

/// One choice of copy per original edge.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Embedding {
    pub choice: Vec<bool>,
}

impl Embedding {
    pub fn selected_edges(&self) -> Vec<usize> {
        self.choice.iter().enumerate().map(|(e, &b)| 2 * e + b as usize).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingMode {
    Count,
    Enumerate { limit: u64 },
    Sample { seed: u64, n: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingReport {
    pub count: BigUint,
    pub doubled: DoubledGraph,
    pub embeddings: Vec<Embedding>,
}

pub fn m_origami_embeddings(a: &Chromotopology, mode: EmbeddingMode) -> Result<EmbeddingReport> {
    let e = a.edge_count();
    let count = BigUint::from(1u32) << e;
    let doubled = doubled_graph(a);
    let embeddings = match mode {
        EmbeddingMode::Count => Vec::new(),
        EmbeddingMode::Enumerate { limit } => {
            if e >= 64 || (1u64 << e) > limit {
                return Err(Error::resource(
                    "origami",
                    format!("2^{e} embeddings exceed the enumeration limit {limit}; use sampling instead"),
                ));
            }
            (0..1u64 << e)
                .map(|m| Embedding { choice: (0..e).map(|i| m >> i & 1 == 1).collect() })
                .collect()
        }
        EmbeddingMode::Sample { seed, n } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| Embedding { choice: (0..e).map(|_| rng.next_u32() & 1 == 1).collect() }).collect()
        }
    };
    Ok(EmbeddingReport { count, doubled, embeddings })
}
