//! Chromotopologies, rankings, dashings and their equivalence classes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::codes::{color_bit, format_word, weight, BinaryCode};
use crate::error::{Error, Result};
use crate::gf2::{affine_particular_solution, affine_solution_exponent, BitVec, Gf2Basis};

/// Exhaustive dashing enumeration is allowed up to this many edges.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Parity {
    Boson,
    Fermion,
}

impl Parity {
    pub fn of(h: i64) -> Parity {
        if h.rem_euclid(2) == 0 {
            Parity::Boson
        } else {
            Parity::Fermion
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub color: u32,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }
}

/// An edge-colored graph with a boson/fermion bipartition.
///
/// Construction only checks that indices are in range; the chromotopology
/// axioms are checked by [`validate_chromotopology`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chromotopology {
    labels: Vec<u64>,
    colors: Vec<u32>,
    edges: Vec<Edge>,
    bipartition: Vec<Parity>,
    code: Option<BinaryCode>,
    incident: Vec<Vec<usize>>,
}

impl Chromotopology {
    pub fn from_parts(
        labels: Vec<u64>,
        colors: Vec<u32>,
        edges: Vec<Edge>,
        bipartition: Vec<Parity>,
    ) -> Result<Self> {
        let nv = labels.len();
        if bipartition.len() != nv {
            return Err(Error::invalid(
                "adinkra",
                format!("bipartition has {} entries for {nv} vertices", bipartition.len()),
            ));
        }
        let mut sorted = colors.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != colors.len() {
            return Err(Error::invalid("adinkra", "color alphabet has repeated entries"));
        }
        let mut incident = vec![Vec::new(); nv];
        for (i, e) in edges.iter().enumerate() {
            if e.u >= nv || e.v >= nv {
                return Err(Error::invalid("adinkra", format!("edge {i} references a vertex outside 0..{nv}")));
            }
            incident[e.u].push(i);
            if e.v != e.u {
                incident[e.v].push(i);
            }
        }
        Ok(Chromotopology { labels, colors: sorted, edges, bipartition, code: None, incident })
    }

    pub fn with_code(mut self, code: BinaryCode) -> Self {
        self.code = Some(code);
        self
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn bipartition(&self) -> &[Parity] {
        &self.bipartition
    }

    pub fn code(&self) -> Option<&BinaryCode> {
        self.code.as_ref()
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn edge_of_color(&self, v: usize, color: u32) -> Option<usize> {
        self.incident[v].iter().copied().find(|&e| self.edges[e].color == color)
    }

    pub fn is_boson(&self, v: usize) -> bool {
        self.bipartition[v] == Parity::Boson
    }

    /// Same graph with every color `c` replaced by `c + offset`.
    pub fn shift_colors(&self, offset: u32) -> Self {
        let mut out = self.clone();
        for c in out.colors.iter_mut() {
            *c += offset;
        }
        for e in out.edges.iter_mut() {
            e.color += offset;
        }
        out
    }

    /// Connected components as a vertex → component index map, plus the count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let nv = self.vertex_count();
        let mut comp = vec![usize::MAX; nv];
        let mut count = 0;
        for s in 0..nv {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp[s] = count;
            while let Some(x) = stack.pop() {
                for &e in &self.incident[x] {
                    let y = self.edges[e].other(x);
                    if comp[y] == usize::MAX {
                        comp[y] = count;
                        stack.push(y);
                    }
                }
            }
            count += 1;
        }
        (comp, count)
    }

    pub fn vertex_label_string(&self, v: usize) -> String {
        match &self.code {
            Some(c) => format_word(self.labels[v], c.length()),
            None => format!("{}", self.labels[v]),
        }
    }
}

/// Builds the quotient A_N / L.
///
/// Vertices are the cosets of the code, labelled by their smallest member,
/// and there is an edge of color `c` between `[v]` and `[v + e_c]`.
pub fn build_quotient(n: u32, code: &BinaryCode) -> Result<Chromotopology> {
    if code.length() != n {
        return Err(Error::invalid("adinkra", format!("code length {} differs from N = {n}", code.length())));
    }
    let words = code.codewords()?;
    if let Some(&w) = words.iter().find(|&&w| weight(w) == 1) {
        return Err(Error::invalid(
            "adinkra",
            format!("loop: codeword {} has weight 1", format_word(w, n)),
        ));
    }
    if let Some(&w) = words.iter().find(|&&w| weight(w) == 2) {
        return Err(Error::invalid(
            "adinkra",
            format!("parallel edge: codeword {} has weight 2", format_word(w, n)),
        ));
    }
    let reps = code.coset_representatives()?;
    let index: BTreeMap<u64, usize> = reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut edges = Vec::with_capacity(reps.len() * n as usize / 2);
    for (i, &r) in reps.iter().enumerate() {
        for c in 1..=n {
            let j = index[&code.coset_min(r ^ color_bit(n, c))];
            if i < j {
                edges.push(Edge { u: i, v: j, color: c });
            }
        }
    }
    let bipartition = reps.iter().map(|&r| Parity::of(weight(r) as i64)).collect();
    Ok(Chromotopology::from_parts(reps, (1..=n).collect(), edges, bipartition)?.with_code(code.clone()))
}

/// The full N-cube A_N.
pub fn cube(n: u32) -> Result<Chromotopology> {
    build_quotient(n, &BinaryCode::trivial(n)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Axiom {
    ColorsInAlphabet,
    NoLoops,
    NoParallelEdges,
    OneEdgePerColor,
    Bipartite,
    TwoColorFourCycles,
    Connected,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Witness {
    Edge { edge: usize },
    EdgePair { first: usize, second: usize },
    VertexColor { vertex: usize, color: u32, count: usize },
    Walk { colors: (u32, u32), vertices: Vec<usize> },
    Components { count: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub passed: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    /// True when every chromotopology axiom holds. Connectivity is reported
    /// separately and does not enter this verdict.
    pub fn is_chromotopology(&self) -> bool {
        self.checks.iter().filter(|c| c.axiom != Axiom::Connected).all(|c| c.passed)
    }

    pub fn check(&self, axiom: Axiom) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn check(axiom: Axiom, witness: Option<Witness>) -> AxiomCheck {
    AxiomCheck { axiom, passed: witness.is_none(), witness }
}

pub fn validate_chromotopology(g: &Chromotopology) -> ValidationReport {
    let alphabet: BTreeSet<u32> = g.colors.iter().copied().collect();
    let mut checks = Vec::new();

    let bad_color = g.edges.iter().position(|e| !alphabet.contains(&e.color));
    checks.push(check(Axiom::ColorsInAlphabet, bad_color.map(|edge| Witness::Edge { edge })));

    let lp = g.edges.iter().position(|e| e.u == e.v);
    checks.push(check(Axiom::NoLoops, lp.map(|edge| Witness::Edge { edge })));

    let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut parallel = None;
    for (i, e) in g.edges.iter().enumerate() {
        let key = (e.u.min(e.v), e.u.max(e.v));
        if let Some(&first) = seen.get(&key) {
            parallel = Some(Witness::EdgePair { first, second: i });
            break;
        }
        seen.insert(key, i);
    }
    checks.push(check(Axiom::NoParallelEdges, parallel));

    let mut per_color = None;
    'outer: for v in 0..g.vertex_count() {
        for &c in &g.colors {
            let count = g.incident[v].iter().filter(|&&e| g.edges[e].color == c).count();
            if count != 1 {
                per_color = Some(Witness::VertexColor { vertex: v, color: c, count });
                break 'outer;
            }
        }
    }
    let per_color_ok = per_color.is_none();
    checks.push(check(Axiom::OneEdgePerColor, per_color));

    let cross = g.edges.iter().position(|e| g.bipartition[e.u] == g.bipartition[e.v]);
    checks.push(check(Axiom::Bipartite, cross.map(|edge| Witness::Edge { edge })));

    let mut cycle = None;
    if per_color_ok {
        'pairs: for (ai, &a) in g.colors.iter().enumerate() {
            for &b in &g.colors[ai + 1..] {
                for v in 0..g.vertex_count() {
                    let walk = walk_colors(g, v, &[a, b, a, b]);
                    let ok = walk.len() == 5
                        && walk[4] == v
                        && walk[..4].iter().collect::<BTreeSet<_>>().len() == 4;
                    if !ok {
                        cycle = Some(Witness::Walk { colors: (a, b), vertices: walk });
                        break 'pairs;
                    }
                }
            }
        }
    } else {
        cycle = Some(Witness::Walk { colors: (0, 0), vertices: Vec::new() });
    }
    checks.push(check(Axiom::TwoColorFourCycles, cycle));

    let (_, count) = g.components();
    let conn = if count <= 1 { None } else { Some(Witness::Components { count }) };
    checks.push(check(Axiom::Connected, conn));

    ValidationReport { checks }
}

/// Vertices visited following the given colors from `start`; stops early at
/// a missing edge.
fn walk_colors(g: &Chromotopology, start: usize, colors: &[u32]) -> Vec<usize> {
    let mut out = vec![start];
    let mut x = start;
    for &c in colors {
        match g.edge_of_color(x, c) {
            Some(e) => {
                x = g.edges[e].other(x);
                out.push(x);
            }
            None => break,
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ranking {
    pub h: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankingCheck {
    pub parity_ok: bool,
    pub unit_steps_ok: bool,
    pub parity_witness: Option<usize>,
    pub step_witness: Option<usize>,
}

impl RankingCheck {
    pub fn is_valid(&self) -> bool {
        self.parity_ok && self.unit_steps_ok
    }
}

pub fn check_ranking(g: &Chromotopology, r: &Ranking) -> Result<RankingCheck> {
    if r.h.len() != g.vertex_count() {
        return Err(Error::invalid("adinkra", "ranking length differs from the vertex count"));
    }
    let parity_witness = (0..g.vertex_count()).find(|&v| Parity::of(r.h[v]) != g.bipartition[v]);
    let step_witness = g.edges.iter().position(|e| (r.h[e.u] - r.h[e.v]).abs() != 1);
    Ok(RankingCheck {
        parity_ok: parity_witness.is_none(),
        unit_steps_ok: step_witness.is_none(),
        parity_witness,
        step_witness,
    })
}

/// Hamming-weight ranking of a quotient Adinkra.
///
/// Each vertex is ranked by the smallest weight found in its coset, which is
/// its graph distance from the coset of zero.
pub fn default_ranking(g: &Chromotopology) -> Result<Ranking> {
    let h: Vec<i64> = match g.code() {
        Some(code) => g.labels.iter().map(|&l| code.coset_min_weight(l) as i64).collect(),
        None => g.labels.iter().map(|&l| weight(l) as i64).collect(),
    };
    let r = Ranking { h };
    let chk = check_ranking(g, &r)?;
    if let Some(v) = chk.parity_witness {
        return Err(Error::invalid(
            "adinkra",
            format!(
                "bipartition inconsistency: vertex {v} ({}) has weight {} but is a {:?}",
                g.vertex_label_string(v),
                r.h[v],
                g.bipartition[v]
            ),
        ));
    }
    if let Some(e) = g.edges.iter().position(|e| g.bipartition[e.u] == g.bipartition[e.v]) {
        return Err(Error::invalid(
            "adinkra",
            format!("bipartition inconsistency: edge {e} joins two vertices of equal parity"),
        ));
    }
    Ok(r)
}

/// A face: a closed walk of four edges with alternating colors.
///
/// `edges[i]` joins `vertices[i]` and `vertices[(i + 1) % 4]`; this stored
/// order is the face's counterclockwise orientation.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Face {
    pub colors: (u32, u32),
    pub vertices: [usize; 4],
    pub edges: [usize; 4],
}

/// Faces traced by the walks (a, b, a, b) from each boson, for each
/// listed color pair, deduplicated within a pair.
pub fn colored_faces(g: &Chromotopology, pairs: &[(u32, u32)]) -> Result<Vec<Face>> {
    let mut out = Vec::new();
    for &(a, b) in pairs {
        let mut seen: BTreeSet<[usize; 4]> = BTreeSet::new();
        for v in (0..g.vertex_count()).filter(|&v| g.is_boson(v)) {
            let mut vertices = [0usize; 4];
            let mut edges = [0usize; 4];
            let mut x = v;
            for (k, &c) in [a, b, a, b].iter().enumerate() {
                let e = g.edge_of_color(x, c).ok_or_else(|| {
                    Error::invalid("adinkra", format!("vertex {x} has no edge of color {c}"))
                })?;
                vertices[k] = x;
                edges[k] = e;
                x = g.edges[e].other(x);
            }
            if x != v {
                return Err(Error::invalid(
                    "adinkra",
                    format!("the ({a}, {b}) walk from vertex {v} does not close after four steps"),
                ));
            }
            let mut key = edges;
            key.sort_unstable();
            if seen.insert(key) {
                out.push(Face { colors: (a, b), vertices, edges });
            }
        }
    }
    Ok(out)
}

/// Every 2-colored 4-cycle of the graph.
pub fn two_colored_cycles(g: &Chromotopology) -> Result<Vec<Face>> {
    let mut pairs = Vec::new();
    for (i, &a) in g.colors.iter().enumerate() {
        for &b in &g.colors[i + 1..] {
            pairs.push((a, b));
        }
    }
    colored_faces(g, &pairs)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dashing {
    pub bits: BitVec,
}

impl Dashing {
    pub fn solid(edge_count: usize) -> Self {
        Dashing { bits: BitVec::zeros(edge_count) }
    }

    pub fn from_mask(edge_count: usize, mask: u64) -> Self {
        Dashing { bits: BitVec::from_mask(edge_count, mask) }
    }

    pub fn from_flags(flags: &[bool]) -> Self {
        Dashing { bits: BitVec::from_indices(flags.len(), flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i)) }
    }

    pub fn is_dashed(&self, e: usize) -> bool {
        self.bits.get(e)
    }

    pub fn flags(&self) -> Vec<bool> {
        (0..self.bits.len()).map(|e| self.bits.get(e)).collect()
    }

    pub fn dashed_count(&self) -> usize {
        self.bits.count_ones()
    }
}

fn check_faces(g: &Chromotopology, faces: &[Face]) -> Result<()> {
    for (i, f) in faces.iter().enumerate() {
        for (k, &e) in f.edges.iter().enumerate() {
            if e >= g.edge_count() {
                return Err(Error::invalid("adinkra", format!("face {i} references missing edge {e}")));
            }
            let (a, b) = (f.vertices[k], f.vertices[(k + 1) % 4]);
            let edge = &g.edges[e];
            if !(edge.touches(a) && edge.other(a) == b) {
                return Err(Error::invalid(
                    "adinkra",
                    format!("face {i}: edge {e} does not join vertices {a} and {b}"),
                ));
            }
        }
    }
    Ok(())
}

fn check_dashing(g: &Chromotopology, d: &Dashing) -> Result<()> {
    if d.bits.len() != g.edge_count() {
        return Err(Error::invalid(
            "adinkra",
            format!("dashing covers {} edges, graph has {}", d.bits.len(), g.edge_count()),
        ));
    }
    Ok(())
}

/// True iff every listed face carries an odd number of dashed edges.
pub fn well_dashed(g: &Chromotopology, faces: &[Face], d: &Dashing) -> Result<bool> {
    check_faces(g, faces)?;
    check_dashing(g, d)?;
    Ok(faces.iter().all(|f| d.bits.parity_on(&f.edges)))
}

pub fn vertex_change(g: &Chromotopology, d: &Dashing, v: usize) -> Result<Dashing> {
    check_dashing(g, d)?;
    if v >= g.vertex_count() {
        return Err(Error::invalid("adinkra", format!("unknown vertex {v}")));
    }
    let mut out = d.clone();
    for &e in g.incident(v) {
        out.bits.flip(e);
    }
    Ok(out)
}

/// Canonical identifier of a dashing's vertex-change class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DashingClass(pub BitVec);

/// The GF(2) span of the vertex-change vectors of a graph.
#[derive(Clone, Debug)]
pub struct VertexChangeSpace {
    basis: Gf2Basis,
}

impl VertexChangeSpace {
    pub fn new(g: &Chromotopology) -> Self {
        let mut basis = Gf2Basis::new(g.edge_count());
        for v in 0..g.vertex_count() {
            basis.insert(&BitVec::from_indices(g.edge_count(), g.incident(v).iter().copied()));
        }
        VertexChangeSpace { basis }
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn class_of(&self, d: &Dashing) -> DashingClass {
        DashingClass(self.basis.reduce(&d.bits))
    }

    pub fn equivalent(&self, a: &Dashing, b: &Dashing) -> bool {
        let mut x = a.bits.clone();
        x.xor_assign(&b.bits);
        self.basis.contains(&x)
    }
}

pub fn dashing_class(g: &Chromotopology, d: &Dashing) -> Result<DashingClass> {
    check_dashing(g, d)?;
    Ok(VertexChangeSpace::new(g).class_of(d))
}

/// Counts obtained by linear algebra rather than enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DashingSpaceSummary {
    pub edge_count: usize,
    pub vertex_change_rank: usize,
    /// log2 of the number of well-dashings, `None` when there are none.
    pub well_dashed_log2: Option<usize>,
    /// log2 of the number of well-dashed classes.
    pub class_log2: Option<usize>,
}

pub fn dashing_space_summary(g: &Chromotopology, faces: &[Face]) -> Result<DashingSpaceSummary> {
    check_faces(g, faces)?;
    let e = g.edge_count();
    let rows: Vec<BitVec> = faces.iter().map(|f| BitVec::from_indices(e, f.edges)).collect();
    let rhs = vec![true; rows.len()];
    let well = affine_solution_exponent(e, &rows, &rhs);
    let rank = VertexChangeSpace::new(g).rank();
    Ok(DashingSpaceSummary {
        edge_count: e,
        vertex_change_rank: rank,
        well_dashed_log2: well,
        class_log2: well.map(|w| w - rank),
    })
}

/// A well-dashing for the given faces, if one exists.
pub fn find_well_dashing(g: &Chromotopology, faces: &[Face]) -> Result<Option<Dashing>> {
    check_faces(g, faces)?;
    let e = g.edge_count();
    let rows: Vec<BitVec> = faces.iter().map(|f| BitVec::from_indices(e, f.edges)).collect();
    let rhs = vec![true; rows.len()];
    Ok(affine_particular_solution(e, &rows, &rhs).map(|bits| Dashing { bits }))
}

/// Result of scanning a range of dashing bitmasks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CensusPart {
    pub examined: u64,
    pub well_dashed: u64,
    pub kasteleyn_ok: u64,
    pub disagreements: u64,
    pub classes: BTreeSet<DashingClass>,
}

impl CensusPart {
    pub fn merge(&mut self, other: CensusPart) {
        self.examined += other.examined;
        self.well_dashed += other.well_dashed;
        self.kasteleyn_ok += other.kasteleyn_ok;
        self.disagreements += other.disagreements;
        self.classes.extend(other.classes);
    }
}

/// Precomputed data for scanning dashings of a graph with at most
/// [`EXHAUSTIVE_EDGE_LIMIT`] edges as bitmasks.
#[derive(Clone, Debug)]
pub struct CensusPlan {
    edge_count: usize,
    well_masks: Vec<u64>,
    surface_masks: Vec<(u64, u32)>,
    space: VertexChangeSpace,
}

impl CensusPlan {
    /// `well_faces` decide well-dashedness; `surface_faces` drive the
    /// Kasteleyn check through the boson→fermion orientation.
    pub fn new(g: &Chromotopology, well_faces: &[Face], surface_faces: &[Face]) -> Result<Self> {
        check_faces(g, well_faces)?;
        check_faces(g, surface_faces)?;
        if g.edge_count() > 64 {
            return Err(Error::resource("adinkra", "bitmask census needs at most 64 edges"));
        }
        let mask = |f: &Face| f.edges.iter().fold(0u64, |m, &e| m | 1u64 << e);
        // an edge opposes the traversal iff its base direction does, xor it is dashed
        let base_against = |f: &Face| {
            (0..4).filter(|&k| !g.is_boson(f.vertices[k])).count() as u32
        };
        Ok(CensusPlan {
            edge_count: g.edge_count(),
            well_masks: well_faces.iter().map(mask).collect(),
            surface_masks: surface_faces.iter().map(|f| (mask(f), base_against(f))).collect(),
            space: VertexChangeSpace::new(g),
        })
    }

    pub fn total(&self) -> u64 {
        1u64 << self.edge_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    fn examine(&self, m: u64, part: &mut CensusPart) {
        part.examined += 1;
        let well = self.well_masks.iter().all(|f| (m & f).count_ones() & 1 == 1);
        let kast = self
            .surface_masks
            .iter()
            .all(|&(f, against)| ((m & f).count_ones() + against) & 1 == 1);
        if well {
            part.well_dashed += 1;
            part.classes.insert(self.space.class_of(&Dashing::from_mask(self.edge_count, m)));
        }
        if kast {
            part.kasteleyn_ok += 1;
        }
        if well != kast {
            part.disagreements += 1;
        }
    }

    pub fn scan(&self, range: Range<u64>) -> CensusPart {
        let mut part = CensusPart::default();
        for m in range {
            self.examine(m, &mut part);
        }
        part
    }

    pub fn sample(&self, seed: u64, count: u64) -> CensusPart {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut part = CensusPart::default();
        let keep = if self.edge_count == 64 { u64::MAX } else { (1u64 << self.edge_count) - 1 };
        for _ in 0..count {
            self.examine(rng.next_u64() & keep, &mut part);
        }
        part
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DashingCensus {
    pub edge_count: usize,
    pub exhaustive: bool,
    pub examined: u64,
    pub well_dashed: u64,
    pub well_dashed_classes: u64,
    pub kasteleyn_ok: u64,
    pub disagreements: u64,
    pub seed: Option<u64>,
}

impl DashingCensus {
    pub fn from_part(plan: &CensusPlan, part: CensusPart, exhaustive: bool, seed: Option<u64>) -> Self {
        DashingCensus {
            edge_count: plan.edge_count,
            exhaustive,
            examined: part.examined,
            well_dashed: part.well_dashed,
            well_dashed_classes: part.classes.len() as u64,
            kasteleyn_ok: part.kasteleyn_ok,
            disagreements: part.disagreements,
            seed,
        }
    }
}

/// Single-threaded census: exhaustive up to [`EXHAUSTIVE_EDGE_LIMIT`] edges,
/// seeded sampling of `samples` dashings beyond.
pub fn dashing_census(
    g: &Chromotopology,
    well_faces: &[Face],
    surface_faces: &[Face],
    seed: u64,
    samples: u64,
) -> Result<DashingCensus> {
    let plan = CensusPlan::new(g, well_faces, surface_faces)?;
    if plan.edge_count <= EXHAUSTIVE_EDGE_LIMIT {
        let part = plan.scan(0..plan.total());
        Ok(DashingCensus::from_part(&plan, part, true, None))
    } else {
        let part = plan.sample(seed, samples);
        Ok(DashingCensus::from_part(&plan, part, false, Some(seed)))
    }
}

/// Edges of one color, checked to form a perfect matching.
pub fn dimer_from_color(g: &Chromotopology, color: u32) -> Result<Vec<usize>> {
    if !g.colors.contains(&color) {
        return Err(Error::invalid("adinkra", format!("color {color} is not in the alphabet")));
    }
    let matching: Vec<usize> = (0..g.edge_count()).filter(|&e| g.edges[e].color == color).collect();
    let mut hit = vec![0u32; g.vertex_count()];
    for &e in &matching {
        hit[g.edges[e].u] += 1;
        hit[g.edges[e].v] += 1;
    }
    if let Some(v) = hit.iter().position(|&h| h != 1) {
        return Err(Error::invalid(
            "adinkra",
            format!("color {color} does not give a perfect matching: vertex {v} is covered {} times", hit[v]),
        ));
    }
    Ok(matching)
}

/// An orientation: `(tail, head)` for each edge.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Orientation {
    pub arcs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KasteleynReport {
    pub orientation: Orientation,
    pub face_oppositions: Vec<u32>,
    pub kasteleyn_ok: bool,
}

/// Orients every edge boson→fermion and reverses the dashed ones, then
/// counts, for each face in its stored order, the edges traversed against
/// their orientation.
pub fn dashing_to_kasteleyn(g: &Chromotopology, faces: &[Face], d: &Dashing) -> Result<KasteleynReport> {
    if faces.is_empty() {
        return Err(Error::invalid("adinkra", "no faces supplied for the Kasteleyn check"));
    }
    check_faces(g, faces)?;
    check_dashing(g, d)?;
    let arcs: Vec<(usize, usize)> = g
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let (b, f) = if g.is_boson(e.u) { (e.u, e.v) } else { (e.v, e.u) };
            if d.is_dashed(i) {
                (f, b)
            } else {
                (b, f)
            }
        })
        .collect();
    let face_oppositions: Vec<u32> = faces
        .iter()
        .map(|f| {
            (0..4)
                .filter(|&k| {
                    let (tail, _) = arcs[f.edges[k]];
                    tail != f.vertices[k]
                })
                .count() as u32
        })
        .collect();
    let kasteleyn_ok = face_oppositions.iter().all(|c| c % 2 == 1);
    Ok(KasteleynReport { orientation: Orientation { arcs }, face_oppositions, kasteleyn_ok })
}

/// A chromotopology together with a ranking and a dashing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adinkra {
    pub graph: Chromotopology,
    pub ranking: Ranking,
    pub dashing: Dashing,
}

impl Adinkra {
    /// Quotient Adinkra with the Hamming ranking and a well-dashing on all
    /// 2-colored 4-cycles.
    pub fn from_code(n: u32, code: &BinaryCode) -> Result<Self> {
        let graph = build_quotient(n, code)?;
        let ranking = default_ranking(&graph)?;
        let faces = two_colored_cycles(&graph)?;
        let dashing = find_well_dashing(&graph, &faces)?
            .ok_or_else(|| Error::invalid("adinkra", "no well-dashing exists for this chromotopology"))?;
        Ok(Adinkra { graph, ranking, dashing })
    }

    pub fn is_well_dashed(&self) -> Result<bool> {
        well_dashed(&self.graph, &two_colored_cycles(&self.graph)?, &self.dashing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a41() -> Chromotopology {
        build_quotient(4, &BinaryCode::from_strings(4, &["1111"]).unwrap()).unwrap()
    }

    #[test]
    fn square_is_valid() {
        let g = cube(2).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (4, 4));
        assert!(validate_chromotopology(&g).is_chromotopology());
    }

    #[test]
    fn a41_shape() {
        let g = a41();
        assert_eq!((g.vertex_count(), g.edge_count()), (8, 16));
        assert!(validate_chromotopology(&g).is_chromotopology());
        for v in 0..8 {
            assert_eq!(g.incident(v).len(), 4);
        }
    }

    #[test]
    fn small_weight_words_rejected() {
        let loop_err = build_quotient(3, &BinaryCode::from_strings(3, &["100"]).unwrap()).unwrap_err();
        assert!(loop_err.message().contains("loop"));
        let par = build_quotient(3, &BinaryCode::from_strings(3, &["110"]).unwrap()).unwrap_err();
        assert!(par.message().contains("parallel"));
    }

    #[test]
    fn odd_code_builds_but_fails_bipartition() {
        let g = build_quotient(3, &BinaryCode::from_strings(3, &["111"]).unwrap()).unwrap();
        let rep = validate_chromotopology(&g);
        assert!(!rep.check(Axiom::Bipartite).unwrap().passed);
        assert!(default_ranking(&g).unwrap_err().message().contains("bipartition"));
    }

    #[test]
    fn recolored_edge_has_witness() {
        let g = cube(2).unwrap();
        let mut edges = g.edges().to_vec();
        edges[0].color = if edges[0].color == 1 { 2 } else { 1 };
        let h = Chromotopology::from_parts(g.labels().to_vec(), g.colors().to_vec(), edges, g.bipartition().to_vec())
            .unwrap();
        let rep = validate_chromotopology(&h);
        let c = rep.check(Axiom::OneEdgePerColor).unwrap();
        assert!(!c.passed);
        assert!(matches!(c.witness, Some(Witness::VertexColor { .. })));
    }

    #[test]
    fn rankings() {
        let g = cube(2).unwrap();
        let mut h = default_ranking(&g).unwrap().h;
        h.sort();
        assert_eq!(h, vec![0, 1, 1, 2]);
        let g = a41();
        let r = default_ranking(&g).unwrap();
        assert_eq!(r.h.iter().copied().collect::<BTreeSet<_>>(), BTreeSet::from([0, 1, 2]));
        assert_eq!(r.h[0], 0);
        assert!(check_ranking(&g, &r).unwrap().is_valid());
    }

    #[test]
    fn square_dashings() {
        let g = cube(2).unwrap();
        let faces = two_colored_cycles(&g).unwrap();
        assert_eq!(faces.len(), 1);
        assert!(well_dashed(&g, &faces, &Dashing::from_mask(4, 0b0001)).unwrap());
        assert!(!well_dashed(&g, &faces, &Dashing::solid(4)).unwrap());
        let count = (0..16u64).filter(|&m| well_dashed(&g, &faces, &Dashing::from_mask(4, m)).unwrap()).count();
        assert_eq!(count, 8);
    }

    #[test]
    fn vertex_change_basics() {
        let g = cube(2).unwrap();
        let d = Dashing::solid(4);
        let d1 = vertex_change(&g, &d, 0).unwrap();
        assert_eq!(d1.dashed_count(), 2);
        assert_eq!(vertex_change(&g, &d1, 0).unwrap(), d);
        assert_eq!(dashing_class(&g, &d).unwrap(), dashing_class(&g, &d1).unwrap());
        assert!(vertex_change(&g, &d, 9).is_err());
    }

    #[test]
    fn a41_vertex_changes_preserve_well_dashing() {
        let g = a41();
        let faces = two_colored_cycles(&g).unwrap();
        let d = find_well_dashing(&g, &faces).unwrap().unwrap();
        for v in 0..8 {
            assert!(well_dashed(&g, &faces, &vertex_change(&g, &d, v).unwrap()).unwrap());
        }
        assert_eq!(VertexChangeSpace::new(&g).rank(), 7);
    }

    #[test]
    fn square_classes() {
        let g = cube(2).unwrap();
        let faces = two_colored_cycles(&g).unwrap();
        let c = dashing_census(&g, &faces, &faces, 0, 0).unwrap();
        assert_eq!((c.well_dashed, c.well_dashed_classes, c.disagreements), (8, 1, 0));
    }

    #[test]
    fn dimers() {
        let g = cube(2).unwrap();
        assert_eq!(dimer_from_color(&g, 1).unwrap().len(), 2);
        assert!(dimer_from_color(&g, 3).is_err());
        let g4 = cube(4).unwrap();
        for c in 1..=4 {
            assert_eq!(dimer_from_color(&g4, c).unwrap().len(), 8);
        }
        let mut union = dimer_from_color(&g4, 1).unwrap();
        union.extend(dimer_from_color(&g4, 2).unwrap());
        union.sort();
        let pair: Vec<usize> = (0..g4.edge_count()).filter(|&e| [1, 2].contains(&g4.edges()[e].color)).collect();
        assert_eq!(union, pair);
    }

    #[test]
    fn kasteleyn_on_square() {
        let g = cube(2).unwrap();
        let faces = two_colored_cycles(&g).unwrap();
        for m in 0..16u64 {
            let d = Dashing::from_mask(4, m);
            let k = dashing_to_kasteleyn(&g, &faces, &d).unwrap();
            assert_eq!(k.kasteleyn_ok, well_dashed(&g, &faces, &d).unwrap());
        }
        assert!(!dashing_to_kasteleyn(&g, &faces, &Dashing::solid(4)).unwrap().kasteleyn_ok);
    }

    #[test]
    fn cube_counts_by_linear_algebra() {
        for n in 1..=4u32 {
            let g = cube(n).unwrap();
            let s = dashing_space_summary(&g, &two_colored_cycles(&g).unwrap()).unwrap();
            assert_eq!(s.well_dashed_log2, Some((1usize << n) - 1), "N = {n}");
        }
    }

    #[test]
    fn exhaustive_cube_three() {
        let g = cube(3).unwrap();
        let faces = two_colored_cycles(&g).unwrap();
        let c = dashing_census(&g, &faces, &faces, 0, 0).unwrap();
        assert!(c.exhaustive);
        assert_eq!(c.well_dashed, 128);
    }

    #[test]
    fn from_code_is_well_dashed() {
        let a = Adinkra::from_code(4, &BinaryCode::from_strings(4, &["1111"]).unwrap()).unwrap();
        assert!(a.is_well_dashed().unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn class_is_a_congruence(m1 in 0u64..(1 << 16), m2 in 0u64..(1 << 16), v in 0usize..8) {
                let g = a41();
                let sp = VertexChangeSpace::new(&g);
                let d1 = Dashing::from_mask(16, m1);
                let d2 = Dashing::from_mask(16, m2);
                let c1 = vertex_change(&g, &d1, v).unwrap();
                let c2 = vertex_change(&g, &d2, v).unwrap();
                prop_assert_eq!(sp.class_of(&d1) == sp.class_of(&d2), sp.class_of(&c1) == sp.class_of(&c2));
                prop_assert_eq!(sp.class_of(&d1), sp.class_of(&c1));
            }

            #[test]
            fn well_dashing_survives_vertex_change(m in 0u64..(1 << 12), v in 0usize..8) {
                let g = cube(3).unwrap();
                let faces = two_colored_cycles(&g).unwrap();
                let d = Dashing::from_mask(12, m);
                let before = well_dashed(&g, &faces, &d).unwrap();
                let after = well_dashed(&g, &faces, &vertex_change(&g, &d, v).unwrap()).unwrap();
                prop_assert_eq!(before, after);
            }
        }
    }
}
