//! Surfaces obtained by gluing 2-cells onto an Adinkra, their genus and
//! triangulation data, the dual origami graph, and products of Adinkras.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::adinkra::{
    colored_faces, validate_chromotopology, Adinkra, Chromotopology, Dashing, Edge, Face, Parity, Ranking,
};
use crate::codes::BinaryCode;
use crate::error::{Error, Result};
use crate::origami::{Label, OrigamiEdge, OrigamiGraph};

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfaceData {
    pub colors: Vec<u32>,
    pub faces: Vec<Face>,
    pub vertex_count: usize,
    pub edge_count: usize,
    /// Number of 2-cells; equals `faces.len()` except for a single edge,
    /// which bounds one digon on the sphere.
    pub face_count: usize,
    pub euler_characteristic: i64,
    pub components: usize,
    pub component_genera: Vec<i64>,
    /// Sum of the component genera (the genus, when connected).
    pub euler_genus: i64,
    pub signature: (u32, u32, u32),
    pub dessin_degree: usize,
}

impl SurfaceData {
    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn is_connected(&self) -> bool {
        self.components == 1
    }
}

/// The color pairs `(c_i, c_{i+1})`, cyclically, in alphabet order.
pub fn consecutive_pairs(colors: &[u32]) -> Vec<(u32, u32)> {
    let n = colors.len();
    if n < 2 {
        return Vec::new();
    }
    (0..n).map(|i| (colors[i], colors[(i + 1) % n])).collect()
}

/// Attaches a 2-cell to every 4-cycle whose colors are consecutive.
pub fn attach_faces(g: &Chromotopology) -> Result<SurfaceData> {
    let report = validate_chromotopology(g);
    if !report.is_chromotopology() {
        let first = report.failures().find(|c| c.axiom != crate::adinkra::Axiom::Connected);
        return Err(Error::invalid("embedding", format!("not a chromotopology: {first:?}")));
    }
    let n = g.n();
    if n == 0 {
        return Err(Error::invalid("embedding", "a surface needs at least one color"));
    }
    let faces = colored_faces(g, &consecutive_pairs(g.colors()))?;

    if n >= 2 {
        let mut sides = vec![0usize; g.edge_count()];
        let mut forward = vec![0i32; g.edge_count()];
        for f in &faces {
            for k in 0..4 {
                let e = f.edges[k];
                sides[e] += 1;
                forward[e] += if g.edges()[e].u == f.vertices[k] { 1 } else { -1 };
            }
        }
        if let Some(e) = sides.iter().position(|&s| s != 2) {
            return Err(Error::invalid(
                "embedding",
                format!("non-surface: edge {e} lies on {} face sides instead of 2", sides[e]),
            ));
        }
        if let Some(e) = forward.iter().position(|&s| s != 0) {
            return Err(Error::invalid(
                "embedding",
                format!("non-orientable gluing: both faces traverse edge {e} in the same direction"),
            ));
        }
    }

    let (comp, components) = g.components();
    let mut v = vec![0i64; components];
    let mut e = vec![0i64; components];
    let mut f = vec![0i64; components];
    for (x, &c) in comp.iter().enumerate() {
        let _ = x;
        v[c] += 1;
    }
    for edge in g.edges() {
        e[comp[edge.u]] += 1;
    }
    if n >= 2 {
        for face in &faces {
            f[comp[face.vertices[0]]] += 1;
        }
    } else {
        for c in 0..components {
            f[c] = 1;
        }
    }
    let mut component_genera = Vec::with_capacity(components);
    for c in 0..components {
        let chi = v[c] - e[c] + f[c];
        if (2 - chi) % 2 != 0 {
            return Err(Error::invalid("embedding", format!("component {c} has odd Euler characteristic {chi}")));
        }
        component_genera.push((2 - chi) / 2);
    }
    let face_count = f.iter().sum::<i64>() as usize;
    let euler_characteristic = g.vertex_count() as i64 - g.edge_count() as i64 + face_count as i64;
    Ok(SurfaceData {
        colors: g.colors().to_vec(),
        faces,
        vertex_count: g.vertex_count(),
        edge_count: g.edge_count(),
        face_count,
        euler_characteristic,
        components,
        euler_genus: component_genera.iter().sum(),
        component_genera,
        signature: (n as u32, n as u32, 2),
        dessin_degree: g.edge_count(),
    })
}

/// 1 + 2^{N−k−3}(N−4) for N ≥ 2, and 0 below; `None` if not an integer.
pub fn closed_form_genus(n: u32, k: u32) -> Option<i64> {
    if n < 2 {
        return Some(0);
    }
    if k > n {
        return None;
    }
    let num = (n as i128 - 4) * (1i128 << (n - k));
    if num % 8 != 0 {
        return None;
    }
    Some((1 + num / 8) as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum GeometryKind {
    Hyperbolic,
    Flat,
    Spherical,
}

/// Areas are exact rational multiples of π.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TriangulationStats {
    pub kind: GeometryKind,
    pub triangle_count: usize,
    pub subgroup_index: usize,
    pub triangle_area_over_pi: Ratio<i64>,
    pub total_area_over_pi: Ratio<i64>,
    /// Whether the total equals 4π(g − 1) for the surface's genus.
    pub gauss_bonnet: bool,
}

impl TriangulationStats {
    pub fn total_area(&self) -> f64 {
        *self.total_area_over_pi.numer() as f64 / *self.total_area_over_pi.denom() as f64 * core::f64::consts::PI
    }
}

/// One positive and one negative triangle of signature (N, N, 2) per
/// dessin edge, each of area π/2 − 2π/N.
pub fn triangulation_stats(surface: &SurfaceData) -> Result<TriangulationStats> {
    let n = surface.n() as i64;
    if n == 0 {
        return Err(Error::invalid("embedding", "no colors"));
    }
    let d = surface.dessin_degree;
    let triangle = Ratio::new(1, 2) - Ratio::new(2, n);
    let total = triangle * Ratio::from_integer(2 * d as i64);
    let kind = match n.cmp(&4) {
        core::cmp::Ordering::Greater => GeometryKind::Hyperbolic,
        core::cmp::Ordering::Equal => GeometryKind::Flat,
        core::cmp::Ordering::Less => GeometryKind::Spherical,
    };
    let gauss_bonnet = surface.is_connected() && total == Ratio::from_integer(4 * (surface.euler_genus - 1));
    Ok(TriangulationStats {
        kind,
        triangle_count: 2 * d,
        subgroup_index: d,
        triangle_area_over_pi: triangle,
        total_area_over_pi: total,
        gauss_bonnet,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DualOrientation {
    /// Every face has its outgoing y side directly after its outgoing x side
    /// in the face's counterclockwise order, so the squares glue to the
    /// surface itself.
    Geometric,
    /// Cycles oriented one by one from their lowest face; valid origami
    /// graph, but the square-tiled surface may differ from the Adinkra's.
    CycleWalk,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DualOrigami {
    pub graph: OrigamiGraph,
    /// Primal edge crossed by each dual edge.
    pub crossed: Vec<usize>,
    pub orientation: DualOrientation,
}

/// The dual graph A* with x on duals of odd-colored edges and y on even ones.
pub fn dual_origami_graph(g: &Chromotopology, surface: &SurfaceData) -> Result<DualOrigami> {
    let n = surface.n();
    if n <= 2 {
        return Err(Error::invalid("embedding", format!("the dual origami needs N > 2, got N = {n}")));
    }
    if n % 2 == 1 {
        return Err(Error::invalid(
            "embedding",
            format!(
                "N = {n} is odd: the edges adjacent to the dual vertices of faces colored {{{}, {}}} would all be labeled by x",
                surface.colors[0],
                surface.colors[n - 1]
            ),
        ));
    }
    let position: BTreeMap<u32, usize> = surface.colors.iter().enumerate().map(|(i, &c)| (c, i + 1)).collect();
    let label_of = |e: usize| if position[&g.edges()[e].color] % 2 == 1 { Label::X } else { Label::Y };

    // the two faces on each primal edge
    let mut faces_of = vec![Vec::with_capacity(2); g.edge_count()];
    for (fi, f) in surface.faces.iter().enumerate() {
        for &e in &f.edges {
            faces_of[e].push(fi);
        }
    }
    let nf = surface.faces.len();

    // orient each label's 2-regular cycles by walking from the lowest face
    let mut arc: Vec<Option<(usize, usize)>> = vec![None; g.edge_count()];
    let mut cycle_of = vec![usize::MAX; g.edge_count()];
    let mut cycles = 0usize;
    for label in [Label::X, Label::Y] {
        for start in 0..nf {
            loop {
                let next = surface.faces[start]
                    .edges
                    .iter()
                    .copied()
                    .filter(|&e| label_of(e) == label && arc[e].is_none())
                    .min();
                let Some(first) = next else { break };
                let mut at = start;
                let mut e = first;
                loop {
                    let to = faces_of[e].iter().copied().find(|&f| f != at).unwrap_or(at);
                    arc[e] = Some((at, to));
                    cycle_of[e] = cycles;
                    at = to;
                    match surface.faces[at].edges.iter().copied().find(|&x| label_of(x) == label && arc[x].is_none()) {
                        Some(x) => e = x,
                        None => break,
                    }
                }
                cycles += 1;
            }
        }
    }

    // try to flip whole cycles so every face is a positively oriented square
    let flips = geometric_flips(surface, &arc, &cycle_of, cycles, &label_of);
    let orientation = if flips.is_some() { DualOrientation::Geometric } else { DualOrientation::CycleWalk };
    let flips = flips.unwrap_or_else(|| vec![false; cycles]);

    let mut edges = Vec::with_capacity(g.edge_count());
    let mut crossed = Vec::with_capacity(g.edge_count());
    for e in 0..g.edge_count() {
        let (a, b) = arc[e].ok_or_else(|| Error::invalid("embedding", format!("edge {e} is on no face")))?;
        let (from, to) = if flips[cycle_of[e]] { (b, a) } else { (a, b) };
        edges.push(OrigamiEdge { from, to, label: label_of(e) });
        crossed.push(e);
    }
    Ok(DualOrigami { graph: OrigamiGraph { d: nf, edges }, crossed, orientation })
}

fn geometric_flips(
    surface: &SurfaceData,
    arc: &[Option<(usize, usize)>],
    cycle_of: &[usize],
    cycles: usize,
    label_of: &dyn Fn(usize) -> Label,
) -> Option<Vec<bool>> {
    // union-find with parity: flip[a] ^ flip[b] = rel
    let mut parent: Vec<usize> = (0..cycles).collect();
    let mut parity = vec![false; cycles];
    fn find(parent: &mut [usize], parity: &mut [bool], x: usize) -> (usize, bool) {
        if parent[x] == x {
            return (x, false);
        }
        let (r, p) = find(parent, parity, parent[x]);
        parent[x] = r;
        parity[x] ^= p;
        (r, parity[x])
    }
    for (fi, f) in surface.faces.iter().enumerate() {
        let out_pos = |lab: Label| -> Option<usize> {
            (0..4).find(|&k| label_of(f.edges[k]) == lab && arc[f.edges[k]].map(|(a, _)| a) == Some(fi))
        };
        let (Some(xo), Some(yo)) = (out_pos(Label::X), out_pos(Label::Y)) else {
            return None;
        };
        let xfirst = (0..4).find(|&k| label_of(f.edges[k]) == Label::X)?;
        // positions xfirst, xfirst + 2 are the x sides; the y side after an
        // outgoing x side must be outgoing
        let x_idx = (xo != xfirst) as u8;
        let y_idx = (yo != (xfirst + 1) % 4) as u8;
        let rel = (x_idx ^ y_idx) == 1;
        let cx = cycle_of[f.edges[xo]];
        let cy = cycle_of[f.edges[yo]];
        let (rx, px) = find(&mut parent, &mut parity, cx);
        let (ry, py) = find(&mut parent, &mut parity, cy);
        if rx == ry {
            if (px ^ py) != rel {
                return None;
            }
        } else {
            parent[rx] = ry;
            parity[rx] = px ^ py ^ rel;
        }
    }
    Some((0..cycles).map(|c| find(&mut parent, &mut parity, c).1).collect())
}

/// Cartesian product of two Adinkras with disjoint color alphabets.
///
/// The vertex (u, u') has label `(l << N₂) | l'`, parity the product of the
/// parities and rank h₁ + h₂. First-factor edges keep d₁; second-factor edges
/// carry d₂ + h₁(u) mod 2.
pub fn cartesian_product(a1: &Adinkra, a2: &Adinkra) -> Result<Adinkra> {
    let (g1, g2) = (&a1.graph, &a2.graph);
    if let Some(c) = g1.colors().iter().find(|c| g2.colors().contains(c)) {
        return Err(Error::invalid("embedding", format!("color {c} appears in both factors")));
    }
    let (v1, v2) = (g1.vertex_count(), g2.vertex_count());
    let shift = g2.code().map(|c| c.length()).unwrap_or(32);
    let idx = |a: usize, b: usize| a * v2 + b;
    let mut labels = Vec::with_capacity(v1 * v2);
    let mut bip = Vec::with_capacity(v1 * v2);
    let mut h = Vec::with_capacity(v1 * v2);
    for a in 0..v1 {
        for b in 0..v2 {
            labels.push(g1.labels()[a] << shift | g2.labels()[b]);
            bip.push(if g1.bipartition()[a] == g2.bipartition()[b] { Parity::Boson } else { Parity::Fermion });
            h.push(a1.ranking.h[a] + a2.ranking.h[b]);
        }
    }
    let mut colors: Vec<u32> = g1.colors().iter().chain(g2.colors()).copied().collect();
    colors.sort_unstable();
    let first_color: BTreeMap<u32, bool> =
        colors.iter().map(|&c| (c, g1.colors().contains(&c))).collect();
    let mut edges = Vec::new();
    let mut dashed = Vec::new();
    for a in 0..v1 {
        for b in 0..v2 {
            let me = idx(a, b);
            for &c in &colors {
                let (other, dash) = if first_color[&c] {
                    let e = g1.edge_of_color(a, c).ok_or_else(|| missing(a, c))?;
                    (idx(g1.edges()[e].other(a), b), a1.dashing.is_dashed(e))
                } else {
                    let e = g2.edge_of_color(b, c).ok_or_else(|| missing(b, c))?;
                    let flip = a1.ranking.h[a].rem_euclid(2) == 1;
                    (idx(a, g2.edges()[e].other(b)), a2.dashing.is_dashed(e) ^ flip)
                };
                if me < other {
                    edges.push(Edge { u: me, v: other, color: c });
                    dashed.push(dash);
                }
            }
        }
    }
    let mut graph = Chromotopology::from_parts(labels, colors, edges, bip)?;
    if let (Some(c1), Some(c2)) = (g1.code(), g2.code()) {
        let n2 = c2.length();
        let gens: Vec<u64> =
            c1.generators().iter().map(|&w| w << n2).chain(c2.generators().iter().copied()).collect();
        graph = graph.with_code(BinaryCode::new(c1.length() + n2, gens)?);
    }
    Ok(Adinkra { graph, ranking: Ranking { h }, dashing: Dashing::from_flags(&dashed) })
}

fn missing(v: usize, c: u32) -> Error {
    Error::invalid("embedding", format!("vertex {v} has no edge of color {c}"))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberedProduct {
    pub graph: Chromotopology,
    pub ranking: Ranking,
    /// Factor colors `(c₁, c₂)` of each product color, in alphabet order.
    pub color_pairs: Vec<(u32, u32)>,
    /// Factor vertices of each product vertex.
    pub vertex_pairs: Vec<(usize, usize)>,
}

/// Fibered product over the rainbow: vertices V₀×V₀ ∪ V₁×V₁, edges the
/// pairs (e₁, e₂) whose color indices satisfy i₁ − i₂ ≡ r mod gcd(N₁, N₂).
///
/// The color of such a pair is t + 1 with t ≡ i₁ mod N₁ and t ≡ i₂ + r mod N₂,
/// giving lcm(N₁, N₂) colors. The ranking is h₁·h₂.
pub fn fibered_product(
    g1: &Chromotopology,
    h1: &Ranking,
    g2: &Chromotopology,
    h2: &Ranking,
    residue: usize,
) -> Result<FiberedProduct> {
    let (n1, n2) = (g1.n(), g2.n());
    if n1 == 0 || n2 == 0 {
        return Err(Error::invalid("embedding", "factors need at least one color"));
    }
    let gg = gcd(n1, n2);
    if residue >= gg {
        return Err(Error::invalid(
            "embedding",
            format!("rainbow residue {residue} is outside Z/{gg}"),
        ));
    }
    let lcm = n1 / gg * n2;
    let mut color_of: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut color_pairs = vec![(0u32, 0u32); lcm];
    for t in 0..lcm {
        let i1 = t % n1;
        let i2 = (t + n2 * gg - residue % n2) % n2;
        color_of.insert((i1, i2), t as u32 + 1);
        color_pairs[t] = (g1.colors()[i1], g2.colors()[i2]);
    }
    let pos1: BTreeMap<u32, usize> = g1.colors().iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let pos2: BTreeMap<u32, usize> = g2.colors().iter().enumerate().map(|(i, &c)| (c, i)).collect();

    let mut index = BTreeMap::new();
    let mut vertex_pairs = Vec::new();
    for a in 0..g1.vertex_count() {
        for b in 0..g2.vertex_count() {
            if g1.bipartition()[a] == g2.bipartition()[b] {
                index.insert((a, b), vertex_pairs.len());
                vertex_pairs.push((a, b));
            }
        }
    }
    let v2 = g2.vertex_count() as u64;
    let labels: Vec<u64> = vertex_pairs.iter().map(|&(a, b)| a as u64 * v2 + b as u64).collect();
    let bip: Vec<Parity> = vertex_pairs.iter().map(|&(a, _)| g1.bipartition()[a]).collect();
    let h: Vec<i64> = vertex_pairs.iter().map(|&(a, b)| h1.h[a] * h2.h[b]).collect();

    let mut edges = Vec::new();
    for e1 in g1.edges() {
        for e2 in g2.edges() {
            let Some(&color) = color_of.get(&(pos1[&e1.color], pos2[&e2.color])) else { continue };
            let (b1, f1) = if g1.bipartition()[e1.u] == Parity::Boson { (e1.u, e1.v) } else { (e1.v, e1.u) };
            let (b2, f2) = if g2.bipartition()[e2.u] == Parity::Boson { (e2.u, e2.v) } else { (e2.v, e2.u) };
            let (Some(&u), Some(&v)) = (index.get(&(b1, b2)), index.get(&(f1, f2))) else {
                return Err(Error::invalid("embedding", "factor edges must join a boson to a fermion"));
            };
            edges.push(Edge { u: u.min(v), v: u.max(v), color });
        }
    }
    edges.sort_unstable_by_key(|e| (e.u, e.color, e.v));
    let graph = Chromotopology::from_parts(labels, (1..=lcm as u32).collect(), edges, bip)?;
    Ok(FiberedProduct { graph, ranking: Ranking { h }, color_pairs, vertex_pairs })
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FiberedGenusReport {
    pub g1: i64,
    pub g2: i64,
    pub components: usize,
    pub component_genera: Vec<i64>,
    pub g_product: i64,
    pub expected: i64,
    pub additivity_ok: bool,
}

/// Compares the face-attached product surface with g₁ + g₂, per component.
pub fn fibered_genus_report(
    g1: &Chromotopology,
    g2: &Chromotopology,
    product: &FiberedProduct,
) -> Result<FiberedGenusReport> {
    let s1 = attach_faces(g1)?;
    let s2 = attach_faces(g2)?;
    let sp = attach_faces(&product.graph)?;
    let expected = s1.euler_genus + s2.euler_genus;
    Ok(FiberedGenusReport {
        g1: s1.euler_genus,
        g2: s2.euler_genus,
        components: sp.components,
        additivity_ok: sp.component_genera.iter().all(|&g| g == expected),
        component_genera: sp.component_genera,
        g_product: sp.euler_genus,
        expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adinkra::{
        build_quotient, cube, default_ranking, two_colored_cycles, well_dashed, Dashing,
    };
    use crate::origami::{monodromy, validate_origami_graph};

    fn quotient(n: u32, rows: &[&str]) -> Chromotopology {
        build_quotient(n, &BinaryCode::from_strings(n, rows).unwrap()).unwrap()
    }

    #[test]
    fn genus_examples() {
        assert_eq!(attach_faces(&cube(4).unwrap()).unwrap().euler_genus, 1);
        assert_eq!(attach_faces(&cube(1).unwrap()).unwrap().euler_genus, 0);
        let s5 = attach_faces(&cube(5).unwrap()).unwrap();
        assert_eq!((s5.vertex_count, s5.edge_count, s5.face_count), (32, 80, 40));
        assert_eq!(s5.euler_characteristic, -8);
        assert_eq!(s5.euler_genus, 5);
        assert_eq!(closed_form_genus(5, 0), Some(5));
        let sq = attach_faces(&cube(2).unwrap()).unwrap();
        assert_eq!((sq.face_count, sq.euler_genus), (2, 0));
    }

    #[test]
    fn triangulation_examples() {
        let s5 = attach_faces(&cube(5).unwrap()).unwrap();
        let t = triangulation_stats(&s5).unwrap();
        assert_eq!(t.kind, GeometryKind::Hyperbolic);
        assert_eq!(t.total_area_over_pi, Ratio::from_integer(16));
        assert!(t.gauss_bonnet);
        assert_eq!(t.triangle_count, 160);

        let a61 = attach_faces(&quotient(6, &["111100"])).unwrap();
        let t = triangulation_stats(&a61).unwrap();
        assert_eq!((t.subgroup_index, a61.euler_genus), (96, 9));
        assert_eq!(t.total_area_over_pi, Ratio::from_integer(32));

        let a60 = attach_faces(&cube(6).unwrap()).unwrap();
        assert_eq!((a60.dessin_degree, a60.euler_genus), (192, 17));

        let t4 = triangulation_stats(&attach_faces(&cube(4).unwrap()).unwrap()).unwrap();
        assert_eq!(t4.kind, GeometryKind::Flat);
        assert_eq!(t4.total_area_over_pi, Ratio::from_integer(0));
    }

    #[test]
    fn dual_of_a40_is_a_torus_origami() {
        let g = cube(4).unwrap();
        let s = attach_faces(&g).unwrap();
        let dual = dual_origami_graph(&g, &s).unwrap();
        assert_eq!(dual.graph.d, 16);
        assert!(validate_origami_graph(&dual.graph).is_valid());
        assert_eq!(dual.orientation, DualOrientation::Geometric);
        assert_eq!(monodromy(&dual.graph).unwrap().genus(), 1);
    }

    #[test]
    fn dual_of_a41() {
        let g = quotient(4, &["1111"]);
        let s = attach_faces(&g).unwrap();
        let dual = dual_origami_graph(&g, &s).unwrap();
        assert_eq!(dual.graph.d, 8);
        assert!(validate_origami_graph(&dual.graph).is_valid());
    }

    #[test]
    fn dual_rejects_odd_n() {
        let g = cube(5).unwrap();
        let s = attach_faces(&g).unwrap();
        let e = dual_origami_graph(&g, &s).unwrap_err();
        assert!(e.message().contains("labeled by x"));
    }

    #[test]
    fn a1_times_a1_is_a2() {
        let a1 = Adinkra::from_code(1, &BinaryCode::trivial(1).unwrap()).unwrap();
        let p = cartesian_product(&a1, &Adinkra { graph: a1.graph.shift_colors(1), ..a1.clone() }).unwrap();
        let a2 = cube(2).unwrap();
        assert_eq!(p.graph.labels(), a2.labels());
        assert_eq!(p.graph.edges(), a2.edges());
        assert_eq!(p.graph.bipartition(), a2.bipartition());
        assert_eq!(p.ranking, default_ranking(&a2).unwrap());
        assert_eq!(p.ranking.h[0], 0);
        assert!(cartesian_product(&a1, &a1).is_err());
    }

    #[test]
    fn products_of_well_dashed_are_well_dashed() {
        let a1 = Adinkra::from_code(1, &BinaryCode::trivial(1).unwrap()).unwrap();
        for m1 in 0..2u64 {
            for m2 in 0..2u64 {
                let f1 = Adinkra { dashing: Dashing::from_mask(1, m1), ..a1.clone() };
                let f2 = Adinkra { graph: a1.graph.shift_colors(1), dashing: Dashing::from_mask(1, m2), ..a1.clone() };
                let p = cartesian_product(&f1, &f2).unwrap();
                assert!(p.is_well_dashed().unwrap());
            }
        }
        let a41 = Adinkra::from_code(4, &BinaryCode::from_strings(4, &["1111"]).unwrap()).unwrap();
        let a2 = Adinkra::from_code(2, &BinaryCode::trivial(2).unwrap()).unwrap();
        let p = cartesian_product(&a41, &Adinkra { graph: a2.graph.shift_colors(4), ..a2 }).unwrap();
        assert!(validate_chromotopology(&p.graph).is_chromotopology());
        assert!(p.is_well_dashed().unwrap());
        assert_eq!(attach_faces(&p.graph).unwrap().euler_genus, closed_form_genus(6, 1).unwrap());
    }

    #[test]
    fn fibered_square_square() {
        let a2 = cube(2).unwrap();
        let h = default_ranking(&a2).unwrap();
        let p = fibered_product(&a2, &h, &a2, &h, 0).unwrap();
        assert_eq!((p.graph.vertex_count(), p.graph.edge_count(), p.graph.n()), (8, 8, 2));
        assert!(validate_chromotopology(&p.graph).is_chromotopology());
        let r = fibered_genus_report(&a2, &a2, &p).unwrap();
        assert_eq!(r.g_product, 0);
        assert!(fibered_product(&a2, &h, &a2, &h, 2).is_err());
    }

    #[test]
    fn fibered_coprime() {
        let a2 = cube(2).unwrap();
        let a3 = cube(3).unwrap();
        let (h2, h3) = (default_ranking(&a2).unwrap(), default_ranking(&a3).unwrap());
        let p = fibered_product(&a2, &h2, &a3, &h3, 0).unwrap();
        assert_eq!(p.graph.n(), 6);
        assert!(validate_chromotopology(&p.graph).is_chromotopology());
        let r1 = fibered_genus_report(&a2, &a3, &p).unwrap();
        let r2 = fibered_genus_report(&a2, &a3, &fibered_product(&a2, &h2, &a3, &h3, 0).unwrap()).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn fibered_rank_eight() {
        let g = quotient(8, &["11110000", "11001100", "10101010", "11111111"]);
        assert_eq!(g.vertex_count(), 16);
        let h = default_ranking(&g).unwrap();
        let mut edge_sets = Vec::new();
        for r in 0..8 {
            let p = fibered_product(&g, &h, &g, &h, r).unwrap();
            assert_eq!((p.graph.vertex_count(), p.graph.n()), (128, 8));
            assert!(validate_chromotopology(&p.graph).is_chromotopology());
            let mut set: Vec<(usize, usize)> = p.graph.edges().iter().map(|e| (e.u, e.v)).collect();
            set.sort();
            edge_sets.push(set);
        }
        for i in 0..8 {
            for j in i + 1..8 {
                assert_ne!(edge_sets[i], edge_sets[j]);
            }
        }
    }

    #[test]
    fn fibered_ranking_parity() {
        let g = quotient(4, &["1111"]);
        let h = default_ranking(&g).unwrap();
        let p = fibered_product(&g, &h, &g, &h, 1).unwrap();
        for v in 0..p.graph.vertex_count() {
            assert_eq!(Parity::of(p.ranking.h[v]), p.graph.bipartition()[v]);
        }
    }

    #[test]
    fn kasteleyn_faces_are_the_surface_faces() {
        let g = quotient(4, &["1111"]);
        let s = attach_faces(&g).unwrap();
        assert_eq!(s.faces.len(), 8);
        assert_eq!(two_colored_cycles(&g).unwrap().len(), 12);
        let d = crate::adinkra::find_well_dashing(&g, &s.faces).unwrap().unwrap();
        assert!(well_dashed(&g, &s.faces, &d).unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn cartesian_with_random_well_dashings(m in 0u64..(1 << 12), v in 0usize..8) {
                let a3 = Adinkra::from_code(3, &BinaryCode::trivial(3).unwrap()).unwrap();
                let faces = two_colored_cycles(&a3.graph).unwrap();
                let d = Dashing::from_mask(12, m);
                prop_assume!(well_dashed(&a3.graph, &faces, &d).unwrap());
                let d = crate::adinkra::vertex_change(&a3.graph, &d, v).unwrap();
                let f1 = Adinkra { dashing: d, ..a3.clone() };
                let a1 = Adinkra::from_code(1, &BinaryCode::trivial(1).unwrap()).unwrap();
                let f2 = Adinkra { graph: a1.graph.shift_colors(3), ..a1 };
                let p = cartesian_product(&f1, &f2).unwrap();
                prop_assert!(p.is_well_dashed().unwrap());
            }
        }
    }
}
