//! Fuchsian triangle groups, their primitive length spectra, lifts of
//! spectra to finite covers, and unitary characters on generator words.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::origami::{check_permutation, compose, cycle_lengths, invert, is_transitive};

/// A 2×2 real matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse(&self) -> Mat2 {
        Mat2 { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn neg(&self) -> Mat2 {
        Mat2 { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Rescales to determinant one, removing rounding drift.
    pub fn renormalized(&self) -> Mat2 {
        let s = libm::sqrt(self.det());
        Mat2 { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s }
    }

    /// cosh of the hyperbolic distance between i and M·i.
    pub fn cosh_displacement(&self) -> f64 {
        0.5 * (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d)
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        (self.a - o.a).abs().max((self.b - o.b).abs()).max((self.c - o.c).abs()).max((self.d - o.d).abs())
    }

    /// Distance to ±I in the max norm.
    pub fn distance_to_central(&self) -> f64 {
        self.max_abs_diff(&Mat2::IDENTITY).min(self.max_abs_diff(&Mat2::IDENTITY.neg()))
    }

    pub fn pow(&self, k: u32) -> Mat2 {
        let mut out = Mat2::IDENTITY;
        for _ in 0..k {
            out = out.mul(self).renormalized();
        }
        out
    }

    /// Rotation by `angle` about `i`.
    pub fn rotation_at_i(angle: f64) -> Mat2 {
        let (s, c) = (libm::sin(angle / 2.0), libm::cos(angle / 2.0));
        Mat2 { a: c, b: s, c: -s, d: c }
    }

    /// Rotation by `angle` about the point `w` of the upper half-plane.
    pub fn rotation_at(w: Complex64, angle: f64) -> Mat2 {
        let sv = libm::sqrt(w.im);
        let t = Mat2 { a: sv, b: w.re / sv, c: 0.0, d: 1.0 / sv };
        let t_inv = Mat2 { a: 1.0 / sv, b: -w.re / sv, c: 0.0, d: sv };
        t.mul(&Mat2::rotation_at_i(angle)).mul(&t_inv)
    }

    /// Endpoints of the axis of a hyperbolic element on ℝ ∪ {∞}, encoded
    /// as `None` for ∞.
    pub fn axis(&self) -> (Option<f64>, Option<f64>) {
        let t = self.trace();
        let disc = libm::sqrt((t * t - 4.0).max(0.0));
        let scale = self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs());
        if self.c.abs() <= 1e-14 * scale {
            (Some(self.b / (self.d - self.a)), None)
        } else {
            (Some((self.a - self.d + disc) / (2.0 * self.c)), Some((self.a - self.d - disc) / (2.0 * self.c)))
        }
    }

    fn key(&self, scale: f64) -> [i64; 4] {
        let entries = [self.a, self.b, self.c, self.d];
        let sign = entries.iter().find(|v| v.abs() > 1e-9).map(|v| v.signum()).unwrap_or(1.0);
        let mut k = [0i64; 4];
        for (slot, v) in k.iter_mut().zip(entries) {
            *slot = libm::round(v * sign * scale) as i64;
        }
        k
    }
}

/// A group element with the generator word that produced it.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupElement {
    pub matrix: Mat2,
    pub word: String,
}

const LETTERS: [char; 4] = ['x', 'X', 'y', 'Y'];

/// Δ(p, q, r) generated by rotations x, y, z of angles 2π/p, 2π/q, 2π/r
/// about the vertices A = i, B, C of a triangle with angles π/p, π/q, π/r.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TriangleGroup {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub x: Mat2,
    pub y: Mat2,
    pub z: Mat2,
    /// Hyperbolic side lengths |AB| and |AC|.
    pub side_ab: f64,
    pub side_ac: f64,
    /// The fundamental quadrilateral A, C, B, C′.
    pub domain: [Complex64; 4],
    pub relation_residual: f64,
}

impl TriangleGroup {
    pub fn generators(&self) -> [GroupElement; 3] {
        [
            GroupElement { matrix: self.x, word: "x".into() },
            GroupElement { matrix: self.y, word: "y".into() },
            GroupElement { matrix: self.z, word: "z".into() },
        ]
    }

    /// Largest distance from A to a point of the fundamental domain.
    pub fn domain_radius(&self) -> f64 {
        self.side_ab.max(self.side_ac)
    }

    fn letter(&self, i: usize) -> Mat2 {
        match i {
            0 => self.x,
            1 => self.x.inverse(),
            2 => self.y,
            _ => self.y.inverse(),
        }
    }

    /// Evaluates a word in x, X = x⁻¹, y, Y = y⁻¹ (and z, Z).
    pub fn evaluate(&self, word: &str) -> Result<Mat2> {
        let mut m = Mat2::IDENTITY;
        for ch in word.chars() {
            let g = match ch {
                'x' => self.x,
                'X' => self.x.inverse(),
                'y' => self.y,
                'Y' => self.y.inverse(),
                'z' => self.z,
                'Z' => self.z.inverse(),
                _ => return Err(Error::invalid("hyperbolic", format!("unknown generator symbol '{ch}'"))),
            };
            m = m.mul(&g).renormalized();
        }
        Ok(m)
    }

    /// Whether the geodesic through the axis of `m` meets the closed
    /// fundamental domain.
    pub fn axis_meets_domain(&self, m: &Mat2) -> bool {
        let (e1, e2) = m.axis();
        let side = |z: Complex64| -> f64 {
            match (e1, e2) {
                (Some(u), Some(v)) => {
                    let mid = 0.5 * (u + v);
                    let rad = 0.5 * (u - v).abs();
                    ((z.re - mid) * (z.re - mid) + z.im * z.im - rad * rad) / (1.0 + rad * rad)
                }
                (Some(u), None) | (None, Some(u)) => z.re - u,
                (None, None) => 0.0,
            }
        };
        let s: Vec<f64> = self.domain.iter().map(|&z| side(z)).collect();
        let pos = s.iter().all(|&v| v > 1e-12);
        let neg = s.iter().all(|&v| v < -1e-12);
        !(pos || neg)
    }
}

/// Generators of Δ(p, q, r) in PSL(2, ℝ) for a hyperbolic signature.
pub fn triangle_generators(p: u32, q: u32, r: u32) -> Result<TriangleGroup> {
    if p < 2 || q < 2 || r < 2 {
        return Err(Error::invalid("hyperbolic", "triangle group orders must be at least 2"));
    }
    let (pp, qq, rr) = (p as u64, q as u64, r as u64);
    if qq * rr + pp * rr + pp * qq >= pp * qq * rr {
        let kind = if qq * rr + pp * rr + pp * qq == pp * qq * rr { "Euclidean" } else { "spherical" };
        return Err(Error::invalid(
            "hyperbolic",
            format!("signature ({p}, {q}, {r}) is {kind}: 1/p + 1/q + 1/r must be < 1"),
        ));
    }
    let (al, be, ga) = (PI / p as f64, PI / q as f64, PI / r as f64);
    let (sa, ca) = (libm::sin(al), libm::cos(al));
    let (sb, cb) = (libm::sin(be), libm::cos(be));
    let (sg, cg) = (libm::sin(ga), libm::cos(ga));
    let side_ab = libm::acosh((cg + ca * cb) / (sa * sb));
    let side_ac = libm::acosh((cb + ca * cg) / (sa * sg));

    let a = Complex64::new(0.0, 1.0);
    let b = Complex64::new(0.0, libm::exp(side_ab));
    let toward = |phi: f64| {
        let w = Complex64::from_polar(libm::tanh(side_ac / 2.0), phi);
        a * (w + 1.0) / (-w + 1.0)
    };
    let c = toward(-al);
    let c_mirror = Complex64::new(-c.re, c.im);

    let mut best: Option<(f64, Mat2, Mat2, Mat2)> = None;
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                let x = Mat2::rotation_at_i(sx * 2.0 * al);
                let y = Mat2::rotation_at(b, sy * 2.0 * be);
                let z = Mat2::rotation_at(c, sz * 2.0 * ga);
                let res = x.mul(&y).mul(&z).distance_to_central();
                if best.as_ref().is_none_or(|(r0, ..)| res < *r0) {
                    best = Some((res, x, y, z));
                }
            }
        }
    }
    let (relation_residual, x, y, z) = best.expect("eight candidates");
    if relation_residual > 1e-10 {
        return Err(Error::invalid(
            "hyperbolic",
            format!("product relation fails with residual {relation_residual:e}"),
        ));
    }
    Ok(TriangleGroup {
        p,
        q,
        r,
        x,
        y,
        z,
        side_ab,
        side_ac,
        domain: [a, c, b, c_mirror],
        relation_residual,
    })
}

/// One or more primitive conjugacy classes sharing a length.
///
/// Each entry of `words` names one class; a leading `-` records that the
/// positive-trace lift is minus the word's product.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeodesicClass {
    pub trace: f64,
    pub length: f64,
    pub norm: f64,
    pub primitive_length: f64,
    pub multiplicity: u64,
    pub words: Vec<String>,
    pub primitive: bool,
}

impl GeodesicClass {
    /// A synthetic primitive class of the given length.
    pub fn from_length(length: f64, multiplicity: u64) -> Self {
        GeodesicClass {
            trace: 2.0 * libm::cosh(length / 2.0),
            length,
            norm: libm::exp(length),
            primitive_length: length,
            multiplicity,
            words: Vec::new(),
            primitive: true,
        }
    }

    pub fn from_trace(trace: f64, multiplicity: u64) -> Result<Self> {
        let t = trace.abs();
        if t <= 2.0 {
            return Err(Error::invalid("hyperbolic", format!("|trace| = {t} is not hyperbolic")));
        }
        let mut c = GeodesicClass::from_length(2.0 * libm::acosh(t / 2.0), multiplicity);
        c.trace = t;
        Ok(c)
    }

    /// `N^{1/2} − N^{−1/2}`.
    pub fn norm_gap(&self) -> f64 {
        2.0 * libm::sinh(self.length / 2.0)
    }

    /// The k-th power of a primitive class.
    pub fn power(&self, k: u32) -> GeodesicClass {
        let length = self.length * k as f64;
        GeodesicClass {
            trace: 2.0 * libm::cosh(length / 2.0),
            length,
            norm: libm::exp(length),
            primitive_length: self.primitive_length,
            multiplicity: self.multiplicity,
            words: self.words.iter().map(|w| power_word(w, k)).collect(),
            primitive: k == 1 && self.primitive,
        }
    }
}

fn power_word(w: &str, k: u32) -> String {
    let (neg, body) = match w.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, w),
    };
    let mut out = String::new();
    if neg && k % 2 == 1 {
        out.push('-');
    }
    for _ in 0..k {
        out.push_str(body);
    }
    out
}

/// Adds every power γᵏ with length ≤ `max_length` to a primitive spectrum.
pub fn with_powers(classes: &[GeodesicClass], max_length: f64) -> Vec<GeodesicClass> {
    let mut out = Vec::new();
    for c in classes.iter().filter(|c| c.primitive) {
        let mut k = 1u32;
        while c.length * k as f64 <= max_length {
            out.push(c.power(k));
            k += 1;
        }
    }
    out.sort_by(|a, b| a.length.total_cmp(&b.length));
    out
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumOptions {
    pub l_max: f64,
    pub dedupe_tol: f64,
    /// Budget on the number of stored group elements.
    pub max_elements: usize,
    /// Stop after this many generator letters even if not saturated.
    pub max_depth: Option<usize>,
}

impl SpectrumOptions {
    pub fn new(l_max: f64) -> Self {
        SpectrumOptions { l_max, dedupe_tol: 1e-9, max_elements: 2_000_000, max_depth: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LengthSpectrum {
    pub classes: Vec<GeodesicClass>,
    pub l_max: f64,
    /// Every primitive class with length at most this value is listed, once.
    pub certified_length: f64,
    pub complete: bool,
    pub depth: usize,
    pub elements: usize,
    pub class_count: u64,
    /// Classes conjugate to their own inverse.
    pub reversible_classes: u64,
    pub elliptic_elements: usize,
    pub near_parabolic_elements: usize,
    pub max_det_error: f64,
}

impl LengthSpectrum {
    /// Wraps a hand-made list of classes, taken as complete at every length.
    pub fn synthetic(classes: Vec<GeodesicClass>) -> Self {
        let l_max = classes.iter().map(|c| c.length).fold(0.0, f64::max);
        let class_count = classes.iter().filter(|c| c.primitive).map(|c| c.multiplicity).sum();
        LengthSpectrum {
            classes,
            l_max,
            certified_length: f64::MAX,
            complete: true,
            depth: 0,
            elements: 0,
            class_count,
            reversible_classes: 0,
            elliptic_elements: 0,
            near_parabolic_elements: 0,
            max_det_error: 0.0,
        }
    }

    /// Classes with length ≤ `l`, grouped as stored.
    pub fn below(&self, l: f64) -> Vec<&GeodesicClass> {
        self.classes.iter().filter(|c| c.length <= l).collect()
    }
}

/// Breadth-first enumeration of the group elements displacing `i` by at
/// most a given radius, in layers of word length.
///
/// Each layer expansion is a pure function of the current frontier so
/// that callers may split it across workers and absorb the pieces in order.
#[derive(Clone, Debug)]
pub struct BallBuilder {
    pub group: TriangleGroup,
    prune_cosh: f64,
    key_scale: f64,
    pub elements: Vec<Mat2>,
    words: Vec<Vec<u8>>,
    index: BTreeMap<[i64; 4], usize>,
    frontier: Vec<usize>,
    pub depth: usize,
    pub max_elements: usize,
    pub exhausted: bool,
}

/// A candidate produced by expanding a frontier element.
#[derive(Clone, Copy, Debug)]
pub struct Candidate {
    pub parent: usize,
    pub letter: u8,
    pub matrix: Mat2,
}

impl BallBuilder {
    pub fn new(group: TriangleGroup, prune_radius: f64, max_elements: usize) -> Self {
        let mut index = BTreeMap::new();
        let key_scale = 1e8;
        index.insert(Mat2::IDENTITY.key(key_scale), 0);
        BallBuilder {
            group,
            prune_cosh: libm::cosh(prune_radius),
            key_scale,
            elements: vec![Mat2::IDENTITY],
            words: vec![Vec::new()],
            index,
            frontier: vec![0],
            depth: 0,
            max_elements,
            exhausted: false,
        }
    }

    pub fn frontier(&self) -> &[usize] {
        &self.frontier
    }

    pub fn is_saturated(&self) -> bool {
        self.frontier.is_empty()
    }

    pub fn expand(&self, chunk: &[usize]) -> Vec<Candidate> {
        let mut out = Vec::new();
        for &i in chunk {
            let last = self.words[i].last().copied();
            for letter in 0..4u8 {
                if last == Some(letter ^ 1) {
                    continue;
                }
                let m = self.elements[i].mul(&self.group.letter(letter as usize)).renormalized();
                if m.cosh_displacement() <= self.prune_cosh {
                    out.push(Candidate { parent: i, letter, matrix: m });
                }
            }
        }
        out
    }

    /// Adds a layer's candidates; returns false once the budget is hit.
    pub fn absorb(&mut self, candidates: Vec<Candidate>) -> bool {
        let mut next = Vec::new();
        for cand in candidates {
            let key = cand.matrix.key(self.key_scale);
            if self.index.contains_key(&key) {
                continue;
            }
            if self.elements.len() >= self.max_elements {
                self.exhausted = true;
                // keep the unexpanded nodes so the certified radius stays valid
                let mut rest: Vec<usize> = next;
                rest.push(cand.parent);
                rest.extend_from_slice(&self.frontier);
                rest.sort_unstable();
                rest.dedup();
                self.frontier = rest;
                return false;
            }
            let idx = self.elements.len();
            self.index.insert(key, idx);
            self.elements.push(cand.matrix);
            let mut w = self.words[cand.parent].clone();
            w.push(cand.letter);
            self.words.push(w);
            next.push(idx);
        }
        self.frontier = next;
        self.depth += 1;
        true
    }

    pub fn step(&mut self) -> bool {
        let frontier = self.frontier.clone();
        let cands = self.expand(&frontier);
        self.absorb(cands)
    }

    pub fn lookup(&self, m: &Mat2) -> Option<usize> {
        self.index.get(&m.key(self.key_scale)).copied()
    }

    pub fn word(&self, i: usize) -> String {
        self.words[i].iter().map(|&l| LETTERS[l as usize]).collect()
    }

    /// Radius of the ball known to be fully enumerated.
    pub fn certified_radius(&self) -> f64 {
        let prune = libm::acosh(self.prune_cosh);
        let front = self
            .frontier
            .iter()
            .map(|&i| libm::acosh(self.elements[i].cosh_displacement().max(1.0)))
            .fold(prune, f64::min);
        front - self.group.domain_radius()
    }
}

/// Primitive hyperbolic conjugacy classes of Δ(p, q, r) with length ≤ L.
///
/// Conjugacy is detected among the elements whose axis meets the
/// fundamental domain: these form one orbit under conjugation by x and y
/// per class, and all lie in the ball of radius L + 2R around i, where R
/// is the domain radius.
pub fn length_spectrum(group: &TriangleGroup, opts: &SpectrumOptions) -> Result<LengthSpectrum> {
    let builder = enumerate_ball(group, opts, |b| {
        b.step();
    })?;
    classify(&builder, opts)
}

/// Runs the layered enumeration with a caller-supplied step.
pub fn enumerate_ball<F: FnMut(&mut BallBuilder)>(
    group: &TriangleGroup,
    opts: &SpectrumOptions,
    mut step: F,
) -> Result<BallBuilder> {
    if !(opts.l_max > 0.0) || !(opts.dedupe_tol > 0.0) {
        return Err(Error::invalid("hyperbolic", "l_max and dedupe_tol must be positive"));
    }
    let rf = group.domain_radius();
    let mut b = BallBuilder::new(group.clone(), opts.l_max + 3.0 * rf, opts.max_elements);
    while !b.is_saturated() && !b.exhausted {
        if opts.max_depth.is_some_and(|d| b.depth >= d) {
            break;
        }
        step(&mut b);
    }
    Ok(b)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Groups the enumerated elements into primitive conjugacy classes.
pub fn classify(b: &BallBuilder, opts: &SpectrumOptions) -> Result<LengthSpectrum> {
    let g = &b.group;
    let rf = g.domain_radius();
    let certified_length = (b.certified_radius() - 2.0 * rf).max(0.0).min(opts.l_max);
    let complete = certified_length >= opts.l_max;
    let hyperbolic_tol = 1e-9;

    let mut elliptic = 0usize;
    let mut near_parabolic = 0usize;
    let mut in_s = vec![false; b.elements.len()];
    let mut members = Vec::new();
    for (i, m) in b.elements.iter().enumerate().skip(1) {
        let t = m.trace().abs();
        if t < 2.0 - hyperbolic_tol {
            elliptic += 1;
            continue;
        }
        if t <= 2.0 + hyperbolic_tol {
            near_parabolic += 1;
            continue;
        }
        let len = 2.0 * libm::acosh(t / 2.0);
        if len <= opts.l_max + opts.dedupe_tol && g.axis_meets_domain(m) {
            in_s[i] = true;
            members.push(i);
        }
    }

    let mut uf = UnionFind((0..b.elements.len()).collect());
    let conj = [g.x, g.y];
    for &i in &members {
        for s in &conj {
            let c = s.mul(&b.elements[i]).mul(&s.inverse()).renormalized();
            if let Some(j) = b.lookup(&c) {
                if in_s[j] {
                    uf.union(i, j);
                }
            }
        }
    }

    let mut non_primitive = vec![false; b.elements.len()];
    for &i in &members {
        let m = b.elements[i];
        let base = 2.0 * libm::acosh(m.trace().abs() / 2.0);
        let mut pw = m;
        let mut k = 1;
        loop {
            k += 1;
            if base * k as f64 > opts.l_max + opts.dedupe_tol {
                break;
            }
            pw = pw.mul(&m).renormalized();
            if let Some(j) = b.lookup(&pw) {
                non_primitive[j] = true;
            }
        }
    }

    // one representative per class: shortest word, then lexicographic
    let mut reps: BTreeMap<usize, usize> = BTreeMap::new();
    for &i in &members {
        let root = uf.find(i);
        let better = match reps.get(&root) {
            None => true,
            Some(&j) => {
                let (wi, wj) = (&b.words[i], &b.words[j]);
                (wi.len(), wi) < (wj.len(), wj)
            }
        };
        if better {
            reps.insert(root, i);
        }
    }
    let mut reversible = 0u64;
    let mut singles: Vec<(f64, f64, String)> = Vec::new();
    let mut max_det_error = 0.0f64;
    for (&root, &rep) in &reps {
        if non_primitive[rep] {
            continue;
        }
        let m = b.elements[rep];
        max_det_error = max_det_error.max((m.det() - 1.0).abs());
        if let Some(j) = b.lookup(&m.inverse()) {
            if in_s[j] && uf.find(j) == root {
                reversible += 1;
            }
        }
        let t = m.trace();
        let mut word = b.word(rep);
        if t < 0.0 {
            word.insert(0, '-');
        }
        singles.push((2.0 * libm::acosh(t.abs() / 2.0), t.abs(), word));
    }
    singles.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.2.cmp(&b.2)));

    let mut classes: Vec<GeodesicClass> = Vec::new();
    for (len, tr, word) in singles {
        if len > opts.l_max {
            continue;
        }
        match classes.last_mut() {
            Some(c) if (c.length - len).abs() <= opts.dedupe_tol * (1.0 + len) => {
                c.multiplicity += 1;
                c.words.push(word);
            }
            _ => {
                let mut c = GeodesicClass::from_length(len, 1);
                c.trace = tr;
                c.words.push(word);
                classes.push(c);
            }
        }
    }
    let class_count = classes.iter().map(|c| c.multiplicity).sum();
    Ok(LengthSpectrum {
        classes,
        l_max: opts.l_max,
        certified_length,
        complete,
        depth: b.depth,
        elements: b.elements.len(),
        class_count,
        reversible_classes: reversible,
        elliptic_elements: elliptic,
        near_parabolic_elements: near_parabolic,
        max_det_error,
    })
}

/// The permutation action of the generators on the cosets Γ/H.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CosetAction {
    pub degree: usize,
    pub images: BTreeMap<String, Vec<usize>>,
}

impl CosetAction {
    pub fn new(degree: usize, images: BTreeMap<String, Vec<usize>>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::invalid("hyperbolic", "coset space must be nonempty"));
        }
        for (k, p) in &images {
            if p.len() != degree {
                return Err(Error::invalid(
                    "hyperbolic",
                    format!("permutation for '{k}' has {} entries, expected {degree}", p.len()),
                ));
            }
            check_permutation(p, k)?;
        }
        let perms: Vec<&[usize]> = images.values().map(|p| p.as_slice()).collect();
        if !is_transitive(&perms, degree) {
            return Err(Error::invalid("hyperbolic", "coset action is not transitive"));
        }
        Ok(CosetAction { degree, images })
    }

    /// A permutation action that need not be transitive, as for direct sums.
    pub fn permutations(degree: usize, images: BTreeMap<String, Vec<usize>>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::invalid("hyperbolic", "coset space must be nonempty"));
        }
        for (k, p) in &images {
            if p.len() != degree {
                return Err(Error::invalid(
                    "hyperbolic",
                    format!("permutation for '{k}' has {} entries, expected {degree}", p.len()),
                ));
            }
            check_permutation(p, k)?;
        }
        Ok(CosetAction { degree, images })
    }

    pub fn trivial(symbols: &[&str]) -> Self {
        CosetAction { degree: 1, images: symbols.iter().map(|s| (s.to_string(), vec![0])).collect() }
    }

    pub fn image(&self, symbol: &str) -> Result<&[usize]> {
        self.images
            .get(symbol)
            .map(|p| p.as_slice())
            .ok_or_else(|| Error::invalid("hyperbolic", format!("no permutation for generator '{symbol}'")))
    }

    /// Permutation of a word in lower-case generators and upper-case inverses.
    pub fn word_permutation(&self, word: &str) -> Result<Vec<usize>> {
        let mut acc: Vec<usize> = (0..self.degree).collect();
        for ch in word.chars().filter(|&c| c != '-') {
            let lower = ch.to_ascii_lowercase().to_string();
            let p = self.image(&lower)?;
            let p = if ch.is_ascii_uppercase() { invert(p) } else { p.to_vec() };
            acc = compose(&acc, &p);
        }
        Ok(acc)
    }
}

/// Lengths of the closed geodesics of the d-sheeted cover.
///
/// A class with permutation σ lifts to one class of length c·ℓ for every
/// c-cycle of σ.
pub fn cover_length_spectrum(base: &[GeodesicClass], action: &CosetAction) -> Result<Vec<GeodesicClass>> {
    let mut singles: Vec<(f64, String)> = Vec::new();
    for c in base {
        if c.words.is_empty() {
            return Err(Error::invalid(
                "hyperbolic",
                format!("class of length {} carries no word to act on", c.length),
            ));
        }
        for w in &c.words {
            let sigma = action.word_permutation(w)?;
            for len in cycle_lengths(&sigma) {
                singles.push((c.length * len as f64, power_word(w, len as u32)));
            }
        }
    }
    singles.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut out: Vec<GeodesicClass> = Vec::new();
    for (len, w) in singles {
        match out.last_mut() {
            Some(c) if (c.length - len).abs() <= 1e-12 * (1.0 + len) => {
                c.multiplicity += 1;
                c.words.push(w);
            }
            _ => {
                let mut c = GeodesicClass::from_length(len, 1);
                c.words.push(w);
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// A unitary character given on generators, with χ(−1) = −1.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpinCharacter {
    pub values: BTreeMap<String, Complex64>,
}

impl SpinCharacter {
    pub fn new(values: BTreeMap<String, Complex64>) -> Result<Self> {
        for (k, v) in &values {
            if (v.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::invalid("hyperbolic", format!("|χ({k})| = {} is not 1", v.norm())));
            }
        }
        Ok(SpinCharacter { values })
    }

    pub fn trivial(symbols: &[&str]) -> Self {
        SpinCharacter { values: symbols.iter().map(|s| (s.to_string(), Complex64::new(1.0, 0.0))).collect() }
    }

    /// χ of the word's product; a leading `-` multiplies by χ(−1) = −1.
    pub fn word_value(&self, word: &str) -> Result<Complex64> {
        let mut v = Complex64::new(1.0, 0.0);
        for ch in word.chars() {
            if ch == '-' {
                v = -v;
                continue;
            }
            let key = ch.to_ascii_lowercase().to_string();
            let g = self
                .values
                .get(&key)
                .ok_or_else(|| Error::invalid("hyperbolic", format!("unknown generator symbol '{ch}'")))?;
            v *= if ch.is_ascii_uppercase() { g.conj() } else { *g };
        }
        Ok(v)
    }

    /// Residuals of χ on the relations x^p, y^q, z^r and xyz, whose lifts
    /// are ±I with the sign read off the matrices.
    pub fn relation_residuals(&self, g: &TriangleGroup) -> Result<Vec<f64>> {
        let rel = |word: String| -> Result<f64> {
            let m = g.evaluate(&word)?;
            let sign = if m.trace() > 0.0 { 1.0 } else { -1.0 };
            Ok((self.word_value(&word)? - sign).norm())
        };
        let rep = |c: &str, n: u32| -> String { c.repeat(n as usize) };
        Ok(vec![rel(rep("x", g.p))?, rel(rep("y", g.q))?, rel(rep("z", g.r))?, rel("xyz".into())?])
    }
}

/// χ(P^ℓ) = χ(P)^ℓ.
pub fn character_value(chi: &SpinCharacter, class_word: &str, power: u32) -> Result<Complex64> {
    Ok(chi.word_value(class_word)?.powu(power))
}
