//! Dense bit vectors and row-echelon bases over GF(2).

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.flip(i);
        }
        v
    }

    /// Low `len` bits of `mask`, bit i of the mask becoming entry i.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= 64);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = if len == 64 { mask } else { mask & ((1u64 << len) - 1) };
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if self.get(i) != value {
            self.flip(i);
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of the number of ones at the given positions.
    pub fn parity_on(&self, positions: &[usize]) -> bool {
        positions.iter().fold(false, |acc, &i| acc ^ self.get(i))
    }

    /// Highest set index, if any.
    pub fn leading(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(k * 64 + 63 - w.leading_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// A fully reduced echelon basis of a subspace of GF(2)^len.
///
/// Each basis row owns a pivot (its highest set index) and no other row has
/// that pivot set, so `reduce` maps every coset of the span to one canonical
/// vector.
#[derive(Clone, Debug, Default)]
pub struct Gf2Basis {
    len: usize,
    rows: Vec<(usize, BitVec)>,
}

impl Gf2Basis {
    pub fn new(len: usize) -> Self {
        Gf2Basis { len, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_len(&self) -> usize {
        self.len
    }

    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut out = v.clone();
        for (p, row) in &self.rows {
            if out.get(*p) {
                out.xor_assign(row);
            }
        }
        out
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the span; returns false if it was already there.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        let r = self.reduce(v);
        let Some(p) = r.leading() else {
            return false;
        };
        for (_, row) in self.rows.iter_mut() {
            if row.get(p) {
                row.xor_assign(&r);
            }
        }
        let at = self.rows.partition_point(|(q, _)| *q > p);
        self.rows.insert(at, (p, r));
        true
    }

    pub fn rows(&self) -> impl Iterator<Item = &BitVec> {
        self.rows.iter().map(|(_, r)| r)
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|(p, _)| *p)
    }
}

/// Solution count of the affine system `rows[i] · x = rhs[i]` over GF(2),
/// returned as the exponent of two, or `None` when the system is inconsistent.
pub fn affine_solution_exponent(len: usize, rows: &[BitVec], rhs: &[bool]) -> Option<usize> {
    assert_eq!(rows.len(), rhs.len());
    let mut basis = Gf2Basis::new(len + 1);
    for (row, &b) in rows.iter().zip(rhs) {
        let mut ext = BitVec::zeros(len + 1);
        for i in row.ones() {
            ext.flip(i + 1);
        }
        if b {
            ext.flip(0);
        }
        basis.insert(&ext);
    }
    if basis.pivots().any(|p| p == 0) {
        return None;
    }
    Some(len - basis.rank())
}

/// One solution of `rows[i] · x = rhs[i]` over GF(2) with all free variables
/// set to zero, or `None` when the system is inconsistent.
pub fn affine_particular_solution(len: usize, rows: &[BitVec], rhs: &[bool]) -> Option<BitVec> {
    assert_eq!(rows.len(), rhs.len());
    let mut basis = Gf2Basis::new(len + 1);
    for (row, &b) in rows.iter().zip(rhs) {
        let mut ext = BitVec::zeros(len + 1);
        for i in row.ones() {
            ext.flip(i + 1);
        }
        if b {
            ext.flip(0);
        }
        basis.insert(&ext);
    }
    let mut x = BitVec::zeros(len);
    for (p, row) in &basis.rows {
        if *p == 0 {
            return None;
        }
        if row.get(0) {
            x.flip(p - 1);
        }
    }
    Some(x)
}
