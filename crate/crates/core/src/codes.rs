//! Binary linear codes over GF(2).
//!
//! Words are stored in a `u64`. The textual form is most-significant-bit
//! first, so position `c` of the string (1-based) is bit `n - c` of the word.
//! Position `c` corresponds to Adinkra color `c`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const MAX_LENGTH: u32 = 64;
pub const DEFAULT_COSET_BOUND: u32 = 16;
/// Largest dimension whose codewords `analyze_code` will enumerate.
pub const MAX_ENUMERATED_DIMENSION: usize = 26;

/// Bit of color `c` (1-based) in a word of length `n`.
#[inline]
pub fn color_bit(n: u32, c: u32) -> u64 {
    debug_assert!(c >= 1 && c <= n);
    1u64 << (n - c)
}

#[inline]
pub fn weight(w: u64) -> u32 {
    w.count_ones()
}

fn full_mask(n: u32) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub fn parse_word(s: &str, n: u32) -> Result<u64> {
    if s.len() != n as usize {
        return Err(Error::invalid(
            "codes",
            format!("word {s:?} has length {} but the code length is {n}", s.len()),
        ));
    }
    let mut w = 0u64;
    for ch in s.chars() {
        w <<= 1;
        match ch {
            '0' => {}
            '1' => w |= 1,
            _ => return Err(Error::invalid("codes", format!("word {s:?} contains {ch:?}"))),
        }
    }
    Ok(w)
}

pub fn format_word(w: u64, n: u32) -> String {
    (1..=n).map(|c| if w & color_bit(n, c) != 0 { '1' } else { '0' }).collect()
}

/// A linear code given by independent generator rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCode {
    n: u32,
    generators: Vec<u64>,
    // reduced echelon rows with their pivot bits, highest pivot first
    echelon: Vec<(u32, u64)>,
}

impl BinaryCode {
    pub fn new(n: u32, generators: Vec<u64>) -> Result<Self> {
        if n == 0 || n > MAX_LENGTH {
            return Err(Error::invalid("codes", format!("code length {n} outside 1..={MAX_LENGTH}")));
        }
        let mask = full_mask(n);
        let mut echelon: Vec<(u32, u64)> = Vec::new();
        for (row, &g) in generators.iter().enumerate() {
            if g & !mask != 0 {
                return Err(Error::invalid(
                    "codes",
                    format!("generator row {row} has bits beyond length {n}"),
                ));
            }
            if g == 0 {
                return Err(Error::invalid("codes", format!("generator row {row} is the zero word")));
            }
            let r = reduce_by(&echelon, g);
            if r == 0 {
                return Err(Error::invalid(
                    "codes",
                    format!("generator row {row} ({}) is dependent on the previous rows", format_word(g, n)),
                ));
            }
            let p = 63 - r.leading_zeros();
            for (_, e) in echelon.iter_mut() {
                if *e >> p & 1 == 1 {
                    *e ^= r;
                }
            }
            let at = echelon.partition_point(|(q, _)| *q > p);
            echelon.insert(at, (p, r));
        }
        Ok(BinaryCode { n, generators, echelon })
    }

    pub fn trivial(n: u32) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    pub fn from_strings<S: AsRef<str>>(n: u32, rows: &[S]) -> Result<Self> {
        let gens = rows.iter().map(|s| parse_word(s.as_ref(), n)).collect::<Result<Vec<_>>>()?;
        Self::new(n, gens)
    }

    pub fn length(&self) -> u32 {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.echelon.len()
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn generator_strings(&self) -> Vec<String> {
        self.generators.iter().map(|&g| format_word(g, self.n)).collect()
    }

    pub fn echelon_rows(&self) -> impl Iterator<Item = u64> + '_ {
        self.echelon.iter().map(|&(_, r)| r)
    }

    pub fn pivot_mask(&self) -> u64 {
        self.echelon.iter().fold(0, |m, &(p, _)| m | 1u64 << p)
    }

    pub fn contains(&self, w: u64) -> bool {
        reduce_by(&self.echelon, w) == 0
    }

    /// The numerically (equivalently lexicographically) smallest member of `w + L`.
    pub fn coset_min(&self, w: u64) -> u64 {
        reduce_by(&self.echelon, w)
    }

    /// Minimum Hamming weight within the coset `w + L`.
    pub fn coset_min_weight(&self, w: u64) -> u32 {
        let rows: Vec<u64> = self.echelon_rows().collect();
        let mut best = weight(w);
        let mut cur = w;
        for i in 1u64..(1u64 << rows.len()) {
            cur ^= rows[i.trailing_zeros() as usize];
            best = best.min(weight(cur));
        }
        best
    }

    /// Member of `w + L` of minimum weight, ties broken by numeric value.
    pub fn coset_min_weight_member(&self, w: u64) -> u64 {
        let rows: Vec<u64> = self.echelon_rows().collect();
        let mut best = w;
        let mut cur = w;
        for i in 1u64..(1u64 << rows.len()) {
            cur ^= rows[i.trailing_zeros() as usize];
            if (weight(cur), cur) < (weight(best), best) {
                best = cur;
            }
        }
        best
    }

    /// All codewords in Gray-code order, starting with zero.
    pub fn codewords(&self) -> Result<Vec<u64>> {
        let k = self.dimension();
        if k > MAX_ENUMERATED_DIMENSION {
            return Err(Error::resource(
                "codes",
                format!("dimension {k} exceeds the enumeration bound {MAX_ENUMERATED_DIMENSION}"),
            ));
        }
        let rows: Vec<u64> = self.echelon_rows().collect();
        let mut out = Vec::with_capacity(1 << k);
        let mut cur = 0u64;
        out.push(cur);
        for i in 1u64..(1u64 << k) {
            cur ^= rows[i.trailing_zeros() as usize];
            out.push(cur);
        }
        Ok(out)
    }

    /// Canonical coset representatives (pivot positions cleared), ascending.
    ///
    /// These are generated directly, so no pass over the full space is needed.
    pub fn coset_representatives(&self) -> Result<Vec<u64>> {
        let free = self.n as usize - self.dimension();
        if free > 30 {
            return Err(Error::resource("codes", format!("2^{free} cosets is beyond the supported size")));
        }
        let pivots = self.pivot_mask();
        let free_bits: Vec<u64> = (0..self.n).map(|b| 1u64 << b).filter(|b| pivots & b == 0).collect();
        let mut reps: Vec<u64> = (0u64..(1u64 << free))
            .map(|i| {
                free_bits.iter().enumerate().fold(0, |w, (j, &b)| if i >> j & 1 == 1 { w | b } else { w })
            })
            .collect();
        reps.sort_unstable();
        Ok(reps)
    }
}

fn reduce_by(echelon: &[(u32, u64)], mut w: u64) -> u64 {
    for &(p, r) in echelon {
        if w >> p & 1 == 1 {
            w ^= r;
        }
    }
    w
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CodeReport {
    pub size: u64,
    pub weight_distribution: BTreeMap<u32, u64>,
    pub is_even: bool,
    pub is_doubly_even: bool,
}

pub fn analyze_code(code: &BinaryCode) -> Result<CodeReport> {
    let words = code.codewords()?;
    let mut dist = BTreeMap::new();
    for &w in &words {
        *dist.entry(weight(w)).or_insert(0u64) += 1;
    }
    Ok(CodeReport {
        size: words.len() as u64,
        is_even: dist.keys().all(|w| w % 2 == 0),
        is_doubly_even: dist.keys().all(|w| w % 4 == 0),
        weight_distribution: dist,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Coset {
    pub representative: u64,
    pub members: Vec<u64>,
}

pub fn enumerate_cosets(code: &BinaryCode) -> Result<Vec<Coset>> {
    enumerate_cosets_bounded(code, DEFAULT_COSET_BOUND)
}

/// Partitions GF(2)^N into cosets of the code by scanning the whole space.
pub fn enumerate_cosets_bounded(code: &BinaryCode, bound: u32) -> Result<Vec<Coset>> {
    let n = code.length();
    if n > bound {
        return Err(Error::resource(
            "codes",
            format!("length {n} exceeds the full-space enumeration bound {bound}"),
        ));
    }
    let mut by_rep: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for w in 0u64..(1u64 << n) {
        by_rep.entry(code.coset_min(w)).or_default().push(w);
    }
    Ok(by_rep.into_iter().map(|(representative, members)| Coset { representative, members }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn trivial_code_is_doubly_even() {
        let r = analyze_code(&BinaryCode::trivial(4).unwrap()).unwrap();
        assert_eq!(r.size, 1);
        assert!(r.is_doubly_even && r.is_even);
    }

    #[test]
    fn all_ones_weights() {
        let c = BinaryCode::from_strings(4, &["1111"]).unwrap();
        let r = analyze_code(&c).unwrap();
        assert_eq!(r.weight_distribution, BTreeMap::from([(0, 1), (4, 1)]));
        assert!(r.is_doubly_even);
    }

    #[test]
    fn weight_two_is_even_only() {
        let r = analyze_code(&BinaryCode::from_strings(4, &["1100"]).unwrap()).unwrap();
        assert!(r.is_even && !r.is_doubly_even);
    }

    #[test]
    fn dependent_row_reports_index() {
        let e = BinaryCode::from_strings(4, &["1100", "0011", "1111"]).unwrap_err();
        assert!(e.message().contains("row 2"), "{e}");
        let z = BinaryCode::from_strings(3, &["101", "000"]).unwrap_err();
        assert!(z.message().contains("row 1"), "{z}");
    }

    #[test]
    fn string_round_trip_is_msb_first() {
        assert_eq!(parse_word("1100", 4).unwrap(), 12);
        assert_eq!(format_word(12, 4), "1100");
        assert_eq!(color_bit(4, 1), 8);
    }

    #[test]
    fn coset_examples() {
        let t = enumerate_cosets(&BinaryCode::trivial(2).unwrap()).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|c| c.members.len() == 1));

        let c = BinaryCode::from_strings(4, &["1111"]).unwrap();
        let cs = enumerate_cosets(&c).unwrap();
        assert_eq!(cs.len(), 8);
        assert!(cs.iter().all(|c| c.members.len() == 2));

        let c = BinaryCode::from_strings(3, &["110", "011"]).unwrap();
        let cs = enumerate_cosets(&c).unwrap();
        assert_eq!(cs.iter().map(|c| c.members.len()).collect::<Vec<_>>(), vec![4, 4]);
    }

    #[test]
    fn representatives_are_members_minimum() {
        let c = BinaryCode::from_strings(6, &["111100", "001111"]).unwrap();
        let cs = enumerate_cosets(&c).unwrap();
        for coset in &cs {
            assert_eq!(coset.representative, *coset.members.iter().min().unwrap());
        }
        let direct: Vec<u64> = cs.iter().map(|c| c.representative).collect();
        assert_eq!(direct, c.coset_representatives().unwrap());
    }

    #[test]
    fn oversized_space_is_resource_error() {
        let c = BinaryCode::trivial(17).unwrap();
        assert!(enumerate_cosets(&c).unwrap_err().is_resource());
    }

    #[test]
    fn min_weight_member() {
        let c = BinaryCode::from_strings(4, &["1111"]).unwrap();
        // 0111 has the weight-1 partner 1000
        assert_eq!(c.coset_min_weight_member(0b0111), 0b1000);
        assert_eq!(c.coset_min_weight(0b0111), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn code_strategy() -> impl Strategy<Value = BinaryCode> {
            (1u32..=10).prop_flat_map(|n| {
                proptest::collection::vec(1u64..(1u64 << n), 0..=n as usize).prop_map(move |rows| {
                    let mut kept = Vec::new();
                    for r in rows {
                        let mut trial = kept.clone();
                        trial.push(r);
                        if BinaryCode::new(n, trial.clone()).is_ok() {
                            kept = trial;
                        }
                    }
                    BinaryCode::new(n, kept).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn cosets_partition_space(code in code_strategy()) {
                let cs = enumerate_cosets(&code).unwrap();
                let size = 1usize << code.dimension();
                prop_assert_eq!(cs.len() * size, 1usize << code.length());
                let mut all: Vec<u64> = cs.iter().flat_map(|c| c.members.iter().copied()).collect();
                all.sort_unstable();
                all.dedup();
                prop_assert_eq!(all.len(), 1usize << code.length());
            }

            #[test]
            fn report_counts_sum_to_size(code in code_strategy()) {
                let r = analyze_code(&code).unwrap();
                prop_assert_eq!(r.weight_distribution.values().sum::<u64>(), r.size);
                prop_assert_eq!(r.size, 1u64 << code.dimension());
                prop_assert!(!r.is_doubly_even || r.is_even);
            }

            #[test]
            fn doubly_even_closed_under_sums(code in code_strategy()) {
                let r = analyze_code(&code).unwrap();
                if r.is_doubly_even {
                    let g = code.generators();
                    for a in g { for b in g { prop_assert_eq!(weight(a ^ b) % 4, 0); } }
                }
            }
        }
    }
}
