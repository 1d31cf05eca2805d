//! Codings and fixed-size set representations.
//!
//! A [`BitVector`] is simultaneously a subset of `{0,…,N−1}`, a binary string
//! of length `N`, and a cylinder prefix. Position 0 is the leftmost character
//! of the string form.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniverseError {
    #[error("universe size must be at least 1")]
    EmptyUniverse,
    #[error("index {index} outside universe of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("pairing overflow for ({0}, {1})")]
    PairOverflow(u64, u64),
    #[error("finite-set code {code} has bit {bit} outside universe of size {size}")]
    CodeOutOfUniverse { code: u64, bit: usize, size: usize },
    #[error("universe of size {0} does not fit a 64-bit code")]
    TooWideForCode(usize),
    #[error("repeated element {0} in enumeration")]
    RepeatedElement(usize),
    #[error("malformed set text: {0}")]
    Malformed(String),
}

/// Number of points in the finite universe `{0,…,N−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Universe(usize);

impl Universe {
    pub fn new(size: usize) -> Result<Self, UniverseError> {
        if size == 0 {
            return Err(UniverseError::EmptyUniverse);
        }
        Ok(Universe(size))
    }

    #[inline]
    pub fn size(self) -> usize {
        self.0
    }

    pub fn check(self, index: usize) -> Result<(), UniverseError> {
        if index < self.0 {
            Ok(())
        } else {
            Err(UniverseError::IndexOutOfRange {
                index,
                size: self.0,
            })
        }
    }

    /// Default largeness threshold `⌈3N/4⌉`, kept below `N` so tiny
    /// universes still have room above it.
    pub fn default_tau(self) -> usize {
        (3 * self.0).div_ceil(4).min(self.0 - 1)
    }
}

/// Cantor pairing `(x+y)(x+y+1)/2 + y`.
pub fn pair(x: u64, y: u64) -> Result<u64, UniverseError> {
    let overflow = || UniverseError::PairOverflow(x, y);
    let s = x.checked_add(y).ok_or_else(overflow)?;
    let s1 = s.checked_add(1).ok_or_else(overflow)?;
    // one of s, s+1 is even
    let tri = if s % 2 == 0 {
        (s / 2).checked_mul(s1)
    } else {
        s.checked_mul(s1 / 2)
    }
    .ok_or_else(overflow)?;
    tri.checked_add(y).ok_or_else(overflow)
}

pub fn unpair(z: u64) -> (u64, u64) {
    // w = floor((sqrt(8z+1)-1)/2), corrected for float error
    let mut w = ((((8.0 * z as f64) + 1.0).sqrt() - 1.0) / 2.0) as u64;
    let tri = |w: u64| w as u128 * (w as u128 + 1) / 2;
    while tri(w) > z as u128 {
        w -= 1;
    }
    while tri(w + 1) <= z as u128 {
        w += 1;
    }
    let y = (z as u128 - tri(w)) as u64;
    (w - y, y)
}

/// Canonical finite set `D_y`: the positions of the 1-bits of `code`.
pub fn decode_finite_set(code: u64, universe: Universe) -> Result<BitVector, UniverseError> {
    let size = universe.size();
    if size < 64 && code >> size != 0 {
        let bit = 63 - code.leading_zeros() as usize;
        return Err(UniverseError::CodeOutOfUniverse { code, bit, size });
    }
    let mut v = BitVector::zeros(size);
    v.words[0] = code;
    Ok(v)
}

pub fn encode_finite_set(set: &BitVector) -> Result<u64, UniverseError> {
    set.to_u64().ok_or(UniverseError::TooWideForCode(set.len()))
}

const WORD: usize = 64;

/// Fixed-length bit string, read as a set, a string, or a cylinder prefix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; len.div_ceil(WORD).max(1)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for w in &mut v.words {
            *w = u64::MAX;
        }
        v.clear_tail();
        v
    }

    pub fn empty_set(universe: Universe) -> Self {
        Self::zeros(universe.size())
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut v = Self::zeros(0);
        for b in bits {
            v.push(b);
        }
        v
    }

    pub fn from_indices<I>(len: usize, indices: I) -> Result<Self, UniverseError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut v = Self::zeros(len);
        for i in indices {
            if i >= len {
                return Err(UniverseError::IndexOutOfRange {
                    index: i,
                    size: len,
                });
            }
            v.set(i, true);
        }
        Ok(v)
    }

    /// Low `len` bits of `bits`, bit `i` at position `i`.
    pub fn from_u64(len: usize, bits: u64) -> Self {
        let mut v = Self::zeros(len);
        v.words[0] = bits;
        v.clear_tail();
        v
    }

    /// A uniformly random string of length `len`.
    pub fn random<R: rand::Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut().take(len.div_ceil(WORD)) {
            *w = rng.gen();
        }
        v.clear_tail();
        v
    }

    pub fn to_u64(&self) -> Option<u64> {
        if self.len > 64 {
            None
        } else {
            Some(self.words[0])
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Bit at `i`; positions at or past the length read as 0.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.len && (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    /// # Panics
    /// If `i` is past the end.
    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn push(&mut self, value: bool) {
        self.len += 1;
        if self.len > self.words.len() * WORD {
            self.words.push(0);
        }
        self.set(self.len - 1, value);
    }

    pub fn flip(&self, n: usize) -> Result<Self, UniverseError> {
        self.check_index(n)?;
        let mut v = self.clone();
        v.words[n / WORD] ^= 1u64 << (n % WORD);
        Ok(v)
    }

    /// `A − {n}`.
    pub fn mask(&self, n: usize) -> Result<Self, UniverseError> {
        self.check_index(n)?;
        let mut v = self.clone();
        v.set(n, false);
        Ok(v)
    }

    pub fn complement(&self) -> Self {
        let mut v = self.clone();
        for w in &mut v.words {
            *w = !*w;
        }
        v.clear_tail();
        v
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & !b)
    }

    /// Set inclusion; lengths may differ, missing positions are absent.
    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().enumerate().all(|(k, &w)| {
            let o = other.words.get(k).copied().unwrap_or(0);
            w & !o == 0
        })
    }

    pub fn is_proper_subset(&self, other: &Self) -> bool {
        self.is_subset(other) && !other.is_subset(self)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Members in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let t = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(k * WORD + t)
            })
        })
    }

    pub fn first_one_from(&self, start: usize) -> Option<usize> {
        self.ones().find(|&x| x >= start)
    }

    pub fn max_element(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * WORD + 63 - w.leading_zeros() as usize)
    }

    /// String restriction `A↾[start, end)` as a string of length `end − start`.
    pub fn slice(&self, range: Range<usize>) -> Self {
        let mut v = Self::zeros(range.end.saturating_sub(range.start));
        for (k, i) in range.enumerate() {
            if self.get(i) {
                v.set(k, true);
            }
        }
        v
    }

    /// `A↾n`.
    pub fn prefix(&self, n: usize) -> Self {
        self.slice(0..n)
    }

    /// Same set, stored at length `len`; members at or past `len` are dropped.
    pub fn resized(&self, len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in self.ones().take_while(|&i| i < len) {
            v.set(i, true);
        }
        v
    }

    /// The set with every member below `n` removed.
    pub fn drop_below(&self, n: usize) -> Self {
        let mut v = self.clone();
        for i in 0..n.min(self.len) {
            v.set(i, false);
        }
        v
    }

    /// The set with every member at or above `n` removed.
    pub fn keep_below(&self, n: usize) -> Self {
        let mut v = Self::zeros(self.len);
        for i in self.ones().take_while(|&i| i < n) {
            v.set(i, true);
        }
        v
    }

    /// String concatenation.
    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.clone();
        for i in 0..other.len {
            v.push(other.get(i));
        }
        v
    }

    /// `prefix · self↾[|prefix|, len)`: the bits of `prefix` overwrite the low
    /// positions, the rest comes from `self`.
    pub fn overlay_prefix(&self, prefix: &Self) -> Self {
        let mut v = self.clone();
        for i in 0..prefix.len.min(self.len) {
            v.set(i, prefix.get(i));
        }
        v
    }

    pub fn contains_at_least(&self, threshold: usize) -> bool {
        self.max_element().is_some_and(|m| m >= threshold)
    }

    /// Element-list text form, `set: 1,3,5`.
    pub fn to_set_line(&self) -> String {
        let items: Vec<String> = self.ones().map(|i| i.to_string()).collect();
        format!("set: {}", items.join(","))
    }

    /// Reads either the string form (`0101`) or the element-list form
    /// (`set: 1,3`). The element-list form needs the universe; when the
    /// universe is given the string form must match its size.
    pub fn parse_line(line: &str, universe: Option<Universe>) -> Result<Self, UniverseError> {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("set:") {
            let size = universe
                .ok_or_else(|| UniverseError::Malformed("element list needs a universe".into()))?
                .size();
            let rest = rest.trim();
            if rest.is_empty() {
                return Ok(Self::zeros(size));
            }
            let mut v = Self::zeros(size);
            for tok in rest.split(',') {
                let i: usize = tok
                    .trim()
                    .parse()
                    .map_err(|_| UniverseError::Malformed(format!("bad element {tok:?}")))?;
                universe.expect("checked").check(i)?;
                v.set(i, true);
            }
            return Ok(v);
        }
        let v: BitVector = line.parse()?;
        if let Some(u) = universe {
            if v.len() != u.size() {
                return Err(UniverseError::Malformed(format!(
                    "string of length {} in universe of size {}",
                    v.len(),
                    u.size()
                )));
            }
        }
        Ok(v)
    }

    fn check_index(&self, n: usize) -> Result<(), UniverseError> {
        if n < self.len {
            Ok(())
        } else {
            Err(UniverseError::IndexOutOfRange {
                index: n,
                size: self.len,
            })
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        let mut v = self.clone();
        for (k, w) in v.words.iter_mut().enumerate() {
            *w = f(*w, other.words.get(k).copied().unwrap_or(0));
        }
        v.clear_tail();
        v
    }

    fn clear_tail(&mut self) {
        let used = self.len.div_ceil(WORD);
        for w in self.words.iter_mut().skip(used.max(1)) {
            *w = 0;
        }
        if self.len == 0 {
            self.words[0] = 0;
        } else if !self.len.is_multiple_of(WORD) {
            self.words[used - 1] &= (1u64 << (self.len % WORD)) - 1;
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = UniverseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut v = BitVector::zeros(0);
        for c in s.trim().chars() {
            match c {
                '0' => v.push(false),
                '1' => v.push(true),
                other => return Err(UniverseError::Malformed(format!("unexpected {other:?}"))),
            }
        }
        Ok(v)
    }
}

/// A finite enumeration of distinct elements of the universe, in the order
/// they are revealed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetEnumeration {
    universe: Universe,
    items: Vec<usize>,
}

impl SetEnumeration {
    pub fn new(universe: Universe, items: Vec<usize>) -> Result<Self, UniverseError> {
        let mut seen = BitVector::empty_set(universe);
        for &x in &items {
            universe.check(x)?;
            if seen.get(x) {
                return Err(UniverseError::RepeatedElement(x));
            }
            seen.set(x, true);
        }
        Ok(SetEnumeration { universe, items })
    }

    /// Members of `set` in increasing order.
    pub fn ascending(set: &BitVector) -> Self {
        SetEnumeration {
            universe: Universe(set.len().max(1)),
            items: set.ones().collect(),
        }
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::iter::Copied<std::slice::Iter<'_, usize>> {
        self.items.iter().copied()
    }

    /// The set enumerated once the stream is exhausted.
    pub fn to_set(&self) -> BitVector {
        let mut v = BitVector::empty_set(self.universe);
        for &x in &self.items {
            v.set(x, true);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn cantor_pairing_values() {
        assert_eq!(pair(0, 0).unwrap(), 0);
        assert_eq!(pair(1, 0).unwrap(), 1);
        assert_eq!(pair(2, 3).unwrap(), 18);
        assert!(pair(u64::MAX, 1).is_err());
        assert!(pair(1 << 33, 1 << 33).is_err());
    }

    #[test]
    fn pairing_round_trips_exhaustively() {
        for x in 0..1000u64 {
            for y in 0..1000u64 {
                assert_eq!(unpair(pair(x, y).unwrap()), (x, y));
            }
        }
        // bijective onto an initial segment
        let mut hit = vec![false; 500_500];
        for s in 0..1000u64 {
            for y in 0..=s {
                let z = pair(s - y, y).unwrap() as usize;
                assert!(!hit[z]);
                hit[z] = true;
            }
        }
        assert!(hit.iter().all(|&h| h));
    }

    #[test]
    fn finite_set_codes() {
        let u = Universe::new(4).unwrap();
        assert!(decode_finite_set(0, u).unwrap().is_empty());
        assert_eq!(decode_finite_set(5, u).unwrap(), bv("1010"));
        assert_eq!(decode_finite_set(12, u).unwrap(), bv("0011"));
        assert!(matches!(
            decode_finite_set(16, u),
            Err(UniverseError::CodeOutOfUniverse { bit: 4, .. })
        ));
    }

    #[test]
    fn finite_set_codes_invert_exhaustively() {
        for n in 1..=16 {
            let u = Universe::new(n).unwrap();
            for y in 0..(1u64 << n) {
                let d = decode_finite_set(y, u).unwrap();
                assert_eq!(encode_finite_set(&d).unwrap(), y);
                assert_eq!(
                    decode_finite_set(encode_finite_set(&d).unwrap(), u).unwrap(),
                    d
                );
            }
        }
    }

    #[test]
    fn flip_and_mask_examples() {
        assert_eq!(bv("000").flip(1).unwrap(), bv("010"));
        assert_eq!(bv("111").flip(0).unwrap(), bv("011"));
        assert_eq!(bv("111").mask(1).unwrap(), bv("101"));
        assert_eq!(bv("010").mask(1).unwrap(), bv("000"));
        assert_eq!(bv("000").mask(2).unwrap(), bv("000"));
        assert!(bv("000").flip(3).is_err());
        assert!(bv("000").mask(3).is_err());
    }

    #[test]
    fn set_text_forms() {
        let u = Universe::new(6).unwrap();
        let a = BitVector::parse_line("set: 1,3,5", Some(u)).unwrap();
        assert_eq!(a, bv("010101"));
        assert_eq!(a.to_set_line(), "set: 1,3,5");
        assert_eq!(a.to_string(), "010101");
        assert_eq!(BitVector::parse_line("010101", Some(u)).unwrap(), a);
        assert!(BitVector::parse_line("0101", Some(u)).is_err());
        assert!(BitVector::parse_line("set: 6", Some(u)).is_err());
        assert!(BitVector::parse_line("set: 1", None).is_err());
        assert!(BitVector::parse_line("set:", Some(u)).unwrap().is_empty());
    }

    #[test]
    fn wide_vectors_cross_word_boundaries() {
        let a = BitVector::from_indices(200, [0, 63, 64, 130, 199]).unwrap();
        assert_eq!(a.ones().collect::<Vec<_>>(), vec![0, 63, 64, 130, 199]);
        assert_eq!(a.max_element(), Some(199));
        assert_eq!(a.complement().count_ones(), 195);
        assert_eq!(a.slice(60..70).to_string(), "0001100000");
        assert_eq!(a.to_u64(), None);
    }

    #[test]
    fn enumeration_rejects_repeats() {
        let u = Universe::new(4).unwrap();
        assert!(SetEnumeration::new(u, vec![1, 2, 1]).is_err());
        assert!(SetEnumeration::new(u, vec![4]).is_err());
        let e = SetEnumeration::new(u, vec![3, 0]).unwrap();
        assert_eq!(e.to_set(), bv("1001"));
    }

    proptest! {
        #[test]
        fn mask_is_idempotent_and_flip_blind(bits in any::<u64>(), len in 1usize..64, n in 0usize..64) {
            let n = n % len;
            let a = BitVector::from_u64(len, bits);
            let m = a.mask(n).unwrap();
            prop_assert_eq!(m.mask(n).unwrap(), m.clone());
            prop_assert_eq!(a.flip(n).unwrap().mask(n).unwrap(), m.clone());
            prop_assert!(!m.get(n));
            prop_assert_eq!(a.flip(n).unwrap().flip(n).unwrap(), a);
        }

        #[test]
        fn string_form_round_trips(bits in proptest::collection::vec(any::<bool>(), 0..150)) {
            let v = BitVector::from_bools(bits.iter().copied());
            let back: BitVector = v.to_string().parse().unwrap();
            prop_assert_eq!(back, v);
        }
    }
}
