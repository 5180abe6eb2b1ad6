//! Permutations of `{1..n}` for `n <= 16`, Bruhat order, descents and the
//! block-doubling map.

mod interval;
mod pairs;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use interval::{for_each_below, lower_interval, IntervalConstraints};
pub use pairs::{cancelable_indices, cancelable_reduce, canonicalize, PairKey};

/// Largest supported degree.
pub const MAX_DEGREE: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PermError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("degree {0} exceeds the supported maximum of 16")]
    DegreeTooLarge(usize),
    #[error("not a bijection of 1..{n}: {images:?}")]
    NotBijection { n: usize, images: Vec<usize> },
    #[error("cannot parse permutation `{0}`")]
    Parse(String),
    #[error("simple reflection s_{i} does not exist in S_{n}")]
    BadSimple { i: usize, n: usize },
}

/// A permutation in one-line notation.
///
/// Stored 0-based in a fixed array; entries past the degree are zero so the
/// derived ordering is lexicographic on one-line notation within a degree.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    len: u8,
    img: [u8; MAX_DEGREE],
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_DEGREE, "degree {n} too large");
        let mut img = [0u8; MAX_DEGREE];
        for (i, v) in img.iter_mut().enumerate().take(n) {
            *v = i as u8;
        }
        Permutation { len: n as u8, img }
    }

    /// Builds a permutation from 1-based one-line notation.
    pub fn from_one_line(images: &[usize]) -> Result<Self, PermError> {
        let n = images.len();
        if n > MAX_DEGREE {
            return Err(PermError::DegreeTooLarge(n));
        }
        let mut seen = 0u32;
        let mut img = [0u8; MAX_DEGREE];
        for (i, &v) in images.iter().enumerate() {
            if v == 0 || v > n || seen & (1 << (v - 1)) != 0 {
                return Err(PermError::NotBijection { n, images: images.to_vec() });
            }
            seen |= 1 << (v - 1);
            img[i] = (v - 1) as u8;
        }
        Ok(Permutation { len: n as u8, img })
    }

    /// Builds a permutation from 0-based images. Panics if not a bijection.
    pub fn from_zero_based(images: &[u8]) -> Self {
        let n = images.len();
        assert!(n <= MAX_DEGREE);
        let mut img = [0u8; MAX_DEGREE];
        img[..n].copy_from_slice(images);
        let p = Permutation { len: n as u8, img };
        debug_assert!(p.is_valid(), "not a permutation: {images:?}");
        p
    }

    fn is_valid(&self) -> bool {
        let mut seen = 0u32;
        for &v in self.as_slice() {
            if v as usize >= self.degree() || seen & (1 << v) != 0 {
                return false;
            }
            seen |= 1 << v;
        }
        true
    }

    /// Simple reflection `s_i` (1-based, `1 <= i < n`).
    pub fn simple(n: usize, i: usize) -> Result<Self, PermError> {
        if i == 0 || i >= n {
            return Err(PermError::BadSimple { i, n });
        }
        Ok(Self::identity(n).mul_simple_right(i))
    }

    /// The longest element `w_0 = (n n-1 ... 1)`.
    pub fn longest(n: usize) -> Self {
        let mut img = [0u8; MAX_DEGREE];
        for (i, v) in img.iter_mut().enumerate().take(n) {
            *v = (n - 1 - i) as u8;
        }
        Permutation { len: n as u8, img }
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.len as usize
    }

    /// 0-based one-line notation.
    #[inline]
    pub fn as_slice(&self) -> &[u8] {
        &self.img[..self.len as usize]
    }

    /// 1-based one-line notation.
    pub fn one_line(&self) -> Vec<usize> {
        self.as_slice().iter().map(|&v| v as usize + 1).collect()
    }

    /// `w(i)` with 1-based argument and value.
    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.img[i - 1] as usize + 1
    }

    pub fn is_identity(&self) -> bool {
        self.as_slice().iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    pub fn inverse(&self) -> Self {
        let mut img = [0u8; MAX_DEGREE];
        for (i, &v) in self.as_slice().iter().enumerate() {
            img[v as usize] = i as u8;
        }
        Permutation { len: self.len, img }
    }

    /// `(a ∘ b)(i) = a(b(i))`.
    pub fn compose(a: &Self, b: &Self) -> Result<Self, PermError> {
        if a.len != b.len {
            return Err(PermError::DegreeMismatch(a.degree(), b.degree()));
        }
        Ok(a.then_unchecked(b))
    }

    #[inline]
    fn then_unchecked(&self, b: &Self) -> Self {
        let mut img = [0u8; MAX_DEGREE];
        for i in 0..self.degree() {
            img[i] = self.img[b.img[i] as usize];
        }
        Permutation { len: self.len, img }
    }

    /// `w s_i`: swaps positions `i` and `i+1`.
    #[inline]
    pub fn mul_simple_right(&self, i: usize) -> Self {
        let mut p = *self;
        p.img.swap(i - 1, i);
        p
    }

    /// `s_i w`: swaps values `i` and `i+1`.
    #[inline]
    pub fn mul_simple_left(&self, i: usize) -> Self {
        let mut p = *self;
        let (a, b) = ((i - 1) as u8, i as u8);
        for v in p.img[..self.degree()].iter_mut() {
            if *v == a {
                *v = b;
            } else if *v == b {
                *v = a;
            }
        }
        p
    }

    /// Number of inversions.
    pub fn length(&self) -> usize {
        let s = self.as_slice();
        let mut seen = 0u32;
        let mut inv = 0;
        for &v in s {
            // values already placed that are larger than v
            inv += (seen >> v).count_ones() as usize;
            seen |= 1 << v;
        }
        inv
    }

    pub fn sign(&self) -> i64 {
        if self.length() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn has_right_descent(&self, i: usize) -> bool {
        self.img[i - 1] > self.img[i]
    }

    /// `s_i w < w`, i.e. value `i+1` appears before value `i`.
    #[inline]
    pub fn has_left_descent(&self, i: usize) -> bool {
        self.position_of(i + 1) < self.position_of(i)
    }

    /// 1-based position holding the 1-based value `v`.
    #[inline]
    pub fn position_of(&self, v: usize) -> usize {
        self.as_slice()
            .iter()
            .position(|&x| x as usize == v - 1)
            .expect("value out of range")
            + 1
    }

    /// Right descent set as a bit mask: bit `i` set iff `w(i) > w(i+1)`.
    pub fn right_descent_mask(&self) -> u32 {
        let s = self.as_slice();
        let mut m = 0;
        for i in 1..s.len() {
            if s[i - 1] > s[i] {
                m |= 1 << i;
            }
        }
        m
    }

    pub fn left_descent_mask(&self) -> u32 {
        self.inverse().right_descent_mask()
    }

    /// Right descent set `{i : w(i) > w(i+1)}`.
    pub fn descents(&self) -> Vec<usize> {
        mask_to_indices(self.right_descent_mask())
    }

    pub fn left_descents(&self) -> Vec<usize> {
        mask_to_indices(self.left_descent_mask())
    }

    pub fn first_right_descent(&self) -> Option<usize> {
        let m = self.right_descent_mask();
        (m != 0).then(|| m.trailing_zeros() as usize)
    }

    pub fn first_left_descent(&self) -> Option<usize> {
        let m = self.left_descent_mask();
        (m != 0).then(|| m.trailing_zeros() as usize)
    }

    /// Bruhat order test `self <= w` by the rank-matrix dominance criterion.
    pub fn bruhat_leq(&self, w: &Self) -> Result<bool, PermError> {
        if self.len != w.len {
            return Err(PermError::DegreeMismatch(self.degree(), w.degree()));
        }
        Ok(self.bruhat_le(w))
    }

    /// Unchecked Bruhat test; degrees must agree.
    #[inline]
    pub fn bruhat_le(&self, w: &Self) -> bool {
        debug_assert_eq!(self.len, w.len);
        let n = self.degree();
        let mut px = 0u32;
        let mut pw = 0u32;
        for i in 0..n.saturating_sub(1) {
            px |= 1 << self.img[i];
            pw |= 1 << w.img[i];
            if px == pw {
                continue;
            }
            // #{k <= i : x(k) >= j} <= #{k <= i : w(k) >= j} for every j
            for j in 1..n {
                if (px >> j).count_ones() > (pw >> j).count_ones() {
                    return false;
                }
            }
        }
        true
    }

    /// The `m`-fold doubling `w~(mi - j) = m w(i) - j`, `0 <= j < m`.
    pub fn double(&self, m: usize) -> Self {
        assert!(m >= 1);
        let n = self.degree();
        assert!(n * m <= MAX_DEGREE, "doubled degree too large");
        let mut img = [0u8; MAX_DEGREE];
        for i in 0..n {
            for j in 0..m {
                img[m * i + j] = (m * self.img[i] as usize + j) as u8;
            }
        }
        Permutation { len: (n * m) as u8, img }
    }

    /// `a ⊕ b`: `a` on the first block, `b` shifted on the second.
    pub fn direct_sum(a: &Self, b: &Self) -> Self {
        let n = a.degree() + b.degree();
        assert!(n <= MAX_DEGREE);
        let mut img = [0u8; MAX_DEGREE];
        img[..a.degree()].copy_from_slice(a.as_slice());
        for (i, &v) in b.as_slice().iter().enumerate() {
            img[a.degree() + i] = v + a.len;
        }
        Permutation { len: n as u8, img }
    }

    /// `w_0 w w_0`.
    pub fn conj_longest(&self) -> Self {
        let n = self.degree();
        let mut img = [0u8; MAX_DEGREE];
        for i in 0..n {
            img[i] = (n - 1) as u8 - self.img[n - 1 - i];
        }
        Permutation { len: self.len, img }
    }

    /// Number of cycles of length at least two.
    pub fn nontrivial_cycles(&self) -> usize {
        let n = self.degree();
        let mut seen = 0u32;
        let mut count = 0;
        for start in 0..n {
            if seen & (1 << start) != 0 {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while seen & (1 << i) == 0 {
                seen |= 1 << i;
                i = self.img[i] as usize;
                len += 1;
            }
            if len > 1 {
                count += 1;
            }
        }
        count
    }

    /// Advances to the next permutation in lexicographic order.
    pub fn next_lex(&self) -> Option<Self> {
        let mut p = *self;
        let s = &mut p.img[..self.degree()];
        let n = s.len();
        if n < 2 {
            return None;
        }
        let mut i = n - 1;
        while i > 0 && s[i - 1] >= s[i] {
            i -= 1;
        }
        if i == 0 {
            return None;
        }
        let mut j = n - 1;
        while s[j] <= s[i - 1] {
            j -= 1;
        }
        s.swap(i - 1, j);
        s[i..].reverse();
        Some(p)
    }

    /// All of `S_n` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        std::iter::successors(Some(Self::identity(n)), |p| p.next_lex())
    }

    /// Compact digit string: 1-based digits, `a..g` for 10..16.
    pub fn to_compact(&self) -> String {
        self.as_slice()
            .iter()
            .map(|&v| char::from_digit(v as u32 + 1, 17).expect("digit"))
            .collect()
    }

    /// Compact digit string with 0-based hex digits, as used for `S_12` tables.
    pub fn to_zero_based_hex(&self) -> String {
        self.as_slice()
            .iter()
            .map(|&v| char::from_digit(v as u32, 16).expect("digit"))
            .collect()
    }
}

pub(crate) fn mask_to_indices(mut m: u32) -> Vec<usize> {
    let mut out = Vec::new();
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_compact())
    }
}

impl FromStr for Permutation {
    type Err = PermError;

    /// Accepts `3412`, `[3,4,1,2]`, `3,4,1,2`, or a 0-based hex string such
    /// as `35608ab12794` (recognized by the presence of `0`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || PermError::Parse(s.to_string());
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .or_else(|| t.strip_prefix('(').and_then(|r| r.strip_suffix(')')))
            .unwrap_or(t)
            .trim();
        if inner.is_empty() {
            return Ok(Self::identity(0));
        }
        if inner.contains(',') || inner.contains(' ') {
            let images = inner
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|p| !p.is_empty())
                .map(|p| p.parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()?;
            return Self::from_one_line(&images);
        }
        let digits = inner
            .chars()
            .map(|c| c.to_digit(17).map(|d| d as usize).ok_or_else(bad))
            .collect::<Result<Vec<_>, _>>()?;
        let images: Vec<usize> = if digits.contains(&0) {
            digits.iter().map(|d| d + 1).collect()
        } else {
            digits
        };
        Self::from_one_line(&images)
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.one_line().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(deserializer)?;
        Permutation::from_one_line(&v).map_err(serde::de::Error::custom)
    }
}
