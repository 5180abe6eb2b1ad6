//! Reduced words, subword masks, the defect statistic and Deodhar's
//! polynomials, including the closed-form defects of doubled Boolean words.

use std::fmt;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::cosets::{neighbor_data, NeighborData};
use crate::perm::Permutation;
use crate::poly::Poly;
use crate::IntPolynomial;

/// Longest word accepted by exhaustive mask loops.
pub const MAX_MASK_WORD: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeodharError {
    #[error("position {0} out of range for a word of length {1}")]
    PositionOutOfRange(usize, usize),
    #[error("word has repeated letters (target is not Boolean)")]
    NotBoolean,
    #[error("word length {0} exceeds the mask enumeration cap of {MAX_MASK_WORD}")]
    TooLong(usize),
    #[error("letters {0:?} do not form a reduced word in S_{1}")]
    NotReduced(Vec<u8>, usize),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
}

/// A reduced decomposition `s_{j_1} ... s_{j_l}` of `target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ReducedWord {
    letters: Vec<u8>,
    target: Permutation,
}

impl ReducedWord {
    /// Checks reducedness by evaluating the letters.
    pub fn new(n: usize, letters: Vec<u8>) -> Result<Self, DeodharError> {
        let mut v = Permutation::identity(n);
        for &j in &letters {
            let j = j as usize;
            if j == 0 || j >= n.max(1) || v.has_right_descent(j) {
                return Err(DeodharError::NotReduced(letters, n));
            }
            v = v.mul_simple_right(j);
        }
        Ok(ReducedWord { letters, target: v })
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn target(&self) -> &Permutation {
        &self.target
    }

    pub fn degree(&self) -> usize {
        self.target.degree()
    }

    /// Letter `j_i` at 1-based position `i`.
    pub fn letter(&self, i: usize) -> usize {
        self.letters[i - 1] as usize
    }

    pub fn distinct_letters(&self) -> bool {
        let mut seen = 0u32;
        self.letters.iter().all(|&j| {
            let fresh = seen & (1 << j) == 0;
            seen |= 1 << j;
            fresh
        })
    }

    /// The reversed word, a reduced word for the inverse.
    pub fn reversed(&self) -> ReducedWord {
        let mut letters = self.letters.clone();
        letters.reverse();
        ReducedWord { letters, target: self.target.inverse() }
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(|j| format!("s{j}")).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Leftmost-descent reduced word: strip the smallest left descent repeatedly.
pub fn reduced_word(w: &Permutation) -> ReducedWord {
    let mut letters = Vec::with_capacity(w.length());
    let mut v = *w;
    while let Some(j) = v.first_left_descent() {
        letters.push(j as u8);
        v = v.mul_simple_left(j);
    }
    ReducedWord { letters, target: *w }
}

/// A 0/1 selector on the positions of a word; bit `i-1` is position `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mask {
    bits: u64,
    len: u8,
}

impl Mask {
    pub fn new(bits: u64, len: usize) -> Self {
        assert!(len <= 64);
        let keep = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        Mask { bits: bits & keep, len: len as u8 }
    }

    pub fn full(len: usize) -> Self {
        Mask::new(u64::MAX, len)
    }

    pub fn zero(len: usize) -> Self {
        Mask::new(0, len)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at 1-based position `i`.
    pub fn get(&self, i: usize) -> bool {
        self.bits >> (i - 1) & 1 == 1
    }

    pub fn is_full(&self) -> bool {
        self.bits.count_ones() as usize == self.len()
    }

    pub fn reversed(&self) -> Mask {
        let mut b = 0;
        for i in 0..self.len() {
            if self.bits >> i & 1 == 1 {
                b |= 1 << (self.len() - 1 - i);
            }
        }
        Mask::new(b, self.len())
    }

    /// `Π (-1)^{x_i}`, the sign of the evaluated subword.
    pub fn sign(&self) -> i64 {
        if self.bits.count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.len() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A mask on a doubled word, viewed as `l` quadruples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadMask {
    mask: Mask,
}

impl QuadMask {
    pub fn new(bits: u64, l: usize) -> Self {
        QuadMask { mask: Mask::new(bits, 4 * l) }
    }

    pub fn from_quads(quads: &[[u8; 4]]) -> Self {
        let mut bits = 0u64;
        for (i, q) in quads.iter().enumerate() {
            for (k, &b) in q.iter().enumerate() {
                if b != 0 {
                    bits |= 1 << (4 * i + k);
                }
            }
        }
        QuadMask::new(bits, quads.len())
    }

    pub fn flatten(&self) -> Mask {
        self.mask
    }

    pub fn l(&self) -> usize {
        self.mask.len() / 4
    }

    /// Quadruple `i` (1-based) as a nibble; bit `k-1` holds coordinate `k`.
    pub fn quad(&self, i: usize) -> u8 {
        (self.mask.bits >> (4 * (i - 1)) & 0xf) as u8
    }

    /// Coordinate `x_{i,k}`.
    pub fn get(&self, i: usize, k: usize) -> bool {
        self.mask.get(4 * (i - 1) + k)
    }
}

impl fmt::Display for QuadMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.mask.to_string();
        let groups: Vec<&str> = (0..self.l()).map(|i| &s[4 * i..4 * i + 4]).collect();
        f.write_str(&groups.join(" "))
    }
}

/// Defect data of a mask. Positions are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct DefectReport {
    pub defect_set: Vec<usize>,
    pub defect_count: usize,
    /// Defects at positions with bit 0.
    pub zero_defects: Vec<usize>,
    /// Non-defects at positions with bit 0.
    pub zero_nondefects: Vec<usize>,
}

impl DefectReport {
    fn from_defect_bits(defects: u64, mask: &Mask) -> Self {
        let zeros = !mask.bits() & Mask::full(mask.len()).bits();
        let list = |b: u64| (1..=mask.len()).filter(|&i| b >> (i - 1) & 1 == 1).collect::<Vec<_>>();
        DefectReport {
            defect_set: list(defects),
            defect_count: defects.count_ones() as usize,
            zero_defects: list(defects & zeros),
            zero_nondefects: list(!defects & zeros),
        }
    }
}

/// `π(𝐰^{(upto)}[mask])`: product of the selected letters among positions `1..=upto`.
pub fn subword_eval(word: &ReducedWord, mask: &Mask, upto: usize) -> Result<Permutation, DeodharError> {
    if upto > word.len() || mask.len() != word.len() {
        return Err(DeodharError::PositionOutOfRange(upto, word.len()));
    }
    let mut v = Permutation::identity(word.degree());
    for i in 1..=upto {
        if mask.get(i) {
            v = v.mul_simple_right(word.letter(i));
        }
    }
    Ok(v)
}

fn defect_bits(word: &ReducedWord, mask: &Mask) -> u64 {
    let mut v = Permutation::identity(word.degree());
    let mut d = 0u64;
    for i in 1..=word.len() {
        let j = word.letter(i);
        if v.has_right_descent(j) {
            d |= 1 << (i - 1);
        }
        if mask.get(i) {
            v = v.mul_simple_right(j);
        }
    }
    d
}

/// Position `i` is a defect iff the prefix product `v` of the first `i-1`
/// selected letters has `v(j_i) > v(j_i + 1)`.
pub fn defect(word: &ReducedWord, mask: &Mask) -> DefectReport {
    DefectReport::from_defect_bits(defect_bits(word, mask), mask)
}

/// Per-mask summary handed to [`walk_masks`] callbacks.
#[derive(Clone, Copy, Debug)]
pub struct MaskVisit {
    pub mask: u64,
    pub end: Permutation,
    pub defects: u32,
    pub zero_defects: u32,
    pub zero_nondefects: u32,
}

/// Depth-first walk over all `2^l` masks, sharing prefix products.
/// Returning `false` from `f` stops the walk; the result reports completion.
pub fn walk_masks<F: FnMut(&MaskVisit) -> bool>(word: &ReducedWord, mut f: F) -> bool {
    fn go<F: FnMut(&MaskVisit) -> bool>(
        letters: &[u8],
        i: usize,
        state: MaskVisit,
        f: &mut F,
    ) -> bool {
        if i == letters.len() {
            return f(&state);
        }
        let j = letters[i] as usize;
        let is_defect = state.end.has_right_descent(j);
        let mut zero = state;
        if is_defect {
            zero.defects += 1;
            zero.zero_defects += 1;
        } else {
            zero.zero_nondefects += 1;
        }
        if !go(letters, i + 1, zero, f) {
            return false;
        }
        let mut one = state;
        one.mask |= 1 << i;
        one.end = state.end.mul_simple_right(j);
        if is_defect {
            one.defects += 1;
        }
        go(letters, i + 1, one, f)
    }
    let start = MaskVisit {
        mask: 0,
        end: Permutation::identity(word.degree()),
        defects: 0,
        zero_defects: 0,
        zero_nondefects: 0,
    };
    go(word.letters(), 0, start, &mut f)
}

/// `P^𝐰_u = Σ q^{defect}` over masks evaluating to `u`.
pub fn deodhar_poly(word: &ReducedWord, u: &Permutation) -> Result<IntPolynomial, DeodharError> {
    if u.degree() != word.degree() {
        return Err(DeodharError::DegreeMismatch(u.degree(), word.degree()));
    }
    if word.len() > MAX_MASK_WORD {
        return Err(DeodharError::TooLong(word.len()));
    }
    let mut counts = vec![0u64; word.len() + 1];
    walk_masks(word, |v| {
        if v.end == *u {
            counts[v.defects as usize] += 1;
        }
        true
    });
    Ok(Poly::from_coeffs(counts))
}

/// `P^𝐰_u` for every `u` reached by some mask, in one walk.
pub fn deodhar_table(word: &ReducedWord) -> Result<FxHashMap<Permutation, IntPolynomial>, DeodharError> {
    if word.len() > MAX_MASK_WORD {
        return Err(DeodharError::TooLong(word.len()));
    }
    let mut counts: FxHashMap<Permutation, Vec<u64>> = FxHashMap::default();
    walk_masks(word, |v| {
        let c = counts.entry(v.end).or_insert_with(|| vec![0; word.len() + 1]);
        c[v.defects as usize] += 1;
        true
    });
    Ok(counts.into_iter().map(|(u, c)| (u, Poly::from_coeffs(c))).collect())
}

/// Mask criterion for tightness: every non-full mask has `|E⁰| > |D⁰|`.
pub fn is_tight_word(word: &ReducedWord) -> Result<bool, DeodharError> {
    Ok(tightness_witness(word)?.is_none())
}

/// The first non-full mask with `|E⁰| <= |D⁰|`, if any.
pub fn tightness_witness(word: &ReducedWord) -> Result<Option<Mask>, DeodharError> {
    let l = word.len();
    if l > MAX_MASK_WORD {
        return Err(DeodharError::TooLong(l));
    }
    let full = Mask::full(l).bits();
    let mut bad = None;
    walk_masks(word, |v| {
        if v.mask != full && v.zero_nondefects <= v.zero_defects {
            bad = Some(Mask::new(v.mask, l));
            return false;
        }
        true
    });
    Ok(bad)
}

/// `s_{2j} s_{2j-1} s_{2j+1} s_{2j}` for every letter `j`, a reduced word for
/// the 2-fold doubling of the target.
pub fn doubled_word(word: &ReducedWord) -> Result<ReducedWord, DeodharError> {
    if !word.distinct_letters() {
        return Err(DeodharError::NotBoolean);
    }
    let letters = word
        .letters()
        .iter()
        .flat_map(|&j| [2 * j, 2 * j - 1, 2 * j + 1, 2 * j])
        .collect();
    Ok(ReducedWord { letters, target: word.target().double(2) })
}

/// Nibble pattern over quadruple coordinates; `b'*'` is a wildcard.
const fn quad_pattern(p: &[u8; 4]) -> (u8, u8) {
    let mut care = 0;
    let mut val = 0;
    let mut k = 0;
    while k < 4 {
        if p[k] != b'*' {
            care |= 1 << k;
            if p[k] == b'1' {
                val |= 1 << k;
            }
        }
        k += 1;
    }
    (care, val)
}

#[inline]
pub(crate) fn quad_is(q: u8, pat: (u8, u8)) -> bool {
    q & pat.0 == pat.1
}

pub(crate) const Q_1101: (u8, u8) = quad_pattern(b"1101");
pub(crate) const Q_X1X0: (u8, u8) = quad_pattern(b"*1*0");
pub(crate) const Q_1011: (u8, u8) = quad_pattern(b"1011");
pub(crate) const Q_XX10: (u8, u8) = quad_pattern(b"**10");
const Q_0XXX: (u8, u8) = quad_pattern(b"0***");
const Q_100X: (u8, u8) = quad_pattern(b"100*");
const Q_101X: (u8, u8) = quad_pattern(b"101*");
const Q_110X: (u8, u8) = quad_pattern(b"110*");

/// `I_f = {i : x_i = (1,1,1,1)}` as a position bit set.
pub(crate) fn full_quads(qm: &QuadMask) -> u32 {
    (1..=qm.l()).filter(|&i| qm.quad(i) == 0xf).fold(0, |s, i| s | 1 << i)
}

/// `C(x, i)` of the defect lemma.
pub(crate) fn cond_c(qm: &QuadMask, nd: &NeighborData, i: usize) -> bool {
    nd.left & (1 << i) != 0 && {
        let q = qm.quad(nd.nu(i).expect("neighbor"));
        quad_is(q, Q_1101) || quad_is(q, Q_X1X0)
    }
}

/// `←C(x, i)`: some right neighbor `r` with `ν(r) = i` and suitable `x_r`.
pub(crate) fn cond_left_c(qm: &QuadMask, nd: &NeighborData, i: usize) -> bool {
    match nd.preimage(i) {
        Some(r) if nd.right & (1 << r) != 0 => {
            let q = qm.quad(r);
            quad_is(q, Q_1011) || quad_is(q, Q_XX10)
        }
        _ => false,
    }
}

/// Defect set on the doubled word by the quadruple case analysis, without
/// evaluating prefixes.
pub fn defect_closed_form(word: &ReducedWord, qm: &QuadMask) -> Result<DefectReport, DeodharError> {
    if !word.distinct_letters() {
        return Err(DeodharError::NotBoolean);
    }
    let l = word.len();
    if qm.l() != l {
        return Err(DeodharError::PositionOutOfRange(qm.l(), l));
    }
    let all = if l == 0 { 0 } else { ((1u32 << l) - 1) << 1 };
    let nd = neighbor_data(word, full_quads(qm), all).map_err(|_| DeodharError::NotBoolean)?;
    let mut d = 0u64;
    for i in 1..=l {
        let q = qm.quad(i);
        let base = 4 * (i - 1);
        if quad_is(q, Q_0XXX) {
            if cond_left_c(qm, &nd, i) {
                d |= 1 << (base + 1);
            }
            if cond_c(qm, &nd, i) {
                d |= 1 << (base + 2);
            }
        }
        let fourth = quad_is(q, Q_100X)
            || (quad_is(q, Q_101X) && cond_c(qm, &nd, i))
            || (quad_is(q, Q_110X) && cond_left_c(qm, &nd, i));
        if fourth {
            d |= 1 << (base + 3);
        }
    }
    Ok(DefectReport::from_defect_bits(d, &qm.flatten()))
}
