//! Double cosets of the block subgroup `H = S_2^n` below a doubled Boolean
//! permutation: neighbor sets, the triplet parametrization, alternating coset
//! sums and the counting identities for `K = S_n × S_n`.
//!
//! Position sets are `u32` bit sets with bit `i` standing for the 1-based
//! position `i` of the fixed word.

use std::fmt;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::deodhar::{doubled_word, walk_masks, DeodharError, QuadMask, ReducedWord};
use crate::perm::Permutation;
use crate::poly::Laurent;
use crate::LaurentPolynomial;

/// Longest word accepted by the `16^l` fiber enumeration.
pub const MAX_FIBER_WORD: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CosetError {
    #[error("the word has repeated letters (target is not Boolean)")]
    NotBoolean,
    #[error("{0} is not below the doubled permutation")]
    NotBelow(Permutation),
    #[error("permutation {0} has odd degree")]
    OddDegree(Permutation),
    #[error("{0} does not preserve the even numbers")]
    NotInK(Permutation),
    #[error("invalid triplet {0} for this word")]
    InvalidTriplet(CosetTriplet),
    #[error("word length {0} exceeds the enumeration cap of {MAX_FIBER_WORD}")]
    TooLong(usize),
    #[error("cannot parse triplet `{0}`")]
    Parse(String),
}

impl From<DeodharError> for CosetError {
    fn from(e: DeodharError) -> Self {
        match e {
            DeodharError::TooLong(l) => CosetError::TooLong(l),
            _ => CosetError::NotBoolean,
        }
    }
}

fn all_positions(l: usize) -> u32 {
    ((1u32 << l) - 1) << 1
}

fn positions(s: u32) -> impl Iterator<Item = usize> {
    (1..32).filter(move |&i| s & (1 << i) != 0)
}

/// Right and left neighbor sets of `A` in `B` and the neighboring map `ν`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct NeighborData {
    pub right: u32,
    pub left: u32,
    nu: [u8; 32],
}

impl NeighborData {
    pub fn all(&self) -> u32 {
        self.right | self.left
    }

    pub fn nu(&self, i: usize) -> Option<usize> {
        (self.all() & (1 << i) != 0).then(|| self.nu[i] as usize)
    }

    /// The unique `r` with `ν(r) = i`, if any.
    pub fn preimage(&self, i: usize) -> Option<usize> {
        positions(self.all()).find(|&r| self.nu[r] as usize == i)
    }

    /// `ν(S)` for a set `S ⊆ N`.
    pub fn image(&self, s: u32) -> u32 {
        positions(s & self.all()).fold(0, |acc, r| acc | 1 << self.nu[r])
    }

    /// `ν^{-1}(S)`.
    pub fn preimage_set(&self, s: u32) -> u32 {
        positions(self.all()).filter(|&r| s & (1 << self.nu[r]) != 0).fold(0, |acc, r| acc | 1 << r)
    }
}

/// Neighbor data of `A ⊆ B` for a word with distinct letters.
///
/// For `i ∈ B∖A` follow the letters `j_i+1, j_i+2, ...` through positions
/// moving monotonically away from `i`, staying in `A` until a position of
/// `B∖A` is reached; that position is `ν(i)`.
pub fn neighbor_data(word: &ReducedWord, a: u32, b: u32) -> Result<NeighborData, CosetError> {
    if !word.distinct_letters() {
        return Err(CosetError::NotBoolean);
    }
    let mut pos_of = [0usize; 32];
    for i in 1..=word.len() {
        pos_of[word.letter(i)] = i;
    }
    let mut nd = NeighborData::default();
    for i in positions(b & !a) {
        let mut prev = i;
        let mut dir = 0i8;
        let mut j = word.letter(i) + 1;
        loop {
            let p = if j < 32 { pos_of[j] } else { 0 };
            if p == 0 {
                break;
            }
            let d = if p > prev { 1 } else { -1 };
            if dir != 0 && d != dir {
                break;
            }
            dir = d;
            if a & (1 << p) != 0 {
                prev = p;
                j += 1;
                continue;
            }
            if b & (1 << p) != 0 {
                if dir > 0 {
                    nd.right |= 1 << i;
                } else {
                    nd.left |= 1 << i;
                }
                nd.nu[i] = p as u8;
            }
            break;
        }
    }
    Ok(nd)
}

/// `(I_e, I, I_f)` with `I_f ⊆ I_e` and `I ⊆ N_{I_f}^{I_e}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CosetTriplet {
    pub l: usize,
    pub ie: u32,
    pub mid: u32,
    pub i_f: u32,
}

fn fmt_set(s: u32) -> String {
    if s == 0 {
        return "-".into();
    }
    positions(s).map(|i| char::from_digit(i as u32, 36).expect("digit")).collect()
}

fn parse_set(s: &str) -> Option<u32> {
    let s = s.trim();
    if s.is_empty() || s == "-" {
        return Some(0);
    }
    s.chars().try_fold(0u32, |acc, c| {
        let d = c.to_digit(36)?;
        (d >= 1 && d < 32).then_some(acc | 1 << d)
    })
}

impl CosetTriplet {
    pub fn new(l: usize, ie: u32, mid: u32, i_f: u32) -> Self {
        CosetTriplet { l, ie, mid, i_f }
    }

    /// `(I_x, ∅, I_x)`, the triplet of the doubled element.
    pub fn diagonal(l: usize, ix: u32) -> Self {
        CosetTriplet { l, ie: ix, mid: 0, i_f: ix }
    }

    pub fn is_valid(&self, word: &ReducedWord) -> bool {
        let all = all_positions(word.len());
        if self.l != word.len() || self.ie & !all != 0 || self.i_f & !self.ie != 0 {
            return false;
        }
        match neighbor_data(word, self.i_f, self.ie) {
            Ok(nd) => self.mid & !nd.all() == 0,
            Err(_) => false,
        }
    }

    /// Parses `Ie,I,If` with each set a digit string (`-` or empty for ∅).
    pub fn parse(l: usize, s: &str) -> Result<Self, CosetError> {
        let parts: Vec<&str> = s.split(',').collect();
        let bad = || CosetError::Parse(s.to_string());
        if parts.len() != 3 {
            return Err(bad());
        }
        let sets: Vec<u32> = parts.iter().map(|p| parse_set(p).ok_or_else(bad)).collect::<Result<_, _>>()?;
        Ok(CosetTriplet { l, ie: sets[0], mid: sets[1], i_f: sets[2] })
    }
}

impl fmt::Display for CosetTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", fmt_set(self.ie), fmt_set(self.mid), fmt_set(self.i_f))
    }
}

/// Every valid triplet for `word`, in increasing order.
pub fn all_triplets(word: &ReducedWord) -> Result<Vec<CosetTriplet>, CosetError> {
    let l = word.len();
    let mut out = Vec::new();
    for ie in (0..1u32 << l).map(|s| s << 1) {
        let mut i_f = ie;
        loop {
            let n = neighbor_data(word, i_f, ie)?.all();
            let mut mid = n;
            loop {
                out.push(CosetTriplet { l, ie, mid, i_f });
                if mid == 0 {
                    break;
                }
                mid = (mid - 1) & n;
            }
            if i_f == 0 {
                break;
            }
            i_f = (i_f - 1) & ie;
        }
    }
    out.sort();
    Ok(out)
}

/// `u(2i) > u(2i-1)` and `u^{-1}(2i) > u^{-1}(2i-1)` for all `i`.
pub fn is_reduced_rep(u: &Permutation) -> Result<bool, CosetError> {
    if u.degree() % 2 != 0 {
        return Err(CosetError::OddDegree(*u));
    }
    let inv = u.inverse();
    Ok((1..=u.degree() / 2).all(|i| {
        u.image(2 * i) > u.image(2 * i - 1) && inv.image(2 * i) > inv.image(2 * i - 1)
    }))
}

/// `I_x = {i : s_{j_i} <= x}`.
pub fn ix_set(word: &ReducedWord, x: &Permutation) -> u32 {
    let n = word.degree();
    (1..=word.len())
        .filter(|&i| Permutation::simple(n, word.letter(i)).expect("letter").bruhat_le(x))
        .fold(0, |s, i| s | 1 << i)
}

/// The element `x <= w` with `I_x = set`: the subword on those positions.
pub fn from_ix_set(word: &ReducedWord, set: u32) -> Permutation {
    let mut v = Permutation::identity(word.degree());
    for i in positions(set) {
        v = v.mul_simple_right(word.letter(i));
    }
    v
}

fn product(n: usize, factors: &[Permutation]) -> Permutation {
    factors.iter().fold(Permutation::identity(n), |acc, f| Permutation::compose(&acc, f).expect("degree"))
}

/// The parametrization map: triplet of the `H`-double coset of `u <= w~`.
pub fn prm(word: &ReducedWord, u: &Permutation) -> Result<CosetTriplet, CosetError> {
    if !word.distinct_letters() {
        return Err(CosetError::NotBoolean);
    }
    let n = word.degree();
    let big = 2 * n;
    let top = word.target().double(2);
    if u.degree() != big || !u.bruhat_le(&top) {
        return Err(CosetError::NotBelow(*u));
    }
    let s = |k: usize| Permutation::simple(big, k).expect("simple");
    let sd = |j: usize| Permutation::simple(n, j).expect("simple").double(2);
    let l = word.len();
    let mut ie = 0;
    let mut i_f = 0;
    for i in 1..=l {
        let j = word.letter(i);
        if s(2 * j).bruhat_le(u) {
            ie |= 1 << i;
        }
        if sd(j).bruhat_le(u) {
            i_f |= 1 << i;
        }
    }
    let nd = neighbor_data(word, i_f, all_positions(l))?;
    let mut mid = 0;
    for i in positions(nd.all()) {
        let (ji, jn) = (word.letter(i), word.letter(nd.nu[i] as usize));
        let chain: Vec<Permutation> = (ji + 1..jn).map(sd).collect();
        let v = if nd.right & (1 << i) != 0 {
            let mut f = vec![s(2 * ji), s(2 * ji + 1)];
            f.extend(chain);
            f.push(s(2 * jn));
            product(big, &f)
        } else {
            let mut f = vec![s(2 * jn)];
            f.extend(chain.into_iter().rev());
            f.push(s(2 * ji + 1));
            f.push(s(2 * ji));
            product(big, &f)
        };
        if v.bruhat_le(u) {
            mid |= 1 << i;
        }
    }
    Ok(CosetTriplet { l, ie, mid, i_f })
}

/// Letters of the word `ω_Q`.
pub fn omega_word(word: &ReducedWord, q: &CosetTriplet) -> Result<Vec<u8>, CosetError> {
    if !q.is_valid(word) {
        return Err(CosetError::InvalidTriplet(*q));
    }
    let nd = neighbor_data(word, q.i_f, q.ie)?;
    let mut letters = Vec::new();
    for i in 1..=word.len() {
        let j = word.letter(i) as u8;
        let bit = 1 << i;
        if q.ie & bit == 0 {
            continue;
        }
        if q.i_f & bit != 0 {
            letters.extend([2 * j, 2 * j - 1, 2 * j + 1, 2 * j]);
        } else if q.mid & nd.right & bit != 0 {
            letters.extend([2 * j, 2 * j + 1]);
        } else if q.mid & nd.left & bit != 0 {
            letters.extend([2 * j + 1, 2 * j]);
        } else {
            letters.push(2 * j);
        }
    }
    Ok(letters)
}

/// The inverse parametrization: evaluates `ω_Q`.
pub fn iprm(word: &ReducedWord, q: &CosetTriplet) -> Result<Permutation, CosetError> {
    let letters = omega_word(word, q)?;
    let mut v = Permutation::identity(2 * word.degree());
    for j in letters {
        v = v.mul_simple_right(j as usize);
    }
    Ok(v)
}

/// `Q_x` read off the quadruples of a doubled-word mask.
pub fn triplet_of_mask(word: &ReducedWord, qm: &QuadMask) -> Result<CosetTriplet, CosetError> {
    let l = word.len();
    let mut ie = 0;
    let mut i_f = 0;
    for i in 1..=l {
        let q = qm.quad(i);
        // (0,*,*,0) and (1,0,0,1) lie in H
        let trivial = q & 0b1001 == 0 || q == 0b1001;
        if !trivial {
            ie |= 1 << i;
        }
        if q == 0xf {
            i_f |= 1 << i;
        }
    }
    let nd = neighbor_data(word, i_f, ie)?;
    let x = |i: usize, k: usize| qm.get(i, k) as u8;
    let mut mid = 0;
    for i in positions(nd.right) {
        let v = nd.nu[i] as usize;
        if x(i, 1) * x(i, 3) != x(v, 2) * x(v, 4) {
            mid |= 1 << i;
        }
    }
    for i in positions(nd.left) {
        let v = nd.nu[i] as usize;
        if x(i, 3) * x(i, 4) != x(v, 1) * x(v, 2) {
            mid |= 1 << i;
        }
    }
    Ok(CosetTriplet { l, ie, mid, i_f })
}

fn signed_monomial(sign: i64, k: usize) -> LaurentPolynomial {
    Laurent::monomial(sign, k as i64)
}

/// Signed, defect-weighted mask sum over the fiber of `q`, with fibers
/// determined by evaluating each mask and applying [`prm`].
pub fn coset_sum_brute(word: &ReducedWord, q: &CosetTriplet) -> Result<LaurentPolynomial, CosetError> {
    let all = coset_sums_brute(word)?;
    Ok(all.get(q).cloned().unwrap_or_else(Laurent::zero))
}

/// [`coset_sum_brute`] for every triplet at once.
pub fn coset_sums_brute(word: &ReducedWord) -> Result<FxHashMap<CosetTriplet, LaurentPolynomial>, CosetError> {
    if word.len() > MAX_FIBER_WORD {
        return Err(CosetError::TooLong(word.len()));
    }
    let dw = doubled_word(word)?;
    let mut prm_cache: FxHashMap<Permutation, CosetTriplet> = FxHashMap::default();
    let mut sums: FxHashMap<CosetTriplet, Vec<i64>> = FxHashMap::default();
    let mut err = None;
    walk_masks(&dw, |v| {
        let t = match prm_cache.get(&v.end) {
            Some(t) => *t,
            None => match prm(word, &v.end) {
                Ok(t) => {
                    prm_cache.insert(v.end, t);
                    t
                }
                Err(e) => {
                    err = Some(e);
                    return false;
                }
            },
        };
        let sign = if v.mask.count_ones() % 2 == 0 { 1 } else { -1 };
        let c = sums.entry(t).or_insert_with(|| vec![0; dw.len() + 1]);
        c[v.defects as usize] += sign;
        true
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(sums.into_iter().map(|(t, c)| (t, Laurent::from_parts(0, c))).collect())
}

/// The same sums with fibers read off by [`triplet_of_mask`].
pub fn coset_sums_by_mask(word: &ReducedWord) -> Result<FxHashMap<CosetTriplet, LaurentPolynomial>, CosetError> {
    if word.len() > MAX_FIBER_WORD {
        return Err(CosetError::TooLong(word.len()));
    }
    let dw = doubled_word(word)?;
    let l = word.len();
    let mut sums: FxHashMap<CosetTriplet, Vec<i64>> = FxHashMap::default();
    let mut err = None;
    walk_masks(&dw, |v| match triplet_of_mask(word, &QuadMask::new(v.mask, l)) {
        Ok(t) => {
            let sign = if v.mask.count_ones() % 2 == 0 { 1 } else { -1 };
            sums.entry(t).or_insert_with(|| vec![0; dw.len() + 1])[v.defects as usize] += sign;
            true
        }
        Err(e) => {
            err = Some(e);
            false
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(sums.into_iter().map(|(t, c)| (t, Laurent::from_parts(0, c))).collect())
}

/// `(-1)^{|I_e∖I_f|} q^{|I_e^c| + |N∖I|} (q+1)^{|I_e∖(I_f ∪ N)|}` with
/// `N = N_{I_f}^{I_e}`.
pub fn coset_sum_closed(word: &ReducedWord, q: &CosetTriplet) -> Result<LaurentPolynomial, CosetError> {
    if !q.is_valid(word) {
        return Err(CosetError::InvalidTriplet(*q));
    }
    let l = word.len();
    let n = neighbor_data(word, q.i_f, q.ie)?.all();
    let sign = if (q.ie & !q.i_f).count_ones() % 2 == 0 { 1 } else { -1 };
    let shift = (all_positions(l) & !q.ie).count_ones() + (n & !q.mid).count_ones();
    let free = (q.ie & !(q.i_f | n)).count_ones();
    let one_plus_q = Laurent::from_parts(0, vec![1i64, 1]);
    let mut out = signed_monomial(sign, shift as usize);
    for _ in 0..free {
        out = out.checked_mul(&one_plus_q).expect("small coefficients");
    }
    Ok(out)
}

/// `K`: permutations of `S_{2n}` preserving the even numbers. Returns
/// `(u_odd, u_even)` with `u(2i-1) = 2u_odd(i) - 1`, `u(2i) = 2u_even(i)`.
pub fn k_decompose(u: &Permutation) -> Result<(Permutation, Permutation), CosetError> {
    if u.degree() % 2 != 0 {
        return Err(CosetError::OddDegree(*u));
    }
    let n = u.degree() / 2;
    let mut odd = Vec::with_capacity(n);
    let mut even = Vec::with_capacity(n);
    for i in 1..=n {
        let (a, b) = (u.image(2 * i - 1), u.image(2 * i));
        if a % 2 != 1 || b % 2 != 0 {
            return Err(CosetError::NotInK(*u));
        }
        odd.push(a.div_ceil(2));
        even.push(b / 2);
    }
    let odd = Permutation::from_one_line(&odd).map_err(|_| CosetError::NotInK(*u))?;
    let even = Permutation::from_one_line(&even).map_err(|_| CosetError::NotInK(*u))?;
    Ok((odd, even))
}

/// Inverse of [`k_decompose`].
pub fn k_compose(odd: &Permutation, even: &Permutation) -> Permutation {
    assert_eq!(odd.degree(), even.degree());
    let n = odd.degree();
    let mut images = vec![0usize; 2 * n];
    for i in 1..=n {
        images[2 * i - 2] = 2 * odd.image(i) - 1;
        images[2 * i - 1] = 2 * even.image(i);
    }
    Permutation::from_one_line(&images).expect("bijection")
}

/// Number of `u ∈ K` with `u_odd, u_even <= w` in the double coset of `q`,
/// and their common sign: `2^{|I_e∖(I_f ∪ N)|}` and `(-1)^{|I_e∖I_f|}`.
pub fn k_coset_count(word: &ReducedWord, q: &CosetTriplet) -> Result<(u64, i64), CosetError> {
    if !q.is_valid(word) {
        return Err(CosetError::InvalidTriplet(*q));
    }
    let n = neighbor_data(word, q.i_f, q.ie)?.all();
    let count = 1u64 << (q.ie & !(q.i_f | n)).count_ones();
    let sign = if (q.ie & !q.i_f).count_ones() % 2 == 0 { 1 } else { -1 };
    Ok((count, sign))
}

/// Compares the cycle count of `x2^{-1} x1` with `|I_e∖(I_f ∪ N_{I_f}^{I_e})|`
/// where `I_e = I_{x1} ∪ I_{x2}` and `I_f = I_{x1} ∩ I_{x2}`.
pub fn cycle_count_check(word: &ReducedWord, x1: &Permutation, x2: &Permutation) -> Result<bool, CosetError> {
    let w = word.target();
    if !x1.bruhat_le(w) {
        return Err(CosetError::NotBelow(*x1));
    }
    if !x2.bruhat_le(w) {
        return Err(CosetError::NotBelow(*x2));
    }
    let (a, b) = (ix_set(word, x1), ix_set(word, x2));
    let (ie, i_f) = (a | b, a & b);
    let n = neighbor_data(word, i_f, ie)?.all();
    let expected = (ie & !(i_f | n)).count_ones() as usize;
    let y = Permutation::compose(&x2.inverse(), x1).expect("degree");
    Ok(y.nontrivial_cycles() == expected)
}

/// Experimental order on triplets: `I_e` and `I_f` grow, and
/// `I1 ⊆ I2 ∪ I_f2 ∪ ν_{I_f1}^{-1}(I_f2)`. Stated without proof in the
/// source, so only cross-checked against Bruhat order on [`iprm`] images.
pub fn triplet_leq(word: &ReducedWord, a: &CosetTriplet, b: &CosetTriplet) -> Result<bool, CosetError> {
    if a.ie & !b.ie != 0 || a.i_f & !b.i_f != 0 {
        return Ok(false);
    }
    let nd = neighbor_data(word, a.i_f, all_positions(word.len()))?;
    let allowed = b.mid | b.i_f | nd.preimage_set(b.i_f);
    Ok(a.mid & !allowed == 0)
}

/// Outcome of one identity in [`verify_suite`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteCheck {
    pub name: &'static str,
    pub passed: bool,
    pub cases: u64,
    /// First failing case, if any.
    pub failure: Option<String>,
}

struct Tally {
    name: &'static str,
    cases: u64,
    failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, cases: 0, failure: None }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn done(self) -> SuiteCheck {
        SuiteCheck { name: self.name, passed: self.failure.is_none(), cases: self.cases, failure: self.failure }
    }
}

/// Runs the double-coset identities on every Boolean `w ∈ S_n`, `n <= max_n`:
/// the parametrization bijection, mask triplets, the closed form, the `K`
/// counts and the cycle counts. The `16^l` enumerations are capped at
/// [`MAX_FIBER_WORD`].
pub fn verify_suite(max_n: usize) -> Result<Vec<SuiteCheck>, CosetError> {
    let mut bij = Tally::new("prm_iprm_bijection");
    let mut masks = Tally::new("triplet_of_mask_matches_prm");
    let mut closed = Tally::new("closed_form_matches_brute");
    let mut kcount = Tally::new("k_coset_count_matches_enumeration");
    let mut cycles = Tally::new("cycle_count");
    for n in 1..=max_n {
        for w in Permutation::all(n).filter(crate::patterns::is_boolean) {
            let word = crate::deodhar::reduced_word(&w);
            let below: Vec<Permutation> = Permutation::all(n).filter(|x| x.bruhat_le(&w)).collect();
            let triplets = all_triplets(&word)?;
            for q in &triplets {
                let u = iprm(&word, q)?;
                bij.check(is_reduced_rep(&u)? && prm(&word, &u)? == *q, || format!("{word} {q}"));
            }
            if word.len() <= MAX_FIBER_WORD {
                let brute = coset_sums_brute(&word)?;
                for q in &triplets {
                    let b = brute.get(q).cloned().unwrap_or_else(Laurent::zero);
                    closed.check(coset_sum_closed(&word, q)? == b, || format!("{word} {q}"));
                }
                let dw = doubled_word(&word)?;
                let mut prm_of: FxHashMap<Permutation, CosetTriplet> = FxHashMap::default();
                let mut err = None;
                walk_masks(&dw, |v| {
                    let t = match prm_of.get(&v.end) {
                        Some(t) => *t,
                        None => match prm(&word, &v.end) {
                            Ok(t) => *prm_of.entry(v.end).or_insert(t),
                            Err(e) => {
                                err = Some(e);
                                return false;
                            }
                        },
                    };
                    let qm = QuadMask::new(v.mask, word.len());
                    let ok = triplet_of_mask(&word, &qm).is_ok_and(|m| m == t);
                    masks.check(ok, || format!("{word} {qm}"));
                    true
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
            let mut tally: FxHashMap<CosetTriplet, (u64, i64, bool)> = FxHashMap::default();
            for a in &below {
                for b in &below {
                    cycles.check(cycle_count_check(&word, a, b)?, || format!("{word} {a} {b}"));
                    let u = k_compose(a, b);
                    let e = tally.entry(prm(&word, &u)?).or_insert((0, u.sign(), true));
                    e.0 += 1;
                    e.2 &= e.1 == u.sign();
                }
            }
            for q in &triplets {
                let (c, s) = k_coset_count(&word, q)?;
                let ok = tally.get(q).is_some_and(|&(count, sign, same)| count == c && sign == s && same);
                kcount.check(ok, || format!("{word} {q}"));
            }
        }
    }
    Ok(vec![bij.done(), masks.done(), closed.done(), kcount.done(), cycles.done()])
}
