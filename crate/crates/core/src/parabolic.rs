//! Alternating sums of KL polynomials over the block subgroup
//! `H = S_m × ... × S_m` of `S_{mn}` and the normalized polynomials
//! `P~^{(m)}_{x,w} = q^{-C(m,2)(ℓ(w)-ℓ(x))} Σ_{u∈H} sgn(u) P_{x~u, w~}`.
//!
//! Two routes compute the sum. [`raw_sum_interval`] adds up ordinary KL
//! polynomials from a [`KlStore`]. [`QuotientStore`] runs the KL recursion in
//! the sign-induced module of the Hecke algebra of `S_{mn}`, where the sum
//! `Q_{σ,τ} = Σ_{u∈H} sgn(u) P_{σu,τ}` for block-increasing `σ, τ` is the
//! structure constant, so the `(m!)^n` summands are never formed.

use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::kl::{coatoms, KlError, KlStore};
use crate::patterns::is_boolean;
use crate::perm::{for_each_below, IntervalConstraints, PairKey, Permutation, MAX_DEGREE};
use crate::poly::{to_unsigned_poly, Laurent, Poly};

/// Default cap on `|H|` for explicit enumeration.
pub const DEFAULT_H_BUDGET: u64 = 1 << 20;

#[derive(Debug, thiserror::Error)]
pub enum ParabolicError {
    #[error(transparent)]
    Kl(#[from] KlError),
    #[error("|H| = {order} exceeds the enumeration budget {budget}")]
    HBudget { order: u128, budget: u64 },
    #[error("the quotient table reached its budget of {budget} entries")]
    TableBudget { budget: usize },
    #[error("n = {n}, m = {m} gives degree above {MAX_DEGREE}")]
    TooLarge { n: usize, m: usize },
    #[error("expected a permutation of degree {expected}, got {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("{0} is not increasing on blocks")]
    NotMinimal(Permutation),
    #[error("x = {x} is not below w = {w}")]
    NotBelow { x: Permutation, w: Permutation },
    #[error("coefficient overflow")]
    Overflow,
}

/// The block subgroup `S_m^n` of `S_{mn}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HGroup {
    n: usize,
    m: usize,
}

impl HGroup {
    pub fn new(n: usize, m: usize) -> Result<Self, ParabolicError> {
        if m == 0 || n * m > MAX_DEGREE {
            return Err(ParabolicError::TooLarge { n, m });
        }
        Ok(HGroup { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.n * self.m
    }

    /// `(m!)^n`.
    pub fn order(&self) -> u128 {
        let f: u128 = (1..=self.m as u128).product();
        f.pow(self.n as u32)
    }

    /// Simple reflections inside `H`: bit `i` for every `s_i` with `m ∤ i`.
    pub fn simple_mask(&self) -> u32 {
        let mut j = 0;
        for i in 1..self.degree() {
            if i % self.m != 0 {
                j |= 1 << i;
            }
        }
        j
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        p.degree() == self.degree() && p.as_slice().iter().enumerate().all(|(i, &v)| i / self.m == v as usize / self.m)
    }

    /// Is `p` the shortest element of `pH`, i.e. increasing on each block of positions?
    pub fn is_min_rep(&self, p: &Permutation) -> bool {
        p.degree() == self.degree() && p.right_descent_mask() & self.simple_mask() == 0
    }

    /// Writes `p = σu` with `σ` block-increasing and `u ∈ H`; returns `(σ, sgn u)`.
    pub fn split(&self, p: &Permutation) -> (Permutation, i64) {
        let mut img = p.as_slice().to_vec();
        let mut sign = 1;
        for block in img.chunks_mut(self.m) {
            let inv = (0..block.len()).flat_map(|a| (a + 1..block.len()).map(move |b| (a, b)));
            if inv.filter(|&(a, b)| block[a] > block[b]).count() % 2 == 1 {
                sign = -sign;
            }
            block.sort_unstable();
        }
        (Permutation::from_zero_based(&img), sign)
    }

    /// Every element with its sign, without a budget check.
    pub fn iter(&self) -> HElements {
        let block_perms: Vec<(Permutation, i64)> = Permutation::all(self.m).map(|p| (p, p.sign())).collect();
        HElements { n: self.n, m: self.m, block_perms, counter: vec![0; self.n], done: false }
    }
}

/// Iterator over `H` in lexicographic order of the block permutations.
#[derive(Clone, Debug)]
pub struct HElements {
    n: usize,
    m: usize,
    block_perms: Vec<(Permutation, i64)>,
    counter: Vec<usize>,
    done: bool,
}

impl Iterator for HElements {
    type Item = (Permutation, i64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut img = [0u8; MAX_DEGREE];
        let mut sign = 1;
        for (b, &c) in self.counter.iter().enumerate() {
            let (p, s) = &self.block_perms[c];
            for (j, &v) in p.as_slice().iter().enumerate() {
                img[b * self.m + j] = (b * self.m) as u8 + v;
            }
            sign *= s;
        }
        let out = Permutation::from_zero_based(&img[..self.n * self.m]);
        // odometer, last block fastest
        self.done = true;
        for c in self.counter.iter_mut().rev() {
            *c += 1;
            if *c < self.block_perms.len() {
                self.done = false;
                break;
            }
            *c = 0;
        }
        Some((out, sign))
    }
}

/// The elements of `S_m^n` with signs, refusing when `(m!)^n > budget`.
pub fn h_elements(n: usize, m: usize, budget: u64) -> Result<HElements, ParabolicError> {
    let h = HGroup::new(n, m)?;
    if h.order() > budget as u128 {
        return Err(ParabolicError::HBudget { order: h.order(), budget });
    }
    Ok(h.iter())
}

/// `C(m,2)(ℓ(w) - ℓ(x))`, the exponent removed by the normalization.
pub fn normalization_exponent(m: usize, x: &Permutation, w: &Permutation) -> i64 {
    (m * (m - 1) / 2) as i64 * (w.length() as i64 - x.length() as i64)
}

fn pack(p: &Permutation) -> u64 {
    p.as_slice().iter().fold(0u64, |acc, &v| acc << 4 | v as u64)
}

enum Reduced {
    Zero,
    One,
    Pair(Permutation, Permutation),
}

/// Memoized `Q_{σ,τ} = Σ_{u∈H} sgn(u) P_{σu,τ}` for block-increasing `σ, τ`.
///
/// For `τ` with a left descent `s` and `v = sτ`, and `sσ < σ` (arranged by
/// normalization),
/// `Q_{σ,τ} = q Q_{σ,v} + Q_{sσ,v} - Σ μ(z,v) q^{(ℓ(τ)-ℓ(z))/2} Q_{σ,z}`
/// over block-increasing `z < v` with `sz < z`. Block-increasing `z` outside
/// that set map to zero in the sign module, and `μ(z,v)` is the top
/// coefficient of `Q_{z,v}` because `u ≠ e` lowers the degree bound.
#[derive(Clone, Debug)]
pub struct QuotientStore {
    h: HGroup,
    j: u32,
    table: FxHashMap<(u64, u64), u32>,
    glossary: Vec<Poly<i64>>,
    intern: FxHashMap<Poly<i64>, u32>,
    mu_lists: FxHashMap<(u64, u8), Arc<Vec<(Permutation, i64)>>>,
    budget: Option<usize>,
}

impl QuotientStore {
    pub fn new(n: usize, m: usize) -> Result<Self, ParabolicError> {
        let h = HGroup::new(n, m)?;
        Ok(QuotientStore {
            h,
            j: h.simple_mask(),
            table: FxHashMap::default(),
            glossary: Vec::new(),
            intern: FxHashMap::default(),
            mu_lists: FxHashMap::default(),
            budget: None,
        })
    }

    /// Caps the number of memoized pairs; exceeding it is a [`ParabolicError::TableBudget`].
    pub fn with_budget(mut self, max_entries: usize) -> Self {
        self.budget = Some(max_entries);
        self
    }

    pub fn group(&self) -> HGroup {
        self.h
    }

    pub fn m(&self) -> usize {
        self.h.m
    }

    pub fn n(&self) -> usize {
        self.h.n
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn glossary_len(&self) -> usize {
        self.glossary.len()
    }

    /// `Q_{σ,τ}` for block-increasing `σ, τ ∈ S_{mn}`.
    pub fn signed_sum(&mut self, sigma: &Permutation, tau: &Permutation) -> Result<Poly<i64>, ParabolicError> {
        for p in [sigma, tau] {
            if p.degree() != self.h.degree() {
                return Err(ParabolicError::DegreeMismatch { expected: self.h.degree(), found: p.degree() });
            }
            if !self.h.is_min_rep(p) {
                return Err(ParabolicError::NotMinimal(*p));
            }
        }
        self.q(sigma, tau)
    }

    fn in_quotient(&self, p: &Permutation) -> bool {
        p.right_descent_mask() & self.j == 0
    }

    /// Applies the moves that preserve `Q`: `Q_{σ,τ} = Q_{sσ,τ}` or `0` for
    /// `sτ < τ < ...` with `sσ > σ`, `Q_{σ,τ} = Q_{sσ,sτ}` when `σ ≰ sτ`, and
    /// conjugation by the longest element.
    fn reduce(&self, sigma: &Permutation, tau: &Permutation) -> Reduced {
        let (mut s, mut t) = (*sigma, *tau);
        if !s.bruhat_le(&t) {
            return Reduced::Zero;
        }
        loop {
            if s == t {
                return Reduced::One;
            }
            let dl = t.left_descent_mask();
            let mut missing = dl & !s.left_descent_mask();
            while missing != 0 {
                let i = missing.trailing_zeros() as usize;
                missing &= missing - 1;
                let up = s.mul_simple_left(i);
                if !self.in_quotient(&up) {
                    return Reduced::Zero;
                }
                s = up;
            }
            if s.left_descent_mask() & dl != dl {
                continue;
            }
            let mut bits = dl;
            let mut slid = false;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let down = t.mul_simple_left(i);
                if !s.bruhat_le(&down) {
                    s = s.mul_simple_left(i);
                    t = down;
                    slid = true;
                    break;
                }
            }
            if !slid {
                break;
            }
        }
        let (cs, ct) = (s.conj_longest(), t.conj_longest());
        if (ct, cs) < (t, s) {
            (s, t) = (cs, ct);
        }
        Reduced::Pair(s, t)
    }

    fn q(&mut self, sigma: &Permutation, tau: &Permutation) -> Result<Poly<i64>, ParabolicError> {
        let (s, t) = match self.reduce(sigma, tau) {
            Reduced::Zero => return Ok(Poly::zero()),
            Reduced::One => return Ok(Poly::one()),
            Reduced::Pair(s, t) => (s, t),
        };
        let key = (pack(&t), pack(&s));
        if let Some(&i) = self.table.get(&key) {
            return Ok(self.glossary[i as usize].clone());
        }
        let p = self.compute(&s, &t)?;
        if let Some(b) = self.budget {
            if self.table.len() >= b {
                return Err(ParabolicError::TableBudget { budget: b });
            }
        }
        let i = match self.intern.get(&p) {
            Some(&i) => i,
            None => {
                self.glossary.push(p.clone());
                self.intern.insert(p.clone(), self.glossary.len() as u32 - 1);
                self.glossary.len() as u32 - 1
            }
        };
        self.table.insert(key, i);
        Ok(p)
    }

    fn compute(&mut self, sigma: &Permutation, tau: &Permutation) -> Result<Poly<i64>, ParabolicError> {
        let s = tau.first_left_descent().expect("σ < τ forces a descent");
        let v = tau.mul_simple_left(s);
        let a = self.q(sigma, &v)?;
        let b = self.q(&sigma.mul_simple_left(s), &v)?;
        let mut acc = b.checked_add_scaled_shift(&1, 1, &a).ok_or(ParabolicError::Overflow)?;
        let lt = tau.length();
        let list = self.mu_list(&v, s)?;
        for (z, mu) in list.iter() {
            if !sigma.bruhat_le(z) {
                continue;
            }
            let qz = self.q(sigma, z)?;
            acc = acc.checked_sub_scaled_shift(mu, (lt - z.length()) / 2, &qz).ok_or(ParabolicError::Overflow)?;
        }
        Ok(acc)
    }

    /// Block-increasing `z < v` with `sz < z` and `μ(z,v) ≠ 0`.
    fn mu_list(&mut self, v: &Permutation, s: usize) -> Result<Arc<Vec<(Permutation, i64)>>, ParabolicError> {
        let key = (pack(v), s as u8);
        if let Some(l) = self.mu_lists.get(&key) {
            return Ok(l.clone());
        }
        let lv = v.length();
        let mut out: Vec<(Permutation, i64)> = coatoms(v)
            .into_iter()
            .filter(|z| self.in_quotient(z) && z.has_left_descent(s))
            .map(|z| (z, 1))
            .collect();
        let c = IntervalConstraints {
            right_descents: v.right_descent_mask(),
            right_ascents: self.j,
            left_descents: v.left_descent_mask() | 1 << s,
            ..Default::default()
        };
        let mut cands = Vec::new();
        for_each_below(v, c, |z| {
            let lz = z.length();
            if lz + 3 <= lv && (lv - lz) % 2 == 1 {
                cands.push(*z);
            }
        });
        for z in cands {
            let mu = self.q(&z, v)?.coeff((lv - z.length() - 1) / 2);
            if mu != 0 {
                out.push((z, mu));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        let l = Arc::new(out);
        self.mu_lists.insert(key, l.clone());
        Ok(l)
    }
}

fn check_pair(n: usize, x: &Permutation, w: &Permutation) -> Result<(), ParabolicError> {
    for p in [x, w] {
        if p.degree() != n {
            return Err(ParabolicError::DegreeMismatch { expected: n, found: p.degree() });
        }
    }
    Ok(())
}

/// `Σ_{u∈H} sgn(u) P_{x~u, w~}` by the quotient recursion.
pub fn raw_sum(store: &mut QuotientStore, x: &Permutation, w: &Permutation) -> Result<Laurent<i64>, ParabolicError> {
    check_pair(store.n(), x, w)?;
    let m = store.m();
    Ok(store.q(&x.double(m), &w.double(m))?.to_laurent())
}

/// `Σ_{u∈H} sgn(u) P_{x~u, w~}` summed term by term from ordinary KL polynomials.
pub fn raw_sum_interval(
    kl: &mut KlStore<u64>,
    m: usize,
    x: &Permutation,
    w: &Permutation,
    h_budget: u64,
) -> Result<Laurent<i64>, ParabolicError> {
    check_pair(w.degree(), x, w)?;
    let (xt, wt) = (x.double(m), w.double(m));
    let mut acc = Poly::<i64>::zero();
    for (u, sign) in h_elements(w.degree(), m, h_budget)? {
        let y = Permutation::compose(&xt, &u).expect("same degree");
        if !y.bruhat_le(&wt) {
            continue;
        }
        let p = kl.kl_poly(&y, &wt)?;
        let p = p.map(|&c| i64::try_from(c).ok()).ok_or(ParabolicError::Overflow)?;
        acc = acc.checked_add_scaled_shift(&sign, 0, &p).ok_or(ParabolicError::Overflow)?;
    }
    Ok(acc.to_laurent())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    NegativeExponent { exponent: i64 },
    NegativeCoefficient { exponent: i64, coefficient: i64 },
}

/// A normalized sum that is not a polynomial with nonnegative coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ViolationWitness {
    pub normalized: Laurent<i64>,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Tilde {
    Poly(Poly<u64>),
    Violation(ViolationWitness),
}

impl Tilde {
    pub fn as_poly(&self) -> Option<&Poly<u64>> {
        match self {
            Tilde::Poly(p) => Some(p),
            Tilde::Violation(_) => None,
        }
    }
}

/// `q^{-e} raw`, checked for being a polynomial with nonnegative coefficients.
pub fn normalize_raw(raw: &Laurent<i64>, exponent: i64) -> Tilde {
    let normalized = raw.shift(-exponent);
    if let Some(e) = normalized.min_exponent().filter(|&e| e < 0) {
        return Tilde::Violation(ViolationWitness { normalized, kind: ViolationKind::NegativeExponent { exponent: e } });
    }
    let negative = normalized.terms().find(|(_, c)| **c < 0).map(|(e, &c)| (e, c));
    if let Some((e, c)) = negative {
        let kind = ViolationKind::NegativeCoefficient { exponent: e, coefficient: c };
        return Tilde::Violation(ViolationWitness { normalized, kind });
    }
    Tilde::Poly(to_unsigned_poly(&normalized).expect("nonnegative polynomial"))
}

/// `P~^{(m)}_{x,w}` for `x <= w`, or the witness that it is not a
/// nonnegative polynomial.
pub fn tilde_p(store: &mut QuotientStore, x: &Permutation, w: &Permutation) -> Result<Tilde, ParabolicError> {
    check_pair(store.n(), x, w)?;
    if !x.bruhat_le(w) {
        return Err(ParabolicError::NotBelow { x: *x, w: *w });
    }
    let raw = raw_sum(store, x, w)?;
    Ok(normalize_raw(&raw, normalization_exponent(store.m(), x, w)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClauseChecks {
    pub polynomiality: bool,
    pub constant_term_one: bool,
    pub descent_invariance: bool,
    pub degree_law: bool,
}

impl ClauseChecks {
    pub fn all(&self) -> bool {
        self.polynomiality && self.constant_term_one && self.descent_invariance && self.degree_law
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ClauseWitness {
    Polynomiality(ViolationWitness),
    ConstantTerm { constant: i64 },
    DescentInvariance { s: usize, xs: Permutation, at_x: Laurent<i64>, at_xs: Laurent<i64> },
    DegreeLaw { tilde_degree: Option<i64>, kl_degree: usize, tilde_is_one: bool, kl_is_one: bool },
}

/// The four clauses of the conjecture for one pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjectureReport {
    pub pair: PairKey,
    pub m: usize,
    /// The sum before normalization.
    pub raw: Laurent<i64>,
    /// Present iff the polynomiality clause holds.
    pub tilde_p: Option<Poly<u64>>,
    pub kl: Poly<u64>,
    /// `w` avoids 321 and 3412.
    pub boolean: bool,
    pub checks: ClauseChecks,
    pub witnesses: Vec<ClauseWitness>,
}

fn normalized(store: &mut QuotientStore, x: &Permutation, w: &Permutation) -> Result<Laurent<i64>, ParabolicError> {
    Ok(raw_sum(store, x, w)?.shift(-normalization_exponent(store.m(), x, w)))
}

/// Evaluates clauses (1)-(4) for `x <= w`. Clause (3) runs over every `s`
/// with `ws < w`; clause (4) compares with `P_{x,w}` from `kl`.
pub fn verify_conjecture(
    store: &mut QuotientStore,
    kl: &mut KlStore<u64>,
    x: &Permutation,
    w: &Permutation,
) -> Result<ConjectureReport, ParabolicError> {
    check_pair(store.n(), x, w)?;
    if !x.bruhat_le(w) {
        return Err(ParabolicError::NotBelow { x: *x, w: *w });
    }
    let m = store.m();
    let raw = raw_sum(store, x, w)?;
    let norm = raw.shift(-normalization_exponent(m, x, w));
    let p = kl.kl_poly(x, w)?;
    let mut checks = ClauseChecks::default();
    let mut witnesses = Vec::new();

    let tilde = match normalize_raw(&raw, normalization_exponent(m, x, w)) {
        Tilde::Poly(t) => {
            checks.polynomiality = true;
            Some(t)
        }
        Tilde::Violation(v) => {
            witnesses.push(ClauseWitness::Polynomiality(v));
            None
        }
    };

    let c0 = norm.coeff(0);
    checks.constant_term_one = c0 == 1 && norm.min_exponent().is_some_and(|e| e >= 0);
    if !checks.constant_term_one {
        witnesses.push(ClauseWitness::ConstantTerm { constant: c0 });
    }

    checks.descent_invariance = true;
    for s in w.descents() {
        let xs = x.mul_simple_right(s);
        let other = normalized(store, &xs, w)?;
        if other != norm {
            checks.descent_invariance = false;
            witnesses.push(ClauseWitness::DescentInvariance { s, xs, at_x: norm.clone(), at_xs: other });
        }
    }

    let tilde_degree = norm.max_exponent();
    let kl_degree = p.degree().unwrap_or(0);
    let tilde_is_one = norm == Laurent::one();
    checks.degree_law = tilde_degree == Some((m * kl_degree) as i64) && tilde_is_one == p.is_one();
    if !checks.degree_law {
        witnesses.push(ClauseWitness::DegreeLaw { tilde_degree, kl_degree, tilde_is_one, kl_is_one: p.is_one() });
    }

    Ok(ConjectureReport {
        pair: PairKey::new(*w, *x),
        m,
        raw,
        tilde_p: tilde,
        kl: p,
        boolean: is_boolean(w),
        checks,
        witnesses,
    })
}

/// `(P² + P(q²))/2`.
pub fn symmetric_square(p: &Poly<u64>) -> Option<Poly<u64>> {
    let s = p.checked_mul(p)?.checked_add(&p.substitute_power(2))?;
    s.map(|c| Some(c / 2))
}

/// One row of the published table layout: an orbit of reduced pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    /// Lexicographically smallest member of the 4-orbit.
    pub pair: PairKey,
    pub kl: Poly<u64>,
    /// `None` when the computation exceeded the budget.
    pub tilde_p: Option<Tilde>,
    /// Whether `P~ = (P² + P(q²))/2`; informational only.
    pub correlation: Option<bool>,
}

impl TableRow {
    pub fn skipped(&self) -> bool {
        self.tilde_p.is_none()
    }
}

/// Reduced pairs `(w,x)` of `S_n` with `x < w`, one per 4-orbit (the
/// lexicographically smallest member), in increasing order.
pub fn reduced_orbit_reps(n: usize) -> Vec<PairKey> {
    let mut out = Vec::new();
    for w in Permutation::all(n) {
        let c = IntervalConstraints {
            right_descents: w.right_descent_mask(),
            left_descents: w.left_descent_mask(),
            ..Default::default()
        };
        for_each_below(&w, c, |x| {
            let k = PairKey::new(w, *x);
            if *x != w && k.is_reduced() && k.orbit_min() == k {
                out.push(k);
            }
        });
    }
    out.sort();
    out
}

/// Rows for every orbit of reduced pairs where `P` or `P~^{(m)}` is not 1.
/// A budget failure on one pair marks that row skipped and moves on.
pub fn table_report(store: &mut QuotientStore, kl: &mut KlStore<u64>) -> Result<Vec<TableRow>, ParabolicError> {
    let mut rows = Vec::new();
    for k in reduced_orbit_reps(store.n()) {
        let p = kl.kl_poly(&k.x, &k.w)?;
        let tilde = match tilde_p(store, &k.x, &k.w) {
            Ok(t) => Some(t),
            Err(ParabolicError::TableBudget { .. }) => None,
            Err(e) => return Err(e),
        };
        let trivial = p.is_one() && tilde.as_ref().and_then(Tilde::as_poly).is_some_and(Poly::is_one);
        if trivial {
            continue;
        }
        let correlation = match tilde.as_ref().and_then(Tilde::as_poly) {
            Some(t) => symmetric_square(&p).map(|s| &s == t),
            None => None,
        };
        rows.push(TableRow { pair: k, kl: p, tilde_p: tilde, correlation });
    }
    Ok(rows)
}
