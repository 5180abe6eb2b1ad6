//! The Kazhdan–Lusztig recursion on `S_n` with memoization through
//! canonical pairs, a deduplicated polynomial glossary and a sparse μ-table.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::cache::CacheError;
use crate::perm::{canonicalize, for_each_below, lower_interval, IntervalConstraints, PairKey, Permutation};
use crate::poly::{Coefficient, Poly};

#[derive(Debug, thiserror::Error)]
pub enum KlError {
    #[error("coefficient overflow while computing P for {0:?}")]
    Overflow(PairKey),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("level {requested} requested but the store is complete only through {complete:?}")]
    OutOfOrderLevel { requested: usize, complete: Option<usize> },
    #[error("interval below an element of length {length} exceeds the budget of {budget}")]
    Budget { length: usize, budget: usize },
    #[error(transparent)]
    Cache(#[from] CacheError),
}

/// `z` with `μ(z, v) > 0`, paired with the value.
pub(crate) type MuList<C> = Arc<Vec<(Permutation, C)>>;

/// Memoized KL polynomials keyed by canonical pairs.
#[derive(Clone, Debug)]
pub struct KlStore<C: Coefficient = u64> {
    canonical: bool,
    degree: Option<usize>,
    level: Option<usize>,
    table: FxHashMap<PairKey, u32>,
    glossary: Vec<Poly<C>>,
    intern: FxHashMap<Poly<C>, u32>,
    mu_table: FxHashMap<PairKey, C>,
    mu_lists: FxHashMap<Permutation, MuList<C>>,
    interval_budget: Option<usize>,
}

impl<C: Coefficient> Default for KlStore<C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Coefficient> PartialEq for KlStore<C> {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
            && self.degree == other.degree
            && self.level == other.level
            && self.mu_table == other.mu_table
            && self.table.len() == other.table.len()
            && self.table.iter().all(|(k, &i)| other.get(k) == Some(&self.glossary[i as usize]))
    }
}

impl<C: Coefficient> KlStore<C> {
    pub fn new() -> Self {
        KlStore {
            canonical: true,
            degree: None,
            level: None,
            table: FxHashMap::default(),
            glossary: Vec::new(),
            intern: FxHashMap::default(),
            mu_table: FxHashMap::default(),
            mu_lists: FxHashMap::default(),
            interval_budget: None,
        }
    }

    /// A store keyed by raw pairs, used to test the symmetry reductions.
    pub fn without_canonicalization() -> Self {
        KlStore { canonical: false, ..Self::new() }
    }

    /// Caps `ℓ(top)` for [`KlStore::interval_table`].
    pub fn with_interval_budget(mut self, max_length: usize) -> Self {
        self.interval_budget = Some(max_length);
        self
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Degree whose levels [`KlStore::fill_level`] has populated.
    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    /// Highest fully computed `ℓ(w)` for [`KlStore::degree`].
    pub fn level(&self) -> Option<usize> {
        self.level
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn glossary(&self) -> &[Poly<C>] {
        &self.glossary
    }

    pub fn get(&self, key: &PairKey) -> Option<&Poly<C>> {
        self.table.get(key).map(|&i| &self.glossary[i as usize])
    }

    /// All stored pairs with their polynomials, sorted by key.
    pub fn entries(&self) -> Vec<(PairKey, &Poly<C>)> {
        let mut v: Vec<_> = self.table.iter().map(|(k, &i)| (*k, &self.glossary[i as usize])).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Stored pairs with `μ > 0`, sorted by key.
    pub fn mu_entries(&self) -> Vec<(PairKey, C)> {
        let mut v: Vec<_> = self.mu_table.iter().map(|(k, m)| (*k, m.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub(crate) fn key(&self, x: &Permutation, w: &Permutation) -> PairKey {
        if self.canonical {
            canonicalize(w, x)
        } else {
            PairKey { w: *w, x: *x }
        }
    }

    /// `P_{x,w}`; zero when `x` is not below `w`.
    pub fn kl_poly(&mut self, x: &Permutation, w: &Permutation) -> Result<Poly<C>, KlError> {
        if x.degree() != w.degree() {
            return Err(KlError::DegreeMismatch(x.degree(), w.degree()));
        }
        let mut e = Engine::new(self);
        let r = e.p(x, w);
        let local = e.into_local();
        self.absorb(local);
        r
    }

    /// Coefficient of `q^{(ℓ(w)-ℓ(x)-1)/2}` in `P_{x,w}`.
    pub fn mu(&mut self, x: &Permutation, w: &Permutation) -> Result<C, KlError> {
        if x == w || !x.bruhat_leq(w).map_err(|_| KlError::DegreeMismatch(x.degree(), w.degree()))? {
            return Ok(C::zero());
        }
        let d = w.length() - x.length();
        if d % 2 == 0 {
            return Ok(C::zero());
        }
        Ok(self.kl_poly(x, w)?.coeff((d - 1) / 2))
    }

    /// Computes every canonical pair of `S_n` with `ℓ(w) = target`, in
    /// parallel on the current rayon pool. Levels must be filled in order.
    pub fn fill_level(&mut self, n: usize, target: usize) -> Result<(), KlError> {
        if let Some(d) = self.degree {
            if d != n {
                return Err(KlError::DegreeMismatch(d, n));
            }
        }
        let expected = self.level.map_or(0, |l| l + 1);
        if target != expected {
            return Err(KlError::OutOfOrderLevel { requested: target, complete: self.level });
        }
        let pairs = self.level_pairs(n, target);
        let store = &*self;
        let chunk = (pairs.len() / (4 * rayon::current_num_threads()).max(1)).max(1);
        let locals = pairs
            .par_chunks(chunk)
            .map(|ks| {
                let mut e = Engine::new(store);
                for k in ks {
                    e.p(&k.x, &k.w)?;
                }
                Ok(e.into_local())
            })
            .collect::<Result<Vec<_>, KlError>>()?;
        let mut merged = Local::default();
        for l in locals {
            merged.table.extend(l.table);
            merged.mu_lists.extend(l.mu_lists);
        }
        if target == 0 {
            let trivial = PairKey { w: Permutation::identity(0), x: Permutation::identity(0) };
            let key = if self.canonical { trivial } else {
                let e = Permutation::identity(n);
                PairKey { w: e, x: e }
            };
            merged.table.insert(key, Poly::one());
        }
        self.absorb(merged);
        self.degree = Some(n);
        self.level = Some(target);
        Ok(())
    }

    /// [`KlStore::fill_level`] for every level up to `max_length`.
    pub fn fill_through(&mut self, n: usize, max_length: usize) -> Result<(), KlError> {
        let start = self.level.map_or(0, |l| l + 1);
        for t in start..=max_length.min(n * n.saturating_sub(1) / 2) {
            self.fill_level(n, t)?;
        }
        Ok(())
    }

    /// The keys computed by `fill_level(n, target)`.
    fn level_pairs(&self, n: usize, target: usize) -> Vec<PairKey> {
        let mut out = Vec::new();
        for w in Permutation::all(n).filter(|w| w.length() == target) {
            if !self.canonical {
                for x in lower_interval(&w) {
                    out.push(PairKey { w, x });
                }
                continue;
            }
            let c = IntervalConstraints {
                right_descents: w.right_descent_mask(),
                left_descents: w.left_descent_mask(),
                ..Default::default()
            };
            for_each_below(&w, c, |x| {
                if *x != w {
                    let k = PairKey { w, x: *x };
                    if canonicalize(&w, x) == k {
                        out.push(k);
                    }
                }
            });
        }
        out
    }

    /// `P_{x,top}` for every `x <= top`.
    pub fn interval_table(&mut self, top: &Permutation) -> Result<BTreeMap<Permutation, Poly<C>>, KlError> {
        if let Some(b) = self.interval_budget {
            if top.length() > b {
                return Err(KlError::Budget { length: top.length(), budget: b });
            }
        }
        let xs = lower_interval(top);
        let mut e = Engine::new(self);
        let mut out = BTreeMap::new();
        for x in xs {
            let p = e.p(&x, top)?;
            out.insert(x, p);
        }
        let local = e.into_local();
        self.absorb(local);
        Ok(out)
    }

    fn intern(&mut self, p: Poly<C>) -> u32 {
        if let Some(&i) = self.intern.get(&p) {
            return i;
        }
        let i = self.glossary.len() as u32;
        self.glossary.push(p.clone());
        self.intern.insert(p, i);
        i
    }

    /// Inserts a pair, recording μ when the top allowed coefficient is nonzero.
    pub(crate) fn insert(&mut self, key: PairKey, p: Poly<C>) {
        if self.table.contains_key(&key) {
            return;
        }
        let gap = key.length_gap();
        if gap > 0 && gap % 2 == 1 {
            let m = p.coeff((gap as usize - 1) / 2);
            if !m.is_zero() {
                self.mu_table.insert(key, m);
            }
        }
        let i = self.intern(p);
        self.table.insert(key, i);
    }

    fn absorb(&mut self, local: Local<C>) {
        let mut keys: Vec<_> = local.table.into_iter().collect();
        keys.sort_by(|a, b| a.0.cmp(&b.0));
        for (k, p) in keys {
            self.insert(k, p);
        }
        for (v, l) in local.mu_lists {
            self.mu_lists.entry(v).or_insert(l);
        }
    }

    pub(crate) fn set_levels(&mut self, degree: Option<usize>, level: Option<usize>, canonical: bool) {
        self.degree = degree;
        self.level = level;
        self.canonical = canonical;
    }
}

struct Local<C> {
    table: FxHashMap<PairKey, Poly<C>>,
    mu_lists: FxHashMap<Permutation, MuList<C>>,
}

impl<C> Default for Local<C> {
    fn default() -> Self {
        Local { table: FxHashMap::default(), mu_lists: FxHashMap::default() }
    }
}

/// A computation over a read-only store with a private overlay.
struct Engine<'a, C: Coefficient> {
    store: &'a KlStore<C>,
    local: Local<C>,
}

impl<'a, C: Coefficient> Engine<'a, C> {
    fn new(store: &'a KlStore<C>) -> Self {
        Engine { store, local: Local::default() }
    }

    fn into_local(self) -> Local<C> {
        self.local
    }

    fn lookup(&self, key: &PairKey) -> Option<Poly<C>> {
        self.store.get(key).or_else(|| self.local.table.get(key)).cloned()
    }

    fn p(&mut self, x: &Permutation, w: &Permutation) -> Result<Poly<C>, KlError> {
        if x == w {
            return Ok(Poly::one());
        }
        if !x.bruhat_le(w) {
            return Ok(Poly::zero());
        }
        let key = self.store.key(x, w);
        if key.x == key.w {
            return Ok(Poly::one());
        }
        if let Some(p) = self.lookup(&key) {
            return Ok(p);
        }
        let p = self.compute(&key)?;
        self.local.table.insert(key, p.clone());
        Ok(p)
    }

    /// `P_{x,w} = q^c P_{x,ws} + q^{1-c} P_{xs,ws} - Σ μ(z,ws) q^{(ℓ(w)-ℓ(z))/2} P_{x,z}`
    /// over `zs < z < ws`, with `s` the first right descent of `w`.
    fn compute(&mut self, key: &PairKey) -> Result<Poly<C>, KlError> {
        let (w, x) = (key.w, key.x);
        let s = w.first_right_descent().expect("x < w forces a descent");
        let v = w.mul_simple_right(s);
        let xs = x.mul_simple_right(s);
        let a = self.p(&x, &v)?;
        let b = self.p(&xs, &v)?;
        let overflow = || KlError::Overflow(*key);
        let one = C::one();
        let mut acc = if x.has_right_descent(s) {
            b.checked_add_scaled_shift(&one, 1, &a)
        } else {
            a.checked_add_scaled_shift(&one, 1, &b)
        }
        .ok_or_else(overflow)?;
        let lw = w.length();
        let list = self.mu_list(&v)?;
        for (z, m) in list.iter() {
            if !z.has_right_descent(s) || !x.bruhat_le(z) {
                continue;
            }
            let pz = self.p(&x, z)?;
            acc = acc.checked_sub_scaled_shift(m, (lw - z.length()) / 2, &pz).ok_or_else(overflow)?;
        }
        Ok(acc)
    }

    /// All `z < v` with `μ(z,v) > 0`: coatoms (`μ = 1`) and elements with odd
    /// length gap at least 3, which must share the descents of `v`.
    fn mu_list(&mut self, v: &Permutation) -> Result<MuList<C>, KlError> {
        if let Some(l) = self.store.mu_lists.get(v).or_else(|| self.local.mu_lists.get(v)) {
            return Ok(l.clone());
        }
        let lv = v.length();
        let mut out: Vec<(Permutation, C)> = coatoms(v).into_iter().map(|z| (z, C::one())).collect();
        let c = IntervalConstraints {
            right_descents: v.right_descent_mask(),
            left_descents: v.left_descent_mask(),
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
            let p = self.p(&z, v)?;
            let m = p.coeff((lv - z.length() - 1) / 2);
            if !m.is_zero() {
                out.push((z, m));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        let l = Arc::new(out);
        self.local.mu_lists.insert(*v, l.clone());
        Ok(l)
    }
}

/// Elements covered by `v` in Bruhat order.
pub fn coatoms(v: &Permutation) -> Vec<Permutation> {
    let s = v.as_slice();
    let n = s.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if s[a] > s[b] && (a + 1..b).all(|k| s[k] > s[a] || s[k] < s[b]) {
                let mut img = s.to_vec();
                img.swap(a, b);
                out.push(Permutation::from_zero_based(&img));
            }
        }
    }
    out.sort();
    out
}
