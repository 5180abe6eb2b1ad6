use std::collections::{BTreeMap, BTreeSet, HashMap};

use coxkl::cache::{decode, encode, load_cache, save_cache, CacheError};
use coxkl::parabolic::h_elements;
use coxkl::patterns::PatternClass;
use coxkl::perm::cancelable_reduce;
use coxkl::{KlError, KlStore, Permutation, Poly};

fn p(s: &str) -> Permutation {
    s.parse().unwrap()
}

fn poly(s: &str) -> Poly<u64> {
    s.parse().unwrap()
}

fn signed(v: &[i64]) -> Vec<i64> {
    let mut v = v.to_vec();
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    signed(&out)
}

fn mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    signed(&out)
}

/// KL polynomials of `S_n` from R-polynomials and the defining identity
/// `q^{ℓ(w)-ℓ(x)} P_{x,w}(q^{-1}) - P_{x,w}(q) = Σ_{x<y<=w} R_{x,y} P_{y,w}`.
struct ROracle {
    r: HashMap<(Permutation, Permutation), Vec<i64>>,
    p: HashMap<(Permutation, Permutation), Vec<i64>>,
    all: Vec<Permutation>,
}

impl ROracle {
    fn new(n: usize) -> Self {
        let mut all: Vec<_> = Permutation::all(n).collect();
        all.sort_by_key(|w| w.length());
        ROracle { r: HashMap::new(), p: HashMap::new(), all }
    }

    fn r(&mut self, x: &Permutation, w: &Permutation) -> Vec<i64> {
        if !x.bruhat_le(w) {
            return vec![];
        }
        if x == w {
            return vec![1];
        }
        if let Some(v) = self.r.get(&(*x, *w)) {
            return v.clone();
        }
        let s = w.descents()[0];
        let (xs, ws) = (x.mul_simple_right(s), w.mul_simple_right(s));
        let v = if x.has_right_descent(s) {
            self.r(&xs, &ws)
        } else {
            let a = mul(&[-1, 1], &self.r(x, &ws));
            let b = mul(&[0, 1], &self.r(&xs, &ws));
            add(&a, &b)
        };
        self.r.insert((*x, *w), v.clone());
        v
    }

    fn p(&mut self, x: &Permutation, w: &Permutation) -> Vec<i64> {
        if !x.bruhat_le(w) {
            return vec![];
        }
        if x == w {
            return vec![1];
        }
        if let Some(v) = self.p.get(&(*x, *w)) {
            return v.clone();
        }
        let d = w.length() - x.length();
        let mut sum = vec![];
        let above: Vec<_> =
            self.all.iter().filter(|y| *y != x && x.bruhat_le(y) && y.bruhat_le(w)).cloned().collect();
        for y in above {
            let t = mul(&self.r(x, &y), &self.p(&y, w));
            sum = add(&sum, &t);
        }
        let v: Vec<i64> = signed(&(0..=(d - 1) / 2).map(|k| -sum.get(k).copied().unwrap_or(0)).collect::<Vec<_>>());
        self.p.insert((*x, *w), v.clone());
        v
    }
}

fn to_signed(p: &Poly<u64>) -> Vec<i64> {
    p.coeffs().iter().map(|&c| c as i64).collect()
}

/// The plain recursion, no memo, summing over every `z` in the interval and
/// using the last right descent instead of the first.
fn naive(x: &Permutation, w: &Permutation) -> Vec<i64> {
    if !x.bruhat_le(w) {
        return vec![];
    }
    if x == w {
        return vec![1];
    }
    let s = *w.descents().last().unwrap();
    let v = w.mul_simple_right(s);
    let xs = x.mul_simple_right(s);
    let c = x.has_right_descent(s);
    let (a, b) = (naive(x, &v), naive(&xs, &v));
    let mut acc = if c { add(&mul(&[0, 1], &a), &b) } else { add(&a, &mul(&[0, 1], &b)) };
    for z in Permutation::all(w.degree()) {
        if z == v || !z.has_right_descent(s) || !z.bruhat_le(&v) || !x.bruhat_le(&z) {
            continue;
        }
        let gap = v.length() - z.length();
        if gap % 2 == 0 {
            continue;
        }
        let mu = naive(&z, &v).get((gap - 1) / 2).copied().unwrap_or(0);
        if mu != 0 {
            let shift: Vec<i64> = (0..(w.length() - z.length()) / 2).map(|_| 0).chain([-mu]).collect();
            acc = add(&acc, &mul(&shift, &naive(x, &z)));
        }
    }
    acc
}

#[test]
fn paper_values() {
    let mut st: KlStore = KlStore::new();
    assert_eq!(st.kl_poly(&p("1324"), &p("3412")).unwrap(), poly("1+q"));
    assert_eq!(st.kl_poly(&p("14325"), &p("45312")).unwrap(), poly("1+q^2"));
    assert_eq!(st.kl_poly(&p("124356"), &p("456123")).unwrap(), poly("1+4q+4q^2+q^3"));
    assert_eq!(st.mu(&p("1324"), &p("3412")).unwrap(), 1);
    assert_eq!(st.mu(&p("1234"), &p("3412")).unwrap(), 0);
    assert_eq!(st.kl_poly(&p("3412"), &p("1324")).unwrap(), Poly::zero());
    assert!(matches!(st.kl_poly(&p("12"), &p("123")), Err(KlError::DegreeMismatch(2, 3))));
}

#[test]
fn r_polynomial_oracle() {
    for n in 1..=5 {
        let mut oracle = ROracle::new(n);
        let mut canon = KlStore::new();
        let mut plain = KlStore::without_canonicalization();
        for w in Permutation::all(n) {
            for x in Permutation::all(n) {
                let expect = oracle.p(&x, &w);
                assert_eq!(to_signed(&canon.kl_poly(&x, &w).unwrap()), expect, "P_{{{x},{w}}}");
                assert_eq!(to_signed(&plain.kl_poly(&x, &w).unwrap()), expect);
            }
        }
    }
}

#[test]
fn fill_matches_memo_free_recursion_on_s4() {
    let mut st: KlStore = KlStore::new();
    st.fill_level(4, 0).unwrap();
    assert_eq!(st.len(), 1);
    assert!(st.entries()[0].1.is_one());
    assert_eq!(st.kl_poly(&Permutation::identity(4), &Permutation::identity(4)).unwrap(), Poly::one());
    st.fill_through(4, 6).unwrap();
    let mut distinct = BTreeSet::new();
    for w in Permutation::all(4) {
        for x in Permutation::all(4) {
            let expect = naive(&x, &w);
            let got = st.kl_poly(&x, &w).unwrap();
            assert_eq!(to_signed(&got), expect);
            if x.bruhat_le(&w) && x != w {
                distinct.insert(got);
            }
        }
    }
    let glossary: BTreeSet<_> = st.glossary().iter().cloned().collect();
    assert_eq!(glossary.len(), st.glossary().len());
    assert_eq!(glossary, distinct);
}

#[test]
fn out_of_order_level_is_rejected() {
    let mut st = KlStore::<u64>::new();
    assert!(matches!(st.fill_level(4, 2), Err(KlError::OutOfOrderLevel { .. })));
}

#[test]
fn invariants_through_s6() {
    for n in 1..=6 {
        let mut st: KlStore = KlStore::new();
        st.fill_through(n, n * (n - 1) / 2).unwrap();
        for w in Permutation::all(n) {
            let smooth = PatternClass::Smooth.admits(&w);
            assert_eq!(st.kl_poly(&Permutation::identity(n), &w).unwrap().is_one(), smooth);
            for x in Permutation::all(n).filter(|x| x.bruhat_le(&w)) {
                let q = st.kl_poly(&x, &w).unwrap();
                assert_eq!(q.constant_term(), 1);
                if x != w {
                    let d = w.length() - x.length();
                    assert!(q.degree().unwrap() <= (d - 1) / 2);
                } else {
                    assert!(q.is_one());
                }
                if smooth {
                    assert!(q.is_one());
                }
            }
        }
        for (k, q) in st.entries().into_iter().filter(|(k, _)| k.w != k.x) {
            let d = k.length_gap() as usize;
            assert!(q.degree().unwrap() <= (d - 1) / 2);
            assert!(k.is_reduced());
        }
    }
}

#[test]
fn symmetries_without_canonicalization() {
    let mut st: KlStore = KlStore::without_canonicalization();
    for w in Permutation::all(5) {
        for x in Permutation::all(5).filter(|x| x.bruhat_le(&w)) {
            let q = st.kl_poly(&x, &w).unwrap();
            assert_eq!(st.kl_poly(&x.inverse(), &w.inverse()).unwrap(), q);
            assert_eq!(st.kl_poly(&x.conj_longest(), &w.conj_longest()).unwrap(), q);
            let k = cancelable_reduce(&w, &x);
            assert_eq!(st.kl_poly(&k.x, &k.w).unwrap(), q);
        }
    }
}

#[test]
fn mu_table_matches_top_coefficients_on_s7() {
    let mut st: KlStore = KlStore::new();
    st.fill_through(7, 21).unwrap();
    let mut expect = BTreeMap::new();
    for (k, q) in st.entries() {
        let d = k.length_gap() as usize;
        if d % 2 == 1 && q.coeff((d - 1) / 2) != 0 {
            expect.insert(k, q.coeff((d - 1) / 2));
        }
    }
    let got: BTreeMap<_, _> = st.mu_entries().into_iter().collect();
    assert_eq!(got, expect);
    assert!(got.values().all(|&m| m > 0));
}

#[test]
fn interval_tables_agree_with_full_fill() {
    let mut full: KlStore = KlStore::new();
    full.fill_through(6, 15).unwrap();
    for top in Permutation::all(6).step_by(11) {
        let mut fresh: KlStore = KlStore::new();
        let table = fresh.interval_table(&top).unwrap();
        assert_eq!(table.len(), Permutation::all(6).filter(|x| x.bruhat_le(&top)).count());
        for (x, q) in table {
            assert_eq!(full.kl_poly(&x, &top).unwrap(), q);
        }
    }
    let mut st = KlStore::<u64>::new();
    let e = Permutation::identity(3);
    assert_eq!(st.interval_table(&e).unwrap(), BTreeMap::from([(e, Poly::one())]));
    let mut capped = KlStore::<u64>::new().with_interval_budget(3);
    assert!(matches!(capped.interval_table(&p("4321")), Err(KlError::Budget { .. })));
}

#[test]
fn doubled_interval_reconstructs_the_first_table() {
    let top = p("3412").double(2);
    let mut st: KlStore = KlStore::new();
    let table = st.interval_table(&top).unwrap();
    let xt = p("1324").double(2);
    let mut sum = vec![];
    for (u, sign) in h_elements(4, 2, 1 << 10).unwrap() {
        let y = Permutation::compose(&xt, &u).unwrap();
        if let Some(q) = table.get(&y) {
            sum = add(&sum, &mul(&[sign], &to_signed(q)));
        }
    }
    assert_eq!(sum, vec![0, 0, 0, 1, 1, 1]);
}

#[test]
fn cache_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s5.coxkl");
    let mut st: KlStore = KlStore::new();
    st.fill_through(5, 10).unwrap();
    save_cache(&st, &path).unwrap();
    let mut back = load_cache(&path).unwrap();
    assert_eq!(back, st);
    assert_eq!(back.level(), Some(10));
    assert_eq!(back.degree(), Some(5));
    let before = back.len();
    for w in Permutation::all(5) {
        for x in Permutation::all(5) {
            assert_eq!(back.kl_poly(&x, &w).unwrap(), st.kl_poly(&x, &w).unwrap());
        }
    }
    assert_eq!(back.len(), before);

    let mut bytes = std::fs::read(&path).unwrap();
    let last = bytes.len() - 20;
    bytes[last] ^= 1;
    assert!(matches!(decode(&bytes), Err(CacheError::Checksum)));
    let good = std::fs::read(&path).unwrap();
    assert!(decode(&good[..good.len() / 2]).is_err());
}

#[test]
fn fills_are_identical_across_thread_counts() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut st: KlStore = KlStore::new();
            st.fill_through(6, 15).unwrap();
            encode(&st)
        })
    };
    assert_eq!(run(1), run(4));
}
