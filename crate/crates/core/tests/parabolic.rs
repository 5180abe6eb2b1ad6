use coxkl::parabolic::{
    normalization_exponent, raw_sum, raw_sum_interval, reduced_orbit_reps, symmetric_square, table_report,
    tilde_p, verify_conjecture, HGroup, ParabolicError, QuotientStore, Tilde, DEFAULT_H_BUDGET,
};
use coxkl::perm::cancelable_reduce;
use coxkl::{KlStore, Laurent, PairKey, Permutation, Poly};

fn p(s: &str) -> Permutation {
    s.parse().unwrap()
}

fn poly(s: &str) -> Poly<u64> {
    s.parse().unwrap()
}

fn pairs(n: usize) -> Vec<(Permutation, Permutation)> {
    let all: Vec<_> = Permutation::all(n).collect();
    let mut out = Vec::new();
    for w in &all {
        for x in all.iter().filter(|x| x.bruhat_le(w)) {
            out.push((*x, *w));
        }
    }
    out
}

/// `(n, m)` with `nm <= 8` and `m >= 2`.
const SMALL: [(usize, usize); 7] = [(1, 2), (2, 2), (3, 2), (4, 2), (1, 3), (2, 3), (2, 4)];

fn tilde(st: &mut QuotientStore, x: &Permutation, w: &Permutation) -> Poly<u64> {
    match tilde_p(st, x, w).unwrap() {
        Tilde::Poly(t) => t,
        Tilde::Violation(v) => panic!("{x} {w}: {v:?}"),
    }
}

/// 213-avoiding: no `i<j<k` with `v(j) < v(i) < v(k)`.
fn avoids_213(v: &Permutation) -> bool {
    let s = v.one_line();
    let n = s.len();
    !(0..n).any(|i| (i + 1..n).any(|j| (j + 1..n).any(|k| s[j] < s[i] && s[i] < s[k])))
}

#[test]
fn h_group_enumeration() {
    for (n, m) in SMALL {
        let h = HGroup::new(n, m).unwrap();
        let els: Vec<_> = h.iter().collect();
        let fact: u128 = (1..=m as u128).product();
        assert_eq!(els.len() as u128, fact.pow(n as u32));
        assert_eq!(h.order(), els.len() as u128);
        assert_eq!(els.iter().map(|e| e.1).sum::<i64>(), 0);
        let distinct: std::collections::BTreeSet<_> = els.iter().map(|e| e.0).collect();
        assert_eq!(distinct.len(), els.len());
        for (u, s) in &els {
            assert_eq!(u.sign(), *s);
            for b in 0..n {
                for i in b * m + 1..=(b + 1) * m {
                    assert!((b * m + 1..=(b + 1) * m).contains(&u.image(i)));
                }
            }
        }
    }
}

#[test]
fn m_one_gives_kl_polynomials() {
    let mut kl: KlStore = KlStore::new();
    for n in 1..=5 {
        let mut st = QuotientStore::new(n, 1).unwrap();
        for (x, w) in pairs(n) {
            assert_eq!(tilde(&mut st, &x, &w), kl.kl_poly(&x, &w).unwrap(), "{x} {w}");
        }
    }
}

#[test]
fn quotient_and_interval_routes_agree() {
    let mut kl: KlStore = KlStore::new();
    for (n, m) in SMALL {
        let mut st = QuotientStore::new(n, m).unwrap();
        for (x, w) in pairs(n) {
            let a = raw_sum(&mut st, &x, &w).unwrap();
            let b = raw_sum_interval(&mut kl, m, &x, &w, DEFAULT_H_BUDGET).unwrap();
            assert_eq!(a, b, "m={m} {x} {w}");
        }
    }
}

#[test]
fn diagonal_and_identity_examples() {
    for (n, m) in SMALL {
        let mut st = QuotientStore::new(n, m).unwrap();
        for w in Permutation::all(n) {
            assert_eq!(raw_sum(&mut st, &w, &w).unwrap(), Laurent::one());
        }
    }
    let mut st = QuotientStore::new(4, 2).unwrap();
    assert_eq!(raw_sum(&mut st, &p("1324"), &p("3412")).unwrap(), "q^3+q^4+q^5".parse().unwrap());
    assert_eq!(normalization_exponent(2, &p("1324"), &p("3412")), 3);
    assert_eq!(normalization_exponent(3, &p("2143"), &p("4231")), 9);
    assert!(matches!(tilde_p(&mut st, &p("4231"), &p("1324")), Err(ParabolicError::NotBelow { .. })));
    assert!(tilde_p(&mut st, &p("123"), &p("321")).is_err());
}

#[test]
fn direct_sums_multiply() {
    for m in 2..=3 {
        let max = 8 / m;
        let mut stores: Vec<_> = (0..=max).map(|n| QuotientStore::new(n.max(1), m).unwrap()).collect();
        for a in 1..max {
            for b in 1..=max - a {
                for (x1, w1) in pairs(a) {
                    let t1 = tilde(&mut stores[a], &x1, &w1);
                    for (x2, w2) in pairs(b) {
                        let t2 = tilde(&mut stores[b], &x2, &w2);
                        let (x, w) = (Permutation::direct_sum(&x1, &x2), Permutation::direct_sum(&w1, &w2));
                        let t = tilde(&mut stores[a + b], &x, &w);
                        assert_eq!(t, t1.checked_mul(&t2).unwrap(), "m={m} {x} {w}");
                    }
                }
            }
        }
    }
}

#[test]
fn symmetries_slides_and_cancelation() {
    for (n, m) in SMALL {
        let mut st = QuotientStore::new(n, m).unwrap();
        let mut small: Vec<_> = (0..n).map(|k| QuotientStore::new(k.max(1), m).unwrap()).collect();
        for (x, w) in pairs(n) {
            let t = tilde(&mut st, &x, &w);
            assert_eq!(tilde(&mut st, &x.inverse(), &w.inverse()), t);
            assert_eq!(tilde(&mut st, &x.conj_longest(), &w.conj_longest()), t);
            for s in x.descents().into_iter().filter(|&s| w.has_right_descent(s)) {
                let (xs, ws) = (x.mul_simple_right(s), w.mul_simple_right(s));
                if !x.bruhat_le(&ws) {
                    assert_eq!(tilde(&mut st, &xs, &ws), t, "slide {x} {w} s{s}");
                }
            }
            let k = cancelable_reduce(&w, &x);
            if k.degree() < n && k.degree() > 0 {
                assert_eq!(tilde(&mut small[k.degree()], &k.x, &k.w), t, "cancel {x} {w}");
            }
        }
    }
}

/// For `x <= w` with some 213-avoiding `v <= x` and `P_{v,w} = 1`, the sum at
/// `q = 1` is 1, so the raw sum is the single monomial `q^{C(m,2)(ℓ(w)-ℓ(x))}`.
#[test]
fn value_one_under_the_representation_theoretic_hypothesis() {
    let mut kl: KlStore = KlStore::new();
    let mut hits = 0;
    for (n, m) in SMALL {
        let mut st = QuotientStore::new(n, m).unwrap();
        for (x, w) in pairs(n) {
            let hyp = Permutation::all(n)
                .filter(|v| v.bruhat_le(&x) && avoids_213(v))
                .any(|v| kl.kl_poly(&v, &w).unwrap().is_one());
            if hyp {
                hits += 1;
                let t = tilde(&mut st, &x, &w);
                assert_eq!(t.checked_eval_one(), Some(1), "{x} {w}");
                assert_eq!(t, Poly::one());
            }
        }
    }
    assert!(hits > 0);
}

#[test]
fn conjecture_holds_through_s4_doubled_and_s2_quadrupled() {
    let mut kl: KlStore = KlStore::new();
    for (n, m) in SMALL {
        let mut st = QuotientStore::new(n, m).unwrap();
        for (x, w) in pairs(n) {
            let r = verify_conjecture(&mut st, &mut kl, &x, &w).unwrap();
            assert!(r.checks.all(), "m={m} {x} {w}: {:?}", r.witnesses);
            assert!(r.witnesses.is_empty());
            assert_eq!(r.tilde_p.is_some(), r.checks.polynomiality);
        }
    }
}

#[test]
fn boolean_pairs_normalize_to_one() {
    let mut st = QuotientStore::new(4, 2).unwrap();
    let mut kl: KlStore = KlStore::new();
    for (x, w) in pairs(4).into_iter().filter(|(_, w)| coxkl::patterns::is_boolean(w)) {
        let r = verify_conjecture(&mut st, &mut kl, &x, &w).unwrap();
        assert!(r.boolean);
        let gap = (w.length() - x.length()) as i64;
        assert_eq!(r.raw, Laurent::monomial(1, gap));
        assert_eq!(r.tilde_p, Some(Poly::one()));
    }
}

#[test]
fn tables_for_small_cases() {
    let mut kl: KlStore = KlStore::new();
    let mut st = QuotientStore::new(4, 2).unwrap();
    let rows = table_report(&mut st, &mut kl).unwrap();
    let got: Vec<_> = rows.iter().map(|r| (r.pair.w, r.pair.x, r.tilde_p.clone())).collect();
    assert_eq!(
        got,
        vec![
            (p("3412"), p("1324"), Some(Tilde::Poly(poly("1+q+q^2")))),
            (p("4231"), p("2143"), Some(Tilde::Poly(poly("1+q+q^2")))),
        ]
    );
    assert!(rows.iter().all(|r| r.correlation == Some(true)));
    let mut st = QuotientStore::new(5, 2).unwrap().with_budget(10);
    let rows = table_report(&mut st, &mut kl).unwrap();
    assert!(rows.iter().any(|r| r.skipped()));
}

#[test]
fn reduced_orbit_representatives() {
    assert_eq!(reduced_orbit_reps(4).len(), 2);
    for n in 2..=5 {
        for k in reduced_orbit_reps(n) {
            assert!(k.is_reduced() && k.orbit_min() == k && k.x != k.w);
            assert!(k.x.bruhat_le(&k.w));
            for o in k.orbit() {
                assert!(o >= k);
            }
        }
    }
}

#[test]
fn symmetric_square_examples() {
    assert_eq!(symmetric_square(&poly("1+q")), Some(poly("1+q+q^2")));
    assert_eq!(symmetric_square(&poly("1+2q")), Some(poly("1+2q+3q^2")));
    assert_eq!(symmetric_square(&Poly::one()), Some(Poly::one()));
}

#[test]
fn six_doubled_example() {
    let mut st = QuotientStore::new(6, 2).unwrap();
    let t = tilde(&mut st, &p("231564"), &p("562341"));
    assert_eq!(t, poly("1+4q+21q^2+30q^3+14q^4"));
    let k = PairKey::new(p("562341"), p("231564"));
    assert!(k.is_reduced());
}
