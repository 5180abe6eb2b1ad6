//! Acceptance criteria A1-A9. Runs without the libtest harness so the
//! PASS/FAIL lines always reach the terminal.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use coxkl::cosets::{
    all_triplets, coset_sum_closed, coset_sums_brute, cycle_count_check, ix_set, k_compose, k_coset_count,
    k_decompose, prm, CosetTriplet,
};
use coxkl::deodhar::{deodhar_poly, doubled_word, is_tight_word, reduced_word, ReducedWord};
use coxkl::parabolic::{normalize_raw, raw_sum, table_report, verify_conjecture, QuotientStore, Tilde};
use coxkl::patterns::{count_class, is_boolean, PatternClass};
use coxkl::perm::cancelable_reduce;
use coxkl::{KlStore, Laurent, PairKey, Permutation, Poly};

type Outcome = Result<String, String>;

fn p(s: &str) -> Permutation {
    s.parse().unwrap()
}

fn poly(s: &str) -> Poly<u64> {
    s.parse().unwrap()
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Published tables: `(w,x)` pairs, `P`, then `P~` for each listed `m`.
struct PublishedRow {
    pairs: &'static [(&'static str, &'static str)],
    kl: &'static str,
    tilde: &'static [&'static str],
}

const S4_ROWS: &[PublishedRow] = &[PublishedRow {
    pairs: &[("3412", "1324"), ("4231", "2143")],
    kl: "1+q",
    tilde: &["1+q+q^2", "1+q+q^2+q^3"],
}];

const S5_ROWS: &[PublishedRow] = &[
    PublishedRow { pairs: &[("35142", "13254"), ("52431", "21543")], kl: "1+q", tilde: &["1+q+q^2"] },
    PublishedRow { pairs: &[("34512", "13425"), ("45231", "24153")], kl: "1+2q", tilde: &["1+2q+3q^2"] },
    PublishedRow { pairs: &[("45312", "14325")], kl: "1+q^2", tilde: &["1+q^2+q^4"] },
    PublishedRow { pairs: &[("52341", "21354")], kl: "1+2q+q^2", tilde: &["1+2q+4q^2+2q^3+q^4"] },
];

/// Rows where `P~ = (P² + P(q²))/2`.
const S6_CORRELATED: &[PublishedRow] = &[
    PublishedRow {
        pairs: &[
            ("361452", "143265"),
            ("361542", "132654"),
            ("426153", "214365"),
            ("562341", "254163"),
            ("625431", "216543"),
        ],
        kl: "1+q",
        tilde: &["1+q+q^2"],
    },
    PublishedRow {
        pairs: &[
            ("346152", "134265"),
            ("356142", "135264"),
            ("462513", "241635"),
            ("462531", "241653"),
            ("562431", "251643"),
        ],
        kl: "1+2q",
        tilde: &["1+2q+3q^2"],
    },
    PublishedRow {
        pairs: &[
            ("356412", "135426"),
            ("463152", "143265"),
            ("465132", "143265"),
            ("564231", "254163"),
            ("632541", "321654"),
            ("653421", "321654"),
        ],
        kl: "1+q+q^2",
        tilde: &["1+q+2q^2+q^3+q^4"],
    },
    PublishedRow { pairs: &[("456312", "145326")], kl: "1+2q^2", tilde: &["1+2q^2+3q^4"] },
    PublishedRow {
        pairs: &[
            ("351624", "132546"),
            ("354612", "132546"),
            ("361452", "132465"),
            ("364152", "143265"),
            ("456132", "143265"),
            ("462351", "243165"),
            ("463512", "143625"),
            ("465231", "243165"),
            ("562341", "321654"),
            ("563421", "321654"),
            ("623541", "213654"),
            ("624351", "214365"),
            ("624531", "214653"),
            ("634521", "321654"),
            ("635241", "326154"),
        ],
        kl: "1+2q+q^2",
        tilde: &["1+2q+4q^2+2q^3+q^4"],
    },
    PublishedRow { pairs: &[("456123", "145236")], kl: "1+4q+q^2", tilde: &["1+4q+11q^2+4q^3+q^4"] },
    PublishedRow { pairs: &[("564312", "154326")], kl: "1+q^3", tilde: &["1+q^3+q^6"] },
];

/// Rows where `P~ != (P² + P(q²))/2`.
const S6_UNCORRELATED: &[PublishedRow] = &[
    PublishedRow {
        pairs: &[("345612", "134526"), ("456231", "245163"), ("563412", "351624")],
        kl: "1+3q",
        tilde: &["1+3q+7q^2"],
    },
    PublishedRow {
        pairs: &[
            ("364512", "132654"),
            ("426351", "214365"),
            ("456123", "214365"),
            ("623451", "214365"),
            ("563412", "154326"),
            ("645231", "216543"),
        ],
        kl: "1+2q+q^2",
        tilde: &["1+2q+3q^2+2q^3+q^4"],
    },
    PublishedRow {
        pairs: &[
            ("345612", "132546"),
            ("356124", "135246"),
            ("364512", "143625"),
            ("456123", "143265"),
            ("456231", "215463"),
            ("562341", "251463"),
            ("563412", "153624"),
            ("563412", "321654"),
            ("645231", "426153"),
        ],
        kl: "1+3q+q^2",
        tilde: &["1+3q+8q^2+3q^3+q^4"],
    },
    PublishedRow {
        pairs: &[
            ("364512", "132645"),
            ("456123", "124365"),
            ("456231", "214365"),
            ("563412", "153426"),
            ("563412", "132654"),
            ("645231", "216453"),
        ],
        kl: "1+3q+2q^2",
        tilde: &["1+3q+9q^2+8q^3+3q^4"],
    },
    PublishedRow {
        pairs: &[("462351", "241365"), ("562341", "231654")],
        kl: "1+3q+2q^2",
        tilde: &["1+3q+9q^2+7q^3+3q^4"],
    },
    PublishedRow { pairs: &[("456123", "125436")], kl: "1+4q+2q^2", tilde: &["1+4q+14q^2+13q^3+3q^4"] },
    PublishedRow { pairs: &[("562341", "251364")], kl: "1+4q+3q^2", tilde: &["1+4q+17q^2+16q^3+6q^4"] },
    PublishedRow { pairs: &[("562341", "231564")], kl: "1+4q+4q^2", tilde: &["1+4q+21q^2+30q^3+14q^4"] },
    PublishedRow {
        pairs: &[("623451", "213465")],
        kl: "1+3q+3q^2+q^3",
        tilde: &["1+3q+10q^2+13q^3+10q^4+3q^5+q^6"],
    },
    PublishedRow {
        pairs: &[("563412", "132546"), ("645231", "214365")],
        kl: "1+3q+3q^2+q^3",
        tilde: &["1+3q+10q^2+16q^3+13q^4+5q^5+q^6"],
    },
    PublishedRow {
        pairs: &[("456123", "124356")],
        kl: "1+4q+4q^2+q^3",
        tilde: &["1+4q+18q^2+34q^3+27q^4+4q^5+q^6"],
    },
];

#[derive(Debug, PartialEq)]
struct Expected {
    kl: Poly<u64>,
    tilde: Poly<u64>,
    correlation: Option<bool>,
}

/// Published rows keyed by orbit minimum, taking the `P~` column `col`.
fn expected(tables: &[(&[PublishedRow], Option<bool>)], col: usize) -> BTreeMap<PairKey, Expected> {
    let mut out = BTreeMap::new();
    for (rows, correlation) in tables {
        for row in rows.iter() {
            for (w, x) in row.pairs {
                let key = PairKey::new(p(w), p(x)).orbit_min();
                let e = Expected { kl: poly(row.kl), tilde: poly(row.tilde[col]), correlation: *correlation };
                assert!(out.insert(key, e).is_none(), "duplicate paper row {w} {x}");
            }
        }
    }
    out
}

fn check_table(n: usize, m: usize, want: BTreeMap<PairKey, Expected>, skips_allowed: bool) -> Outcome {
    let t = Instant::now();
    let mut st = QuotientStore::new(n, m).map_err(|e| e.to_string())?;
    let mut kl: KlStore = KlStore::new();
    let rows = table_report(&mut st, &mut kl).map_err(|e| e.to_string())?;
    let mut skipped = 0;
    for r in &rows {
        let Some(e) = want.get(&r.pair) else {
            return Err(format!("(n={n},m={m}) extra row {} {}", r.pair.w, r.pair.x));
        };
        ensure!(r.kl == e.kl, "(n={n},m={m}) {} {}: P = {} vs {}", r.pair.w, r.pair.x, r.kl, e.kl);
        match &r.tilde_p {
            None => skipped += 1,
            Some(Tilde::Poly(t)) => {
                ensure!(*t == e.tilde, "(n={n},m={m}) {} {}: {} vs {}", r.pair.w, r.pair.x, t, e.tilde);
                if let Some(c) = e.correlation {
                    ensure!(r.correlation == Some(c), "(n={n},m={m}) {} {}: wrong table", r.pair.w, r.pair.x);
                }
            }
            Some(Tilde::Violation(v)) => return Err(format!("{} {}: violation {v:?}", r.pair.w, r.pair.x)),
        }
    }
    ensure!(rows.len() == want.len(), "(n={n},m={m}) {} rows, paper lists {}", rows.len(), want.len());
    ensure!(skipped == 0 || skips_allowed, "(n={n},m={m}) {skipped} rows skipped");
    Ok(format!("(n={n},m={m}) {} rows, {skipped} skipped, {:.1?}", rows.len(), t.elapsed()))
}

fn a1() -> Outcome {
    let mut notes = Vec::new();
    notes.push(check_table(4, 2, expected(&[(S4_ROWS, Some(true))], 0), false)?);
    notes.push(check_table(4, 3, expected(&[(S4_ROWS, None)], 1), true)?);
    notes.push(check_table(5, 2, expected(&[(S5_ROWS, Some(true))], 0), false)?);
    notes.push(check_table(6, 2, expected(&[(S6_CORRELATED, Some(true)), (S6_UNCORRELATED, Some(false))], 0), true)?);
    Ok(notes.join("; "))
}

fn pairs(n: usize) -> impl Iterator<Item = (Permutation, Permutation)> {
    Permutation::all(n).flat_map(move |w| Permutation::all(n).filter(move |x| x.bruhat_le(&w)).map(move |x| (x, w)))
}

fn sweep(n: usize, m: usize, kl: &mut KlStore) -> Result<(usize, usize), String> {
    let mut st = QuotientStore::new(n, m).map_err(|e| e.to_string())?;
    let (mut count, mut boolean_degree) = (0, 0);
    for (x, w) in pairs(n) {
        let r = verify_conjecture(&mut st, kl, &x, &w).map_err(|e| e.to_string())?;
        count += 1;
        let c = r.checks;
        ensure!(c.polynomiality && c.constant_term_one && c.descent_invariance, "m={m} {x} {w}: {:?}", r.witnesses);
        if !c.degree_law {
            ensure!(r.boolean, "m={m} {x} {w}: {:?}", r.witnesses);
            boolean_degree += 1;
        }
    }
    Ok((count, boolean_degree))
}

fn a2() -> Outcome {
    let t = Instant::now();
    let mut kl: KlStore = KlStore::new();
    let mut notes = Vec::new();
    for (n, m) in [(2, 2), (3, 2), (4, 2), (2, 3), (3, 3), (4, 1), (5, 1), (6, 1), (7, 1)] {
        let (count, flagged) = sweep(n, m, &mut kl)?;
        notes.push(format!("(n={n},m={m}) {count} pairs"));
        ensure!(flagged == 0, "(n={n},m={m}) {flagged} Boolean pairs fail the degree law");
    }
    Ok(format!("{}, {:.1?}", notes.join(", "), t.elapsed()))
}

fn booleans(max_n: usize) -> Vec<ReducedWord> {
    (1..=max_n).flat_map(|n| Permutation::all(n).filter(is_boolean).map(|w| reduced_word(&w))).collect()
}

fn below(w: &Permutation) -> Vec<Permutation> {
    Permutation::all(w.degree()).filter(|x| x.bruhat_le(w)).collect()
}

fn a3() -> Outcome {
    let t = Instant::now();
    let mut checked = 0;
    for word in booleans(6) {
        let w = *word.target();
        let l = word.len();
        let brute = coset_sums_brute(&word).map_err(|e| e.to_string())?;
        for x in below(&w) {
            let diag = CosetTriplet::diagonal(l, ix_set(&word, &x));
            let gap = (w.length() - x.length()) as i64;
            let want = Laurent::monomial(1, gap);
            let closed = coset_sum_closed(&word, &diag).map_err(|e| e.to_string())?;
            ensure!(closed == want, "closed {w} {x}: {closed}");
            ensure!(brute[&diag] == want, "masks {w} {x}: {}", brute[&diag]);
            ensure!(normalize_raw(&brute[&diag], gap) == Tilde::Poly(Poly::one()), "{w} {x}");
            checked += 1;
        }
    }
    let mut kl_checked = 0;
    for n in 1..=5 {
        let mut st = QuotientStore::new(n, 2).map_err(|e| e.to_string())?;
        for w in Permutation::all(n).filter(is_boolean) {
            for x in below(&w) {
                let raw = raw_sum(&mut st, &x, &w).map_err(|e| e.to_string())?;
                ensure!(raw == Laurent::monomial(1, (w.length() - x.length()) as i64), "KL path {w} {x}: {raw}");
                kl_checked += 1;
            }
        }
    }
    Ok(format!("{checked} pairs by masks and closed form (n<=6), {kl_checked} by KL (n<=5), {:.1?}", t.elapsed()))
}

fn a4() -> Outcome {
    let t = Instant::now();
    let mut count = 0;
    for word in booleans(5) {
        let brute = coset_sums_brute(&word).map_err(|e| e.to_string())?;
        for q in all_triplets(&word).map_err(|e| e.to_string())? {
            let closed = coset_sum_closed(&word, &q).map_err(|e| e.to_string())?;
            let b = brute.get(&q).cloned().unwrap_or_else(Laurent::zero);
            ensure!(closed == b, "{word} {q}: closed {closed} vs brute {b}");
            count += 1;
        }
    }
    Ok(format!("{count} triplets, {:.1?}", t.elapsed()))
}

fn a5() -> Outcome {
    for word in booleans(5) {
        let d = doubled_word(&word).map_err(|e| e.to_string())?;
        ensure!(is_tight_word(&d).map_err(|e| e.to_string())?, "doubled {word} not tight");
    }
    let mut tight = 0;
    for w in Permutation::all(6) {
        let by_mask = is_tight_word(&reduced_word(&w)).map_err(|e| e.to_string())?;
        ensure!(by_mask == PatternClass::Tight.admits(&w), "{w}");
        tight += by_mask as usize;
    }
    Ok(format!("{} doubled words, {tight} tight in S_6", booleans(5).len()))
}

fn a6() -> Outcome {
    let mut kl: KlStore = KlStore::new();
    let mut count = 0;
    for n in 1..=6 {
        for w in Permutation::all(n).filter(|w| PatternClass::Tight.admits(w)) {
            let word = reduced_word(&w);
            let table = kl.interval_table(&w).map_err(|e| e.to_string())?;
            for (u, pu) in &table {
                let d = deodhar_poly(&word, u).map_err(|e| e.to_string())?;
                ensure!(d == *pu, "{w} {u}: {d} vs {pu}");
                count += 1;
            }
        }
    }
    Ok(format!("{count} pairs"))
}

fn a7() -> Outcome {
    let t = Instant::now();
    let mut st: KlStore = KlStore::without_canonicalization();
    let mut count = 0;
    for n in 1..=6 {
        let e = Permutation::identity(n);
        for w in Permutation::all(n) {
            let smooth = PatternClass::Smooth.admits(&w);
            ensure!(st.kl_poly(&e, &w).map_err(|e| e.to_string())?.is_one() == smooth, "smooth {w}");
            for x in below(&w) {
                let q = st.kl_poly(&x, &w).map_err(|e| e.to_string())?;
                ensure!(q.constant_term() == 1, "{x} {w}");
                ensure!(q.coeffs().iter().all(|&c| c as i128 >= 0), "{x} {w}");
                let gap = w.length() - x.length();
                let bound = if gap == 0 { 0 } else { (gap - 1) / 2 };
                ensure!(q.degree().unwrap_or(0) <= bound, "degree {x} {w}");
                let inv = st.kl_poly(&x.inverse(), &w.inverse()).map_err(|e| e.to_string())?;
                let conj = st.kl_poly(&x.conj_longest(), &w.conj_longest()).map_err(|e| e.to_string())?;
                ensure!(inv == q && conj == q, "symmetry {x} {w}");
                let k = cancelable_reduce(&w, &x);
                ensure!(st.kl_poly(&k.x, &k.w).map_err(|e| e.to_string())? == q, "cancel {x} {w}");
                count += 1;
            }
        }
    }
    Ok(format!("{count} pairs, {:.1?}", t.elapsed()))
}

fn a8() -> Outcome {
    // F_1 = F_2 = 1
    let mut fib = vec![0u64, 1, 1];
    while fib.len() < 17 {
        fib.push(fib[fib.len() - 1] + fib[fib.len() - 2]);
    }
    let mut cat = 1u64;
    for n in 1..=8u64 {
        cat = cat * 2 * (2 * n - 1) / (n + 1);
        ensure!(count_class(n as usize, PatternClass::Avoiding321) == cat, "Catalan n={n}");
        ensure!(count_class(n as usize, PatternClass::Boolean) == fib[2 * n as usize - 1], "Fibonacci n={n}");
    }
    Ok("n<=8".into())
}

fn h_group(n: usize) -> Vec<Permutation> {
    (0u32..1 << n)
        .map(|s| {
            let mut img: Vec<usize> = (1..=2 * n).collect();
            for i in (0..n).filter(|i| s & (1 << i) != 0) {
                img.swap(2 * i, 2 * i + 1);
            }
            Permutation::from_one_line(&img).unwrap()
        })
        .collect()
}

fn a9() -> Outcome {
    let mut cosets = 0;
    for n in 1..=4 {
        let h = h_group(n);
        let mut seen = std::collections::HashSet::new();
        for x in Permutation::all(2 * n) {
            if seen.contains(&x) {
                continue;
            }
            let mut dc = std::collections::BTreeSet::new();
            for a in &h {
                for b in &h {
                    dc.insert(Permutation::compose(&Permutation::compose(a, &x).unwrap(), b).unwrap());
                }
            }
            let k: Vec<_> = dc.iter().filter(|u| k_decompose(u).is_ok()).collect();
            ensure!(!k.is_empty(), "K misses H{x}H");
            let (odd, even) = k_decompose(k[0]).unwrap();
            let r = Permutation::compose(&even.inverse(), &odd).unwrap().nontrivial_cycles();
            ensure!(k.len() == 1 << r, "|K∩HxH| for {x}");
            ensure!(k.iter().all(|u| u.sign() == k[0].sign()), "sign on H{x}H");
            seen.extend(dc);
            cosets += 1;
        }
    }
    let mut cycle_pairs = 0;
    for word in booleans(6) {
        let xs = below(word.target());
        for a in &xs {
            for b in &xs {
                ensure!(cycle_count_check(&word, a, b).map_err(|e| e.to_string())?, "{word} {a} {b}");
                cycle_pairs += 1;
            }
        }
    }
    let mut triplets = 0;
    for word in booleans(5) {
        let xs = below(word.target());
        let mut tally: BTreeMap<CosetTriplet, (u64, Vec<i64>)> = BTreeMap::new();
        for a in &xs {
            for b in &xs {
                let u = k_compose(a, b);
                let e = tally.entry(prm(&word, &u).map_err(|e| e.to_string())?).or_default();
                e.0 += 1;
                if !e.1.contains(&u.sign()) {
                    e.1.push(u.sign());
                }
            }
        }
        for q in all_triplets(&word).map_err(|e| e.to_string())? {
            let (c, s) = k_coset_count(&word, &q).map_err(|e| e.to_string())?;
            ensure!(tally.get(&q) == Some(&(c, vec![s])), "{word} {q}");
            triplets += 1;
        }
    }
    Ok(format!("{cosets} double cosets, {cycle_pairs} cycle pairs, {triplets} triplets"))
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 9] =
        [("A1", a1), ("A2", a2), ("A3", a3), ("A4", a4), ("A5", a5), ("A6", a6), ("A7", a7), ("A8", a8), ("A9", a9)];
    let mut failed = false;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|a| a == name) {
            continue;
        }
        match f() {
            Ok(detail) => println!("{name} PASS {detail}"),
            Err(why) => {
                failed = true;
                println!("{name} FAIL {why}");
            }
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
