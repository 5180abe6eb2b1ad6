use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use coxkl::cache::{cache_info, load_cache, save_cache};
use coxkl::cosets::{coset_sum_brute, coset_sum_closed, verify_suite, CosetTriplet};
use coxkl::deodhar::{deodhar_poly, doubled_word, reduced_word, tightness_witness, QuadMask, ReducedWord};
use coxkl::parabolic::{table_report, verify_conjecture, ConjectureReport, QuotientStore, TableRow, Tilde};
use coxkl::patterns::{classify, count_class, PatternClass};
use coxkl::{KlStore, Permutation, Poly};
use rayon::prelude::*;
use serde_json::{json, Value};

const EXIT_VIOLATION: u8 = 2;
const EXIT_USAGE: u8 = 64;
/// Largest `nm` accepted without `--allow-large`.
const NM_BUDGET: usize = 12;

#[derive(Parser)]
#[command(name = "coxkl", version, about = "Kazhdan-Lusztig polynomials and their parabolic alternating sums")]
struct Cli {
    /// Worker threads (1 for reproducibility runs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Accept nm above 12.
    #[arg(long, global = true)]
    allow_large: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    #[command(subcommand)]
    Kl(KlCmd),
    #[command(subcommand)]
    Parabolic(ParabolicCmd),
    #[command(subcommand)]
    Cosets(CosetsCmd),
    #[command(subcommand)]
    Deodhar(DeodharCmd),
    #[command(subcommand)]
    Patterns(PatternsCmd),
    #[command(subcommand)]
    Cache(CacheCmd),
}

#[derive(Args)]
struct CacheArg {
    #[arg(long, env = "COXKL_CACHE")]
    cache: Option<PathBuf>,
}

#[derive(Subcommand)]
enum KlCmd {
    /// Print P_{x,w}.
    Compute {
        x: Permutation,
        w: Permutation,
        #[command(flatten)]
        cache: CacheArg,
    },
    /// Fill every pair of S_n with l(w) <= max-length and write the cache.
    Fill {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        max_length: Option<usize>,
        #[command(flatten)]
        cache: CacheArg,
    },
    /// CSV of the nonzero mu values in a cache.
    MuReport {
        #[command(flatten)]
        cache: CacheArg,
    },
}

#[derive(Subcommand)]
enum ParabolicCmd {
    /// Check the four clauses on every pair x <= w of S_n, or on one pair.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, num_args = 2, value_names = ["X", "W"])]
        pair: Option<Vec<Permutation>>,
        #[command(flatten)]
        cache: CacheArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cap on quotient-table entries per worker.
        #[arg(long)]
        max_entries: Option<usize>,
    },
    /// One row per orbit of reduced pairs with a nontrivial polynomial.
    Table {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
        #[arg(long)]
        max_entries: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum CosetsCmd {
    /// Signed sum of q^{l(u)} over one double coset.
    Sum {
        #[arg(long)]
        w: Permutation,
        /// `Ie,I,If`, each a digit string or `-`.
        #[arg(long)]
        triplet: String,
        #[arg(long, conflicts_with = "closed")]
        brute: bool,
        #[arg(long)]
        closed: bool,
    },
    /// Run the identity suite on Boolean permutations up to degree n.
    Verify {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum DeodharCmd {
    /// Mask-defect polynomial of u for the chosen reduced word of w.
    Poly {
        w: Permutation,
        u: Permutation,
        /// Letters of a reduced word, e.g. `1,2,1`.
        #[arg(long)]
        word: Option<String>,
    },
    /// Whether the word for w is tight, with a witness mask if not.
    Tight {
        w: Permutation,
        #[arg(long)]
        word: Option<String>,
        /// Use the doubled word of a Boolean w.
        #[arg(long)]
        doubled: bool,
    },
}

#[derive(Subcommand)]
enum PatternsCmd {
    Classify { perm: Permutation },
    Count { n: usize, class: PatternClass },
}

#[derive(Subcommand)]
enum CacheCmd {
    Info {
        #[command(flatten)]
        cache: CacheArg,
    },
}

struct Outcome {
    violations: bool,
}

impl Outcome {
    fn ok() -> Self {
        Outcome { violations: false }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(&cli) {
        Ok(o) if o.violations => ExitCode::from(EXIT_VIOLATION),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.cmd {
        Cmd::Kl(c) => kl(cli, c),
        Cmd::Parabolic(c) => parabolic(cli, c),
        Cmd::Cosets(c) => cosets(c),
        Cmd::Deodhar(c) => deodhar(c),
        Cmd::Patterns(c) => patterns(c),
        Cmd::Cache(CacheCmd::Info { cache }) => {
            let path = require(cache)?;
            let i = cache_info(path).with_context(|| format!("reading {}", path.display()))?;
            emit(&json!({
                "schema": "coxkl/cache-info/v1",
                "path": path.display().to_string(),
                "version": i.version,
                "degree": i.degree,
                "level": i.level,
                "canonical": i.canonical,
                "pairs": i.pairs,
                "glossary": i.glossary,
                "mu_entries": i.mu_entries,
            }))?;
            Ok(Outcome::ok())
        }
    }
}

fn check_size(cli: &Cli, n: usize, m: usize) -> Result<()> {
    if n * m > NM_BUDGET && !cli.allow_large {
        bail!("nm = {} exceeds {NM_BUDGET}; pass --allow-large to proceed", n * m);
    }
    Ok(())
}

fn require(c: &CacheArg) -> Result<&Path> {
    c.cache.as_deref().context("no cache path (use --cache or COXKL_CACHE)")
}

fn open_store(c: &CacheArg) -> Result<KlStore> {
    match c.cache.as_deref() {
        Some(p) if p.exists() => load_cache(p).with_context(|| format!("reading {}", p.display())),
        _ => Ok(KlStore::new()),
    }
}

fn emit(v: &Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn kl(cli: &Cli, c: &KlCmd) -> Result<Outcome> {
    match c {
        KlCmd::Compute { x, w, cache } => {
            check_size(cli, w.degree(), 1)?;
            let mut st = open_store(cache)?;
            println!("{}", st.kl_poly(x, w)?);
        }
        KlCmd::Fill { n, max_length, cache } => {
            check_size(cli, *n, 1)?;
            let path = require(cache)?;
            let mut st = open_store(cache)?;
            st.fill_through(*n, max_length.unwrap_or(n * n.saturating_sub(1) / 2))?;
            save_cache(&st, path).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("{} pairs, {} glossary entries -> {}", st.len(), st.glossary().len(), path.display());
        }
        KlCmd::MuReport { cache } => {
            let path = require(cache)?;
            let st = load_cache(path).with_context(|| format!("reading {}", path.display()))?;
            let mut out = std::io::stdout().lock();
            writeln!(out, "x,w,deg,mu")?;
            for (k, mu) in st.mu_entries() {
                let deg = st.get(&k).and_then(|p| p.degree()).unwrap_or(0);
                writeln!(out, "{},{},{deg},{mu}", k.x, k.w)?;
            }
        }
    }
    Ok(Outcome::ok())
}

fn quotient(n: usize, m: usize, max_entries: Option<usize>) -> Result<QuotientStore> {
    let st = QuotientStore::new(n, m)?;
    Ok(match max_entries {
        Some(b) => st.with_budget(b),
        None => st,
    })
}

fn report_json(r: &ConjectureReport) -> Value {
    json!({
        "x": r.pair.x.to_string(),
        "w": r.pair.w.to_string(),
        "raw": r.raw.to_string(),
        "tilde_p": r.tilde_p.as_ref().map(Poly::to_string),
        "kl": r.kl.to_string(),
        "boolean": r.boolean,
        "checks": r.checks,
        "witnesses": r.witnesses,
    })
}

fn parabolic(cli: &Cli, c: &ParabolicCmd) -> Result<Outcome> {
    match c {
        ParabolicCmd::Verify { n, m, pair, cache, out, max_entries } => {
            check_size(cli, *n, *m)?;
            let base = open_store(cache)?;
            let targets: Vec<Permutation> = match pair {
                Some(p) => vec![p[1]],
                None => Permutation::all(*n).collect(),
            };
            let chunks: Vec<Result<Vec<ConjectureReport>>> = targets
                .par_iter()
                .map_init(
                    || (quotient(*n, *m, *max_entries), base.clone()),
                    |(qs, kl), w| {
                        let qs = qs.as_mut().map_err(|e| anyhow::anyhow!("{e}"))?;
                        let xs: Vec<Permutation> = match pair {
                            Some(p) => vec![p[0]],
                            None => Permutation::all(*n).filter(|x| x.bruhat_le(w)).collect(),
                        };
                        xs.iter().map(|x| Ok(verify_conjecture(qs, kl, x, w)?)).collect()
                    },
                )
                .collect();
            let mut total = 0u64;
            let mut failing = Vec::new();
            let mut boolean_degree_flags = 0u64;
            for r in chunks.into_iter().flat_map(|c| match c {
                Ok(v) => v.into_iter().map(Ok).collect::<Vec<_>>(),
                Err(e) => vec![Err(e)],
            }) {
                let r = r?;
                total += 1;
                if r.boolean && !r.checks.degree_law {
                    boolean_degree_flags += 1;
                }
                if !r.checks.all() || pair.is_some() {
                    failing.push(r);
                }
            }
            let violations = failing.iter().filter(|r| !r.checks.all()).count();
            let doc = json!({
                "schema": "coxkl/parabolic-verify/v1",
                "n": n,
                "m": m,
                "pairs": total,
                "violations": violations,
                "boolean_degree_law_flags": boolean_degree_flags,
                "reports": failing.iter().map(report_json).collect::<Vec<_>>(),
            });
            match out {
                Some(p) => {
                    fs::write(p, serde_json::to_string_pretty(&doc)? + "\n")
                        .with_context(|| format!("writing {}", p.display()))?;
                    eprintln!("{total} pairs, {violations} with violations -> {}", p.display());
                }
                None => emit(&doc)?,
            }
            Ok(Outcome { violations: violations > 0 })
        }
        ParabolicCmd::Table { n, m, format, max_entries } => {
            check_size(cli, *n, *m)?;
            let mut qs = quotient(*n, *m, *max_entries)?;
            let mut kl: KlStore = KlStore::new();
            let rows = table_report(&mut qs, &mut kl)?;
            let violations = rows.iter().any(|r| matches!(r.tilde_p, Some(Tilde::Violation(_))));
            match format {
                Format::Json => emit(&table_json(*n, *m, &rows))?,
                Format::Csv => print!("{}", table_csv(&rows)),
                Format::Markdown => print!("{}", table_markdown(*m, &rows)),
            }
            Ok(Outcome { violations })
        }
    }
}

fn tilde_text(t: &Option<Tilde>) -> String {
    match t {
        Some(Tilde::Poly(p)) => p.to_string(),
        Some(Tilde::Violation(v)) => format!("violation: {}", v.normalized),
        None => "skipped".into(),
    }
}

fn table_json(n: usize, m: usize, rows: &[TableRow]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "w": r.pair.w.to_string(),
                "x": r.pair.x.to_string(),
                "kl": r.kl.to_string(),
                "tilde_p": r.tilde_p.as_ref().and_then(Tilde::as_poly).map(Poly::to_string),
                "skipped": r.skipped(),
                "violation": matches!(r.tilde_p, Some(Tilde::Violation(_))),
                "correlation": r.correlation,
            })
        })
        .collect();
    json!({ "schema": "coxkl/parabolic-table/v1", "n": n, "m": m, "rows": rows })
}

fn table_csv(rows: &[TableRow]) -> String {
    let mut s = String::from("w,x,kl,tilde_p,correlation\n");
    for r in rows {
        let corr = r.correlation.map_or(String::new(), |c| c.to_string());
        s += &format!("{},{},{},{},{corr}\n", r.pair.w, r.pair.x, r.kl, tilde_text(&r.tilde_p));
    }
    s
}

/// Pairs sharing `(P, P~)` share a line; for m = 2 the rows split on the
/// `(P² + P(q²))/2` comparison.
fn table_markdown(m: usize, rows: &[TableRow]) -> String {
    let mut s = String::new();
    let sections: Vec<(Option<&str>, Vec<&TableRow>)> = if m == 2 {
        vec![
            (Some("P~ = (P^2 + P(q^2))/2"), rows.iter().filter(|r| r.correlation == Some(true)).collect()),
            (Some("P~ != (P^2 + P(q^2))/2"), rows.iter().filter(|r| r.correlation != Some(true)).collect()),
        ]
    } else {
        vec![(None, rows.iter().collect())]
    };
    for (title, rows) in sections {
        if rows.is_empty() {
            continue;
        }
        if let Some(t) = title {
            s += &format!("\n{t}\n\n");
        }
        s += &format!("| (w,x) | P | P~^({m}) |\n|---|---|---|\n");
        let mut groups: Vec<(String, String, Vec<String>)> = Vec::new();
        for r in rows {
            let (p, t) = (r.kl.to_string(), tilde_text(&r.tilde_p));
            let pair = format!("({},{})", r.pair.w, r.pair.x);
            match groups.iter_mut().find(|g| g.0 == p && g.1 == t) {
                Some(g) => g.2.push(pair),
                None => groups.push((p, t, vec![pair])),
            }
        }
        for (p, t, pairs) in groups {
            s += &format!("| {} | {p} | {t} |\n", pairs.join(", "));
        }
    }
    s
}

fn word_for(w: &Permutation, letters: &Option<String>) -> Result<ReducedWord> {
    match letters {
        None => Ok(reduced_word(w)),
        Some(s) => {
            let letters = s
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<u8>().with_context(|| format!("bad letter `{t}`")))
                .collect::<Result<Vec<_>>>()?;
            let word = ReducedWord::new(w.degree(), letters)?;
            if word.target() != w {
                bail!("word {word} is a reduced word for {}, not {w}", word.target());
            }
            Ok(word)
        }
    }
}

fn cosets(c: &CosetsCmd) -> Result<Outcome> {
    match c {
        CosetsCmd::Sum { w, triplet, brute, closed: _ } => {
            let word = reduced_word(w);
            let q = CosetTriplet::parse(word.len(), triplet)?;
            let sum = if *brute { coset_sum_brute(&word, &q)? } else { coset_sum_closed(&word, &q)? };
            emit(&json!({
                "schema": "coxkl/coset-sum/v1",
                "w": w.to_string(),
                "word": word.to_string(),
                "triplet": q.to_string(),
                "method": if *brute { "brute" } else { "closed" },
                "sum": sum.to_string(),
            }))?;
            Ok(Outcome::ok())
        }
        CosetsCmd::Verify { n } => {
            let checks = verify_suite(*n)?;
            let passed = checks.iter().all(|c| c.passed);
            emit(&json!({ "schema": "coxkl/cosets-verify/v1", "n": n, "passed": passed, "checks": checks }))?;
            if !passed {
                bail!("coset identity suite failed");
            }
            Ok(Outcome::ok())
        }
    }
}

fn deodhar(c: &DeodharCmd) -> Result<Outcome> {
    match c {
        DeodharCmd::Poly { w, u, word } => {
            let word = word_for(w, word)?;
            let f = deodhar_poly(&word, u)?;
            emit(&json!({
                "schema": "coxkl/deodhar-poly/v1",
                "w": w.to_string(),
                "word": word.to_string(),
                "u": u.to_string(),
                "poly": f.to_string(),
            }))?;
        }
        DeodharCmd::Tight { w, word, doubled } => {
            let base = word_for(w, word)?;
            let word = if *doubled { doubled_word(&base)? } else { base.clone() };
            let witness = tightness_witness(&word)?.map(|m| {
                if *doubled {
                    QuadMask::new(m.bits(), base.len()).to_string()
                } else {
                    m.to_string()
                }
            });
            emit(&json!({
                "schema": "coxkl/deodhar-tight/v1",
                "w": word.target().to_string(),
                "word": word.to_string(),
                "tight": witness.is_none(),
                "witness": witness,
            }))?;
        }
    }
    Ok(Outcome::ok())
}

fn patterns(c: &PatternsCmd) -> Result<Outcome> {
    match c {
        PatternsCmd::Classify { perm } => {
            let classes: Vec<String> = classify(perm).iter().map(|c| c.to_string()).collect();
            emit(&json!({ "perm": perm.to_string(), "classes": classes }))?;
        }
        PatternsCmd::Count { n, class } => println!("{}", count_class(*n, *class)),
    }
    Ok(Outcome::ok())
}
