//! Pattern containment and the pattern-avoidance classes used throughout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::perm::Permutation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternClass {
    Avoiding321,
    Smooth,
    Boolean,
    Tight,
}

impl PatternClass {
    pub const ALL: [PatternClass; 4] =
        [PatternClass::Avoiding321, PatternClass::Smooth, PatternClass::Boolean, PatternClass::Tight];

    pub fn forbidden(self) -> Vec<Permutation> {
        let pats: &[&str] = match self {
            PatternClass::Avoiding321 => &["321"],
            PatternClass::Smooth => &["4231", "3412"],
            PatternClass::Boolean => &["321", "3412"],
            PatternClass::Tight => &["321", "46718235", "46781235", "56718234", "56781234"],
        };
        pats.iter().map(|s| s.parse().expect("valid pattern")).collect()
    }

    pub fn admits(self, w: &Permutation) -> bool {
        self.forbidden().iter().all(|p| !contains_pattern(w, p))
    }
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PatternClass::Avoiding321 => "avoiding321",
            PatternClass::Smooth => "smooth",
            PatternClass::Boolean => "boolean",
            PatternClass::Tight => "tight",
        };
        f.write_str(s)
    }
}

impl FromStr for PatternClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "avoiding321" | "321" | "321-avoiding" => Ok(PatternClass::Avoiding321),
            "smooth" => Ok(PatternClass::Smooth),
            "boolean" => Ok(PatternClass::Boolean),
            "tight" => Ok(PatternClass::Tight),
            _ => Err(format!("unknown class `{s}`")),
        }
    }
}

/// Does some subsequence of `seq` have the relative order of `pat`?
/// With `anchored`, the occurrence must end at the last entry of `seq`.
fn occurs(seq: &[u8], pat: &[u8], anchored: bool) -> bool {
    fn go(seq: &[u8], pat: &[u8], chosen: &mut Vec<usize>, start: usize, anchored: bool) -> bool {
        let k = chosen.len();
        if k == pat.len() {
            return true;
        }
        let remaining = pat.len() - k;
        let last = seq.len() - remaining;
        let first = if anchored && remaining == 1 { seq.len() - 1 } else { start };
        for pos in first..=last {
            let fits = chosen
                .iter()
                .zip(pat)
                .all(|(&c, &pv)| (seq[pos] < seq[c]) == (pat[k] < pv));
            if fits {
                chosen.push(pos);
                if go(seq, pat, chosen, pos + 1, anchored) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    if pat.len() > seq.len() {
        return false;
    }
    if pat.is_empty() {
        return true;
    }
    go(seq, pat, &mut Vec::with_capacity(pat.len()), 0, anchored)
}

/// True iff some index subsequence of `w` is order-isomorphic to `p`.
pub fn contains_pattern(w: &Permutation, p: &Permutation) -> bool {
    occurs(w.as_slice(), p.as_slice(), false)
}

/// All classes whose forbidden patterns `w` avoids.
pub fn classify(w: &Permutation) -> Vec<PatternClass> {
    PatternClass::ALL.into_iter().filter(|c| c.admits(w)).collect()
}

pub fn is_boolean(w: &Permutation) -> bool {
    PatternClass::Boolean.admits(w)
}

/// `#{w in S_n avoiding the class patterns}`, by prefix-pruned enumeration.
pub fn count_class(n: usize, c: PatternClass) -> u64 {
    fn go(prefix: &mut Vec<u8>, used: u32, n: usize, pats: &[Vec<u8>]) -> u64 {
        if prefix.len() == n {
            return 1;
        }
        let mut total = 0;
        for v in 0..n as u8 {
            if used & (1 << v) != 0 {
                continue;
            }
            prefix.push(v);
            // an occurrence in a prefix persists, so only occurrences through
            // the new entry need checking
            if !pats.iter().any(|p| occurs(prefix, p, true)) {
                total += go(prefix, used | (1 << v), n, pats);
            }
            prefix.pop();
        }
        total
    }
    let pats: Vec<Vec<u8>> = c.forbidden().iter().map(|p| p.as_slice().to_vec()).collect();
    go(&mut Vec::with_capacity(n), 0, n, &pats)
}
