use serde::{Deserialize, Serialize};

use super::{Permutation, MAX_DEGREE};

/// A pair `(w, x)`, ordered by `w` first and then `x`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct PairKey {
    pub w: Permutation,
    pub x: Permutation,
}

impl PairKey {
    pub fn new(w: Permutation, x: Permutation) -> Self {
        assert_eq!(w.degree(), x.degree(), "pair degrees differ");
        PairKey { w, x }
    }

    pub fn degree(&self) -> usize {
        self.w.degree()
    }

    /// `ℓ(w) - ℓ(x)`.
    pub fn length_gap(&self) -> isize {
        self.w.length() as isize - self.x.length() as isize
    }

    /// The four images under inversion and conjugation by `w_0`.
    pub fn orbit(&self) -> [PairKey; 4] {
        let (wi, xi) = (self.w.inverse(), self.x.inverse());
        [
            *self,
            PairKey { w: wi, x: xi },
            PairKey { w: self.w.conj_longest(), x: self.x.conj_longest() },
            PairKey { w: wi.conj_longest(), x: xi.conj_longest() },
        ]
    }

    pub fn orbit_min(&self) -> PairKey {
        self.orbit().into_iter().min().expect("nonempty orbit")
    }

    /// No cancelable index, and `x` sits below every one-sided descent of `w`:
    /// `xs < x` whenever `ws < w` and `sx < x` whenever `sw < w`.
    pub fn is_reduced(&self) -> bool {
        cancelable_indices(&self.w, &self.x).is_empty()
            && self.w.right_descent_mask() & !self.x.right_descent_mask() == 0
            && self.w.left_descent_mask() & !self.x.left_descent_mask() == 0
    }
}

/// Indices `i` (1-based) with `w(i) = x(i)` and
/// `#{j<i : x(j)<x(i)} = #{j<i : w(j)<w(i)}`.
pub fn cancelable_indices(w: &Permutation, x: &Permutation) -> Vec<usize> {
    let (ws, xs) = (w.as_slice(), x.as_slice());
    let mut pw = 0u32;
    let mut px = 0u32;
    let mut out = Vec::new();
    for i in 0..ws.len() {
        let v = ws[i];
        if v == xs[i] {
            let below = (1u32 << v) - 1;
            if (pw & below).count_ones() == (px & below).count_ones() {
                out.push(i + 1);
            }
        }
        pw |= 1 << ws[i];
        px |= 1 << xs[i];
    }
    out
}

/// Deletes position `i` (1-based) and renumbers the remaining values monotonically.
fn delete_index(p: &Permutation, i: usize) -> Permutation {
    let s = p.as_slice();
    let v = s[i - 1];
    let mut img = [0u8; MAX_DEGREE];
    let mut k = 0;
    for (j, &u) in s.iter().enumerate() {
        if j == i - 1 {
            continue;
        }
        img[k] = if u > v { u - 1 } else { u };
        k += 1;
    }
    Permutation::from_zero_based(&img[..k])
}

/// Removes cancelable indices (smallest first) until none remain.
pub fn cancelable_reduce(w: &Permutation, x: &Permutation) -> PairKey {
    let (mut w, mut x) = (*w, *x);
    while let Some(&i) = cancelable_indices(&w, &x).first() {
        w = delete_index(&w, i);
        x = delete_index(&x, i);
    }
    PairKey { w, x }
}

/// Reduces `(w, x)` to a fully reduced pair with the same KL polynomial and
/// returns the smallest member of its symmetry orbit. Requires `x <= w`.
pub fn canonicalize(w: &Permutation, x: &Permutation) -> PairKey {
    // reduce every orbit member so the result does not depend on the starting point
    PairKey::new(*w, *x)
        .orbit()
        .into_iter()
        .map(|k| reduce(k).orbit_min())
        .min()
        .expect("nonempty orbit")
}

fn reduce(mut key: PairKey) -> PairKey {
    loop {
        key = cancelable_reduce(&key.w, &key.x);
        key.x = raise_by_descents(&key.w, key.x);
        match slide(&key) {
            Some(next) => key = next,
            None => return key,
        }
    }
}

/// Replaces `x` by `xs` (`sx`) while `ws < w` and `xs > x` (left analog).
fn raise_by_descents(w: &Permutation, mut x: Permutation) -> Permutation {
    let rd = w.right_descent_mask();
    let ld = w.left_descent_mask();
    loop {
        let r = rd & !x.right_descent_mask();
        if r != 0 {
            x = x.mul_simple_right(r.trailing_zeros() as usize);
            continue;
        }
        let l = ld & !x.left_descent_mask();
        if l != 0 {
            x = x.mul_simple_left(l.trailing_zeros() as usize);
            continue;
        }
        return x;
    }
}

/// `P_{x,w} = P_{xs,ws}` when `ws < w`, `xs < x` and `x` is not below `ws`.
fn slide(key: &PairKey) -> Option<PairKey> {
    let mut rd = key.w.right_descent_mask();
    while rd != 0 {
        let i = rd.trailing_zeros() as usize;
        rd &= rd - 1;
        let ws = key.w.mul_simple_right(i);
        if !key.x.bruhat_le(&ws) {
            return Some(PairKey { w: ws, x: key.x.mul_simple_right(i) });
        }
    }
    let mut ld = key.w.left_descent_mask();
    while ld != 0 {
        let i = ld.trailing_zeros() as usize;
        ld &= ld - 1;
        let sw = key.w.mul_simple_left(i);
        if !key.x.bruhat_le(&sw) {
            return Some(PairKey { w: sw, x: key.x.mul_simple_left(i) });
        }
    }
    None
}
