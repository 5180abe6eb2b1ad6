use super::{Permutation, MAX_DEGREE};

/// Extra shape constraints for lower-interval enumeration. Bit `i` refers to
/// the 1-based simple reflection `s_i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntervalConstraints {
    /// `x(i) > x(i+1)` required.
    pub right_descents: u32,
    /// `x(i) < x(i+1)` required.
    pub right_ascents: u32,
    /// Value `i+1` must precede value `i`.
    pub left_descents: u32,
    /// Value `i` must precede value `i+1`.
    pub left_ascents: u32,
}

struct Walker<'a, F> {
    n: usize,
    c: IntervalConstraints,
    top_prefix: [u32; MAX_DEGREE],
    img: [u8; MAX_DEGREE],
    f: &'a mut F,
}

impl<F: FnMut(&Permutation)> Walker<'_, F> {
    fn step(&mut self, k: usize, used: u32) {
        if k == self.n {
            let p = Permutation::from_zero_based(&self.img[..self.n]);
            (self.f)(&p);
            return;
        }
        let n = self.n;
        let pw = self.top_prefix[k];
        let bit_k = 1u32 << k;
        let mut free = !used & ((1u32 << n) - 1);
        while free != 0 {
            let v = free.trailing_zeros() as usize;
            free &= free - 1;
            if k > 0 {
                let prev = self.img[k - 1] as usize;
                if self.c.right_descents & bit_k != 0 && prev < v {
                    continue;
                }
                if self.c.right_ascents & bit_k != 0 && prev > v {
                    continue;
                }
            }
            // value constraints, 0-based pair (v-1, v) is bit v, (v, v+1) is bit v+1
            let lo_used = v > 0 && used & (1 << (v - 1)) != 0;
            let hi_used = v + 1 < n && used & (1 << (v + 1)) != 0;
            if v > 0 && self.c.left_descents & (1 << v) != 0 && lo_used {
                continue;
            }
            if v + 1 < n && self.c.left_descents & (1 << (v + 1)) != 0 && !hi_used {
                continue;
            }
            if v > 0 && self.c.left_ascents & (1 << v) != 0 && !lo_used {
                continue;
            }
            if v + 1 < n && self.c.left_ascents & (1 << (v + 1)) != 0 && hi_used {
                continue;
            }
            let px = used | (1 << v);
            // only thresholds j <= v gained a count
            let ok = (1..=v).all(|j| (px >> j).count_ones() <= (pw >> j).count_ones());
            if !ok {
                continue;
            }
            self.img[k] = v as u8;
            self.step(k + 1, px);
        }
    }
}

/// Calls `f` on every `x <= top` satisfying `c`, in lexicographic order.
pub fn for_each_below<F: FnMut(&Permutation)>(top: &Permutation, c: IntervalConstraints, mut f: F) {
    let n = top.degree();
    let mut top_prefix = [0u32; MAX_DEGREE];
    let mut acc = 0u32;
    for (i, &v) in top.as_slice().iter().enumerate() {
        acc |= 1 << v;
        top_prefix[i] = acc;
    }
    let mut w = Walker { n, c, top_prefix, img: [0; MAX_DEGREE], f: &mut f };
    w.step(0, 0);
}

/// The lower Bruhat interval `[e, top]` in lexicographic order.
pub fn lower_interval(top: &Permutation) -> Vec<Permutation> {
    let mut out = Vec::new();
    for_each_below(top, IntervalConstraints::default(), |x| out.push(*x));
    out
}
