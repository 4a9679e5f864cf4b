//! Exponent vectors packed into `u64` keys, with `i64` coefficients, for the inner loops of
//! polynomial arithmetic.
//!
//! Every variable gets a biased bit field and variable 0 owns the most significant one, so
//! numeric order of keys is lexicographic order of exponent vectors, and adding keys adds
//! exponents as long as every field stays inside its range. Routines return `None` on
//! coefficient overflow so that callers can fall back to arbitrary precision.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use smallvec::SmallVec;

use crate::int::Int;
use crate::poly::{Exp, Poly};

pub(crate) type Packed = Vec<(u64, i64)>;

#[derive(Clone, Debug)]
pub(crate) struct Packing {
    lo: Exp,
    shift: SmallVec<[u32; 8]>,
    mask: SmallVec<[u64; 8]>,
}

impl Packing {
    /// Packing for exponents with `lo[i] <= e[i] <= hi[i]`, if 63 bits suffice.
    pub fn new(lo: &[i32], hi: &[i32]) -> Option<Packing> {
        let n = lo.len();
        let mut shift: SmallVec<[u32; 8]> = smallvec::smallvec![0; n];
        let mut mask: SmallVec<[u64; 8]> = smallvec::smallvec![0; n];
        let mut total = 0u32;
        for i in (0..n).rev() {
            let span = u64::try_from(i64::from(hi[i]) - i64::from(lo[i])).ok()?;
            let bits = 64 - span.leading_zeros();
            shift[i] = total;
            mask[i] = (1u64 << bits) - 1;
            total += bits;
            if total > 63 {
                return None;
            }
        }
        Some(Packing { lo: Exp::from_slice(lo), shift, mask })
    }

    pub fn pack(&self, e: &[i32]) -> u64 {
        self.pack_from(e, &self.lo)
    }

    /// Key of `e - base` for a `base` other than the lower bound.
    pub fn pack_from(&self, e: &[i32], base: &[i32]) -> u64 {
        let mut k = 0u64;
        for i in 0..e.len() {
            k |= ((e[i] - base[i]) as u64) << self.shift[i];
        }
        k
    }

    /// Wrapping offset that adds `d` to every exponent of a key.
    pub fn offset(&self, d: &[i32]) -> u64 {
        let mut k = 0u64;
        for (&x, &s) in d.iter().zip(&self.shift) {
            k = k.wrapping_add((i64::from(x) as u64).wrapping_shl(s));
        }
        k
    }

    pub fn field_offset(&self, var: usize, amount: u64) -> u64 {
        amount << self.shift[var]
    }

    pub fn field(&self, k: u64, var: usize) -> u64 {
        (k >> self.shift[var]) & self.mask[var]
    }

    pub fn exponent(&self, k: u64, var: usize) -> i32 {
        self.field(k, var) as i32 + self.lo[var]
    }

    pub fn nvars(&self) -> usize {
        self.lo.len()
    }

    /// Moves the field of variable `i` to variable `perm[i]`; fields must have equal ranges.
    pub fn remap(&self, k: u64, perm: &[usize]) -> u64 {
        let mut out = 0u64;
        for (i, &q) in perm.iter().enumerate() {
            out |= self.field(k, i) << self.shift[q];
        }
        out
    }

    pub fn unpack(&self, k: u64) -> Exp {
        (0..self.lo.len()).map(|i| self.exponent(k, i)).collect()
    }

    /// Terms of `p` as keys; `None` if a coefficient exceeds `i64`.
    pub fn pack_poly(&self, p: &Poly) -> Option<Packed> {
        p.terms().iter().map(|(e, c)| Some((self.pack(e), c.to_i64()?))).collect()
    }

    /// Terms of `p` as wrapping offsets.
    pub fn offsets_of(&self, p: &Poly) -> Option<Packed> {
        p.terms().iter().map(|(e, c)| Some((self.offset(e), c.to_i64()?))).collect()
    }

    pub fn to_poly(&self, terms: Packed) -> Poly {
        Poly::from_sorted_terms(self.nvars(), terms.into_iter().map(|(k, c)| (self.unpack(k), Int::from(c))).collect())
    }
}

/// Sum of two sorted term lists.
pub(crate) fn merge(a: Packed, b: Packed) -> Option<Packed> {
    if a.is_empty() {
        return Some(b);
    }
    if b.is_empty() {
        return Some(a);
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (ka, ca) = a[i];
        let (kb, cb) = b[j];
        if ka < kb {
            out.push((ka, ca));
            i += 1;
        } else if kb < ka {
            out.push((kb, cb));
            j += 1;
        } else {
            let c = ca.checked_add(cb)?;
            if c != 0 {
                out.push((ka, c));
            }
            i += 1;
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some(out)
}

/// `f` shifted by the offset `d` and scaled by `c`; order is preserved.
fn shifted(f: &[(u64, i64)], d: u64, c: i64) -> Option<Packed> {
    f.iter().map(|&(k, a)| Some((k.wrapping_add(d), a.checked_mul(c)?))).collect()
}

/// Product of a sorted term list with a polynomial given as `(wrapping offset, coefficient)`
/// pairs, by a lazy k-way merge of the shifted copies.
pub(crate) fn mul_offsets(f: &[(u64, i64)], g: &[(u64, i64)]) -> Option<Packed> {
    if f.is_empty() {
        return Some(Vec::new());
    }
    if g.len() <= 2 {
        let mut out = Vec::new();
        for &(d, c) in g {
            out = merge(out, shifted(f, d, c)?)?;
        }
        return Some(out);
    }
    let mut heap: BinaryHeap<Reverse<(u64, u32, u32)>> =
        g.iter().enumerate().map(|(j, (d, _))| Reverse((f[0].0.wrapping_add(*d), j as u32, 0))).collect();
    let mut out: Packed = Vec::with_capacity(f.len() * 2);
    while let Some(Reverse((key, j, pos))) = heap.pop() {
        let (j, pos) = (j as usize, pos as usize);
        let c = f[pos].1.checked_mul(g[j].1)?;
        match out.last_mut() {
            Some(last) if last.0 == key => {
                last.1 = last.1.checked_add(c)?;
                if last.1 == 0 {
                    out.pop();
                }
            }
            _ => out.push((key, c)),
        }
        if pos + 1 < f.len() {
            heap.push(Reverse((f[pos + 1].0.wrapping_add(g[j].0), j as u32, pos as u32 + 1)));
        }
    }
    Some(out)
}

/// Outcome of [`div_linear`].
pub(crate) enum Division {
    Exact(Packed),
    Remainder,
    Overflow,
}

/// Exact quotient of a sorted term list by `x_v - c·x^e`, where `step` is the offset of `e`.
/// All quotient exponents must fit the packing.
pub(crate) fn div_linear(p: &Packing, f: Packed, v: usize, step: u64, c: i64) -> Division {
    if f.is_empty() {
        return Division::Exact(f);
    }
    let lo = f.iter().map(|t| p.field(t.0, v)).min().unwrap();
    let hi = f.iter().map(|t| p.field(t.0, v)).max().unwrap();
    let width = (hi - lo + 1) as usize;
    let total = f.len();
    // within one x_v-degree the order survives clearing that field
    let mut by_deg: Vec<Packed> = alloc::vec![Vec::new(); width];
    for (key, k) in f {
        let d = p.field(key, v);
        by_deg[(d - lo) as usize].push((key - p.field_offset(v, d), k));
    }
    let mut quot: Packed = Vec::with_capacity(total);
    let mut carry: Packed = Vec::new();
    for k in (0..width).rev() {
        let Some(qk) = merge(core::mem::take(&mut by_deg[k]), carry) else {
            return Division::Overflow;
        };
        if k == 0 {
            if !qk.is_empty() {
                return Division::Remainder;
            }
            break;
        }
        carry = match shifted(&qk, step, c) {
            Some(x) => x,
            None => return Division::Overflow,
        };
        let at = p.field_offset(v, lo + k as u64 - 1);
        quot.extend(qk.into_iter().map(|(key, a)| (key + at, a)));
    }
    quot.sort_unstable_by_key(|t| t.0);
    Division::Exact(quot)
}

/// Exact quotient of the ascending list `f` by a divisor given as offsets from its leading
/// term, in descending order (`e[0] = (0, leading coefficient)`), using a heap of
/// quotient-times-divisor products. Quotient terms come back in descending order, each keyed
/// by its product with the leading term; `admissible` rejects keys whose quotient exponent is
/// out of bounds.
pub(crate) fn div_exact(f: &[(u64, i64)], e: &[(u64, i64)], admissible: impl Fn(u64) -> bool) -> Division {
    let lc = i128::from(e[0].1);
    let mut quot: Packed = Vec::new();
    let mut heap: BinaryHeap<(u64, u32, u32)> = BinaryHeap::new();
    let mut next = f.len();
    loop {
        let fk = next.checked_sub(1).map(|k| f[k].0);
        let Some(key) = fk.max(heap.peek().map(|t| t.0)) else {
            break;
        };
        let mut c: i128 = 0;
        if fk == Some(key) {
            next -= 1;
            c = i128::from(f[next].1);
        }
        while heap.peek().is_some_and(|t| t.0 == key) {
            let (_, i, j) = heap.pop().unwrap();
            let (i, j) = (i as usize, j as usize);
            let Some(x) = c.checked_sub(i128::from(quot[i].1) * i128::from(e[j].1)) else {
                return Division::Overflow;
            };
            c = x;
            if j + 1 < e.len() {
                heap.push((quot[i].0.wrapping_add(e[j + 1].0), i as u32, j as u32 + 1));
            }
        }
        if c == 0 {
            continue;
        }
        if c % lc != 0 || !admissible(key) {
            return Division::Remainder;
        }
        let Ok(qc) = i64::try_from(c / lc) else {
            return Division::Overflow;
        };
        quot.push((key, qc));
        if e.len() > 1 {
            heap.push((key.wrapping_add(e[1].0), quot.len() as u32 - 1, 1));
        }
    }
    Division::Exact(quot)
}

/// Sorts keys and combines duplicates.
pub(crate) fn normalize(mut terms: Packed) -> Option<Packed> {
    terms.sort_unstable_by_key(|t| t.0);
    let mut out: Packed = Vec::with_capacity(terms.len());
    for (k, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 = last.1.checked_add(c)?,
            _ => out.push((k, c)),
        }
    }
    out.retain(|t| t.1 != 0);
    Some(out)
}

/// Sums many sorted term lists with logarithmic merge depth and bounded memory.
#[derive(Default)]
pub(crate) struct MergeAcc {
    slots: Vec<Option<Packed>>,
}

impl MergeAcc {
    pub fn push(&mut self, list: Packed) -> Option<()> {
        let mut carry = list;
        for slot in self.slots.iter_mut() {
            match slot.take() {
                Some(prev) => carry = merge(prev, carry)?,
                None => {
                    *slot = Some(carry);
                    return Some(());
                }
            }
        }
        self.slots.push(Some(carry));
        Some(())
    }

    pub fn finish(self) -> Option<Packed> {
        let mut out = Vec::new();
        for s in self.slots.into_iter().flatten() {
            out = merge(out, s)?;
        }
        Some(out)
    }
}
