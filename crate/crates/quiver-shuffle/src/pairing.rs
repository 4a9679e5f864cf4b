//! The pairing `⟨R, f_w⟩` as a constant term, its symmetric form, and the support predicate.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::Result;
use crate::field::RatFunc;
use crate::laurent::GradedLaurent;
use crate::latticegraph::edge_witness;
use crate::poly::{exp_zero, Exp, Poly};
use crate::quiver::{Quiver, Twist, ZetaKernel};
use crate::shuffle::ShuffleContext;
use crate::words::Word;

/// Truncated expansion of `∏_{a<b} 1/ζ_{i_a i_b}(z_a/z_b)` for one color sequence.
#[derive(Clone, Debug)]
pub struct SeriesCache {
    /// Largest weight drop included.
    drop: i64,
    terms: HashMap<Exp, Poly>,
}

/// `Σ_a a·v_a`: every factor `z_a/z_b` with `a < b` lowers it by `b - a`.
fn weight(v: &[i32]) -> i64 {
    v.iter().enumerate().map(|(a, &x)| a as i64 * x as i64).sum()
}

/// Exponent vector of `∏ (z_a/z_b)^{low_ab}`, the top-weight term of the product.
fn lowest_exponents(kernel: &ZetaKernel, colors: &[usize]) -> Exp {
    let n = colors.len();
    let mut e = exp_zero(n);
    for a in 0..n {
        for b in a + 1..n {
            let low = kernel.inverse_series(colors[a], colors[b], i32::MIN / 2).low;
            e[a] += low;
            e[b] -= low;
        }
    }
    e
}

/// Terms of the product with weight drop at most `drop`.
fn product_series(kernel: &ZetaKernel, colors: &[usize], drop: i64) -> HashMap<Exp, Poly> {
    let n = colors.len();
    let np = kernel.params().len();
    let mut cur: HashMap<Exp, (i64, Poly)> = HashMap::new();
    cur.insert(exp_zero(n), (0, Poly::one(np)));
    for a in 0..n {
        for b in a + 1..n {
            let gap = (b - a) as i64;
            let steps = (drop / gap) as i32;
            let low = kernel.inverse_series(colors[a], colors[b], i32::MIN / 2).low;
            let s = kernel.inverse_series(colors[a], colors[b], low + steps);
            let mut groups: HashMap<Exp, (i64, Vec<_>)> = HashMap::new();
            for (e, (d, c)) in &cur {
                for (k, sk) in s.coeffs.iter().enumerate() {
                    let nd = d + k as i64 * gap;
                    if nd > drop {
                        break;
                    }
                    if sk.is_zero() {
                        continue;
                    }
                    let x = low + k as i32;
                    let mut ne = e.clone();
                    ne[a] += x;
                    ne[b] -= x;
                    groups.entry(ne).or_insert_with(|| (nd, Vec::new())).1.push((c, sk));
                }
            }
            let next: HashMap<Exp, (i64, Poly)> = groups
                .into_iter()
                .map(|(e, (d, parts))| (e, (d, Poly::sum_of_products(np, &parts))))
                .filter(|(_, (_, c))| !c.is_zero())
                .collect();
            cur = next;
        }
    }
    cur.into_iter().map(|(e, (_, c))| (e, c)).collect()
}

/// Next free slot of each letter's vertex, as flat indices into `R`'s variables.
fn slot_assignment(r: &GradedLaurent, w: &Word) -> Vec<usize> {
    let degree = r.degree();
    let mut next: Vec<usize> = (0..degree.num_vertices()).map(|i| degree.offset(i)).collect();
    w.letters()
        .iter()
        .map(|l| {
            let s = next[l.vertex];
            next[l.vertex] += 1;
            s
        })
        .collect()
}

impl ShuffleContext {
    /// `pair`: the constant term of `z^{-d} R(z) / ∏_{a<b} ζ_{i_a i_b}(z_a/z_b)` expanded in
    /// `|z_1| ≪ … ≪ |z_n|`; zero when degrees differ.
    pub fn pair(&self, r: &GradedLaurent, w: &Word) -> Result<RatFunc> {
        self.check(r)?;
        let np = self.np();
        let nv = self.num_vertices();
        if w.degree(nv) != *r.degree() || r.is_zero() {
            return Ok(RatFunc::zero(np));
        }
        let n = w.len();
        let nz = r.nz();
        let colors = w.colors();
        let d = w.exps();
        let slots = slot_assignment(r, w);
        let low = lowest_exponents(self.kernel(), &colors);
        let w_low = weight(&low);
        // needed drops per monomial
        let mut needed = -1i64;
        for (e, _) in r.numerator().terms() {
            let u: Vec<i32> = (0..n).map(|a| d[a] - e[slots[a]]).collect();
            if u.iter().sum::<i32>() == 0 {
                needed = needed.max(w_low - weight(&u));
            }
        }
        if needed < 0 {
            return Ok(RatFunc::zero(np));
        }
        let value = self.pair_at(r, &colors, &d, &slots, nz, needed, true);
        if self.paranoid() {
            let wider = self.pair_at(r, &colors, &d, &slots, nz, needed + 5, false);
            assert_eq!(value, wider, "pairing: truncation is not stable");
        }
        RatFunc::new(value, r.denominator().clone())
    }

    #[allow(clippy::too_many_arguments)]
    fn pair_at(&self, r: &GradedLaurent, colors: &[usize], d: &[i32], slots: &[usize], nz: usize, drop: i64, cached: bool) -> Poly {
        let np = self.np();
        let n = colors.len();
        let fresh;
        let mut cache = self.series.borrow_mut();
        let table = if cached {
            let held = cache.get(colors).map(|c| c.drop);
            if held.map_or(true, |h| h < drop) {
                // grow with headroom so that slowly rising demands do not rebuild every time
                let target = held.map_or(drop, |h| drop.max(h + h / 4 + 1));
                cache.insert(colors.to_vec(), SeriesCache { drop: target, terms: product_series(self.kernel(), colors, target) });
            }
            &cache.get(colors).unwrap().terms
        } else {
            fresh = product_series(self.kernel(), colors, drop);
            &fresh
        };
        // terms sharing a z-monomial are contiguous; pair each parameter block at once
        let terms = r.numerator().terms();
        let mut parts = Vec::new();
        let mut start = 0;
        while start < terms.len() {
            let z = &terms[start].0[..nz];
            let end = start + terms[start..].iter().take_while(|t| &t.0[..nz] == z).count();
            let u: Exp = (0..n).map(|a| d[a] - z[slots[a]]).collect();
            if let Some(p) = table.get(&u) {
                let block = Poly::from_sorted_terms(np, terms[start..end].iter().map(|(e, c)| (Exp::from_slice(&e[nz..]), c.clone())).collect());
                parts.push((block, p));
            }
            start = end;
        }
        let refs: Vec<(&Poly, &Poly)> = parts.iter().map(|(a, b)| (a, *b)).collect();
        Poly::sum_of_products(np, &refs)
    }

    /// `pair_symmetric`: `⟨e_v, R′⟩` via the descending-contour formula, which is `pair` of
    /// `R′` against the reversed word with negated exponents.
    pub fn pair_symmetric(&self, v: &Word, r: &GradedLaurent) -> Result<RatFunc> {
        self.pair(r, &v.reverse_negate())
    }

    /// Extends `pair` linearly to formal combinations of words.
    pub fn pair_combination(&self, r: &GradedLaurent, combo: &[(RatFunc, Word)]) -> Result<RatFunc> {
        let mut acc = RatFunc::zero(self.np());
        for (c, w) in combo {
            acc = acc.add(&c.mul(&self.pair(r, w)?));
        }
        Ok(acc)
    }
}

/// `support_edge`: whether `⟨e_v, f_w⟩ ≠ 0` is allowed, i.e. whether some color-matching `σ`
/// and `c_{a,b} ≥ -#_{j_a j_b}` (plain) or `≥ 0` (prime) give
/// `k = d∘σ^{-1} + Σ c_{a,b}(e_a - e_b)` over the inversions of `σ^{-1}`.
pub fn support_edge(quiver: &Quiver, v: &Word, w: &Word, twist: Twist) -> bool {
    let n = v.len();
    if w.len() != n {
        return false;
    }
    let (ci, d) = (v.colors(), v.exps());
    let (cj, k) = (w.colors(), w.exps());
    if d.iter().sum::<i32>() != k.iter().sum::<i32>() {
        return false;
    }
    for pi in crate::laurent::permutations(n) {
        if (0..n).any(|a| ci[pi[a]] != cj[a]) {
            continue;
        }
        let lower = |a: usize, b: usize| match twist {
            Twist::Plain => -quiver.arrow_count(cj[a], cj[b], false),
            Twist::Prime => 0,
        };
        if edge_witness(&d, &k, &pi, lower).is_some() {
            return true;
        }
    }
    false
}
